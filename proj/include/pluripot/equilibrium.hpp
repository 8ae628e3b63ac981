#pragma once

#include "errors.hpp"
#include "extremal.hpp"
#include "geometry.hpp"
#include "numeric.hpp"
#include "orthonormal.hpp"
#include "poly_basis.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace pluripot {

struct DerivativeBundle {
    VectorXcd b;  // q_h(z)
    MatrixXcd D;  // D(h, i) = d q_h / d z_i
};

namespace detail {

inline MatrixXcd adjugate(const MatrixXcd& A) {
    const auto n = A.rows();
    MatrixXcd adj(n, n);
    if (n == 1) {
        adj(0, 0) = 1.0;
    } else if (n == 2) {
        adj << A(1, 1), -A(0, 1), -A(1, 0), A(0, 0);
    } else if (n == 3) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
                adj(i, j) = A(r0, c0) * A(r1, c1) - A(r0, c1) * A(r1, c0);
            }
    } else {
        throw DomainError("adjugate density formula supports n <= 3");
    }
    return adj;
}

}  // namespace detail

// [det(D^H D) - b^H D adj(D^H D) D^H b / |b|^2] / (2k|b|^2)^n
inline double density_adjugate(const DerivativeBundle& x, int k) {
    const auto n = x.D.cols();
    const double b2 = x.b.squaredNorm();
    MatrixXcd A = x.D.adjoint() * x.D;
    VectorXcd c = x.D.adjoint() * x.b;
    cplx det = A.determinant();
    cplx rank1 = c.dot(detail::adjugate(A) * c);
    double num = (det - rank1 / b2).real();
    return num / std::pow(2.0 * k * b2, static_cast<double>(n));
}

struct DensityValue {
    double value = 0.0;
    bool fallback = false;  // D rank deficient, adjugate path used
};

// det(R^H R) times the squared norm of the component of b/|b| orthogonal to
// the columns of D, divided by (2k|b|^2)^n.
inline DensityValue density_qr(const DerivativeBundle& x, int k) {
    const auto N = x.D.rows(), n = x.D.cols();
    const double b2 = x.b.squaredNorm();
    if (N < n) return {density_adjugate(x, k), true};
    Eigen::HouseholderQR<MatrixXcd> qr(x.D);
    MatrixXcd R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    double rmax = R.cwiseAbs().maxCoeff();
    double tol = std::max<double>(N, n) * std::numeric_limits<double>::epsilon() * rmax;
    double detS = 1.0;
    for (Eigen::Index l = 0; l < n; ++l) {
        double d = std::abs(R(l, l));
        if (!(d > tol) || rmax == 0.0) return {density_adjugate(x, k), true};
        detS *= d * d;
    }
    VectorXcd c = qr.householderQ().adjoint() * x.b;
    double resid = c.tail(N - n).squaredNorm();
    return {detS * (resid / b2) / std::pow(2.0 * k * b2, static_cast<double>(n)), false};
}

// (1/(2k|b|^2)) (D^H D - D^H b b^H D / |b|^2), the complex Hessian of (1/2k) log B_k.
inline MatrixXcd density_hessian(const DerivativeBundle& x, int k) {
    const double b2 = x.b.squaredNorm();
    VectorXcd c = x.D.adjoint() * x.b;
    return (x.D.adjoint() * x.D - c * c.adjoint() / b2) / (2.0 * k * b2);
}

// Orthonormal values and first derivatives at the given targets, pushed
// through the stored triangular factors.
inline std::vector<DerivativeBundle> derivative_bundles(const OrthoState& s, const MatrixXcd& pts,
                                                        Stage stage = Stage::plain) {
    const double sq = std::sqrt(static_cast<double>(s.M()));
    MatrixXcd W = sq * onb_at<cplx>(s, pts, stage);
    auto dB = eval_basis_derivatives<cplx>(s.basis, s.degree, pts);
    std::vector<MatrixXcd> dW;
    for (const auto& d : dB) dW.push_back(sq * evaluate_onb(s, d, stage));
    std::vector<DerivativeBundle> out(pts.rows());
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        out[i].b = W.row(i).transpose();
        out[i].D.resize(W.cols(), static_cast<Eigen::Index>(dW.size()));
        for (std::size_t m = 0; m < dW.size(); ++m) out[i].D.col(static_cast<Eigen::Index>(m)) = dW[m].row(i).transpose();
    }
    return out;
}

struct DensityField {
    int degree = 0;
    VectorXd raw, restricted;
    std::optional<VectorXd> normalized;
    double cell_area = 0.0;
    int fallbacks = 0;
};

inline DensityField equilibrium_density(const OrthoState& s, const EvalGrid& grid, bool normalize,
                                        Stage stage = Stage::plain) {
    if (!grid.real()) throw GridConfigError("equilibrium densities are evaluated on real grids only");
    if (s.degree < 1) throw DomainError("equilibrium density needs k >= 1");
    DensityField f;
    f.degree = s.degree;
    const Eigen::Index L = grid.size(), blk = 1024;
    f.raw.resize(L);
    for (Eigen::Index r0 = 0; r0 < L; r0 += blk) {
        Eigen::Index nr = std::min(blk, L - r0);
        auto bundles = derivative_bundles(s, grid.points.middleRows(r0, nr), stage);
        for (Eigen::Index i = 0; i < nr; ++i) {
            auto v = density_qr(bundles[i], s.degree);
            f.raw(r0 + i) = v.value;
            f.fallbacks += v.fallback;
        }
    }
    f.restricted = f.raw;
    for (Eigen::Index i = 0; i < L; ++i)
        if (!grid.inside[i]) f.restricted(i) = 0.0;
    double area = 1.0;
    for (const auto& a : grid.spec.axes) area *= (a.max - a.min) / (a.count - 1);
    f.cell_area = area;
    if (normalize) {
        double mass = compensated_sum(f.restricted) * area;
        if (!(mass > 0.0)) throw GridConfigError("no density mass on grid points inside the set");
        f.normalized = f.restricted / mass;
    }
    return f;
}

struct FDDensity {
    double value = 0.0;
    bool precision_warning = false;
};

using RealFunction = std::function<double(const VectorXcd&)>;

namespace detail {

inline double fd_det(const RealFunction& v, const VectorXcd& z, double h) {
    const auto n = z.size();
    auto shifted = [&](int a, double da, int b, double db) {
        VectorXcd w = z;
        // real coordinate 2i is Re z_i, 2i + 1 is Im z_i
        auto bump = [&](int c, double d) { w(c / 2) += c % 2 == 0 ? cplx(d, 0.0) : cplx(0.0, d); };
        if (a >= 0) bump(a, da);
        if (b >= 0) bump(b, db);
        return v(w);
    };
    const double f0 = v(z);
    const int m = static_cast<int>(2 * n);
    MatrixXd H(m, m);
    for (int a = 0; a < m; ++a) {
        H(a, a) = (shifted(a, h, -1, 0) - 2.0 * f0 + shifted(a, -h, -1, 0)) / (h * h);
        for (int b = a + 1; b < m; ++b) {
            H(a, b) = H(b, a) = (shifted(a, h, b, h) - shifted(a, h, b, -h) - shifted(a, -h, b, h) +
                                 shifted(a, -h, b, -h)) /
                                (4.0 * h * h);
        }
    }
    MatrixXcd C(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            double xx = H(2 * i, 2 * j), yy = H(2 * i + 1, 2 * j + 1);
            double xy = H(2 * i, 2 * j + 1), yx = H(2 * i + 1, 2 * j);
            C(i, j) = 0.25 * cplx(xx + yy, xy - yx);
        }
    return C.determinant().real();
}

}  // namespace detail

// det of [d^2 v / dz_i dzbar_j] by central differences; the step-halving
// comparison flags results dominated by cancellation.
inline FDDensity fd_hessian_density(const RealFunction& v, const VectorXcd& z, double step = 1e-4) {
    FDDensity r;
    r.value = detail::fd_det(v, z, step);
    double half = detail::fd_det(v, z, 0.5 * step);
    double scale = std::max(std::abs(r.value), std::abs(half));
    r.precision_warning = scale > 0.0 && std::abs(r.value - half) > 1e-2 * scale;
    return r;
}

struct FeketeSelection {
    std::vector<Eigen::Index> indices;
    int degree = 0;
    double log_abs_det = 0.0;  // of the selected Vandermonde rows in the state basis
};

// Greedy row selection on the orthonormalized Vandermonde: each step takes the
// row with the largest residual norm (lowest index on ties) and projects it
// out of the others, i.e. column pivoting on the transpose.
inline FeketeSelection afp_extract(const OrthoState& s) {
    const Eigen::Index M = s.M(), N = s.N();
    MatrixXd X = s.Q;
    FeketeSelection f;
    f.degree = s.degree;
    std::vector<char> used(M, 0);
    double logdet = 0.0;
    for (Eigen::Index step = 0; step < N; ++step) {
        VectorXd r = X.rowwise().squaredNorm();
        Eigen::Index best = -1;
        double bv = -1.0;
        for (Eigen::Index i = 0; i < M; ++i)
            if (!used[i] && r(i) > bv) {
                bv = r(i);
                best = i;
            }
        if (best < 0 || !(bv > 0.0)) throw NonUnisolventError("mesh is not determining for the requested degree");
        used[best] = 1;
        f.indices.push_back(best);
        double nrm = std::sqrt(bv);
        logdet += std::log(nrm);
        VectorXd q = X.row(best).transpose() / nrm;
        VectorXd c = X * q;
        X.noalias() -= c * q.transpose();
    }
    for (Eigen::Index j = 0; j < N; ++j) logdet += std::log(std::abs(s.R1(j, j))) + std::log(std::abs(s.R2(j, j)));
    f.log_abs_det = logdet;
    return f;
}

inline FeketeSelection afp_extract(const Mesh& mesh, int k) { return afp_extract(build_ortho(mesh, k)); }

// Moments of a discrete probability measure against the Chebyshev-adapted
// basis of degree k_mom.
inline VectorXd discrete_measure_moments(const MatrixXd& points, const VectorXd& weights, int k_mom,
                                         const BasisSpec& basis) {
    if (k_mom > 6) throw DomainError("moment degree is limited to 6");
    MatrixXd V = eval_basis<double>(basis, k_mom, points);
    VectorXd m(V.cols());
    for (Eigen::Index j = 0; j < V.cols(); ++j) {
        CompensatedSum acc;
        for (Eigen::Index i = 0; i < V.rows(); ++i) acc.add(weights(i) * V(i, j));
        m(j) = acc.value();
    }
    return m;
}

// (B_k / N_k) mu_k: weight sigma_i / M at mesh point i.
inline VectorXd bergman_measure_weights(const OrthoState& s) {
    return bergman_weights(s) / static_cast<double>(s.M());
}

}  // namespace pluripot
