#pragma once

#include "errors.hpp"
#include "geometry.hpp"
#include "numeric.hpp"
#include "poly_basis.hpp"

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

namespace pluripot {

struct ThinQR {
    MatrixXd Q;  // M x N, orthonormal columns
    MatrixXd R;  // N x N upper triangular, positive diagonal
};

inline ThinQR thin_qr(const MatrixXd& A, bool want_q = true) {
    const Eigen::Index M = A.rows(), N = A.cols();
    if (M < N) throw NonUnisolventError("QR needs at least as many rows as columns");
    Eigen::HouseholderQR<MatrixXd> qr(A);
    ThinQR f;
    f.R = qr.matrixQR().topRows(N).triangularView<Eigen::Upper>();
    if (want_q) f.Q = qr.householderQ() * MatrixXd::Identity(M, N);
    for (Eigen::Index j = 0; j < N; ++j)
        if (f.R(j, j) < 0) {
            f.R.row(j) *= -1.0;
            if (want_q) f.Q.col(j) *= -1.0;
        }
    return f;
}

// Cheap lower bound on the 2-norm condition number of a triangular matrix.
inline double triangular_condition_estimate(const MatrixXd& R) {
    auto d = R.diagonal().cwiseAbs();
    double lo = d.minCoeff();
    return lo > 0 ? d.maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

inline void require_full_rank(const MatrixXd& R, Eigen::Index rows, const char* what) {
    auto d = R.diagonal().cwiseAbs();
    double tol = std::max<double>(rows, R.cols()) * std::numeric_limits<double>::epsilon() * d.maxCoeff();
    for (Eigen::Index j = 0; j < d.size(); ++j)
        if (!(d(j) > tol))
            throw NonUnisolventError(std::string(what) + ": numerical rank below " + std::to_string(R.cols()) +
                                     " (column " + std::to_string(j + 1) + ")");
}

struct OrthoState {
    int degree = 0;
    BasisSpec basis;
    MatrixXd R1, R2, Q;
    double cond_R1 = 1.0, cond_R2 = 1.0;

    bool weighted = false;
    VectorXd sigma;
    MatrixXd Rw, Qw;

    std::vector<std::string> warnings;

    Eigen::Index M() const { return Q.rows(); }
    Eigen::Index N() const { return Q.cols(); }
};

// Twice-QR: V = Q1 R1, V R1^{-1} = Q R2, so V = Q R2 R1.
inline OrthoState orthonormalize(const MatrixXd& V) {
    OrthoState s;
    if (V.rows() < V.cols()) throw NonUnisolventError("mesh has fewer points than the polynomial space dimension");
    ThinQR a = thin_qr(V, false);
    require_full_rank(a.R, V.rows(), "first QR");
    MatrixXd U = a.R.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(V);
    ThinQR b = thin_qr(U);
    require_full_rank(b.R, V.rows(), "second QR");
    s.R1 = std::move(a.R);
    s.R2 = std::move(b.R);
    s.Q = std::move(b.Q);
    s.cond_R1 = triangular_condition_estimate(s.R1);
    s.cond_R2 = triangular_condition_estimate(s.R2);
    if (s.cond_R1 > 1e15) s.warnings.push_back("R1 condition estimate exceeds 1e15");
    if (s.cond_R2 > 1e15) s.warnings.push_back("R2 condition estimate exceeds 1e15");
    return s;
}

inline BasisSpec default_basis(const Mesh& mesh) { return BasisSpec::chebyshev(bounding_affine_map(mesh.points)); }

inline OrthoState build_ortho(const Mesh& mesh, int k, const BasisSpec& basis) {
    MatrixXd V = eval_basis<double>(basis, k, mesh.points);
    OrthoState s = orthonormalize(V);
    s.degree = k;
    s.basis = basis;
    return s;
}

inline OrthoState build_ortho(const Mesh& mesh, int k) { return build_ortho(mesh, k, default_basis(mesh)); }

namespace detail {

inline MatrixXd right_solve(const MatrixXd& R, const MatrixXd& B) {
    return R.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(B);
}

// B R^{-1} for complex B and real R, one real solve per part.
inline MatrixXcd right_solve(const MatrixXd& R, const MatrixXcd& B) {
    MatrixXd re = right_solve(R, MatrixXd(B.real()));
    MatrixXd im = right_solve(R, MatrixXd(B.imag()));
    MatrixXcd out(B.rows(), B.cols());
    out.real() = re;
    out.imag() = im;
    return out;
}

}  // namespace detail

enum class Stage { plain, weighted };

// W = WT R1^{-1} R2^{-1} (and Rw^{-1} for the weighted stage); the orthonormal
// polynomial values are sqrt(M) W.
template <class Derived>
auto evaluate_onb(const OrthoState& s, const Eigen::MatrixBase<Derived>& WT, Stage stage = Stage::plain) {
    using T = typename Derived::Scalar;
    Mat<T> W = detail::right_solve(s.R2, detail::right_solve(s.R1, Mat<T>(WT)));
    if (stage == Stage::weighted) {
        if (!s.weighted) throw DomainError("weighted stage requested before weighted_orthonormalize");
        W = detail::right_solve(s.Rw, W);
    }
    return W;
}

template <class T>
Mat<T> onb_at(const OrthoState& s, const Mat<T>& points, Stage stage = Stage::plain) {
    return evaluate_onb(s, eval_basis<T>(s.basis, s.degree, points), stage);
}

// B_k(zeta_i) = M sum_j |W(i,j)|^2.
template <class Derived>
VectorXd bergman(const Eigen::MatrixBase<Derived>& W, Eigen::Index M) {
    VectorXd out(W.rows());
    parallel_for(static_cast<std::size_t>(W.rows()), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t ii = lo; ii < hi; ++ii) {
            auto i = static_cast<Eigen::Index>(ii);
            CompensatedSum acc;
            for (Eigen::Index j = 0; j < W.cols(); ++j) acc.add(std::norm(W(i, j)));
            out(i) = static_cast<double>(M) * acc.value();
        }
    });
    return out;
}

inline VectorXd bergman(const OrthoState& s, const MatrixXcd& W) { return bergman(W, s.M()); }

// (1/M) sum_h w_h |K(zeta_i, z_h)| with K the reproducing kernel of the
// selected stage; w_h = 1 (plain) or sigma_h (weighted).
inline VectorXd kernel_l1(const OrthoState& s, const MatrixXcd& W, Stage stage = Stage::plain) {
    const MatrixXd& B = stage == Stage::weighted ? s.Qw : s.Q;
    VectorXd rw = VectorXd::Ones(s.M());
    if (stage == Stage::weighted) rw = s.sigma.cwiseSqrt();
    const Eigen::Index L = W.rows(), blk = 64;
    VectorXd out(L);
    const Eigen::Index nblk = (L + blk - 1) / blk;
    parallel_for(static_cast<std::size_t>(nblk), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t b = lo; b < hi; ++b) {
            Eigen::Index r0 = static_cast<Eigen::Index>(b) * blk, nr = std::min(blk, L - r0);
            MatrixXd Kre = W.middleRows(r0, nr).real() * B.transpose();
            MatrixXd Kim = W.middleRows(r0, nr).imag() * B.transpose();
            for (Eigen::Index i = 0; i < nr; ++i) {
                CompensatedSum acc;
                for (Eigen::Index h = 0; h < s.M(); ++h) acc.add(rw(h) * std::hypot(Kre(i, h), Kim(i, h)));
                out(r0 + i) = acc.value();
            }
        }
    });
    return out;
}

inline VectorXd bergman_weights(const OrthoState& s) {
    VectorXd sigma(s.M());
    const double f = static_cast<double>(s.M()) / static_cast<double>(s.N());
    for (Eigen::Index i = 0; i < s.M(); ++i) {
        CompensatedSum acc;
        for (Eigen::Index j = 0; j < s.N(); ++j) acc.add(s.Q(i, j) * s.Q(i, j));
        sigma(i) = f * acc.value();
    }
    return sigma;
}

inline OrthoState weighted_orthonormalize(OrthoState s) {
    s.sigma = bergman_weights(s);
    for (Eigen::Index i = 0; i < s.M(); ++i)
        if (!(s.sigma(i) >= 1e-300)) throw DegenerateWeightError("Bergman weight vanishes at mesh point " + std::to_string(i));
    MatrixXd Vw = s.sigma.cwiseSqrt().asDiagonal() * s.Q;
    ThinQR f = thin_qr(Vw);
    require_full_rank(f.R, Vw.rows(), "weighted QR");
    s.Rw = std::move(f.R);
    s.Qw = std::move(f.Q);
    s.weighted = true;
    if (triangular_condition_estimate(s.Rw) > 1e15) s.warnings.push_back("Rw condition estimate exceeds 1e15");
    return s;
}

// Weighted orthonormal values at the mesh points: sqrt(M) sigma_i^{-1/2} Qw(i,j).
inline MatrixXd weighted_mesh_values(const OrthoState& s) {
    return std::sqrt(static_cast<double>(s.M())) * s.sigma.cwiseSqrt().cwiseInverse().asDiagonal() * s.Qw;
}

}  // namespace pluripot
