#pragma once

#include "errors.hpp"
#include "geometry.hpp"
#include "orthonormal.hpp"
#include "poly_basis.hpp"
#include "rho.hpp"

#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace pluripot {

struct GramSpectrum {
    int degree = 0;
    VectorXd sigma;  // singular values of V / sqrt(M), descending
    BasisKind basis = BasisKind::chebyshev;
};

inline GramSpectrum gram_spectrum(const MatrixXd& points, int k, const BasisSpec& basis) {
    MatrixXd V = eval_basis<double>(basis, k, points) / std::sqrt(static_cast<double>(points.rows()));
    GramSpectrum g{k, {}, basis.kind};
    if (V.rows() > V.cols()) {
        // Same singular values as V, at N x N cost.
        MatrixXd R = thin_qr(V, false).R;
        g.sigma = Eigen::JacobiSVD<MatrixXd>(R).singularValues();
    } else {
        g.sigma = Eigen::JacobiSVD<MatrixXd>(V).singularValues();
    }
    return g;
}

enum class GramMethod { qr, svd };

// log det G_k with G = V^T V / M in the given basis. The QR path sums
// log |R_jj|, which keeps relative accuracy for the small factors that an SVD
// resolves only to absolute accuracy. Returns -inf when M < N_k.
inline double gram_log_det(const MatrixXd& points, int k, const BasisSpec& basis, GramMethod method = GramMethod::qr) {
    const auto N = static_cast<Eigen::Index>(dimension(static_cast<int>(points.cols()), k));
    if (points.rows() < N) return -std::numeric_limits<double>::infinity();
    VectorXd f;
    if (method == GramMethod::svd) {
        f = gram_spectrum(points, k, basis).sigma;
    } else {
        MatrixXd V = eval_basis<double>(basis, k, points) / std::sqrt(static_cast<double>(points.rows()));
        f = thin_qr(V, false).R.diagonal().cwiseAbs();
    }
    if (!(f.minCoeff() >= 1e-150))
        throw IllConditionedError("Gram factor below 1e-150 at degree " + std::to_string(k));
    double acc = 0.0;
    for (Eigen::Index j = 0; j < f.size(); ++j) acc += std::log(f(j));
    return 2.0 * acc;
}

inline double td_exponent(int n, int k) {
    return (n + 1.0) / (2.0 * n * k * static_cast<double>(dimension(n, k)));
}

// (det G_k)^{(n+1)/(2 n k N_k)} in the given basis.
inline double gram_det_exponent(const Mesh& mesh, int k, const BasisSpec& basis, GramMethod method = GramMethod::qr) {
    if (k == 0) return 1.0;
    double ld = gram_log_det(mesh.points, k, basis, method);
    return std::exp(td_exponent(static_cast<int>(mesh.points.cols()), k) * ld);
}

// Exact discrete value of the Vandermonde-integral formula for det G: the
// mean over all ordered N_k-tuples of mesh points of |det vdm|^2 / N_k!.
inline double brute_force_gram_integral(const MatrixXd& points, int k, const BasisSpec& basis = BasisSpec::monomial()) {
    const int n = static_cast<int>(points.cols());
    const auto N = static_cast<int>(dimension(n, k));
    const auto M = static_cast<std::uint64_t>(points.rows());
    if (N * std::log10(static_cast<double>(M)) > 7.0 + 1e-12)
        throw FeasibilityError("brute-force Gram sum needs M^N <= 1e7");
    if (static_cast<std::uint64_t>(N) > M) return 0.0;
    MatrixXd V = eval_basis<double>(basis, k, points);
    std::vector<std::uint64_t> t(N, 0);
    MatrixXd A(N, N);
    double total = 0.0;
    double fact = std::tgamma(N + 1.0);
    while (true) {
        bool distinct = true;
        for (int a = 0; a < N && distinct; ++a)
            for (int b = a + 1; b < N; ++b)
                if (t[a] == t[b]) {
                    distinct = false;
                    break;
                }
        // Tuples with a repeated point have a zero determinant.
        if (distinct) {
            for (int a = 0; a < N; ++a) A.row(a) = V.row(static_cast<Eigen::Index>(t[a]));
            double d = A.partialPivLu().determinant();
            total += d * d;
        }
        int pos = N - 1;
        while (pos >= 0 && ++t[pos] == M) t[pos--] = 0;
        if (pos < 0) break;
    }
    return total / fact / std::pow(static_cast<double>(M), N);
}

// Log of the Gram determinant expressed in the monomial basis.
inline double monomial_log_det(const MatrixXd& points, int k, const BasisSpec& basis, GramMethod method = GramMethod::qr) {
    return gram_log_det(points, k, basis, method) - 2.0 * log_abs_leading_det(basis, k);
}

class CalibrationCache {
public:
    // log det G_k of the reference square mesh in the monomial basis.
    double reference_log_det(int k) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(k);
        if (it != cache_.end()) return it->second;
        Mesh m = mesh_square_cl(k);
        double v = monomial_log_det(m.points, k, BasisSpec::chebyshev(AffineMap::identity(2)));
        cache_.emplace(k, v);
        return v;
    }

    static CalibrationCache& global() {
        static CalibrationCache c;
        return c;
    }

private:
    std::mutex mu_;
    std::map<int, double> cache_;
};

constexpr double reference_square_td = 0.5;

// delta([-1,1]^2) / gram_det_exponent(square CL mesh, k, chebyshev).
inline double calibration_factor(int k) {
    if (k < 1) throw DomainError("calibration needs k >= 1");
    Mesh m = mesh_square_cl(k);
    return reference_square_td / gram_det_exponent(m, k, BasisSpec::chebyshev(AffineMap::identity(2)));
}

inline Mesh td_mesh(const CompactSet& set, int k) {
    return std::visit(
        [&](const auto& s) -> Mesh {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Disk>) {
                Mesh m = mesh_disk(k, DiskVariant::td_polar);
                for (Eigen::Index i = 0; i < m.size(); ++i)
                    for (int c = 0; c < 2; ++c) m.points(i, c) = s.center[c] + s.radius * m.points(i, c);
                return m;
            } else if constexpr (std::is_same_v<S, Box>) {
                Mesh m = mesh_square_cl(k);
                if (s.lo == std::vector<double>{-1.0, -1.0} && s.hi == std::vector<double>{1.0, 1.0}) return m;
                AffineMap inv{s.lo, s.hi};
                for (Eigen::Index i = 0; i < m.size(); ++i)
                    for (int c = 0; c < 2; ++c) m.points(i, c) = inv.unapply(c, m.points(i, c));
                return m;
            } else {
                return default_mesh(set, k);
            }
        },
        set.shape);
}

// Triangle-orthogonal basis for the simplex (the tensor Chebyshev basis is
// badly conditioned there), Chebyshev on the bounding box otherwise.
inline BasisSpec td_basis(const CompactSet& set, const Mesh& mesh) {
    AffineMap box = bounding_affine_map(mesh.points);
    if (std::holds_alternative<Simplex>(set.shape)) return BasisSpec::koornwinder(box);
    return BasisSpec::chebyshev(box);
}

inline double td_estimate(const CompactSet& set, int k) {
    if (k < 1) throw DomainError("transfinite diameter estimates need k >= 1");
    Mesh m = td_mesh(set, k);
    double ld = monomial_log_det(m.points, k, td_basis(set, m));
    double ref = CalibrationCache::global().reference_log_det(k);
    return reference_square_td * std::exp(td_exponent(2, k) * (ld - ref));
}

inline std::optional<double> td_reference(const CompactSet& set) {
    return std::visit(
        [](const auto& s) -> std::optional<double> {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Disk>) return s.radius / std::sqrt(2.0 * std::exp(1.0));
            else if constexpr (std::is_same_v<S, Simplex>) return 1.0 / (2.0 * std::exp(1.0));
            else if constexpr (std::is_same_v<S, Box>)
                return std::sqrt((s.hi[0] - s.lo[0]) / 4.0 * (s.hi[1] - s.lo[1]) / 4.0);
            else return std::nullopt;
        },
        set.shape);
}

struct TDEstimate {
    std::vector<int> degrees;
    std::vector<double> raw;
    std::vector<int> accelerated_rows;
    std::vector<double> accelerated;
    std::optional<double> reference;
    std::vector<double> abs_err, rel_err;  // of the raw estimates
    std::vector<double> accelerated_abs_err;
    double wall_time_s = 0.0;
};

inline TDEstimate td_sequence(const CompactSet& set, const std::vector<int>& degrees,
                              std::optional<RhoSelector> accel = std::nullopt) {
    auto t0 = std::chrono::steady_clock::now();
    TDEstimate r;
    r.degrees = degrees;
    for (int k : degrees) r.raw.push_back(td_estimate(set, k));
    if (accel && degrees.size() >= 2) {
        std::vector<double> nodes(degrees.begin(), degrees.end());
        auto sel = select(rho_scalar(r.raw, nodes), *accel);
        r.accelerated_rows = sel.rows;
        r.accelerated = sel.values;
    }
    r.reference = td_reference(set);
    if (r.reference) {
        for (double v : r.raw) {
            r.abs_err.push_back(std::abs(v - *r.reference));
            r.rel_err.push_back(std::abs(v - *r.reference) / *r.reference);
        }
        for (double v : r.accelerated) r.accelerated_abs_err.push_back(std::abs(v - *r.reference));
    }
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace pluripot
