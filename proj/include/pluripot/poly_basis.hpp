#pragma once

#include "errors.hpp"
#include "numeric.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace pluripot {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

struct MultiIndex {
    std::vector<int> e;

    int degree() const { return std::accumulate(e.begin(), e.end(), 0); }
    int size() const { return static_cast<int>(e.size()); }

    // Graded lex: total degree first, then the first differing exponent.
    friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
        if (auto c = a.degree() <=> b.degree(); c != 0) return c;
        return a.e <=> b.e;
    }
    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
    if (r > n) return 0;
    r = std::min(r, n - r);
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= r; ++i) {
        acc = acc * (n - r + i) / i;
        if (acc > std::numeric_limits<std::uint64_t>::max())
            throw SizeError("binomial coefficient overflows 64 bits");
    }
    return static_cast<std::uint64_t>(acc);
}

inline std::uint64_t dimension(int n, int k) {
    if (n < 1 || k < 0) throw DomainError("dimension needs n >= 1 and k >= 0");
    return binomial(static_cast<std::uint64_t>(n) + k, n);
}

// Number of multi-indices of exactly total degree d in n variables.
inline std::uint64_t block_size(int n, int d) {
    return d < 0 ? 0 : binomial(static_cast<std::uint64_t>(n - 1) + d, n - 1);
}

inline MultiIndex graded_lex_index(std::uint64_t i, int n) {
    if (i < 1) throw DomainError("graded lex ranks start at 1");
    if (n < 1) throw DomainError("dimension must be positive");
    std::uint64_t r = i - 1;
    int d = 0;
    while (r >= block_size(n, d)) {
        r -= block_size(n, d);
        ++d;
    }
    MultiIndex a{std::vector<int>(n, 0)};
    int left = d;
    for (int j = 0; j < n - 1; ++j) {
        int v = 0;
        // Entries with a_j = v come before those with a_j = v + 1.
        while (true) {
            std::uint64_t c = block_size(n - 1 - j, left - v);
            if (r < c) break;
            r -= c;
            ++v;
        }
        a.e[j] = v;
        left -= v;
    }
    a.e[n - 1] = left;
    return a;
}

inline std::uint64_t graded_lex_rank(const MultiIndex& a) {
    int n = a.size(), d = a.degree();
    std::uint64_t r = d > 0 ? dimension(n, d - 1) : 0;
    int left = d;
    for (int j = 0; j < n - 1; ++j) {
        for (int v = 0; v < a.e[j]; ++v) r += block_size(n - 1 - j, left - v);
        left -= a.e[j];
    }
    return r + 1;
}

inline std::vector<MultiIndex> multi_indices(int n, int k) {
    std::uint64_t N = dimension(n, k);
    std::vector<MultiIndex> out;
    out.reserve(N);
    for (std::uint64_t i = 1; i <= N; ++i) out.push_back(graded_lex_index(i, n));
    return out;
}

struct AffineMap {
    std::vector<double> lo, hi;

    static AffineMap identity(int n) { return {std::vector<double>(n, -1.0), std::vector<double>(n, 1.0)}; }

    int dim() const { return static_cast<int>(lo.size()); }
    double scale(int i) const { return 2.0 / (hi[i] - lo[i]); }
    double center(int i) const { return 0.5 * (lo[i] + hi[i]); }

    template <class T>
    T apply(int i, T z) const { return scale(i) * (z - center(i)); }
    template <class T>
    T unapply(int i, T p) const { return p / scale(i) + center(i); }
};

inline AffineMap bounding_affine_map(const MatrixXd& pts) {
    if (pts.rows() < 2) throw FlatMeshError("bounding map needs at least two points");
    AffineMap m;
    for (Eigen::Index c = 0; c < pts.cols(); ++c) {
        double a = pts.col(c).minCoeff(), b = pts.col(c).maxCoeff();
        if (!(a < b)) throw FlatMeshError("coordinate " + std::to_string(c) + " is constant on the mesh");
        m.lo.push_back(a);
        m.hi.push_back(b);
    }
    return m;
}

enum class BasisKind { monomial, chebyshev, koornwinder };
enum class EvalMode { recurrence, closed_form };

// koornwinder is the orthogonal basis of the triangle {u >= 0, u1 + u2 <= 1}
// where u = (P(z) + 1)/2; it is only defined for n = 2.
struct BasisSpec {
    BasisKind kind = BasisKind::chebyshev;
    AffineMap map = AffineMap::identity(2);

    static BasisSpec monomial(int n = 2) { return {BasisKind::monomial, AffineMap::identity(n)}; }
    static BasisSpec chebyshev(AffineMap m) { return {BasisKind::chebyshev, std::move(m)}; }
    static BasisSpec koornwinder(AffineMap m) { return {BasisKind::koornwinder, std::move(m)}; }
};

namespace detail {

template <class T>
double real_part(const T& x) {
    if constexpr (std::is_same_v<T, cplx>) return x.real();
    else return x;
}

template <class T>
double imag_part(const T& x) {
    if constexpr (std::is_same_v<T, cplx>) return x.imag();
    else return 0.0;
}

// Values (and optionally first derivatives) of the univariate factors
// T_0..T_k or 1, x, .., x^k at one coordinate.
template <class T>
void univariate(BasisKind kind, EvalMode mode, T x, int k, T* v, T* dv) {
    v[0] = T(1);
    if (dv) dv[0] = T(0);
    if (k == 0) return;
    if (kind == BasisKind::monomial) {
        for (int h = 1; h <= k; ++h) {
            v[h] = v[h - 1] * x;
            if (dv) dv[h] = double(h) * v[h - 1];
        }
        return;
    }
    if (mode == EvalMode::closed_form) {
        constexpr double tol = 1e-12;
        double xr = real_part(x);
        if (std::abs(imag_part(x)) > tol || std::abs(xr) > 1.0 + tol)
            throw DomainError("closed-form Chebyshev evaluation needs mapped points in [-1,1]");
        double th = std::acos(std::clamp(xr, -1.0, 1.0));
        for (int h = 1; h <= k; ++h) v[h] = T(std::cos(h * th));
        if (dv) {
            dv[1] = T(1);
            for (int h = 1; h < k; ++h) dv[h + 1] = 2.0 * v[h] + 2.0 * x * dv[h] - dv[h - 1];
        }
        return;
    }
    v[1] = x;
    if (dv) dv[1] = T(1);
    for (int h = 1; h < k; ++h) {
        v[h + 1] = 2.0 * x * v[h] - v[h - 1];
        if (dv) dv[h + 1] = 2.0 * v[h] + 2.0 * x * dv[h] - dv[h - 1];
    }
}

inline double koornwinder_norm(int p, int q) { return std::sqrt(2.0 * (2 * p + 1) * (p + q + 1)); }

// Jacobi P_m^{(a,0)}(t) for m = 0..q, with d/dt.
template <class T>
void jacobi_a0(int a, T t, int q, T* P, T* dP) {
    P[0] = T(1);
    dP[0] = T(0);
    if (q == 0) return;
    P[1] = 0.5 * (a + 2) * t + 0.5 * a;
    dP[1] = T(0.5 * (a + 2));
    for (int m = 1; m < q; ++m) {
        double c1 = 2.0 * (m + 1) * (m + a + 1) * (2 * m + a);
        double c2 = (2.0 * m + a + 1) * a * a;
        double c3 = (2.0 * m + a) * (2 * m + a + 1) * (2 * m + a + 2);
        double c4 = 2.0 * (m + a) * m * (2 * m + a + 2);
        P[m + 1] = ((c2 + c3 * t) * P[m] - c4 * P[m - 1]) / c1;
        dP[m + 1] = ((c2 + c3 * t) * dP[m] + c3 * P[m] - c4 * dP[m - 1]) / c1;
    }
}

// Triangle-orthonormal basis at u = (x, y); fills values and, when grad is
// non-null, the partial derivatives in u.
template <class T>
void koornwinder_row(const std::vector<MultiIndex>& idx, int k, T x, T y, T* out, T* gx, T* gy) {
    T s = x + y, w = y - x;
    std::vector<T> H(k + 1), Hx(k + 1), Hy(k + 1);
    H[0] = T(1);
    Hx[0] = Hy[0] = T(0);
    if (k >= 1) {
        H[1] = w;
        Hx[1] = T(-1);
        Hy[1] = T(1);
    }
    for (int n = 1; n < k; ++n) {
        double a = 2.0 * n + 1, b = n;
        H[n + 1] = (a * w * H[n] - b * s * s * H[n - 1]) / double(n + 1);
        Hx[n + 1] = (a * (-H[n] + w * Hx[n]) - b * (2.0 * s * H[n - 1] + s * s * Hx[n - 1])) / double(n + 1);
        Hy[n + 1] = (a * (H[n] + w * Hy[n]) - b * (2.0 * s * H[n - 1] + s * s * Hy[n - 1])) / double(n + 1);
    }
    T t = 1.0 - 2.0 * s;
    std::vector<T> P(k + 1), dP(k + 1);
    // Group by p so each Jacobi family is built once.
    for (int p = 0; p <= k; ++p) {
        int qmax = k - p;
        jacobi_a0(2 * p + 1, t, qmax, P.data(), dP.data());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            if (idx[j].e[0] != p) continue;
            int q = idx[j].e[1];
            double c = koornwinder_norm(p, q);
            out[j] = c * H[p] * P[q];
            if (gx) {
                // dt/dx = dt/dy = -2
                gx[j] = c * (Hx[p] * P[q] - 2.0 * H[p] * dP[q]);
                gy[j] = c * (Hy[p] * P[q] - 2.0 * H[p] * dP[q]);
            }
        }
    }
}

template <class T>
void eval_impl(const BasisSpec& spec, int k, const Mat<T>& pts, EvalMode mode, Mat<T>* V, std::vector<Mat<T>>* D) {
    const int n = static_cast<int>(pts.cols());
    if (spec.map.dim() != n) throw DomainError("basis map dimension does not match points");
    if (spec.kind == BasisKind::koornwinder && n != 2) throw DomainError("koornwinder basis is two-dimensional");
    const auto idx = multi_indices(n, k);
    const Eigen::Index L = pts.rows(), N = static_cast<Eigen::Index>(idx.size());
    if (V) V->resize(L, N);
    if (D) D->assign(n, Mat<T>(L, N));

    parallel_for(static_cast<std::size_t>(L), [&](std::size_t lo, std::size_t hi) {
        std::vector<T> v(n * (k + 1)), dv(n * (k + 1));
        std::vector<T> row(N), gx(N), gy(N);
        for (std::size_t ii = lo; ii < hi; ++ii) {
            auto i = static_cast<Eigen::Index>(ii);
            if (spec.kind == BasisKind::koornwinder) {
                T u0 = 0.5 * (spec.map.apply(0, pts(i, 0)) + 1.0);
                T u1 = 0.5 * (spec.map.apply(1, pts(i, 1)) + 1.0);
                koornwinder_row(idx, k, u0, u1, row.data(), D ? gx.data() : nullptr, D ? gy.data() : nullptr);
                double s0 = 0.5 * spec.map.scale(0), s1 = 0.5 * spec.map.scale(1);
                for (Eigen::Index j = 0; j < N; ++j) {
                    if (V) (*V)(i, j) = row[j];
                    if (D) {
                        (*D)[0](i, j) = s0 * gx[j];
                        (*D)[1](i, j) = s1 * gy[j];
                    }
                }
                continue;
            }
            for (int c = 0; c < n; ++c) {
                T x = spec.kind == BasisKind::chebyshev ? spec.map.apply(c, pts(i, c)) : pts(i, c);
                univariate(spec.kind, mode, x, k, &v[c * (k + 1)], D ? &dv[c * (k + 1)] : nullptr);
            }
            for (Eigen::Index j = 0; j < N; ++j) {
                const auto& a = idx[j].e;
                if (V) {
                    T p = v[a[0]];
                    for (int c = 1; c < n; ++c) p *= v[c * (k + 1) + a[c]];
                    (*V)(i, j) = p;
                }
                if (D) {
                    for (int m = 0; m < n; ++m) {
                        T p(1);
                        for (int c = 0; c < n; ++c) p *= (c == m ? dv : v)[c * (k + 1) + a[c]];
                        double sc = spec.kind == BasisKind::chebyshev ? spec.map.scale(m) : 1.0;
                        (*D)[m](i, j) = sc * p;
                    }
                }
            }
        }
    });
}

}  // namespace detail

template <class T>
Mat<T> eval_basis(const BasisSpec& spec, int k, const Mat<T>& pts, EvalMode mode = EvalMode::recurrence) {
    Mat<T> V;
    detail::eval_impl<T>(spec, k, pts, mode, &V, nullptr);
    return V;
}

// One L x N_k matrix per coordinate direction.
template <class T>
std::vector<Mat<T>> eval_basis_derivatives(const BasisSpec& spec, int k, const Mat<T>& pts) {
    std::vector<Mat<T>> D;
    detail::eval_impl<T>(spec, k, pts, EvalMode::recurrence, nullptr, &D);
    return D;
}

inline double log_gamma(double x) { return std::lgamma(x); }

// log|det C| where the basis equals C times the graded-lex monomials in z.
// C is block triangular by degree, so only leading homogeneous parts matter.
inline double log_abs_leading_det(const BasisSpec& spec, int k) {
    const int n = spec.map.dim();
    const double l2 = std::log(2.0);
    double acc = 0.0;
    const auto idx = multi_indices(n, k);
    if (spec.kind == BasisKind::monomial) return 0.0;
    for (const auto& a : idx)
        for (int c = 0; c < n; ++c) {
            double s = spec.kind == BasisKind::chebyshev ? spec.map.scale(c) : 0.5 * spec.map.scale(c);
            acc += a.e[c] * std::log(std::abs(s));
        }
    if (spec.kind == BasisKind::chebyshev) {
        for (const auto& a : idx)
            for (int c = 0; c < n; ++c)
                if (a.e[c] > 0) acc += (a.e[c] - 1) * l2;
        return acc;
    }
    auto lcj = [](int m, int a) {
        return log_gamma(2.0 * m + a + 1) - m * std::log(2.0) - log_gamma(m + 1.0) - log_gamma(m + a + 1.0);
    };
    for (int d = 0; d <= k; ++d) {
        acc += 0.5 * d * (d + 1) * l2;
        for (int p = 0; p <= d; ++p) {
            int q = d - p;
            acc += lcj(p, 0) + std::log(detail::koornwinder_norm(p, q)) + lcj(q, 2 * p + 1) + q * l2;
        }
    }
    return acc;
}

}  // namespace pluripot
