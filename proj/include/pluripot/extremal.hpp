#pragma once

#include "errors.hpp"
#include "geometry.hpp"
#include "numeric.hpp"
#include "orthonormal.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

namespace pluripot {

struct AxisSpec {
    double min = -1.0, max = 1.0;
    int count = 2;
    double imag_shift = 0.0;
};

struct GridSpec {
    std::vector<AxisSpec> axes;
};

struct EvalGrid {
    MatrixXcd points;           // L x n; first axis varies fastest
    std::vector<char> inside;   // 1 on Omega_E, 0 on Omega_0
    GridSpec spec;

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index outside_count() const {
        return static_cast<Eigen::Index>(std::count(inside.begin(), inside.end(), 0));
    }
    bool real() const {
        for (const auto& a : spec.axes)
            if (a.imag_shift != 0.0) return false;
        return true;
    }
};

inline std::vector<double> axis_values(const AxisSpec& a) {
    std::vector<double> v(a.count);
    for (int i = 0; i < a.count; ++i) v[i] = a.min + (a.max - a.min) * i / (a.count - 1);
    return v;
}

inline EvalGrid make_grid(const GridSpec& spec, const CompactSet& set) {
    if (spec.axes.size() != 2) throw GridConfigError("grids are two-dimensional");
    for (const auto& a : spec.axes)
        if (a.count < 2 || !(a.max > a.min)) throw GridConfigError("grid axes need count >= 2 and max > min");
    auto x = axis_values(spec.axes[0]), y = axis_values(spec.axes[1]);
    EvalGrid g;
    g.spec = spec;
    g.points.resize(static_cast<Eigen::Index>(x.size() * y.size()), 2);
    g.inside.resize(x.size() * y.size());
    Eigen::Index r = 0;
    for (double yv : y)
        for (double xv : x) {
            g.points(r, 0) = cplx(xv, spec.axes[0].imag_shift);
            g.points(r, 1) = cplx(yv, spec.axes[1].imag_shift);
            g.inside[r] = membership(set, g.points.row(r)) == Membership::inside;
            ++r;
        }
    return g;
}

enum class Method { szef, szef_bw };

struct ExtremalValues {
    VectorXd u, v;  // empty unless requested
};

// u_k = (1/k) log (kernel L1 norm), v_k = (1/2k) log B_k, evaluated in
// blocks of targets to bound memory.
inline ExtremalValues extremal_values(const OrthoState& s, const MatrixXcd& pts, Method method, bool want_u,
                                      bool want_v = true) {
    if (s.degree < 1) throw DomainError("extremal approximants need k >= 1");
    const Stage stage = method == Method::szef_bw ? Stage::weighted : Stage::plain;
    const Eigen::Index L = pts.rows(), blk = 2048;
    const double k = s.degree;
    ExtremalValues out;
    if (want_u) out.u.resize(L);
    if (want_v) out.v.resize(L);
    for (Eigen::Index r0 = 0; r0 < L; r0 += blk) {
        Eigen::Index nr = std::min(blk, L - r0);
        MatrixXcd W = onb_at<cplx>(s, pts.middleRows(r0, nr), stage);
        if (want_v) out.v.segment(r0, nr) = bergman(s, W).array().log() / (2.0 * k);
        if (want_u) out.u.segment(r0, nr) = kernel_l1(s, W, stage).array().log() / k;
    }
    return out;
}

inline OrthoState prepare_state(const Mesh& mesh, int k, Method method) {
    OrthoState s = build_ortho(mesh, k);
    if (method == Method::szef_bw) s = weighted_orthonormalize(std::move(s));
    return s;
}

enum class Quantity { u, v };

inline VectorXd szef(const Mesh& mesh, const EvalGrid& grid, int k, Quantity q) {
    auto r = extremal_values(prepare_state(mesh, k, Method::szef), grid.points, Method::szef, q == Quantity::u,
                             q == Quantity::v);
    return q == Quantity::u ? r.u : r.v;
}

inline VectorXd szef_bw(const Mesh& mesh, const EvalGrid& grid, int k, Quantity q) {
    auto r = extremal_values(prepare_state(mesh, k, Method::szef_bw), grid.points, Method::szef_bw,
                             q == Quantity::u, q == Quantity::v);
    return q == Quantity::u ? r.u : r.v;
}

struct ExtremalResult {
    Method method = Method::szef;
    Quantity quantity = Quantity::v;
    std::vector<int> degrees;
    std::vector<VectorXd> values;
};

using MeshGenerator = std::function<Mesh(int)>;

inline ExtremalResult extremal_sequence(const MeshGenerator& gen, const EvalGrid& grid, const std::vector<int>& degrees,
                                        Method method, Quantity q) {
    ExtremalResult res{method, q, degrees, {}};
    for (int k : degrees) {
        auto r = extremal_values(prepare_state(gen(k), k, method), grid.points, method, q == Quantity::u,
                                 q == Quantity::v);
        res.values.push_back(q == Quantity::u ? r.u : r.v);
    }
    return res;
}

namespace detail {

inline double lundin_unit(cplx z1, cplx z2) {
    if (z1.imag() == 0.0 && z2.imag() == 0.0 && std::hypot(z1.real(), z2.real()) <= 1.0) return 0.0;
    double t = std::norm(z1) + std::norm(z2) + std::abs(z1 * z1 + z2 * z2 - 1.0);
    if (t <= 1.0) return 0.0;
    return 0.5 * std::log(t + std::sqrt((t - 1.0) * (t + 1.0)));
}

inline double baran(cplx z1, cplx z2, const std::vector<std::array<double, 2>>& duals) {
    double best = 0.0;
    for (const auto& w : duals) best = std::max(best, log_abs_joukowski_inverse(z1 * w[0] + z2 * w[1]));
    return best;
}

inline std::vector<std::array<double, 2>> polygon_duals(int m) {
    std::vector<std::array<double, 2>> w(m);
    const double pi = std::numbers::pi, c = 1.0 / std::cos(pi / m);
    for (int j = 0; j < m; ++j) w[j] = {c * std::cos((2 * j + 1) * pi / m), c * std::sin((2 * j + 1) * pi / m)};
    return w;
}

inline double reference_point(const CompactSet& set, cplx z1, cplx z2) {
    return std::visit(
        [&](const auto& s) -> double {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Disk>) {
                return lundin_unit((z1 - s.center[0]) / s.radius, (z2 - s.center[1]) / s.radius);
            } else if constexpr (std::is_same_v<S, Box>) {
                AffineMap P{s.lo, s.hi};
                static const std::vector<std::array<double, 2>> duals{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
                return baran(P.apply(0, z1), P.apply(1, z2), duals);
            } else if constexpr (std::is_same_v<S, Product>) {
                return reference_point(CompactSet{Box{{s.first.lo[0], s.second.lo[0]}, {s.first.hi[0], s.second.hi[0]}}},
                                       z1, z2);
            } else if constexpr (std::is_same_v<S, RegularPolygon>) {
                if (s.m % 2 != 0) throw NoReferenceError("no closed-form extremal function for odd polygons");
                return baran((z1 - s.center[0]) / s.circumradius, (z2 - s.center[1]) / s.circumradius,
                             polygon_duals(s.m));
            } else if constexpr (std::is_same_v<S, AffineImage>) {
                return reference_point(*s.base, s.map.unapply(0, z1), s.map.unapply(1, z2));
            } else {
                throw NoReferenceError("no closed-form extremal function for the simplex");
            }
        },
        set.shape);
}

}  // namespace detail

inline bool has_reference(const CompactSet& set) {
    try {
        detail::reference_point(set, cplx(0.0), cplx(0.0));
        return true;
    } catch (const NoReferenceError&) {
        return false;
    }
}

inline VectorXd reference_extremal(const CompactSet& set, const MatrixXcd& pts) {
    if (pts.cols() != 2) throw DomainError("reference extremal functions are implemented for n = 2");
    VectorXd out(pts.rows());
    for (Eigen::Index i = 0; i < pts.rows(); ++i) out(i) = detail::reference_point(set, pts(i, 0), pts(i, 1));
    return out;
}

struct ErrorMetrics {
    double e1 = 0.0;
    std::optional<double> e1_rel;
    double e_inf = 0.0;
};

inline ErrorMetrics error_metrics(const VectorXd& approx, const VectorXd& ref, const EvalGrid& grid) {
    if (approx.size() != ref.size() || approx.size() != grid.size())
        throw DomainError("error metrics need values on the same grid");
    if (grid.outside_count() == 0) throw GridConfigError("grid has no points outside the set");
    CompensatedSum diff, refsum;
    ErrorMetrics m;
    for (Eigen::Index i = 0; i < approx.size(); ++i) {
        if (grid.inside[i]) continue;
        double d = std::abs(approx(i) - ref(i));
        diff.add(d);
        refsum.add(ref(i));
        m.e_inf = std::max(m.e_inf, d);
    }
    m.e1 = diff.value() / static_cast<double>(grid.outside_count());
    if (refsum.value() != 0.0) m.e1_rel = diff.value() / refsum.value();
    return m;
}

// s_i = e1(f_{i+2}, f_{i+1}) / e1(f_{i+1}, f_i), one entry per degree but the last two.
inline std::vector<std::optional<double>> ratio_sequence(const std::vector<VectorXd>& f, const EvalGrid& grid) {
    std::vector<std::optional<double>> s;
    for (std::size_t i = 0; i + 2 < f.size(); ++i) {
        double num = error_metrics(f[i + 2], f[i + 1], grid).e1;
        double den = error_metrics(f[i + 1], f[i], grid).e1;
        s.push_back(den != 0.0 ? std::optional<double>(num / den) : std::nullopt);
    }
    return s;
}

}  // namespace pluripot
