#pragma once

#include "errors.hpp"
#include "numeric.hpp"
#include "poly_basis.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace pluripot {

struct Box {
    std::vector<double> lo, hi;
    static Box square() { return {{-1.0, -1.0}, {1.0, 1.0}}; }
};

struct Disk {
    std::vector<double> center{0.0, 0.0};
    double radius = 1.0;
};

struct RegularPolygon {
    int m = 6;
    std::vector<double> center{0.0, 0.0};
    double circumradius = 1.0;

    std::vector<std::array<double, 2>> vertices() const {
        std::vector<std::array<double, 2>> v(m);
        for (int j = 0; j < m; ++j) {
            double t = 2.0 * std::numbers::pi * j / m;
            v[j] = {center[0] + circumradius * std::cos(t), center[1] + circumradius * std::sin(t)};
        }
        return v;
    }
};

struct Simplex {};

struct CompactSet;

// image = P(base), P the box-to-[-1,1] map.
struct AffineImage {
    std::shared_ptr<const CompactSet> base;
    AffineMap map;
};

// Two one-dimensional factors, each an interval.
struct Product {
    Box first, second;
};

struct CompactSet {
    std::variant<Box, Disk, RegularPolygon, Simplex, AffineImage, Product> shape;

    int dim() const {
        return std::visit(
            [](const auto& s) -> int {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Box>) return static_cast<int>(s.lo.size());
                else if constexpr (std::is_same_v<S, AffineImage>) return s.base->dim();
                else if constexpr (std::is_same_v<S, Product>)
                    return static_cast<int>(s.first.lo.size() + s.second.lo.size());
                else return 2;
            },
            shape);
    }
};

namespace detail {

inline bool in_polygon(const RegularPolygon& p, double x, double y, double tol) {
    auto v = p.vertices();
    for (int j = 0; j < p.m; ++j) {
        const auto& a = v[j];
        const auto& b = v[(j + 1) % p.m];
        // Counter-clockwise vertices: inside is to the left of every edge.
        double ex = b[0] - a[0], ey = b[1] - a[1];
        double cross = ex * (y - a[1]) - ey * (x - a[0]);
        if (cross < -tol * std::hypot(ex, ey)) return false;
    }
    return true;
}

inline bool contains_real(const CompactSet& s, const std::vector<double>& x, double tol) {
    return std::visit(
        [&](const auto& sh) -> bool {
            using S = std::decay_t<decltype(sh)>;
            if constexpr (std::is_same_v<S, Box>) {
                for (std::size_t i = 0; i < x.size(); ++i)
                    if (x[i] < sh.lo[i] - tol || x[i] > sh.hi[i] + tol) return false;
                return true;
            } else if constexpr (std::is_same_v<S, Disk>) {
                return std::hypot(x[0] - sh.center[0], x[1] - sh.center[1]) <= sh.radius + tol;
            } else if constexpr (std::is_same_v<S, RegularPolygon>) {
                return in_polygon(sh, x[0], x[1], tol);
            } else if constexpr (std::is_same_v<S, Simplex>) {
                return x[0] >= -tol && x[1] >= -tol && x[0] + x[1] <= 1.0 + tol;
            } else if constexpr (std::is_same_v<S, AffineImage>) {
                std::vector<double> y(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) y[i] = sh.map.unapply(static_cast<int>(i), x[i]);
                return contains_real(*sh.base, y, tol);
            } else {
                return x[0] >= sh.first.lo[0] - tol && x[0] <= sh.first.hi[0] + tol &&
                       x[1] >= sh.second.lo[0] - tol && x[1] <= sh.second.hi[0] + tol;
            }
        },
        s.shape);
}

}  // namespace detail

enum class Membership { inside, outside };

template <class Vec>
Membership membership(const CompactSet& s, const Vec& z, double tol = 1e-12) {
    std::vector<double> x(z.size());
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(z.size()); ++i) {
        cplx c = z[i];
        if (std::abs(c.imag()) > tol) return Membership::outside;
        x[i] = c.real();
    }
    return detail::contains_real(s, x, tol) ? Membership::inside : Membership::outside;
}

struct Mesh {
    MatrixXd points;               // M x n, pairwise distinct
    int degree = 0;
    std::optional<double> constant;  // empty means empirical
    std::string source;

    Eigen::Index size() const { return points.rows(); }
};

// Keeps the first of any cluster of points closer than tol.
inline MatrixXd dedup_points(const MatrixXd& pts, double tol = 1e-12) {
    const double cell = 1e-9;
    struct KeyHash {
        std::size_t operator()(const std::pair<long long, long long>& k) const {
            return std::hash<long long>()(k.first * 1000003LL) ^ std::hash<long long>()(k.second);
        }
    };
    std::unordered_map<std::pair<long long, long long>, std::vector<Eigen::Index>, KeyHash> grid;
    std::vector<Eigen::Index> keep;
    const bool two = pts.cols() >= 2;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        long long cx = std::llround(std::floor(pts(i, 0) / cell));
        long long cy = two ? std::llround(std::floor(pts(i, 1) / cell)) : 0;
        bool dup = false;
        for (long long dx = -1; dx <= 1 && !dup; ++dx)
            for (long long dy = -1; dy <= 1 && !dup; ++dy) {
                auto it = grid.find({cx + dx, cy + dy});
                if (it == grid.end()) continue;
                for (auto j : it->second)
                    if ((pts.row(i) - pts.row(j)).norm() < tol) {
                        dup = true;
                        break;
                    }
            }
        if (dup) continue;
        grid[{cx, cy}].push_back(i);
        keep.push_back(i);
    }
    MatrixXd out(keep.size(), pts.cols());
    for (std::size_t r = 0; r < keep.size(); ++r) out.row(r) = pts.row(keep[r]);
    return out;
}

inline std::vector<double> chebyshev_lobatto(int intervals) {
    // Mirrored so the nodes are exactly symmetric about 0.
    std::vector<double> x(intervals + 1, 0.0);
    for (int j = 0; 2 * j < intervals; ++j) {
        x[j] = -std::cos(j * std::numbers::pi / intervals);
        x[intervals - j] = -x[j];
    }
    return x;
}

inline MatrixXd tensor_points(const std::vector<double>& a, const std::vector<double>& b) {
    MatrixXd p(a.size() * b.size(), 2);
    Eigen::Index r = 0;
    for (double y : b)
        for (double x : a) {
            p(r, 0) = x;
            p(r, 1) = y;
            ++r;
        }
    return p;
}

// Norming constant of an (intervals+1)-point Chebyshev-Lobatto mesh for
// degree k on an interval.
inline double lobatto_constant(int k, int intervals) {
    return 1.0 / std::cos(k * std::numbers::pi / (2.0 * intervals));
}

inline Mesh mesh_square(int k, double m_factor = 2.0) {
    if (k < 1) throw DomainError("mesh degree must be >= 1");
    if (m_factor < 2.0) throw UndersamplingError("square mesh oversampling must be >= 2");
    int nint = static_cast<int>(std::ceil(m_factor * k - 1e-12));
    auto x = chebyshev_lobatto(nint);
    double c = lobatto_constant(k, nint);
    return {tensor_points(x, x), k, c * c, "square"};
}

inline Mesh mesh_square_cl(int k) {
    if (k < 1) throw DomainError("mesh degree must be >= 1");
    auto x = chebyshev_lobatto(2 * k);
    return {tensor_points(x, x), k, 2.0, "square-cl"};
}

enum class DiskVariant { lobatto_polar, td_polar };

// Radii are the s+1 Lobatto nodes on [-1,1]; angles cover [0, pi) so the
// signed radii sweep the whole disk.
inline Mesh mesh_disk(int k, DiskVariant variant = DiskVariant::lobatto_polar, int s = 0) {
    if (k < 1) throw DomainError("mesh degree must be >= 1");
    const double pi = std::numbers::pi;
    std::vector<std::array<double, 2>> raw;
    std::string tag;
    if (variant == DiskVariant::td_polar) {
        s = 2 * k;
        auto radii = chebyshev_lobatto(s);
        for (int i = 0; i <= s; ++i)
            for (int j = 0; j <= s; ++j) {
                double r = radii[i], t = j * pi / s;
                raw.push_back({r * std::cos(t), r * std::sin(t)});
            }
        tag = "disk-td-polar";
    } else {
        if (s == 0) s = 2 * k;
        if (s <= k) throw UndersamplingError("disk mesh needs s > k");
        auto radii = chebyshev_lobatto(s);
        for (int h = 0; h <= s; ++h)
            for (int j = 0; j < s; ++j) {
                double r = radii[h], t = j * pi / s;
                raw.push_back({r * std::cos(t), r * std::sin(t)});
            }
        tag = "disk-lobatto-polar";
    }
    MatrixXd p(raw.size(), 2);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        p(i, 0) = raw[i][0];
        p(i, 1) = raw[i][1];
    }
    double c = lobatto_constant(k, s);
    return {dedup_points(p), k, c * c, tag};
}

inline MatrixXd duffy_points(int k) {
    auto x = chebyshev_lobatto(4 * k);
    MatrixXd p(x.size() * x.size(), 2);
    Eigen::Index r = 0;
    for (double b : x)
        for (double a : x) {
            double u = 0.5 * (a + 1.0), v = 0.5 * (b + 1.0);
            p(r, 0) = u * (1.0 - v);
            p(r, 1) = u * v;
            ++r;
        }
    return dedup_points(p);
}

inline Mesh mesh_simplex(int k) {
    if (k < 1) throw DomainError("mesh degree must be >= 1");
    return {duffy_points(k), k, 2.0, "simplex"};
}

inline Mesh mesh_polygon(int k, int m, const RegularPolygon& shape = {}) {
    if (k < 1) throw DomainError("mesh degree must be >= 1");
    if (m < 3) throw DomainError("polygon needs m >= 3");
    RegularPolygon poly = shape;
    poly.m = m;
    auto v = poly.vertices();
    MatrixXd ref = duffy_points(k);
    const double cx = poly.center[0], cy = poly.center[1];
    MatrixXd all(ref.rows() * m, 2);
    for (int t = 0; t < m; ++t) {
        const auto& a = v[t];
        const auto& b = v[(t + 1) % m];
        for (Eigen::Index i = 0; i < ref.rows(); ++i) {
            double s = ref(i, 0), w = ref(i, 1);
            all(t * ref.rows() + i, 0) = cx + (a[0] - cx) * s + (b[0] - cx) * w;
            all(t * ref.rows() + i, 1) = cy + (a[1] - cy) * s + (b[1] - cy) * w;
        }
    }
    return {dedup_points(all), k, 2.0, "polygon:" + std::to_string(m)};
}

inline Mesh mesh_union(const Mesh& a, const Mesh& b) {
    if (a.degree != b.degree) throw DomainError("mesh union needs equal degrees");
    MatrixXd p(a.size() + b.size(), a.points.cols());
    p << a.points, b.points;
    std::optional<double> c;
    if (a.constant && b.constant) c = std::max(*a.constant, *b.constant);
    return {dedup_points(p), a.degree, c, a.source + "+" + b.source};
}

inline Mesh mesh_affine_image(const Mesh& a, const AffineMap& map) {
    Mesh out = a;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (int c = 0; c < map.dim(); ++c) out.points(i, c) = map.apply(c, a.points(i, c));
    return out;
}

// Mesh generator associated with each supported set (defaults as documented).
inline Mesh default_mesh(const CompactSet& set, int k) {
    return std::visit(
        [&](const auto& s) -> Mesh {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Box>) {
                Mesh m = mesh_square(k);
                AffineMap inv{s.lo, s.hi};
                for (Eigen::Index i = 0; i < m.size(); ++i)
                    for (int c = 0; c < 2; ++c) m.points(i, c) = inv.unapply(c, m.points(i, c));
                return m;
            } else if constexpr (std::is_same_v<S, Disk>) {
                Mesh m = mesh_disk(k);
                for (Eigen::Index i = 0; i < m.size(); ++i)
                    for (int c = 0; c < 2; ++c) m.points(i, c) = s.center[c] + s.radius * m.points(i, c);
                return m;
            } else if constexpr (std::is_same_v<S, RegularPolygon>) {
                return mesh_polygon(k, s.m, s);
            } else if constexpr (std::is_same_v<S, Simplex>) {
                return mesh_simplex(k);
            } else if constexpr (std::is_same_v<S, AffineImage>) {
                return mesh_affine_image(default_mesh(*s.base, k), s.map);
            } else {
                return default_mesh(CompactSet{Box{{s.first.lo[0], s.second.lo[0]}, {s.first.hi[0], s.second.hi[0]}}}, k);
            }
        },
        set.shape);
}

inline void write_mesh_csv(std::ostream& os, const MatrixXd& pts) {
    os << (pts.cols() == 2 ? "x,y" : "x") << '\n';
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        for (Eigen::Index c = 0; c < pts.cols(); ++c) os << (c ? "," : "") << pts(i, c);
        os << '\n';
    }
}

inline MatrixXd read_mesh_csv(std::istream& is) {
    std::string line;
    std::getline(is, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<double> r;
        std::string cell;
        while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
        rows.push_back(std::move(r));
    }
    MatrixXd p(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < rows[i].size(); ++c) p(i, c) = rows[i][c];
    return p;
}

}  // namespace pluripot
