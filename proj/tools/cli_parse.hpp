#pragma once

#include <pluripot/pluripot.hpp>

#include <sstream>
#include <string>
#include <vector>

namespace pluripot::cli {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw DomainError("bad number '" + s + "' in " + what);
}

inline int to_int(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw DomainError("bad integer '" + s + "' in " + what);
}

// square | box:x0:x1:y0:y1 | disk[:cx:cy:r] | simplex | polygon:m[:R]
inline CompactSet parse_set(const std::string& spec) {
    auto f = split(spec, ':');
    const std::string& name = f.empty() ? spec : f[0];
    auto bad = [&] { return DomainError("invalid set spec '" + spec + "'"); };
    if (name == "square" && f.size() == 1) return {Box::square()};
    if (name == "simplex" && f.size() == 1) return {Simplex{}};
    if (name == "box" && f.size() == 5) {
        Box b{{to_double(f[1], spec), to_double(f[3], spec)}, {to_double(f[2], spec), to_double(f[4], spec)}};
        if (!(b.hi[0] > b.lo[0]) || !(b.hi[1] > b.lo[1])) throw bad();
        return {b};
    }
    if (name == "disk" && (f.size() == 1 || f.size() == 4)) {
        Disk d;
        if (f.size() == 4) {
            d.center = {to_double(f[1], spec), to_double(f[2], spec)};
            d.radius = to_double(f[3], spec);
        }
        if (!(d.radius > 0)) throw bad();
        return {d};
    }
    if (name == "polygon" && (f.size() == 2 || f.size() == 3)) {
        RegularPolygon p;
        p.m = to_int(f[1], spec);
        if (f.size() == 3) p.circumradius = to_double(f[2], spec);
        if (p.m < 3 || !(p.circumradius > 0)) throw bad();
        return {p};
    }
    throw bad();
}

// start:step:end or a single degree
inline std::vector<int> parse_degrees(const std::string& spec) {
    auto f = split(spec, ':');
    std::vector<int> out;
    if (f.size() == 1) {
        out.push_back(to_int(f[0], "degree schedule"));
    } else if (f.size() == 3) {
        int a = to_int(f[0], "degree schedule"), s = to_int(f[1], "degree schedule"), b = to_int(f[2], "degree schedule");
        if (s < 1 || b < a) throw DomainError("degree schedule '" + spec + "' must be start:step:end with step >= 1");
        for (int k = a; k <= b; k += s) out.push_back(k);
    } else {
        throw DomainError("degree schedule '" + spec + "' must be start:step:end");
    }
    for (int k : out)
        if (k < 1) throw DomainError("degrees must be >= 1");
    return out;
}

// x:min:max:count,y:min:max:count
inline GridSpec parse_grid(const std::string& spec, const std::string& shift = "") {
    GridSpec g;
    auto axes = split(spec, ',');
    if (axes.size() != 2) throw GridConfigError("grid spec '" + spec + "' needs two axes");
    const char names[2] = {'x', 'y'};
    for (int i = 0; i < 2; ++i) {
        auto f = split(axes[i], ':');
        if (f.size() != 4 || f[0].size() != 1 || f[0][0] != names[i])
            throw GridConfigError("grid axis '" + axes[i] + "' must be " + names[i] + ":min:max:count");
        AxisSpec a{to_double(f[1], spec), to_double(f[2], spec), to_int(f[3], spec), 0.0};
        if (a.count < 2 || !(a.max > a.min)) throw GridConfigError("grid axis '" + axes[i] + "' needs count >= 2 and max > min");
        g.axes.push_back(a);
    }
    if (!shift.empty()) {
        auto s = split(shift, ',');
        if (s.size() != 2) throw GridConfigError("imaginary shift needs two values");
        for (int i = 0; i < 2; ++i) g.axes[i].imag_shift = to_double(s[i], "imaginary shift");
    }
    return g;
}

inline Method parse_method(const std::string& s) {
    if (s == "szef") return Method::szef;
    if (s == "szef-bw") return Method::szef_bw;
    throw DomainError("unknown method '" + s + "'");
}

inline Quantity parse_quantity(const std::string& s) {
    if (s == "u") return Quantity::u;
    if (s == "v") return Quantity::v;
    throw DomainError("unknown quantity '" + s + "'");
}

inline std::string set_name(const CompactSet& set) {
    return std::visit(
        [](const auto& s) -> std::string {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Box>) return "box";
            else if constexpr (std::is_same_v<S, Disk>) return "disk";
            else if constexpr (std::is_same_v<S, RegularPolygon>) return "polygon:" + std::to_string(s.m);
            else if constexpr (std::is_same_v<S, Simplex>) return "simplex";
            else return "other";
        },
        set.shape);
}

// Mesh generator for a set, with the square oversampling factor exposed.
inline MeshGenerator mesh_generator(const CompactSet& set, double oversampling = 2.0) {
    if (const Box* b = std::get_if<Box>(&set.shape)) {
        Box box = *b;
        return [box, oversampling](int k) {
            Mesh m = mesh_square(k, oversampling);
            AffineMap inv{box.lo, box.hi};
            for (Eigen::Index i = 0; i < m.size(); ++i)
                for (int c = 0; c < 2; ++c) m.points(i, c) = inv.unapply(c, m.points(i, c));
            return m;
        };
    }
    return [set](int k) { return default_mesh(set, k); };
}

}  // namespace pluripot::cli
