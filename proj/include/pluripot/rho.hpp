#pragma once

#include "errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace pluripot {

namespace detail {

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const Eigen::VectorXd& x) { return x.norm(); }

inline double reciprocal_scale(double y) { return 1.0 / y; }

inline double zero_like(double) { return 0.0; }
inline Eigen::VectorXd zero_like(const Eigen::VectorXd& v) { return Eigen::VectorXd::Zero(v.size()); }

// num / y with the Samelson inverse y / |y|^2 for vectors; a single
// component reduces to the scalar reciprocal.
inline double divide(double num, double y) { return num * reciprocal_scale(y); }
inline Eigen::VectorXd divide(double num, const Eigen::VectorXd& y) {
    if (y.size() == 1) return Eigen::VectorXd::Constant(1, num * reciprocal_scale(y(0)));
    return (num / y.squaredNorm()) * y;
}

}  // namespace detail

// col[j][i] holds rho^{(i)}_j; column j has K - j entries.
template <class T>
struct RhoTable {
    std::vector<double> nodes;
    std::vector<std::vector<std::optional<T>>> col;

    int columns() const { return static_cast<int>(col.size()); }
    const std::optional<T>& at(int i, int j) const { return col[j][i]; }
};

template <class T>
RhoTable<T> rho_table(const std::vector<T>& seq, const std::vector<double>& nodes) {
    const int K = static_cast<int>(seq.size());
    if (K < 2 || nodes.size() != seq.size()) throw DomainError("rho needs at least two terms and one node per term");
    for (int i = 1; i < K; ++i)
        if (!(nodes[i] > nodes[i - 1])) throw DomainError("rho nodes must be strictly increasing");
    constexpr double tiny = 1e-14;
    RhoTable<T> t{nodes, {}};
    t.col.resize(K);
    t.col[0].assign(seq.begin(), seq.end());
    const T zero = detail::zero_like(seq[0]);
    for (int j = 0; j + 1 < K; ++j) {
        auto& next = t.col[j + 1];
        next.resize(K - j - 1);
        for (int i = 0; i + j + 1 < K; ++i) {
            const auto& a = t.col[j][i];
            const auto& b = t.col[j][i + 1];
            std::optional<T> prev = j == 0 ? std::optional<T>(zero) : t.col[j - 1][i + 1];
            if (!a || !b || !prev) continue;
            T diff = *b - *a;
            double ctx = std::max(detail::magnitude(*a), detail::magnitude(*b));
            if (detail::magnitude(diff) < tiny * (1.0 + ctx)) continue;
            next[i] = T(*prev + detail::divide(nodes[i + j + 1] - nodes[i], diff));
        }
    }
    return t;
}

inline RhoTable<double> rho_scalar(const std::vector<double>& seq, const std::vector<double>& nodes) {
    return rho_table(seq, nodes);
}

inline RhoTable<Eigen::VectorXd> rho_vector(const std::vector<Eigen::VectorXd>& seq, const std::vector<double>& nodes) {
    for (const auto& v : seq)
        if (v.size() != seq.front().size()) throw DomainError("vector rho needs equal-length vectors");
    return rho_table(seq, nodes);
}

struct RhoSelector {
    enum class Kind { diagonal, column } kind = Kind::diagonal;
    int column = 0;

    static RhoSelector diagonal() { return {Kind::diagonal, 0}; }
    static RhoSelector col(int j) { return {Kind::column, j}; }
};

template <class T>
struct RhoSelection {
    std::vector<int> rows;  // i of rho^{(i)}_j, or 2m for the diagonal
    std::vector<T> values;

    const T& last() const { return values.back(); }
};

template <class T>
RhoSelection<T> select(const RhoTable<T>& t, RhoSelector sel) {
    RhoSelection<T> out;
    if (sel.kind == RhoSelector::Kind::diagonal) {
        for (int j = 0; j < t.columns(); j += 2)
            if (t.col[j][0]) {
                out.rows.push_back(j);
                out.values.push_back(*t.col[j][0]);
            }
    } else {
        if (sel.column < 0 || sel.column >= t.columns()) throw NoAccelerantError("rho column out of range");
        const auto& c = t.col[sel.column];
        for (int i = 0; i < static_cast<int>(c.size()); ++i)
            if (c[i]) {
                out.rows.push_back(i);
                out.values.push_back(*c[i]);
            }
    }
    if (out.values.empty()) throw NoAccelerantError("no valid rho entries for the requested selection");
    return out;
}

inline RhoSelector parse_rho_selector(const std::string& s) {
    if (s == "diagonal") return RhoSelector::diagonal();
    if (s.rfind("column:", 0) == 0) {
        int ordinal = std::stoi(s.substr(7));
        if (ordinal < 1) throw DomainError("rho column ordinals start at 1");
        return RhoSelector::col(ordinal - 1);
    }
    throw DomainError("unknown rho selector '" + s + "'");
}

}  // namespace pluripot
