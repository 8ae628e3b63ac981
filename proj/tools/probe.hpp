#pragma once

#include <pluripot/pluripot.hpp>

#include <json.hpp>

#include <random>
#include <string>

namespace pluripot::cli {

using json = nlohmann::ordered_json;

class ProbeReport {
public:
    // pass when value <= limit
    void upper(const std::string& name, double value, double limit) { add(name, value, limit, value <= limit); }
    void lower(const std::string& name, double value, double limit) { add(name, value, limit, value >= limit); }

    bool pass() const { return pass_; }
    json to_json() const {
        json j;
        j["pass"] = pass_;
        j["checks"] = checks_;
        return j;
    }

private:
    void add(const std::string& name, double value, double limit, bool ok) {
        checks_.push_back({{"name", name}, {"value", value}, {"limit", limit}, {"pass", ok}});
        pass_ = pass_ && ok;
    }

    json checks_ = json::array();
    bool pass_ = true;
};

namespace detail {

struct ProbeCase {
    std::string name;
    CompactSet set;
    Mesh (*gen)(int);
};

inline MatrixXcd random_complex(int L, std::mt19937& rng, double r) {
    std::uniform_real_distribution<double> u(-r, r);
    MatrixXcd z(L, 2);
    for (int i = 0; i < L; ++i)
        for (int c = 0; c < 2; ++c) z(i, c) = cplx(u(rng), u(rng));
    return z;
}

inline MatrixXd random_inside(const CompactSet& set, int L, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MatrixXd p(L, 2);
    for (int i = 0; i < L;) {
        Eigen::Vector2cd z(u(rng), u(rng));
        if (membership(set, z) != Membership::inside) continue;
        p(i, 0) = z(0).real();
        p(i, 1) = z(1).real();
        ++i;
    }
    return p;
}

}  // namespace detail

// Invariants of the orthonormal and extremal machinery on every supplied
// mesh, plus small oracle comparisons. Deterministic for a given seed.
inline ProbeReport run_probe(std::uint32_t seed) {
    ProbeReport rep;
    std::mt19937 rng(seed);
    std::vector<detail::ProbeCase> cases{
        {"square", {Box::square()}, [](int k) { return mesh_square(k); }},
        {"square-cl", {Box::square()}, [](int k) { return mesh_square_cl(k); }},
        {"disk-lobatto-polar", {Disk{}}, [](int k) { return mesh_disk(k, DiskVariant::lobatto_polar); }},
        {"disk-td-polar", {Disk{}}, [](int k) { return mesh_disk(k, DiskVariant::td_polar); }},
        {"simplex", {Simplex{}}, [](int k) { return mesh_simplex(k); }},
        {"polygon:6", {RegularPolygon{}}, [](int k) { return mesh_polygon(k, 6); }},
    };
    GridSpec real_spec{{{-2, 2, 21, 0.0}, {-2, 2, 21, 0.0}}};
    GridSpec shifted_spec{{{0, 2, 15, 0.1}, {0, 2, 15, 0.1}}};
    for (const auto& c : cases) {
        for (int k : {3, 8}) {
            const std::string tag = c.name + ",k=" + std::to_string(k);
            Mesh mesh = c.gen(k);
            OrthoState s = build_ortho(mesh, k);
            const auto N = s.N();
            rep.upper("orthonormality[" + tag + "]",
                      (s.Q.transpose() * s.Q - MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff(), 1e-10);
            VectorXd Bm = bergman(s.Q, s.M());
            rep.upper("parseval[" + tag + "]", std::abs(compensated_sum(Bm) / double(s.M()) - double(N)) / double(N),
                      1e-10);

            double bmin = Bm.minCoeff(), gap = -1e300, wgap = -1e300;
            OrthoState sw = weighted_orthonormalize(s);
            MatrixXcd rz = detail::random_complex(200, rng, 2.0);
            for (const GridSpec& gs : {real_spec, shifted_spec}) {
                EvalGrid g = make_grid(gs, c.set);
                for (const MatrixXcd* pts : {&g.points, &rz}) {
                    MatrixXcd W = onb_at<cplx>(s, *pts);
                    VectorXd B = bergman(s, W);
                    VectorXd Bw = bergman(s, onb_at<cplx>(sw, *pts, Stage::weighted));
                    bmin = std::min(bmin, B.minCoeff());
                    VectorXd u = kernel_l1(s, W).array().log() / double(k);
                    VectorXd v = B.array().log() / (2.0 * k);
                    gap = std::max(gap, (u - v).maxCoeff() - std::log(double(N)) / (2.0 * k));
                    wgap = std::max(wgap, (Bw.array() / (double(N) * B.array())).maxCoeff());
                }
            }
            rep.lower("bergman-at-least-one[" + tag + "]", bmin, 1.0 - 1e-12);
            rep.upper("u-below-v-plus-bias[" + tag + "]", gap, 1e-12);
            rep.upper("weighted-bergman-bound[" + tag + "]", wgap, 1.0 + 1e-12);

            // sup over E of random polynomials against the mesh sup
            if (mesh.constant) {
                MatrixXd inside = detail::random_inside(c.set, 3000, rng);
                MatrixXd Vm = eval_basis<double>(s.basis, k, mesh.points), Ve = eval_basis<double>(s.basis, k, inside);
                std::normal_distribution<double> g;
                double worst = 0.0;
                for (int t = 0; t < 50; ++t) {
                    VectorXd coef(N);
                    for (Eigen::Index j = 0; j < N; ++j) coef(j) = g(rng);
                    double ratio = (Ve * coef).cwiseAbs().maxCoeff() / (Vm * coef).cwiseAbs().maxCoeff();
                    worst = std::max(worst, ratio);
                }
                rep.upper("sampling-inequality[" + tag + "]", worst, *mesh.constant + 0.05);
            }
        }
    }

    // Gram determinant against the discrete Vandermonde integral
    {
        std::uniform_real_distribution<double> u(-1, 1);
        MatrixXd p(9, 2);
        for (int i = 0; i < 9; ++i) p(i, 0) = u(rng), p(i, 1) = u(rng);
        double bf = brute_force_gram_integral(p, 2);
        double sv = std::exp(gram_log_det(p, 2, BasisSpec::monomial(), GramMethod::svd));
        rep.upper("gram-oracle", std::abs(sv - bf) / bf, 1e-10);
    }

    // density: adjugate and QR paths on random bundles
    {
        std::normal_distribution<double> g;
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            DerivativeBundle x{VectorXcd(12), MatrixXcd(12, 2)};
            for (int i = 0; i < 12; ++i) {
                x.b(i) = cplx(g(rng), g(rng));
                x.D(i, 0) = cplx(g(rng), g(rng));
                x.D(i, 1) = cplx(g(rng), g(rng));
            }
            double a = density_adjugate(x, 5), q = density_qr(x, 5).value;
            worst = std::max(worst, std::abs(a - q) / std::max(std::abs(a), std::abs(q)));
        }
        rep.upper("density-dual-path", worst, 1e-12);
    }

    // rho: (x+2)/(x+1) is reproduced by column 2
    {
        std::vector<double> x{1, 2, 3, 4, 5, 6}, sq;
        for (double t : x) sq.push_back((t + 2) / (t + 1));
        auto t = rho_scalar(sq, x);
        double worst = 0.0;
        for (const auto& e : t.col[2]) worst = std::max(worst, e ? std::abs(*e - 1.0) : 1.0);
        rep.upper("rho-rational-exactness", worst, 1e-12);
    }
    return rep;
}

}  // namespace pluripot::cli
