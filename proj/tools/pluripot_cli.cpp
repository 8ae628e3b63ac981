#include "cli_parse.hpp"
#include "probe.hpp"

#include <pluripot/pluripot.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <new>
#include <random>

namespace fs = std::filesystem;
using namespace pluripot;
using namespace pluripot::cli;

namespace {

struct Common {
    std::string set = "square";
    std::string out_dir;
    std::uint32_t seed = 1;
    bool no_timing = false;
};

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw DomainError("cannot write " + p.string());
    os << std::setprecision(17);
    return os;
}

void emit(const json& j, const std::string& path) {
    if (!path.empty()) open_out(path) << j.dump(2) << '\n';
    std::cout << j.dump(2) << '\n';
}

// one row per grid point, one value column per entry of cols
void write_values_csv(const fs::path& p, const EvalGrid& g, const std::vector<std::string>& names,
                      const std::vector<VectorXd>& cols, const VectorXd* ref) {
    auto os = open_out(p);
    os << "re_z1,im_z1,re_z2,im_z2,inside";
    for (const auto& n : names) os << ',' << n;
    os << (ref ? ",reference" : "") << '\n';
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        os << g.points(i, 0).real() << ',' << g.points(i, 0).imag() << ',' << g.points(i, 1).real() << ','
           << g.points(i, 1).imag() << ',' << int(g.inside[i]);
        for (const auto& v : cols) os << ',' << v(i);
        if (ref) os << ',' << (*ref)(i);
        os << '\n';
    }
}

json metrics_json(const ErrorMetrics& m) { return {{"e1", m.e1}, {"e1_rel", opt(m.e1_rel)}, {"e_inf", m.e_inf}}; }

int cmd_mesh(const Common& c, int degree, double oversampling, const std::string& variant, const std::string& out) {
    CompactSet set = parse_set(c.set);
    Mesh m;
    if (variant.empty()) {
        m = mesh_generator(set, oversampling)(degree);
    } else if (variant == "cl" && std::holds_alternative<Box>(set.shape)) {
        m = td_mesh(set, degree);
    } else if (variant == "td-polar" && std::holds_alternative<Disk>(set.shape)) {
        m = td_mesh(set, degree);
    } else if (variant == "lobatto-polar" && std::holds_alternative<Disk>(set.shape)) {
        m = default_mesh(set, degree);
    } else {
        throw DomainError("mesh variant '" + variant + "' does not apply to set '" + c.set + "'");
    }
    if (out.empty()) {
        write_mesh_csv(std::cout, m.points);
        return 0;
    }
    auto os = open_out(out);
    write_mesh_csv(os, m.points);
    json side{{"set", c.set}, {"k", degree}, {"cardinality", m.size()}, {"constant", opt(m.constant)}, {"source", m.source}};
    open_out(out + ".json") << side.dump(2) << '\n';
    return 0;
}

int cmd_extremal(const Common& c, const std::string& method_s, const std::string& quantity_s,
                 const std::string& degrees_s, const std::string& grid_s, const std::string& shift_s, bool errors,
                 const std::string& accel_s, double oversampling) {
    CompactSet set = parse_set(c.set);
    Method method = parse_method(method_s);
    Quantity q = parse_quantity(quantity_s);
    auto degrees = parse_degrees(degrees_s);
    std::optional<RhoSelector> accel;
    if (!accel_s.empty()) accel = parse_rho_selector(accel_s);
    EvalGrid grid = make_grid(parse_grid(grid_s, shift_s), set);
    std::optional<VectorXd> ref;
    if (errors) {
        if (!has_reference(set)) throw NoReferenceError("set '" + c.set + "' has no closed-form extremal function");
        ref = reference_extremal(set, grid.points);
    }

    auto res = extremal_sequence(mesh_generator(set, oversampling), grid, degrees, method, q);

    json rep;
    rep["set"] = c.set;
    rep["method"] = method_s;
    rep["quantity"] = quantity_s;
    rep["degrees"] = degrees;
    rep["grid_points"] = grid.size();
    rep["outside_points"] = grid.outside_count();
    if (errors) {
        json per = json::array();
        for (const auto& v : res.values) per.push_back(metrics_json(error_metrics(v, *ref, grid)));
        rep["errors"] = per;
    }
    json ratios = json::array();
    if (grid.outside_count() > 0)
        for (const auto& s : ratio_sequence(res.values, grid)) ratios.push_back(opt(s));
    rep["s_k"] = ratios;

    std::vector<VectorXd> accelerated;
    if (accel) {
        std::vector<double> nodes(degrees.begin(), degrees.end());
        if (degrees.size() < 2) throw DomainError("acceleration needs at least two degrees");
        auto sel = select(rho_vector(res.values, nodes), *accel);
        json a;
        a["selector"] = accel_s;
        a["rows"] = sel.rows;
        if (errors) {
            json per = json::array();
            for (const auto& v : sel.values) per.push_back(metrics_json(error_metrics(v, *ref, grid)));
            a["errors"] = per;
        }
        rep["accelerated"] = a;
        accelerated = sel.values;
    }

    if (!c.out_dir.empty()) {
        fs::path dir(c.out_dir);
        const VectorXd* r = ref ? &*ref : nullptr;
        std::vector<std::string> names;
        for (int k : degrees) names.push_back("value_k" + std::to_string(k));
        write_values_csv(dir / "values.csv", grid, names, res.values, r);
        if (!accelerated.empty()) {
            names.clear();
            for (std::size_t i = 0; i < accelerated.size(); ++i) names.push_back("accelerated_" + std::to_string(i));
            write_values_csv(dir / "accelerated.csv", grid, names, accelerated, r);
        }
    }
    emit(rep, c.out_dir.empty() ? "" : (fs::path(c.out_dir) / "report.json").string());
    return 0;
}

int cmd_transfinite(const Common& c, const std::string& degrees_s, const std::string& accel_s) {
    CompactSet set = parse_set(c.set);
    auto degrees = parse_degrees(degrees_s);
    std::optional<RhoSelector> accel;
    if (!accel_s.empty()) accel = parse_rho_selector(accel_s);
    TDEstimate r = td_sequence(set, degrees, accel);
    json j;
    j["set"] = c.set;
    j["degrees"] = r.degrees;
    j["raw"] = r.raw;
    j["reference"] = opt(r.reference);
    j["abs_err"] = r.abs_err;
    j["rel_err"] = r.rel_err;
    if (accel) {
        j["accelerated"] = {{"selector", accel_s},
                            {"rows", r.accelerated_rows},
                            {"values", r.accelerated},
                            {"abs_err", r.accelerated_abs_err}};
    }
    if (!c.no_timing) j["wall_time_s"] = r.wall_time_s;
    emit(j, c.out_dir.empty() ? "" : (fs::path(c.out_dir) / "transfinite.json").string());
    return 0;
}

// max relative spread of the density over circles about the disk center
json radial_symmetry(const OrthoState& s, const Disk& d, Stage stage) {
    const int nang = 24;
    const std::vector<double> radii{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    MatrixXcd pts(radii.size() * nang, 2);
    for (std::size_t r = 0; r < radii.size(); ++r)
        for (int a = 0; a < nang; ++a) {
            double t = 2.0 * std::numbers::pi * a / nang;
            pts(r * nang + a, 0) = d.center[0] + d.radius * radii[r] * std::cos(t);
            pts(r * nang + a, 1) = d.center[1] + d.radius * radii[r] * std::sin(t);
        }
    auto bundles = derivative_bundles(s, pts, stage);
    double worst = 0.0;
    json profile = json::array();
    for (std::size_t r = 0; r < radii.size(); ++r) {
        double lo = 1e300, hi = -1e300;
        for (int a = 0; a < nang; ++a) {
            double v = density_qr(bundles[r * nang + a], s.degree).value;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        worst = std::max(worst, (hi - lo) / std::max(std::abs(hi), 1e-300));
        profile.push_back({{"radius", radii[r]}, {"density", hi}});
    }
    return {{"max_rel_spread", worst}, {"profile", profile}};
}

int cmd_equilibrium(const Common& c, int degree, const std::string& grid_s, const std::string& shift_s, bool normalize,
                    const std::string& method_s, int oracle_points, double oversampling) {
    CompactSet set = parse_set(c.set);
    Method method = parse_method(method_s);
    EvalGrid grid = make_grid(parse_grid(grid_s, shift_s), set);
    if (!grid.real()) throw GridConfigError("equilibrium densities are evaluated on real grids only");
    OrthoState s = prepare_state(mesh_generator(set, oversampling)(degree), degree, method);
    const Stage stage = method == Method::szef_bw ? Stage::weighted : Stage::plain;
    DensityField f = equilibrium_density(s, grid, normalize, stage);

    json rep;
    rep["set"] = c.set;
    rep["degree"] = degree;
    rep["method"] = method_s;
    rep["grid_points"] = grid.size();
    rep["min_raw"] = f.raw.minCoeff();
    rep["fallbacks"] = f.fallbacks;
    rep["cell_area"] = f.cell_area;
    rep["mass_inside"] = compensated_sum(f.restricted) * f.cell_area;

    // finite-difference complex Hessian of v_k at seeded interior points
    std::mt19937 rng(c.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    json oracle = json::array();
    double worst = 0.0;
    const auto& ax = grid.spec.axes;
    RealFunction vk = [&](const VectorXcd& z) {
        MatrixXcd p = z.transpose();
        return extremal_values(s, p, method, false).v(0);
    };
    for (int t = 0, tries = 0; t < oracle_points && tries < 100000; ++tries) {
        Eigen::Vector2cd z(ax[0].min + (ax[0].max - ax[0].min) * u(rng), ax[1].min + (ax[1].max - ax[1].min) * u(rng));
        if (membership(set, z) != Membership::inside) continue;
        MatrixXcd p = z.transpose();
        auto b = derivative_bundles(s, p, stage)[0];
        double eta = density_qr(b, degree).value, adj = density_adjugate(b, degree);
        auto fd = fd_hessian_density(vk, z);
        double rel = std::abs(fd.value - eta) / std::max(std::abs(eta), 1e-300);
        worst = std::max(worst, rel);
        oracle.push_back({{"x", z(0).real()},
                          {"y", z(1).real()},
                          {"density", eta},
                          {"adjugate", adj},
                          {"fd", fd.value},
                          {"fd_precision_warning", fd.precision_warning},
                          {"rel_err", rel}});
        ++t;
    }
    rep["oracle"] = {{"points", oracle}, {"max_rel_err", worst}};
    if (const Disk* d = std::get_if<Disk>(&set.shape)) rep["radial_symmetry"] = radial_symmetry(s, *d, stage);

    if (!c.out_dir.empty()) {
        auto os = open_out(fs::path(c.out_dir) / "density.csv");
        os << "x,y,inside,raw,restricted" << (f.normalized ? ",normalized" : "") << '\n';
        for (Eigen::Index i = 0; i < grid.size(); ++i) {
            os << grid.points(i, 0).real() << ',' << grid.points(i, 1).real() << ',' << int(grid.inside[i]) << ','
               << f.raw(i) << ',' << f.restricted(i);
            if (f.normalized) os << ',' << (*f.normalized)(i);
            os << '\n';
        }
    }
    emit(rep, c.out_dir.empty() ? "" : (fs::path(c.out_dir) / "equilibrium.json").string());
    return 0;
}

int cmd_fekete(const Common& c, int degree, int mesh_degree) {
    CompactSet set = parse_set(c.set);
    if (mesh_degree == 0) mesh_degree = degree;
    Mesh m = default_mesh(set, mesh_degree);
    FeketeSelection f = afp_extract(m, degree);
    MatrixXd p(f.indices.size(), 2);
    for (std::size_t i = 0; i < f.indices.size(); ++i) p.row(i) = m.points.row(f.indices[i]);
    if (!c.out_dir.empty()) {
        auto os = open_out(fs::path(c.out_dir) / "fekete.csv");
        write_mesh_csv(os, p);
    }
    json j{{"set", c.set},
           {"degree", degree},
           {"mesh_degree", mesh_degree},
           {"mesh_points", m.size()},
           {"count", f.indices.size()},
           {"log_abs_det", f.log_abs_det},
           {"indices", f.indices}};
    emit(j, c.out_dir.empty() ? "" : (fs::path(c.out_dir) / "fekete.json").string());
    return 0;
}

int fail(int code, const std::string& kind, const std::string& what) {
    std::cerr << "error: " << kind << ": " << what << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete pluripotential theory: extremal functions, transfinite diameters, equilibrium densities"};
    Common c;
    bool probe = false;
    app.add_flag("--probe", probe, "Run the invariant suite and print a pass/fail JSON");
    app.add_option("--seed", c.seed, "Seed for randomized probes and oracle points");
    app.add_flag("--no-timing", c.no_timing, "Omit wall-clock fields so output is byte-reproducible");
    app.require_subcommand(0, 1);

    int degree = 1, mesh_degree = 0, oracle_points = 10;
    double oversampling = 2.0;
    std::string variant, out, method = "szef", quantity = "v", degrees = "4:2:12", grid = "x:-2:2:100,y:-2:2:100",
                         shift, accel;
    bool errors = false, normalize = false;

    auto set_opt = [&](CLI::App* s) {
        s->add_option("--set", c.set, "square | box:x0:x1:y0:y1 | disk[:cx:cy:r] | simplex | polygon:m[:R]");
    };
    std::vector<CLI::Option*> accel_flags;
    auto accel_opt = [&](CLI::App* s) {
        accel_flags.push_back(
            s->add_option("--accelerate", accel, "Rho selection: diagonal (when bare) or column:j, 1-based")->expected(0, 1));
    };

    auto* mesh = app.add_subcommand("mesh", "Write an admissible mesh as CSV");
    set_opt(mesh);
    mesh->add_option("--degree", degree)->required();
    mesh->add_option("--oversampling", oversampling, "Square mesh oversampling factor (>= 2)");
    mesh->add_option("--variant", variant, "cl (square) or lobatto-polar / td-polar (disk)");
    mesh->add_option("--out", out, "CSV path; a JSON sidecar is written next to it");

    auto* ext = app.add_subcommand("extremal", "Approximate the extremal function on a grid");
    set_opt(ext);
    ext->add_option("--method", method, "szef or szef-bw");
    ext->add_option("--quantity", quantity, "u or v");
    ext->add_option("--degrees", degrees, "start:step:end");
    ext->add_option("--grid", grid, "x:min:max:count,y:min:max:count");
    ext->add_option("--imag-shift", shift, "Imaginary shift per axis, e.g. 0.1,0.1");
    ext->add_flag("--errors", errors, "Compare with the closed-form extremal function");
    accel_opt(ext);
    ext->add_option("--oversampling", oversampling);
    ext->add_option("--out-dir", c.out_dir, "Directory for value CSVs and report.json");

    auto* td = app.add_subcommand("transfinite", "Estimate the transfinite diameter");
    set_opt(td);
    td->add_option("--degrees", degrees, "start:step:end");
    accel_opt(td);
    td->add_option("--out-dir", c.out_dir);

    auto* eq = app.add_subcommand("equilibrium", "Equilibrium density on a real grid");
    set_opt(eq);
    eq->add_option("--degree", degree)->required();
    eq->add_option("--grid", grid, "x:min:max:count,y:min:max:count");
    eq->add_option("--imag-shift", shift);
    eq->add_flag("--normalize", normalize, "Normalize the restricted density to unit mass");
    eq->add_option("--method", method, "szef or szef-bw");
    eq->add_option("--oracle-points", oracle_points, "Interior points compared with the finite-difference Hessian");
    eq->add_option("--oversampling", oversampling);
    eq->add_option("--out-dir", c.out_dir, "Directory for density.csv and equilibrium.json");

    auto* fk = app.add_subcommand("fekete", "Approximate Fekete points by greedy extraction");
    set_opt(fk);
    fk->add_option("--degree", degree)->required();
    fk->add_option("--mesh-degree", mesh_degree, "Build the candidate mesh for this degree (default: --degree)");
    fk->add_option("--out-dir", c.out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(2, "usage", e.what());
    }
    for (auto* o : accel_flags)
        if (o->count() > 0 && accel.empty()) accel = "diagonal";

    try {
        if (probe) {
            auto rep = run_probe(c.seed);
            std::cout << rep.to_json().dump(2) << '\n';
            return rep.pass() ? 0 : 1;
        }
        if (*mesh) return cmd_mesh(c, degree, oversampling, variant, out);
        if (*ext) return cmd_extremal(c, method, quantity, degrees, grid, shift, errors, accel, oversampling);
        if (*td) return cmd_transfinite(c, degrees, accel);
        if (*eq) return cmd_equilibrium(c, degree, grid, shift, normalize, method, oracle_points, oversampling);
        if (*fk) return cmd_fekete(c, degree, mesh_degree);
        return fail(2, "usage", "no subcommand given (try --help)");
    } catch (const Error& e) {
        return fail(e.numerical() ? 3 : 2, e.kind(), e.what());
    } catch (const std::bad_alloc&) {
        return fail(3, "memory", "out of memory; reduce the degree or the mesh size");
    }
}
