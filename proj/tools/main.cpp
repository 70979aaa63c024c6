// Command line front end for the layer-potential stack: group validation,
// kernel calibration, the Dirichlet solve pipeline, and the measurement
// harnesses (jump limits, mesh convergence, norm equivalence, reflection).
// Every run that produces artifacts drops a manifest.txt with the config
// hash and the pinned tolerances, and CSV output uses %.17g so repeated runs
// are byte-identical.
//
// Exit codes: 0 success, 1 failed check, 2 usage or configuration error.

#include "CLI11.hpp"

#include <htbem/config.hpp>
#include <htbem/csv.hpp>
#include <htbem/densities.hpp>
#include <htbem/group.hpp>
#include <htbem/holder.hpp>
#include <htbem/kernels.hpp>
#include <htbem/layer_ops.hpp>
#include <htbem/plane_mesh.hpp>
#include <htbem/sphere_quadrature.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace htbem;

namespace {

struct Common {
    std::string config_path;
    std::string out_override;
    std::int64_t seed = -1;
    int threads = -1;
    bool allow_invalid = false;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
    auto* opt = cmd->add_option("--config", c.config_path, "experiment config file");
    if (config_required) opt->required();
    cmd->add_option("--out", c.out_override, "output directory, overrides output.dir");
    cmd->add_option("--seed", c.seed, "rng seed, overrides run.seed");
    cmd->add_option("--threads", c.threads, "worker threads, overrides run.threads");
    cmd->add_flag("--allow-invalid", c.allow_invalid,
                  "accept group files that fail structure validation");
}

struct Loaded {
    ConfigMap raw;
    ExperimentConfig cfg;
    GroupSpec group;
};

Loaded load_experiment(const Common& c) {
    Loaded L;
    L.raw = parse_config_file(c.config_path);
    L.cfg = load_experiment_config(L.raw);
    if (!c.out_override.empty()) L.cfg.out_dir = c.out_override;
    if (c.seed >= 0) L.cfg.seed = static_cast<uint64_t>(c.seed);
    if (c.threads >= 0) L.cfg.threads = c.threads;
    if (c.allow_invalid) L.cfg.allow_invalid = true;
    L.cfg.validate();
#ifdef _OPENMP
    if (L.cfg.threads > 0) omp_set_num_threads(L.cfg.threads);
#endif
    L.group = resolve_group(L.cfg.group, L.cfg.allow_invalid);
    return L;
}

PlanePoint mesh_center_of(const Loaded& L) {
    PlanePoint p;
    p.xhat = Eigen::VectorXd::Zero(L.group.m - 1);
    p.t = Eigen::VectorXd::Zero(L.group.n);
    p.level = 0.0;
    const auto& c = L.cfg.mesh_center;
    if (c.empty()) return p;
    if (static_cast<int>(c.size()) != (L.group.m - 1) + L.group.n)
        throw std::invalid_argument("mesh.center needs (m-1)+n coordinates");
    for (int i = 0; i < L.group.m - 1; ++i) p.xhat(i) = c[i];
    for (int k = 0; k < L.group.n; ++k) p.t(k) = c[L.group.m - 1 + k];
    return p;
}

std::vector<Point> probe_points(const Loaded& L) {
    std::vector<Point> out;
    for (const auto& row : L.cfg.probes) {
        if (static_cast<int>(row.size()) != L.group.m + L.group.n)
            throw std::invalid_argument("probes.pN needs m+n coordinates");
        Point p;
        p.x = Eigen::VectorXd(L.group.m);
        p.t = Eigen::VectorXd(L.group.n);
        for (int i = 0; i < L.group.m; ++i) p.x(i) = row[i];
        for (int k = 0; k < L.group.n; ++k) p.t(k) = row[L.group.m + k];
        out.push_back(std::move(p));
    }
    return out;
}

SolveMode mode_of(const std::string& s) {
    if (s == "direct") return SolveMode::direct;
    if (s == "homotopy") return SolveMode::homotopy;
    return SolveMode::automatic;
}

// Load a group without validating, for commands whose whole point is to
// report on validity.
GroupSpec load_raw_group(const std::string& name_or_path) {
    if (name_or_path == "quaternionic") return make_prototype(GroupKind::quaternionic);
    if (name_or_path.rfind("heisenberg", 0) == 0)
        return make_prototype(GroupKind::heisenberg,
                              std::stoi(name_or_path.substr(10)));
    return load_group_spec(name_or_path, /*allow_invalid=*/true);
}

fs::path ensure_out_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

void write_manifest(const fs::path& dir, const std::string& command, const Loaded* L,
                    const std::vector<std::pair<std::string, std::string>>& extra,
                    const std::vector<std::string>& outputs) {
    std::ofstream out(dir / "manifest.txt");
    out << "command " << command << "\n";
    if (L) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(config_hash(L->raw)));
        out << "config_hash " << buf << "\n";
        out << "group " << group_name(L->group) << "\n";
        out << "mesh_R " << format_real(L->cfg.mesh_R) << "\n";
        out << "mesh_h " << format_real(L->cfg.mesh_h) << "\n";
        out << "density " << L->cfg.density << " support "
            << format_real(L->cfg.density_support) << "\n";
        out << "solver " << L->cfg.solver_mode << " tol "
            << format_real(L->cfg.solver_tol) << "\n";
        out << "seed " << L->cfg.seed << "\n";
    }
    for (const auto& [k, v] : extra) out << k << " " << v << "\n";
    for (const auto& o : outputs) out << "output " << o << "\n";
}

// --------------------------------------------------------------------------

int cmd_verify_group(const std::string& name, bool allow_invalid) {
    GroupSpec g = load_raw_group(name);
    ValidationReport rep = validate_h_type(g);
    std::printf("group %s: m=%d n=%d Q=%d\n", group_name(g).c_str(), g.m, g.n, g.q);
    std::printf("  skew defect        %.3e\n", rep.max_skew_defect);
    std::printf("  orthogonal defect  %.3e\n", rep.max_orth_defect);
    std::printf("  anticommute defect %.3e\n", rep.max_anticomm_defect);
    std::printf("  bracket rank on the hypersurface: %d (expect %d)\n",
                rep.hoermander_rank_on_plane, (g.m - 1) + g.n);
    for (const auto& d : rep.defects)
        std::printf("  defect: %s (%.3e)\n", d.what.c_str(), d.magnitude);
    std::printf("validation %s\n", rep.passed ? "PASS" : "FAIL");
    if (!rep.passed && allow_invalid)
        std::printf("(--allow-invalid set: downstream commands will accept this "
                    "group at your own risk)\n");
    return rep.passed ? 0 : 1;
}

int cmd_calibrate(const std::string& name, const std::string& out_dir) {
    const double tol = 1e-6;
    GroupSpec g = load_raw_group(name);
    ValidationReport rep = validate_h_type(g);
    if (!rep.passed) {
        std::fprintf(stderr, "calibrate: group fails validation, not calibrating\n");
        return 1;
    }
    g.c_q = calibrate_cq(g);
    std::printf("group %s: c_q = %s\n", group_name(g).c_str(),
                format_real(g.c_q).c_str());
    double worst = 0.0;
    std::vector<std::pair<double, double>> rows;
    for (double r : {0.5, 1.0, 2.0}) {
        const double flux = gauge_sphere_flux(g, r);
        rows.emplace_back(r, flux);
        worst = std::max(worst, std::abs(flux - 1.0));
        std::printf("  flux(r=%.1f) = %s\n", r, format_real(flux).c_str());
    }
    if (!out_dir.empty()) {
        fs::path dir = ensure_out_dir(out_dir);
        CsvWriter csv((dir / "calibration.csv").string(), {"r", "flux"});
        for (auto [r, f] : rows) csv.write_row({r, f});
        std::ofstream man(dir / "manifest.txt");
        man << "command calibrate\ngroup " << group_name(g) << "\nc_q "
            << format_real(g.c_q) << "\nflux_tol " << format_real(tol)
            << "\noutput calibration.csv\n";
    }
    std::printf("max |flux - 1| = %.3e (tol %.0e): %s\n", worst, tol,
                worst <= tol ? "PASS" : "FAIL");
    return worst <= tol ? 0 : 1;
}

int cmd_solve(const Common& c) {
    Loaded L = load_experiment(c);
    std::vector<Point> probes = probe_points(L);
    if (probes.empty()) {
        std::fprintf(stderr, "solve: config defines no probes\n");
        return 2;
    }
    PanelMesh mesh =
        build_plane_mesh(L.group, mesh_center_of(L), L.cfg.mesh_R, L.cfg.mesh_h);
    Density d = make_density(L.group, L.cfg.density, L.cfg.density_support);
    BoundaryFunction g = sample_density(mesh, d.f, L.cfg.density_support);
    SolveReport rep =
        poisson_solve(L.group, nullptr, mesh, g, probes, mode_of(L.cfg.solver_mode));

    fs::path dir = ensure_out_dir(L.cfg.out_dir);
    std::vector<std::string> header = {"probe"};
    for (int i = 0; i < L.group.m; ++i) header.push_back("x" + std::to_string(i + 1));
    for (int k = 0; k < L.group.n; ++k) header.push_back("t" + std::to_string(k + 1));
    header.push_back("u");
    CsvWriter csv((dir / "solution.csv").string(), header);
    for (std::size_t i = 0; i < probes.size(); ++i) {
        std::vector<double> row = {static_cast<double>(i)};
        for (int a = 0; a < L.group.m; ++a) row.push_back(probes[i].x(a));
        for (int k = 0; k < L.group.n; ++k) row.push_back(probes[i].t(k));
        row.push_back(rep.u_values(i));
        csv.write_row(row);
    }
    write_manifest(dir, "solve", &L,
                   {{"mesh_nodes", std::to_string(mesh.nodes.size())},
                    {"attainment", format_real(rep.boundary_attainment_err)},
                    {"residual", format_real(rep.stats.residual)}},
                   {"solution.csv"});

    std::printf("mesh N=%zu  residual %.2e  attainment %.4f\n", mesh.nodes.size(),
                rep.stats.residual, rep.boundary_attainment_err);
    for (std::size_t i = 0; i < probes.size(); ++i)
        std::printf("  u(probe %zu) = %s\n", i, format_real(rep.u_values(i)).c_str());
    return 0;
}

int cmd_eval(const Common& c) {
    // Field of the raw (unsolved) density: handy for kernel-level inspection.
    Loaded L = load_experiment(c);
    std::vector<Point> probes = probe_points(L);
    if (probes.empty()) {
        std::fprintf(stderr, "eval: config defines no probes\n");
        return 2;
    }
    PanelMesh mesh =
        build_plane_mesh(L.group, mesh_center_of(L), L.cfg.mesh_R, L.cfg.mesh_h);
    Density d = make_density(L.group, L.cfg.density, L.cfg.density_support);
    BoundaryFunction g = sample_density(mesh, d.f, L.cfg.density_support);

    fs::path dir = ensure_out_dir(L.cfg.out_dir);
    CsvWriter csv((dir / "eval.csv").string(), {"probe", "u"});
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const double u = eval_double_layer(L.group, mesh, g, probes[i]);
        csv.write_row({static_cast<double>(i), u});
        std::printf("  D[g](probe %zu) = %s\n", i, format_real(u).c_str());
    }
    write_manifest(dir, "eval", &L, {{"mesh_nodes", std::to_string(mesh.nodes.size())}},
                   {"eval.csv"});
    return 0;
}

int cmd_jump(const Common& c) {
    const double tol_frac = 1e-2;
    const std::vector<double> levels = {1.6e-2, 8e-3, 4e-3, 2e-3};
    Loaded L = load_experiment(c);
    std::vector<Point> probes = probe_points(L);
    if (probes.empty()) {
        std::fprintf(stderr, "jump: config defines no probes\n");
        return 2;
    }
    PanelMesh mesh =
        build_plane_mesh(L.group, mesh_center_of(L), L.cfg.mesh_R, L.cfg.mesh_h);
    BoundaryOperator K = assemble_K(L.group, mesh);
    Density d = make_density(L.group, L.cfg.density, L.cfg.density_support);
    BoundaryFunction g = sample_density(mesh, d.f, L.cfg.density_support);
    const double gmax = g.values.cwiseAbs().maxCoeff();

    fs::path dir = ensure_out_dir(L.cfg.out_dir);
    CsvWriter csv((dir / "jump.csv").string(),
                  {"probe", "level", "above", "below"});
    CsvWriter sum((dir / "jump_summary.csv").string(),
                  {"probe", "limit_above", "limit_below", "target_above",
                   "target_below", "rate"});
    double worst = 0.0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        // The jump limit lives on the surface: snap the probe's surface
        // projection to the nearest mesh node.
        PlanePoint q;
        q.xhat = probes[i].x.tail(L.group.m - 1);
        q.t = probes[i].t;
        q.level = 0.0;
        int best = 0;
        double dist = 1e300;
        for (std::size_t j = 0; j < mesh.nodes.size(); ++j) {
            const double dj =
                plane_distance(L.group, mesh.nodes[j], q, PlaneMetric::tilde);
            if (dj < dist) dist = dj, best = static_cast<int>(j);
        }
        JumpReport rep = jump_test(L.group, mesh, K, g, mesh.nodes[best], levels);
        for (std::size_t l = 0; l < levels.size(); ++l)
            csv.write_row({static_cast<double>(i), rep.levels[l],
                           rep.values_above[l], rep.values_below[l]});
        sum.write_row({static_cast<double>(i), rep.limit_above, rep.limit_below,
                       rep.target_above, rep.target_below, rep.observed_rate});
        worst = std::max({worst, std::abs(rep.limit_above - rep.target_above) / gmax,
                          std::abs(rep.limit_below - rep.target_below) / gmax});
    }
    write_manifest(dir, "jump", &L,
                   {{"levels", "1.6e-2 8e-3 4e-3 2e-3"},
                    {"limit_tol_frac", format_real(tol_frac)}},
                   {"jump.csv", "jump_summary.csv"});
    std::printf("worst one-sided limit error %.3e * ||g||oo (tol %.0e): %s\n", worst,
                tol_frac, worst <= tol_frac ? "PASS" : "FAIL");
    return worst <= tol_frac ? 0 : 1;
}

int cmd_convergence(const Common& c) {
    Loaded L = load_experiment(c);
    std::vector<Point> probes = probe_points(L);
    if (probes.empty()) {
        std::fprintf(stderr, "convergence: config defines no probes\n");
        return 2;
    }
    std::vector<double> hs;
    for (double f : {2.0, std::sqrt(2.0), 1.0}) {
        const double h = L.cfg.mesh_h * f;
        if (4.0 * h < L.cfg.mesh_R) hs.push_back(h);
    }
    if (hs.size() < 2) {
        std::fprintf(stderr, "convergence: mesh.h too coarse for a ladder under "
                             "mesh.radius\n");
        return 2;
    }
    Density d = make_density(L.group, L.cfg.density, L.cfg.density_support);
    PlanePoint center = mesh_center_of(L);

    fs::path dir = ensure_out_dir(L.cfg.out_dir);
    std::vector<std::string> header = {"h", "nodes", "attainment"};
    for (std::size_t i = 0; i < probes.size(); ++i)
        header.push_back("u" + std::to_string(i));
    CsvWriter csv((dir / "convergence.csv").string(), header);

    Eigen::VectorXd prev;
    for (double h : hs) {
        PanelMesh mesh = build_plane_mesh(L.group, center, L.cfg.mesh_R, h);
        BoundaryFunction g = sample_density(mesh, d.f, L.cfg.density_support);
        SolveReport rep = poisson_solve(L.group, nullptr, mesh, g, probes,
                                        mode_of(L.cfg.solver_mode));
        std::vector<double> row = {h, static_cast<double>(mesh.nodes.size()),
                                   rep.boundary_attainment_err};
        for (std::size_t i = 0; i < probes.size(); ++i)
            row.push_back(rep.u_values(i));
        csv.write_row(row);
        std::printf("h=%-8g N=%-6zu attainment %.4f", h, mesh.nodes.size(),
                    rep.boundary_attainment_err);
        if (prev.size() > 0)
            std::printf("  max probe shift %.3e",
                        (rep.u_values - prev).cwiseAbs().maxCoeff());
        std::printf("\n");
        prev = rep.u_values;
    }
    write_manifest(dir, "convergence", &L,
                   {{"levels", std::to_string(hs.size())}}, {"convergence.csv"});
    return 0;
}

int cmd_holder(const Common& c) {
    const double alpha = 0.5;
    Loaded L = load_experiment(c);
    PanelMesh mesh =
        build_plane_mesh(L.group, mesh_center_of(L), L.cfg.mesh_R, L.cfg.mesh_h);
    auto suite = density_suite(L.group, L.cfg.density_support);

    fs::path dir = ensure_out_dir(L.cfg.out_dir);
    CsvWriter csv((dir / "holder.csv").string(),
                  {"density", "c2alpha", "gamma", "ratio"});
    double rmin = 1e300, rmax = 0.0;
    for (const auto& d : suite) {
        EquivalenceReport rep = equivalence_check(L.group, d.f, mesh, alpha);
        csv.write_row({d.name}, {rep.c2alpha_norm, rep.gamma_norm, rep.ratio});
        rmin = std::min(rmin, rep.ratio);
        rmax = std::max(rmax, rep.ratio);
    }
    write_manifest(dir, "holder", &L, {{"alpha", format_real(alpha)}},
                   {"holder.csv"});
    std::printf("gamma/c2alpha ratio range over %zu densities: [%.4f, %.4f]\n",
                suite.size(), rmin, rmax);
    return 0;
}

int cmd_reflect(const Common& c) {
    const double tol = 1e-12;
    Loaded L = load_experiment(c);
    PanelMesh mesh =
        build_plane_mesh(L.group, mesh_center_of(L), L.cfg.mesh_R, L.cfg.mesh_h);
    Density d = make_density(L.group, L.cfg.density, L.cfg.density_support);
    BoundaryFunction g = sample_density(mesh, d.f, L.cfg.density_support);
    const double r = 0.5 * L.cfg.mesh_R;
    auto [above, below] = reflection_check(L.group, mesh, g, r);
    const double gap = std::abs(above - below);

    fs::path dir = ensure_out_dir(L.cfg.out_dir);
    CsvWriter csv((dir / "reflect.csv").string(), {"r", "above", "below", "gap"});
    csv.write_row({r, above, below, gap});
    write_manifest(dir, "reflect", &L, {{"gap_tol", format_real(tol)}},
                   {"reflect.csv"});
    std::printf("parallel-plane norms at r=%.3f: %s / %s, gap %.3e (tol %.0e): %s\n",
                r, format_real(above).c_str(), format_real(below).c_str(), gap, tol,
                gap <= tol ? "PASS" : "FAIL");
    return gap <= tol ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"layer potential solver for Dirichlet problems on "
                 "Heisenberg-type groups"};
    app.require_subcommand(1);

    std::string group_name_arg;
    std::string calib_out;
    bool verify_allow_invalid = false;
    Common solve_c, eval_c, jump_c, conv_c, holder_c, reflect_c;

    auto* verify = app.add_subcommand("verify-group",
                                      "check the structure relations of a group");
    verify->add_option("--group", group_name_arg, "prototype name or spec file")
        ->required();
    verify->add_flag("--allow-invalid", verify_allow_invalid,
                     "report failures without signalling an error exit");

    auto* calib = app.add_subcommand("calibrate",
                                     "fix the fundamental solution constant by the "
                                     "unit flux condition");
    calib->add_option("--group", group_name_arg, "prototype name or spec file")
        ->required();
    calib->add_option("--out", calib_out, "output directory for calibration.csv");

    add_common(app.add_subcommand("solve", "density solve plus interior evaluation"),
               solve_c, true);
    add_common(app.add_subcommand("eval", "double layer field of the raw density"),
               eval_c, true);
    add_common(app.add_subcommand("jump", "two-sided boundary limits at the probes"),
               jump_c, true);
    add_common(app.add_subcommand("convergence", "solve across a mesh ladder"),
               conv_c, true);
    add_common(app.add_subcommand("holder", "norm equivalence over the density suite"),
               holder_c, true);
    add_common(app.add_subcommand("reflect", "mirror symmetry of the decoupled "
                                             "potentials"),
               reflect_c, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("verify-group"))
            return cmd_verify_group(group_name_arg, verify_allow_invalid) == 0
                       ? 0
                       : (verify_allow_invalid ? 0 : 1);
        if (app.got_subcommand("calibrate"))
            return cmd_calibrate(group_name_arg, calib_out);
        if (app.got_subcommand("solve")) return cmd_solve(solve_c);
        if (app.got_subcommand("eval")) return cmd_eval(eval_c);
        if (app.got_subcommand("jump")) return cmd_jump(jump_c);
        if (app.got_subcommand("convergence")) return cmd_convergence(conv_c);
        if (app.got_subcommand("holder")) return cmd_holder(holder_c);
        if (app.got_subcommand("reflect")) return cmd_reflect(reflect_c);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
