// Microbenchmarks for the hot paths: pointwise kernel evaluation, mesh
// construction, operator assembly, and the density solve.  Sizes are chosen
// so a full pass stays in the seconds range; these are for relative tracking,
// not absolute throughput claims.

#include <htbem/densities.hpp>
#include <htbem/kernels.hpp>
#include <htbem/layer_ops.hpp>
#include <htbem/plane_mesh.hpp>

#include <benchmark/benchmark.h>

using namespace htbem;

namespace {

const GroupSpec& h1() {
    static GroupSpec g = [] {
        GroupSpec s = make_prototype(GroupKind::heisenberg, 1);
        s.c_q = calibrate_cq(s);
        return s;
    }();
    return g;
}

const GroupSpec& quat() {
    static GroupSpec g = [] {
        GroupSpec s = make_prototype(GroupKind::quaternionic);
        s.c_q = calibrate_cq(s);
        return s;
    }();
    return g;
}

PlanePoint origin(const GroupSpec& g) {
    PlanePoint p;
    p.xhat = Eigen::VectorXd::Zero(g.m - 1);
    p.t = Eigen::VectorXd::Zero(g.n);
    return p;
}

void bm_boundary_kernel(benchmark::State& state, const GroupSpec& g) {
    PlanePoint a = origin(g), b = origin(g);
    b.xhat(0) = 0.37;
    b.t(0) = 0.11;
    for (auto _ : state) {
        benchmark::DoNotOptimize(boundary_kernel(g, a, b).value);
        b.xhat(0) += 1e-12; // defeat value caching without changing the cost
    }
}

void bm_gradient(benchmark::State& state, const GroupSpec& g) {
    Point xi = make_point(g, {0.3, 0.1, 0.05});
    Point eta;
    eta.x = Eigen::VectorXd::Zero(g.m);
    eta.t = Eigen::VectorXd::Zero(g.n);
    if (g.m > 2) {
        xi.x = Eigen::VectorXd::Zero(g.m);
        xi.t = Eigen::VectorXd::Zero(g.n);
        xi.x(0) = 0.3, xi.x(1) = 0.1, xi.t(0) = 0.05;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(grad_gamma_h(g, xi, eta, DerivativeSide::second));
        xi.x(0) += 1e-12;
    }
}

void bm_mesh_build(benchmark::State& state) {
    const double h = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) {
        PanelMesh mesh = build_plane_mesh(h1(), origin(h1()), 1.0, h);
        benchmark::DoNotOptimize(mesh.nodes.size());
    }
}

void bm_assemble_K(benchmark::State& state) {
    const double h = 1.0 / static_cast<double>(state.range(0));
    PanelMesh mesh = build_plane_mesh(h1(), origin(h1()), 1.0, h);
    for (auto _ : state) {
        BoundaryOperator K = assemble_K(h1(), mesh);
        benchmark::DoNotOptimize(K.matrix.norm());
    }
    state.counters["nodes"] = static_cast<double>(mesh.nodes.size());
}

void bm_solve(benchmark::State& state) {
    const double h = 1.0 / static_cast<double>(state.range(0));
    PanelMesh mesh = build_plane_mesh(h1(), origin(h1()), 1.0, h);
    BoundaryOperator K = assemble_K(h1(), mesh);
    Density d = make_density(h1(), "bump", 0.8);
    BoundaryFunction g = sample_density(mesh, d.f, 0.8);
    for (auto _ : state) {
        BoundaryFunction phi = solve_density(K, nullptr, g, SolveMode::direct);
        benchmark::DoNotOptimize(phi.values.norm());
    }
    state.counters["nodes"] = static_cast<double>(mesh.nodes.size());
}

} // namespace

BENCHMARK_CAPTURE(bm_boundary_kernel, heisenberg1, h1());
BENCHMARK_CAPTURE(bm_boundary_kernel, quaternionic, quat());
BENCHMARK_CAPTURE(bm_gradient, heisenberg1, h1());
BENCHMARK_CAPTURE(bm_gradient, quaternionic, quat());
BENCHMARK(bm_mesh_build)->Arg(10)->Arg(20);
BENCHMARK(bm_assemble_K)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_solve)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
