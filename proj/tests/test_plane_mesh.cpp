#include <htbem/kernels.hpp>
#include <htbem/plane_mesh.hpp>

#include "doctest.h"

#include <cmath>

using namespace htbem;

namespace {

GroupSpec calibrated_h1() {
    GroupSpec spec = make_prototype(GroupKind::heisenberg, 1);
    spec.c_q = calibrate_cq(spec);
    return spec;
}

} // namespace

TEST_CASE("mesh lattice is dilation adapted") {
    GroupSpec h1 = calibrated_h1();
    PlanePoint c0 = make_plane_point(h1, {0.0, 0.0});
    PanelMesh mesh = build_plane_mesh(h1, c0, 0.5, 0.1);
    REQUIRE(mesh.nodes.size() > 0);
    for (const auto& node : mesh.nodes) {
        double iv = (node.xhat(0) - c0.xhat(0)) / mesh.h;
        double iz = (node.t(0) - c0.t(0)) / (mesh.h * mesh.h);
        CHECK(std::abs(iv - std::round(iv)) <= 1e-12);
        CHECK(std::abs(iz - std::round(iz)) <= 1e-12);
    }
    CHECK(mesh.find_node(Eigen::VectorXi::Zero(2)) >= 0);
    Eigen::VectorXi far(2);
    far << 1000, 0;
    CHECK(mesh.find_node(far) == -1);

    CHECK_THROWS_AS((void)build_plane_mesh(h1, c0, 0.5, 0.2), std::invalid_argument);
}

TEST_CASE("mirror pairing is exact") {
    GroupSpec h1 = calibrated_h1();
    PlanePoint c = make_plane_point(h1, {0.3, -0.1});
    PanelMesh mesh = build_plane_mesh(h1, c, 0.6, 0.06);
    REQUIRE(mesh.mirror_index.size() == mesh.nodes.size());
    double odd_sum = 0.0;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        int j = mesh.mirror_index[i];
        REQUIRE(j >= 0);
        CHECK(mesh.mirror_index[j] == static_cast<int>(i));
        // Mirrored lattice site, equal weight; vertical offsets flip too.
        CHECK(mesh.lattice[j](0) == -mesh.lattice[i](0));
        CHECK(mesh.weights[j] == mesh.weights[i]);
        odd_sum += mesh.weights[i] * (mesh.nodes[i].xhat(0) - c.xhat(0));
    }
    CHECK(std::abs(odd_sum) <= 1e-13);
}

TEST_CASE("patch measure: closed form and exact refinement scaling") {
    GroupSpec h1 = calibrated_h1();
    CHECK(plane_ball_measure(h1, 1.0) == doctest::Approx(0.87401918476404).epsilon(1e-10));
    GroupSpec qu = make_prototype(GroupKind::quaternionic);
    CHECK(plane_ball_measure(qu, 1.0) == doctest::Approx(0.13139077926521).epsilon(1e-10));
    // r^{Q-1} scaling of the closed form.
    CHECK(plane_ball_measure(h1, 2.0) ==
          doctest::Approx(std::pow(2.0, h1.q - 1) * plane_ball_measure(h1, 1.0))
              .epsilon(1e-14));

    // The mesh total mass approximates the ball and scales exactly under the
    // joint dilation (R, h) -> (2R, 2h), because the lattice dilates onto itself.
    PlanePoint c0 = make_plane_point(h1, {0.0, 0.0});
    PanelMesh m1 = build_plane_mesh(h1, c0, 1.0, 0.05);
    PanelMesh m2 = build_plane_mesh(h1, c0, 2.0, 0.10);
    CHECK(m1.total_weight() == doctest::Approx(plane_ball_measure(h1, 1.0)).epsilon(5e-3));
    CHECK(m2.total_weight() ==
          doctest::Approx(std::pow(2.0, h1.q - 1) * m1.total_weight()).epsilon(1e-12));
}

TEST_CASE("gauge circle length is linear in the radius") {
    GroupSpec h1 = calibrated_h1();
    CHECK(ball_perimeter(h1, 1.0) == doctest::Approx(6.75854392071443).epsilon(1e-10));
    CHECK(ball_perimeter(h1, 3.5) ==
          doctest::Approx(3.5 * ball_perimeter(h1, 1.0)).epsilon(1e-14));
    GroupSpec qu = make_prototype(GroupKind::quaternionic);
    CHECK_THROWS_AS((void)ball_perimeter(qu, 1.0), std::invalid_argument);
}

TEST_CASE("annulus rule stays inside its annulus with positive weights") {
    GroupSpec h1 = calibrated_h1();
    AnnulusRule rule = annulus_rule(h1, 0.5, 1.0, 8, 16, 8);
    REQUIRE(rule.nodes.size() == rule.weights.size());
    REQUIRE(!rule.nodes.empty());
    PlanePoint origin = make_plane_point(h1, {0.0, 0.0});
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        CHECK(rule.weights[i] > 0.0);
        double d = plane_distance(h1, origin, rule.nodes[i], PlaneMetric::tilde);
        CHECK(d >= 0.5 - 1e-12);
        CHECK(d <= 1.0 + 1e-12);
    }
}

TEST_CASE("odd moments of the boundary kernel vanish exactly on shells") {
    GroupSpec h1 = calibrated_h1();
    PlanePoint c = make_plane_point(h1, {0.0, 0.0});
    auto khat = [&](const PlanePoint& a, const PlanePoint& b) {
        return boundary_kernel(h1, a, b).value;
    };
    // The rule is symmetric under both single-axis flips and the kernel is odd
    // under each, so the quadrature cancels these integrals identically, not
    // just to tolerance.
    CHECK(shell_quadrature(h1, khat, c, 0.5, 1.0, 0.0) == 0.0);
    auto k_v = [&](const PlanePoint& a, const PlanePoint& b) {
        return khat(a, b) * (b.xhat(0) - a.xhat(0));
    };
    auto k_z = [&](const PlanePoint& a, const PlanePoint& b) {
        return khat(a, b) * (b.t(0) - a.t(0));
    };
    auto k_vv = [&](const PlanePoint& a, const PlanePoint& b) {
        double v = b.xhat(0) - a.xhat(0);
        return khat(a, b) * v * v;
    };
    CHECK(shell_quadrature(h1, k_v, c, 0.5, 1.0, 0.0) == 0.0);
    CHECK(shell_quadrature(h1, k_z, c, 0.5, 1.0, 0.0) == 0.0);
    CHECK(shell_quadrature(h1, k_vv, c, 0.5, 1.0, 0.0) == 0.0);
}

TEST_CASE("shell averages of |boundary kernel| are dilation invariant") {
    GroupSpec h1 = calibrated_h1();
    PlanePoint c = make_plane_point(h1, {0.0, 0.0});
    auto abs_k = [&](const PlanePoint& a, const PlanePoint& b) {
        return std::abs(boundary_kernel(h1, a, b).value);
    };
    auto one = [](const PlanePoint&, const PlanePoint&) { return 1.0; };
    auto mean_kd3 = [&](double r) {
        double num = shell_quadrature(h1, abs_k, c, r, 2.0 * r, 3.0);
        double den = shell_quadrature(h1, one, c, r, 2.0 * r, 0.0);
        return num / den;
    };
    double base = mean_kd3(1.0);
    CHECK(base == doctest::Approx(0.121397).epsilon(1e-4));
    CHECK(mean_kd3(0.5) == doctest::Approx(base).epsilon(1e-7));
    CHECK(mean_kd3(2.0) == doctest::Approx(base).epsilon(1e-7));
}
