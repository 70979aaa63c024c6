#include <htbem/densities.hpp>
#include <htbem/holder.hpp>
#include <htbem/kernels.hpp>
#include <htbem/plane_mesh.hpp>

#include "doctest.h"

#include <cmath>

using namespace htbem;

namespace {

struct Fixture {
    GroupSpec h1;
    PanelMesh mesh;
    Fixture()
        : h1(make_prototype(GroupKind::heisenberg, 1)),
          mesh([this] {
              h1.c_q = calibrate_cq(h1);
              return build_plane_mesh(h1, make_plane_point(h1, {0.0, 0.0}), 1.0, 0.1);
          }()) {}
};

} // namespace

TEST_CASE("polynomial inputs are fitted exactly") {
    Fixture fx;
    PlaneFn poly = [](const PlanePoint& p) {
        double v = p.xhat(0), z = p.t(0);
        return 0.3 + 1.2 * v - 0.7 * v * v + 0.5 * z;
    };
    NormReport rep = gamma2alpha_estimate(fx.h1, poly, fx.mesh, {0.4, 0.2, 0.1}, 0.5);
    REQUIRE(!rep.fit_polynomials.empty());
    double worst = 0.0;
    for (const auto& fit : rep.fit_polynomials) worst = std::max(worst, fit.residual);
    CHECK(worst <= 1e-10);

    // The quadratic coefficient is base independent for this input, and the
    // reduced bracket vanishes on the first Heisenberg plane, so the fitted C
    // recovers it exactly everywhere.
    for (const auto& fit : rep.fit_polynomials) {
        CHECK(fit.C(0, 0) == doctest::Approx(-0.7).epsilon(1e-9));
        CHECK(fit.d(0) == doctest::Approx(0.5).epsilon(1e-9));
    }
}

TEST_CASE("finite difference route is sharp on an affine function") {
    Fixture fx;
    PlaneFn affine = [](const PlanePoint& p) { return 2.0 * p.xhat(0) - 3.0 * p.t(0); };
    NormReport rep = c2alpha_estimate(fx.h1, affine, fx.mesh, 0.5, 0.025);
    CHECK(rep.grad_sup == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.vertical_sup == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(rep.second_sup <= 1e-9);
    for (const auto& [label, value] : rep.alpha_seminorms) {
        (void)label;
        CHECK(value <= 1e-8);
    }
    // Total = sups + seminorms.
    CHECK(rep.c2alpha_total() ==
          doctest::Approx(rep.sup_norm + rep.grad_sup + rep.second_sup +
                          rep.vertical_sup)
              .epsilon(1e-8));
}

TEST_CASE("fitted coefficients obey the scaled sup bounds") {
    Fixture fx;
    Density d = make_density(fx.h1, "osc-bump", 0.8);
    NormReport rep = gamma2alpha_estimate(fx.h1, d.f, fx.mesh, {0.4, 0.2}, 0.5);
    double M = rep.sup_norm;
    REQUIRE(M > 0.0);
    // A bounded function admits fits whose coefficients scale like M, M/delta,
    // M/delta^2; the factor 8 leaves room for the anisotropic ball geometry.
    for (const auto& fit : rep.fit_polynomials) {
        double delta = fit.scale;
        double slack = 8.0 * (M + fit.residual);
        CHECK(std::abs(fit.a) <= slack);
        CHECK(fit.b.cwiseAbs().maxCoeff() <= slack / delta);
        CHECK(fit.C.cwiseAbs().maxCoeff() <= slack / (delta * delta));
        CHECK(fit.d.cwiseAbs().maxCoeff() <= slack / (delta * delta));
    }
}

TEST_CASE("pair quotient estimator basics") {
    Fixture fx;
    Eigen::VectorXd vals(fx.mesh.nodes.size());
    vals.setConstant(3.25);
    PlaneDistFn dist = [&](const PlanePoint& p, const PlanePoint& q) {
        return plane_distance(fx.h1, p, q, PlaneMetric::tilde);
    };
    CHECK(holder_alpha(fx.mesh.nodes, vals, dist, 0.5) == 0.0);

    // f = d(c, .)^alpha has quotient close to one near the diagonal; the
    // quasi-triangle constant of the gauge keeps it order one globally.
    PlanePoint c = make_plane_point(fx.h1, {0.0, 0.0});
    for (std::size_t i = 0; i < fx.mesh.nodes.size(); ++i)
        vals(i) = std::pow(plane_distance(fx.h1, c, fx.mesh.nodes[i]), 0.5);
    double q = holder_alpha(fx.mesh.nodes, vals, dist, 0.5);
    CHECK(q > 0.3);
    CHECK(q <= 3.0);
}

TEST_CASE("both norm routes agree up to a bounded factor") {
    Fixture fx;
    for (const char* name : {"bump", "poly-bump", "osc-bump"}) {
        Density d = make_density(fx.h1, name, 0.8);
        EquivalenceReport rep = equivalence_check(fx.h1, d.f, fx.mesh, 0.5);
        CHECK(rep.c2alpha_norm > 0.0);
        CHECK(rep.gamma_norm > 0.0);
        CHECK(rep.ratio >= 0.1);
        CHECK(rep.ratio <= 10.0);
    }
}
