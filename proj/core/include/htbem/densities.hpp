#pragma once

#include "htbem/group.hpp"

#include <functional>
#include <string>
#include <vector>

namespace htbem {

// Named boundary densities.  Everything is Lipschitz and exactly compactly
// supported (the admissible class of the jump and invertibility statements);
// the suite spans constants, odd/even horizontal and vertical factors,
// oscillation, and off-center bumps so operator-norm proxies see some variety.

struct Density {
    std::string name;
    std::function<double(const PlanePoint&)> f;
    double support_radius = 0.0;
};

// C-infinity profile exp(1 - 1/(1 - rho^2)) on [0,1), 0 beyond; value 1 at 0.
double bump_profile(double rho);

// Names: "bump" (gauge-radial), "poly-bump" (v2 * bump), "vert-bump"
// (z1 * bump), "sym-bump" (reflection-symmetric, = gauge-radial bump),
// "osc-bump" (cos(3 v2) * bump), "offset-bump" (two shifted lumps).
Density make_density(const GroupSpec& spec, const std::string& name,
                     double support_radius);

// Deterministic 20-function test suite within the given support radius.
std::vector<Density> density_suite(const GroupSpec& spec, double support_radius,
                                   int count = 20);

} // namespace htbem
