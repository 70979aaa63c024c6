#pragma once

#include "htbem/group.hpp"

#include <vector>

namespace htbem {

// Quadrature on the gauge sphere {|xi| = r}.  The sphere is parametrized by a
// polar angle splitting the horizontal and vertical radii,
//     x = r sqrt(cos th) w_x,   t = (r^2/4) sin th w_t,   th in [0, pi/2],
// tensored with rules on the two round spheres |w_x| = |w_t| = 1.  Weights
// carry the full surface measure; normals are Euclidean unit vectors.

struct SphereSurfaceNode {
    Point pos;
    double weight;                 // d(sigma) weight
    Eigen::VectorXd inward_normal; // length m+n, Euclidean unit
};

std::vector<SphereSurfaceNode> gauge_sphere_rule(const GroupSpec& spec, double r,
                                                 int theta_nodes = 64);

// Flux of the horizontal gradient of Gamma through the sphere, with respect to
// the inward normal (the orientation that makes the mean value weight
// nonnegative).  Requires a calibrated c_q and evaluates to 1 when calibrated.
double gauge_sphere_flux(const GroupSpec& spec, double r, int theta_nodes = 64);

// Gauss-Legendre nodes/weights on [a, b].
void gauss_legendre(int n, double a, double b, Eigen::VectorXd& x, Eigen::VectorXd& w);

// Surface area of the unit sphere S^{d-1} in R^d (d >= 1; |S^0| = 2).
double unit_sphere_area(int d);

// Antipodally symmetric cubature on S^{d-1} for d in {1, 2, 3, 4}: sign pair,
// equispaced circle, Gauss x trapezoid product.  Exactness grows with n.
void round_sphere_rule(int d, int n, std::vector<Eigen::VectorXd>& dirs,
                       std::vector<double>& weights);

} // namespace htbem
