#pragma once

#include "htbem/group.hpp"

#include <functional>
#include <vector>

namespace htbem {

// Graph-type boundary patch {x_1 = w(shat)} over the hyperplane, with shat
// collecting all remaining coordinates (xhat, t).  The flattening map
// (s1, shat) -> (s1 - w(shat), shat) straightens the patch; everything
// downstream (kernels, finite differences) works in the flattened chart and
// consults w analytically.  w must vanish to second order at the origin so the
// flattened plane stays tangent there.

struct GraphDomain {
    std::function<double(const Eigen::VectorXd&)> w;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_w;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess_w;
    double curvature_radius = 0.0; // w == 0 outside this Euclidean shat-radius

    bool trivial() const { return !w; }
};

// w(shat) = eps * |shat|^2 * (1 - |shat|^2/rho^2)^4 inside radius rho; smooth,
// compactly supported, quadratic at the origin.
GraphDomain make_quadratic_bump_domain(const GroupSpec& spec, double eps, double rho);

// Coefficients of the pushed-forward horizontal frame at a point of the
// flattened chart: fields[j] holds the (m+n) coefficients of the j-th field in
// the coordinate basis, and drift collects the first-order terms of sum f_j^2
// beyond the pure second-order part.  dom == nullptr gives the group frame
// (zero drift).
struct FrameData {
    std::vector<Eigen::VectorXd> fields;
    Eigen::VectorXd drift;
};
FrameData flattened_frame(const GroupSpec& spec, const GraphDomain* dom, const Point& pos);

// Physical <-> flattened coordinate change (identity when dom is null).
Point graph_to_physical(const GroupSpec& spec, const GraphDomain* dom, const Point& flat);
Point graph_to_flat(const GroupSpec& spec, const GraphDomain* dom, const Point& phys);

} // namespace htbem
