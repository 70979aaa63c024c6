#pragma once

#include "htbem/group.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace htbem {

// Dilation-adapted tensor mesh on a truncated gauge ball of the hypersurface
// Pi.  Horizontal spacing is h, vertical spacing h^2, so refinement commutes
// with the anisotropic dilations; cells straddling the ball boundary keep a
// sub-sampled fraction of their measure.  Nodes sit at cell centers on an
// integer lattice containing the patch center, and the mesh is symmetric under
// the horizontal flip vhat -> -vhat about its center (mirror_index pairs the
// orbits, which layer_ops uses for exact cancellation sums).

struct PanelMesh {
    std::vector<PlanePoint> nodes;
    std::vector<double> weights;
    std::vector<Eigen::VectorXi> lattice; // integer offsets (v-part, z-part) per node
    std::vector<int> mirror_index;        // node at the flipped lattice site
    double h = 0.0;
    double patch_radius = 0.0;
    PlanePoint center;
    std::uint64_t build_id = 0; // stamp for the lattice lookup cache

    double total_weight() const;
    int find_node(const Eigen::VectorXi& lat) const; // -1 when absent
};

PanelMesh build_plane_mesh(const GroupSpec& spec, const PlanePoint& center, double R,
                           double h);

// Length of the gauge circle {v^4 + 16 z^2 = r^4} measured by the homogeneous
// (gauge) norm of the velocity; scales exactly linearly in r.
double ball_perimeter(const GroupSpec& spec, double r);

// Closed form |B^hat_1| for the unit gauge ball of Pi (any prototype), used as
// the mesh-area oracle; r^{Q-1}-scaling gives every other radius.
double plane_ball_measure(const GroupSpec& spec, double r);

using PlaneKernelFn = std::function<double(const PlanePoint&, const PlanePoint&)>;

// Integral of kernel(center, .) * d~(center, .)^exponent over the annulus
// r_in < d~ < r_out, by geometric shells each carrying a tensor rule in the
// gauge-polar chart.  Shells are dilates of one reference shell, so scaling
// laws hold to roundoff.  Adaptive in the rule density until the relative
// change drops below tol.
double shell_quadrature(const GroupSpec& spec, const PlaneKernelFn& kernel,
                        const PlanePoint& center, double r_in, double r_out,
                        double exponent, double tol = 1e-8);

// Nodes/weights of the gauge-polar tensor rule on a single annulus, exposed
// for reuse by the near-singularity quadratures in layer_ops.
struct AnnulusRule {
    std::vector<PlanePoint> nodes; // tilde-chart increments relative to a center
    std::vector<double> weights;
};
AnnulusRule annulus_rule(const GroupSpec& spec, double r_in, double r_out, int n_rho,
                         int n_phi, int n_sphere);

} // namespace htbem
