#pragma once

#include "htbem/graph_domain.hpp"
#include "htbem/group.hpp"
#include "htbem/kernels.hpp"
#include "htbem/plane_mesh.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace htbem {

// Operator layer: double-layer potential evaluation, Nystrom assembly of the
// singular boundary operator K (principal value by symmetric-cell drop, which
// the odd-cancellation property makes exact on the annihilated polynomial
// class), decoupled tilde operators for the reflection argument, remainder
// operator for graph patches, and the density solve behind the Poisson
// operator.

struct BoundaryFunction {
    const PanelMesh* mesh = nullptr;
    Eigen::VectorXd values;
    double support_radius = 0.0;
};

BoundaryFunction sample_density(const PanelMesh& mesh,
                                const std::function<double(const PlanePoint&)>& f,
                                double support_radius);

// Multilinear interpolation of nodal values at an off-lattice plane point;
// zero outside the meshed patch (densities are compactly supported).
double mesh_interpolate(const GroupSpec& spec, const PanelMesh& mesh,
                        const Eigen::VectorXd& values, const PlanePoint& p);

// Discrete C^{2,alpha}-style norm of nodal values: sup norm, lattice
// difference quotients, and tilde-distance Holder quotients of the second
// differences over a deterministic pair subsample.  Built entirely from
// absolute differences, so it is invariant under negation and under the
// horizontal mirror of a reflection-closed mesh.
double nodal_c2alpha_norm(const GroupSpec& spec, const PanelMesh& mesh,
                          const Eigen::VectorXd& values, double alpha);

enum class OperatorKind { K, K_tilde, K_remainder };

struct BoundaryOperator {
    OperatorKind kind = OperatorKind::K;
    const PanelMesh* mesh = nullptr;
    Eigen::MatrixXd matrix;                // dense storage (empty when matrix_free)
    bool matrix_free = false;
    std::function<double(int, int)> entry; // weight-included entry accessor
    struct PvCorrection {
        double drop_radius = 0.0;          // symmetric-drop disc in d~
    } pv_correction;

    int size() const { return mesh ? static_cast<int>(mesh->nodes.size()) : 0; }
    Eigen::VectorXd apply(const Eigen::VectorXd& g) const;
};

// Nystrom matrix of the principal-value operator K on the mesh.  Entries are
// weight_j * boundary_kernel(node_i, node_j) outside the drop disc d~ < 3h;
// the dropped disc is the symmetric-cell principal value: against any local
// polynomial of degree <= 2 its contribution vanishes identically, and the
// residual term it omits is O(h^{2+alpha}).
BoundaryOperator assemble_K(const GroupSpec& spec, const PanelMesh& mesh,
                            bool force_matrix_free = false);

// Decoupled operator (Ktilde_1 + Ktilde) evaluated on the parallel plane at
// the given level; smooth kernel, plain dense assembly.
BoundaryOperator assemble_K_tilde(const GroupSpec& spec, const PanelMesh& mesh,
                                  double level);

// Remainder operator of a graph patch: kernel = (curved boundary kernel at
// physical points) - (flat boundary kernel).  Weakly singular at the patch
// center, where the graph is tangent to the plane; at tilted base points the
// group bracket of the two heights leaves a principal-value-order part, so the
// near-diagonal cells are integrated by cell sub-sampling rather than dropped.
BoundaryOperator assemble_K_remainder(const GroupSpec& spec, const GraphDomain& dom,
                                      const PanelMesh& mesh);

// T_t = 1/2 I + t K applied to nodal values.
Eigen::VectorXd apply_T(const BoundaryOperator& op, double t, const Eigen::VectorXd& g);

enum class SolveMode { direct, homotopy, automatic };

struct SolveStats {
    double residual = 0.0;     // relative, in the mesh sup norm
    int homotopy_steps = 0;
    int total_iterations = 0;
    double smallest_singular_value = -1.0; // filled only when requested
};

// Solve (1/2 I + K [+ K_remainder]) phi = g.  Direct mode uses a dense LU;
// homotopy mode walks T_t from t=0 to t=1 in 8 uniform steps, solving each
// step by a Neumann iteration preconditioned with the previous step's LU.
// Matrix-free operators fall back to the contraction iteration
// phi <- 2(g - Kphi), valid because the assembled K has small norm.
BoundaryFunction solve_density(const BoundaryOperator& op, const BoundaryOperator* extra,
                               const BoundaryFunction& g, SolveMode mode = SolveMode::automatic,
                               SolveStats* stats = nullptr);

// Smallest singular value of (1/2 I + K [+extra]) by inverse power iteration
// on the LU factors; deterministic start vector.
double smallest_singular_value(const BoundaryOperator& op,
                               const BoundaryOperator* extra = nullptr);

// Leading singular values of the bare operator matrix (not of T), by subspace
// iteration with a seeded deterministic start block.
Eigen::VectorXd leading_singular_values(const BoundaryOperator& op, int count,
                                        uint64_t seed = 7);

// Double layer potential D(g)(x) for x off the plane: mesh far sum plus an
// adaptive local quadrature of the kernel against the interpolated density
// near the singularity projection.  Refuses |x_1| < h^2 (jump_test owns the
// boundary-approach regime).
double eval_double_layer(const GroupSpec& spec, const PanelMesh& mesh,
                         const BoundaryFunction& g, const Point& x);

// Patch flux integral int_{B_R(center)} (k1+k)((x1, center), .) at each level;
// tends to +-1/2 as the level approaches 0 from either side, independently of R.
std::vector<double> half_flux_test(const GroupSpec& spec, const PanelMesh& mesh,
                                   const PlanePoint& center, double R,
                                   const std::vector<double>& levels);

struct JumpReport {
    std::vector<double> levels;        // strictly decreasing, > 0
    std::vector<double> values_above;  // D(g) at (+level, xhat0)
    std::vector<double> values_below;  // D(g) at (-level, xhat0)
    double limit_above = 0.0;          // extrapolated
    double limit_below = 0.0;
    double target_above = 0.0;         // (+1/2 g + Kg)(xhat0)
    double target_below = 0.0;         // (-1/2 g + Kg)(xhat0)
    double observed_rate = 0.0;        // fitted approach exponent in the level
};

JumpReport jump_test(const GroupSpec& spec, const PanelMesh& mesh,
                     const BoundaryOperator& K, const BoundaryFunction& g,
                     const PlanePoint& xhat0, const std::vector<double>& levels);

// Norms of the decoupled potential on the two parallel planes at +-r: applies
// (Ktilde_1 + Ktilde) to g on level +r and to the reflected density on level
// -r, and returns a discrete C^{2,alpha}-style norm of each.  The evaluation
// points and summation orders are mirror-paired, so the two results agree to
// the last bit whenever the mesh is reflection-closed.
std::pair<double, double> reflection_check(const GroupSpec& spec, const PanelMesh& mesh,
                                           const BoundaryFunction& g, double r);

// Flattened chart of a graph patch.  curved_kernel is the full normal-derivative
// kernel expressed at physical points (the pushforward identity makes this
// exact); remainder_kernel subtracts the flat boundary kernel, gaining one
// order of decay at the tangency point of the graph.
struct FlattenedChart {
    GroupSpec spec;
    GraphDomain dom;

    Point to_physical(const Point& flat) const;
    Point to_flat(const Point& phys) const;
    double curved_kernel(const Point& flat_xi, const PlanePoint& eta_hat) const;
    double remainder_kernel(const PlanePoint& xi_hat, const PlanePoint& eta_hat) const;
};

FlattenedChart flatten_graph(const GroupSpec& spec, const GraphDomain& dom);

// Curved-patch potential at a flat-chart point: the flat double layer of the
// density plus the remainder bracket over the mesh.  Subject to the same
// near-plane guard as eval_double_layer.
double eval_curved_layer(const GroupSpec& spec, const FlattenedChart& chart,
                         const PanelMesh& mesh, const BoundaryFunction& g,
                         const Point& x_flat);

struct SolveReport {
    std::vector<Point> probes;
    Eigen::VectorXd u_values;
    double boundary_attainment_err = 0.0; // max |u(probe near plane) - g| over check points
    SolveStats stats;
};

// Full pipeline: solve the density, then evaluate the (possibly curved) double
// layer potential at the probes.  Attainment is measured at x1 = 1e-3 * R over
// interior surface points.
SolveReport poisson_solve(const GroupSpec& spec, const GraphDomain* dom,
                          const PanelMesh& mesh, const BoundaryFunction& g,
                          const std::vector<Point>& probes,
                          SolveMode mode = SolveMode::automatic);

} // namespace htbem
