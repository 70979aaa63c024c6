#pragma once

#include "htbem/group.hpp"

#include <utility>

namespace htbem {

// All kernels below are closed-form expressions in the gauge geometry of the
// group.  They share the normalization constant c_q of the fundamental
// solution, which is obtained numerically (calibrate_cq) from the requirement
// that the gauge-sphere flux of the horizontal gradient equals one.  Every
// evaluator refuses to produce a value on top of its singularity; principal
// values are the business of layer_ops, never of a pointwise kernel call.

enum class Regularity { smooth, singular_at_coincidence };

struct KernelEval {
    double value = 0.0;
    Regularity regularity_class = Regularity::singular_at_coincidence;
    double pole_distance = 0.0; // gauge distance to the singular set
};

enum class DerivativeSide { first, second };

struct FluxQuadConfig {
    int theta_nodes = 64;  // Gauss-Legendre nodes in the polar angle
    double tol = 1e-9;     // acceptable flux residual after calibration
};

// Constant c_q with flux(r=1) = 1; does not modify spec (caller stores it).
double calibrate_cq(const GroupSpec& spec, const FluxQuadConfig& quad = {});

// Fundamental solution c_q * d(xi,eta)^{2-Q}.
KernelEval gamma(const GroupSpec& spec, const Point& xi, const Point& eta);

// Horizontal gradient (X_1 Gamma, ..., X_m Gamma) taken in the first or the
// second argument.  Both reduce to the same closed form evaluated at the log
// coordinates of one point relative to the other.
Eigen::VectorXd grad_gamma_h(const GroupSpec& spec, const Point& xi, const Point& eta,
                             DerivativeSide side);

// Split of the normal derivative X_1^eta Gamma(xi, eta) on {y_1 = 0} into the
// jump-producing part k1 (carries the factor x_1) and the tangential part k.
KernelEval kernel_k1(const GroupSpec& spec, const Point& xi, const PlanePoint& eta_hat);
KernelEval kernel_k(const GroupSpec& spec, const Point& xi, const PlanePoint& eta_hat);

// Within-plane limit of kernel_k as x_1 -> 0; homogeneous of degree 1-Q in the
// tilde chart and odd under either single-axis flip vhat -> -vhat or z -> -z.
KernelEval boundary_kernel(const GroupSpec& spec, const PlanePoint& xi_hat,
                           const PlanePoint& eta_hat);

// Antiderivative of the boundary kernel in the vertical variable; only the
// first Heisenberg group has the displayed closed form.
KernelEval kernel_ell(const GroupSpec& spec, const PlanePoint& xi_hat,
                      const PlanePoint& eta_hat);

// Decoupled kernels: the mixed x_1 t-shift in the denominator is dropped, so
// the pair factorizes through the level.  |ktilde1| is even in x_1 and ktilde
// converges to boundary_kernel as x_1 -> 0.
std::pair<KernelEval, KernelEval> tilde_kernels(const GroupSpec& spec, const Point& xi,
                                                const PlanePoint& eta_hat);

} // namespace htbem
