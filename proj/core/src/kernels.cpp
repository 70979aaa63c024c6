#include "htbem/kernels.hpp"

#include "htbem/sphere_quadrature.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace htbem {

namespace {

constexpr double kPoleGuard = 1e-13;

void require_cq(const GroupSpec& spec, const char* who) {
    if (!spec.has_c_q())
        throw std::logic_error(std::string(who) +
                               ": c_q is not calibrated (run calibrate_cq first)");
}

// Numerator structure shared by every derivative kernel:
// X_j Gamma^hat at (v, z) = c_q (2-Q) [ |v|^2 v_j + 4 sum_k z_k (A^k v)_j ] / Phi^{(Q+2)/4}
Eigen::VectorXd grad_hat(const GroupSpec& spec, const Eigen::VectorXd& v,
                         const Eigen::VectorXd& z) {
    const double v2 = v.squaredNorm();
    const double phi = v2 * v2 + 16.0 * z.squaredNorm();
    Eigen::VectorXd numer = v2 * v;
    for (int k = 0; k < spec.n; ++k) numer += 4.0 * z(k) * (spec.a[k] * v);
    const double denom = std::pow(phi, 0.25 * (spec.q + 2));
    return (spec.c_q * (2.0 - spec.q) / denom) * numer;
}

// First row of A^k against the embedded tangential increment (0, vhat).
double a_row1_dot(const GroupSpec& spec, int k, const Eigen::VectorXd& vhat) {
    double s = 0.0;
    for (int i = 1; i < spec.m; ++i) s += spec.a[k](0, i) * vhat(i - 1);
    return s;
}

} // namespace

double calibrate_cq(const GroupSpec& spec, const FluxQuadConfig& quad) {
    ValidationReport rep = validate_h_type(spec);
    if (!rep.passed)
        throw std::invalid_argument("calibrate_cq: spec fails the structure checks");
    GroupSpec probe = spec;
    probe.c_q = 1.0;
    const double raw = gauge_sphere_flux(probe, 1.0, quad.theta_nodes);
    if (!(raw > 0.0))
        throw std::runtime_error("calibrate_cq: inward flux came out non-positive; "
                                 "quadrature failed");
    // Flux is linear in c_q, so one division calibrates; re-quadrature confirms.
    const double cq = 1.0 / raw;
    probe.c_q = cq;
    const double residual = std::abs(gauge_sphere_flux(probe, 1.0, quad.theta_nodes) - 1.0);
    if (residual > quad.tol) {
        std::ostringstream msg;
        msg << "calibrate_cq: flux residual " << residual << " exceeds tol " << quad.tol;
        throw std::runtime_error(msg.str());
    }
    return cq;
}

KernelEval gamma(const GroupSpec& spec, const Point& xi, const Point& eta) {
    require_cq(spec, "gamma");
    const double d = gauge_distance(spec, xi, eta);
    if (d < kPoleGuard) throw std::domain_error("gamma: evaluation at the pole");
    KernelEval out;
    out.value = spec.c_q * std::pow(d, 2.0 - spec.q);
    out.regularity_class = Regularity::singular_at_coincidence;
    out.pole_distance = d;
    return out;
}

Eigen::VectorXd grad_gamma_h(const GroupSpec& spec, const Point& xi, const Point& eta,
                             DerivativeSide side) {
    require_cq(spec, "grad_gamma_h");
    // Derivative in the first argument lives at Log_eta(xi); in the second at
    // Log_xi(eta) (the gauge norm is even under inversion, which swaps them).
    const Point u = (side == DerivativeSide::first) ? log_coords(spec, eta, xi)
                                                    : log_coords(spec, xi, eta);
    if (gauge_norm(spec, u) < kPoleGuard)
        throw std::domain_error("grad_gamma_h: evaluation at the pole");
    return grad_hat(spec, u.x, u.t);
}

KernelEval kernel_k1(const GroupSpec& spec, const Point& xi, const PlanePoint& eta_hat) {
    require_cq(spec, "kernel_k1");
    if (eta_hat.level != 0.0)
        throw std::invalid_argument("kernel_k1: target point must lie on {y_1 = 0}");
    if (xi.x(0) == 0.0)
        throw std::domain_error("kernel_k1: evaluation point on the plane");
    const Point u = log_coords(spec, xi, embed_plane_point(spec, eta_hat));
    const double v2 = u.x.squaredNorm();
    const double D = v2 * v2 + 16.0 * u.t.squaredNorm();
    KernelEval out;
    out.pole_distance = std::pow(D, 0.25);
    if (out.pole_distance < kPoleGuard)
        throw std::domain_error("kernel_k1: evaluation at the pole");
    out.value = spec.c_q * (2.0 - spec.q) * v2 * u.x(0) / std::pow(D, 0.25 * (spec.q + 2));
    out.regularity_class = Regularity::singular_at_coincidence;
    return out;
}

KernelEval kernel_k(const GroupSpec& spec, const Point& xi, const PlanePoint& eta_hat) {
    require_cq(spec, "kernel_k");
    if (eta_hat.level != 0.0)
        throw std::invalid_argument("kernel_k: target point must lie on {y_1 = 0}");
    if (xi.x(0) == 0.0)
        throw std::domain_error("kernel_k: evaluation point on the plane "
                                "(use boundary_kernel)");
    const Point u = log_coords(spec, xi, embed_plane_point(spec, eta_hat));
    const double v2 = u.x.squaredNorm();
    const double D = v2 * v2 + 16.0 * u.t.squaredNorm();
    KernelEval out;
    out.pole_distance = std::pow(D, 0.25);
    if (out.pole_distance < kPoleGuard)
        throw std::domain_error("kernel_k: evaluation at the pole");
    double mixed = 0.0;
    for (int k = 0; k < spec.n; ++k) mixed += u.t(k) * (spec.a[k] * u.x)(0);
    out.value = spec.c_q * (2.0 - spec.q) * 4.0 * mixed / std::pow(D, 0.25 * (spec.q + 2));
    out.regularity_class = Regularity::singular_at_coincidence;
    return out;
}

KernelEval boundary_kernel(const GroupSpec& spec, const PlanePoint& xi_hat,
                           const PlanePoint& eta_hat) {
    require_cq(spec, "boundary_kernel");
    if (xi_hat.level != eta_hat.level)
        throw std::invalid_argument("boundary_kernel: points must share a level");
    Eigen::VectorXd vhat, z;
    plane_log_coords(spec, xi_hat, eta_hat, vhat, z);
    const double v2 = vhat.squaredNorm();
    const double D = v2 * v2 + 16.0 * z.squaredNorm();
    KernelEval out;
    out.pole_distance = std::pow(D, 0.25);
    if (out.pole_distance < kPoleGuard)
        throw std::domain_error("boundary_kernel: evaluation at the pole");
    double mixed = 0.0;
    for (int k = 0; k < spec.n; ++k) mixed += z(k) * a_row1_dot(spec, k, vhat);
    out.value = spec.c_q * (2.0 - spec.q) * 4.0 * mixed / std::pow(D, 0.25 * (spec.q + 2));
    out.regularity_class = Regularity::singular_at_coincidence;
    return out;
}

KernelEval kernel_ell(const GroupSpec& spec, const PlanePoint& xi_hat,
                      const PlanePoint& eta_hat) {
    require_cq(spec, "kernel_ell");
    if (spec.m != 2 || spec.n != 1)
        throw std::invalid_argument("kernel_ell: closed form exists only on the first "
                                    "Heisenberg group");
    Eigen::VectorXd vhat, z;
    plane_log_coords(spec, xi_hat, eta_hat, vhat, z);
    const double D = std::pow(vhat(0), 4) + 16.0 * z(0) * z(0);
    KernelEval out;
    out.pole_distance = std::pow(D, 0.25);
    if (out.pole_distance < kPoleGuard)
        throw std::domain_error("kernel_ell: evaluation at the pole");
    // Vertical antiderivative of the boundary kernel: d/d(tau) of this
    // reproduces boundary_kernel exactly.
    out.value = 0.5 * spec.c_q * (-vhat(0)) / std::sqrt(D);
    out.regularity_class = Regularity::singular_at_coincidence;
    return out;
}

std::pair<KernelEval, KernelEval> tilde_kernels(const GroupSpec& spec, const Point& xi,
                                                const PlanePoint& eta_hat) {
    require_cq(spec, "tilde_kernels");
    if (eta_hat.level != 0.0)
        throw std::invalid_argument("tilde_kernels: target point must lie on {y_1 = 0}");
    const double x1 = xi.x(0);
    if (x1 == 0.0)
        throw std::domain_error("tilde_kernels: evaluation point on the plane");

    PlanePoint foot;
    foot.xhat = xi.x.tail(spec.m - 1);
    foot.t = xi.t;
    foot.level = 0.0;
    Eigen::VectorXd vhat, ztilde;
    plane_log_coords(spec, foot, eta_hat, vhat, ztilde);

    const double base = x1 * x1 + vhat.squaredNorm();
    const double D = base * base + 16.0 * ztilde.squaredNorm();
    const double denom = std::pow(D, 0.25 * (spec.q + 2));

    KernelEval k1t, kt;
    k1t.pole_distance = kt.pole_distance = std::pow(D, 0.25);
    k1t.regularity_class = kt.regularity_class = Regularity::smooth;
    k1t.value = spec.c_q * (spec.q - 2.0) * base * x1 / denom;
    double mixed = 0.0;
    for (int k = 0; k < spec.n; ++k) mixed += ztilde(k) * a_row1_dot(spec, k, vhat);
    kt.value = spec.c_q * (2.0 - spec.q) * 4.0 * mixed / denom;
    return {k1t, kt};
}

} // namespace htbem
