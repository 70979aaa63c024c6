#include "htbem/sphere_quadrature.hpp"

#include "htbem/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace htbem {

void gauss_legendre(int n, double a, double b, Eigen::VectorXd& x, Eigen::VectorXd& w) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
    x.resize(n);
    w.resize(n);
    // Newton iteration on P_n from the Chebyshev initial guess; symmetric pairs.
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        double xm = 0.5 * (b + a), xl = 0.5 * (b - a);
        x(i) = xm - xl * z;
        x(n - 1 - i) = xm + xl * z;
        double wi = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        w(i) = wi;
        w(n - 1 - i) = wi;
    }
}

double unit_sphere_area(int d) {
    if (d < 1) throw std::invalid_argument("unit_sphere_area: need d >= 1");
    if (d == 1) return 2.0; // S^0 = two points
    return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

void round_sphere_rule(int d, int n, std::vector<Eigen::VectorXd>& dirs,
                       std::vector<double>& weights) {
    dirs.clear();
    weights.clear();
    switch (d) {
    case 1: { // S^0
        Eigen::VectorXd p(1);
        p << 1.0;
        dirs.push_back(p);
        dirs.push_back(-p);
        weights.assign(2, 1.0);
        return;
    }
    case 2: { // circle, equispaced (trapezoid is spectrally exact here)
        int count = std::max(4, 2 * ((n + 1) / 2)); // even, so antipodes pair up
        for (int i = 0; i < count; ++i) {
            double phi = 2.0 * M_PI * i / count;
            Eigen::VectorXd p(2);
            p << std::cos(phi), std::sin(phi);
            dirs.push_back(p);
            weights.push_back(2.0 * M_PI / count);
        }
        return;
    }
    case 3: { // Gauss in cos(theta) x even trapezoid in phi
        int nt = std::max(4, n), np = std::max(8, 2 * n);
        if (np % 2) ++np;
        Eigen::VectorXd ct, cw;
        gauss_legendre(nt, -1.0, 1.0, ct, cw);
        for (int i = 0; i < nt; ++i) {
            double s = std::sqrt(std::max(0.0, 1.0 - ct(i) * ct(i)));
            for (int j = 0; j < np; ++j) {
                double phi = 2.0 * M_PI * j / np;
                Eigen::VectorXd p(3);
                p << s * std::cos(phi), s * std::sin(phi), ct(i);
                dirs.push_back(p);
                weights.push_back(cw(i) * 2.0 * M_PI / np);
            }
        }
        return;
    }
    case 4: { // product of the S^2 rule with a polar angle sweep
        // Chart p = (sin(a) q, cos(a)), q on S^2, da-measure sin^2(a).  Running
        // a over the full circle covers the sphere twice (a -> 2pi - a lands on
        // the same point with q negated), so the equispaced rule below is exact
        // for trigonometric polynomials in a up to degree na - 1.
        int na = std::max(8, 2 * ((n + 5) / 2)); // even, keeps antipodal pairing
        std::vector<Eigen::VectorXd> q;
        std::vector<double> qw;
        round_sphere_rule(3, n, q, qw);
        for (int i = 0; i < na; ++i) {
            double a = 2.0 * M_PI * (i + 0.5) / na;
            double sa = std::sin(a), ca = std::cos(a);
            double aw = 0.5 * sa * sa * 2.0 * M_PI / na; // half: double cover
            for (std::size_t j = 0; j < q.size(); ++j) {
                Eigen::VectorXd p(4);
                p << sa * q[j](0), sa * q[j](1), sa * q[j](2), ca;
                dirs.push_back(p);
                weights.push_back(aw * qw[j]);
            }
        }
        return;
    }
    default:
        throw std::invalid_argument("round_sphere_rule: spheres beyond S^3 not supported");
    }
}

std::vector<SphereSurfaceNode> gauge_sphere_rule(const GroupSpec& spec, double r,
                                                 int theta_nodes) {
    if (r <= 0.0) throw std::invalid_argument("gauge_sphere_rule: need r > 0");
    const int m = spec.m, n = spec.n;

    Eigen::VectorXd th, thw;
    gauss_legendre(theta_nodes, 0.0, 0.5 * M_PI, th, thw);

    std::vector<Eigen::VectorXd> wx, wt;
    std::vector<double> wxw, wtw;
    round_sphere_rule(m, 6, wx, wxw);
    round_sphere_rule(n, 6, wt, wtw);

    std::vector<SphereSurfaceNode> rule;
    rule.reserve(static_cast<std::size_t>(theta_nodes) * wx.size() * wt.size());

    for (int i = 0; i < theta_nodes; ++i) {
        const double c = std::cos(th(i)), s = std::sin(th(i));
        const double rx = r * std::sqrt(c);        // horizontal radius
        const double rt = 0.25 * r * r * s;        // vertical radius
        // Polar-arc speed and the angular measure factors.
        const double darc = std::sqrt(r * r * s * s / (4.0 * c) +
                                      std::pow(0.25 * r * r * c, 2.0));
        const double jac = darc * std::pow(rx, m - 1) * std::pow(rt, n - 1);
        // Euclidean normal direction grad(|x|^4 + 16|t|^2), inward = negative.
        for (std::size_t a = 0; a < wx.size(); ++a) {
            for (std::size_t b = 0; b < wt.size(); ++b) {
                SphereSurfaceNode node;
                node.pos.x = rx * wx[a];
                node.pos.t = rt * wt[b];
                node.weight = jac * thw(i) * wxw[a] * wtw[b];
                Eigen::VectorXd grad(m + n);
                grad.head(m) = 4.0 * node.pos.x.squaredNorm() * node.pos.x;
                grad.tail(n) = 32.0 * node.pos.t;
                node.inward_normal = -grad / grad.norm();
                rule.push_back(std::move(node));
            }
        }
    }
    return rule;
}

double gauge_sphere_flux(const GroupSpec& spec, double r, int theta_nodes) {
    const auto rule = gauge_sphere_rule(spec, r, theta_nodes);
    const Point pole{Eigen::VectorXd::Zero(spec.m), Eigen::VectorXd::Zero(spec.n)};
    double flux = 0.0;
    for (const auto& node : rule) {
        Eigen::VectorXd gh = grad_gamma_h(spec, node.pos, pole, DerivativeSide::first);
        // Assemble the horizontal vector field sum_j (X_j Gamma) X_j in
        // Euclidean coordinates: X_j = e_j + 1/2 sum_k (A^k x)_j e_{m+k}.
        Eigen::VectorXd field(spec.m + spec.n);
        field.head(spec.m) = gh;
        for (int k = 0; k < spec.n; ++k)
            field(spec.m + k) = 0.5 * gh.dot(spec.a[k] * node.pos.x);
        flux += node.weight * field.dot(node.inward_normal);
    }
    return flux;
}

} // namespace htbem
