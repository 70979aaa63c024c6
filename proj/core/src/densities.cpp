#include "htbem/densities.hpp"

#include <cmath>
#include <stdexcept>

namespace htbem {

namespace {

// Gauge radius of a plane point relative to the patch origin.
double gauge_rho(const PlanePoint& p) {
    const double v2 = p.xhat.squaredNorm();
    return std::pow(v2 * v2 + 16.0 * p.t.squaredNorm(), 0.25);
}

double gauge_rho_from(const GroupSpec& spec, const PlanePoint& base,
                      const PlanePoint& p) {
    Eigen::VectorXd vhat, z;
    plane_log_coords(spec, base, p, vhat, z);
    const double v2 = vhat.squaredNorm();
    return std::pow(v2 * v2 + 16.0 * z.squaredNorm(), 0.25);
}

} // namespace

double bump_profile(double rho) {
    if (rho >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - rho * rho));
}

Density make_density(const GroupSpec& spec, const std::string& name,
                     double support_radius) {
    if (!(support_radius > 0.0))
        throw std::invalid_argument("make_density: support radius must be positive");
    const double Rs = support_radius;
    Density d;
    d.name = name;
    d.support_radius = Rs;

    auto radial = [Rs](const PlanePoint& p) { return bump_profile(gauge_rho(p) / Rs); };

    if (name == "bump" || name == "sym-bump") {
        d.f = radial;
    } else if (name == "poly-bump") {
        d.f = [radial](const PlanePoint& p) { return p.xhat(0) * radial(p); };
    } else if (name == "vert-bump") {
        d.f = [radial](const PlanePoint& p) { return p.t(0) * radial(p); };
    } else if (name == "osc-bump") {
        d.f = [radial](const PlanePoint& p) {
            return std::cos(3.0 * p.xhat(0)) * radial(p);
        };
    } else if (name == "offset-bump") {
        // Two lumps shifted along the first horizontal axis; supports stay
        // inside the nominal radius (Rs/3 offset + Rs/2 width < Rs).
        PlanePoint c1, c2;
        c1.xhat = Eigen::VectorXd::Zero(spec.m - 1);
        c1.t = Eigen::VectorXd::Zero(spec.n);
        c2 = c1;
        c1.xhat(0) = Rs / 3.0;
        c2.xhat(0) = -Rs / 3.0;
        GroupSpec sp = spec;
        d.f = [sp, c1, c2, Rs](const PlanePoint& p) {
            return bump_profile(gauge_rho_from(sp, c1, p) / (0.5 * Rs)) +
                   0.5 * bump_profile(gauge_rho_from(sp, c2, p) / (0.5 * Rs));
        };
    } else {
        throw std::invalid_argument("make_density: unknown density '" + name + "'");
    }
    return d;
}

std::vector<Density> density_suite(const GroupSpec& spec, double support_radius,
                                   int count) {
    const double Rs = support_radius;
    auto radial = [Rs](const PlanePoint& p) { return bump_profile(gauge_rho(p) / Rs); };
    auto poly = [Rs](const PlanePoint& p) {
        double r2 = gauge_rho(p) / Rs;
        r2 *= r2;
        return r2 < 1.0 ? std::pow(1.0 - r2, 3) : 0.0;
    };

    // Factor library reused across the suite; z is scaled by 1/Rs^2 so the
    // vertical factors see O(1) variation over the support.
    std::vector<std::function<double(const PlanePoint&)>> defs = {
        radial,
        [radial](const PlanePoint& p) { return p.xhat(0) * radial(p); },
        [radial, Rs](const PlanePoint& p) { return p.t(0) / (Rs * Rs) * radial(p); },
        [radial](const PlanePoint& p) { return p.xhat(0) * p.xhat(0) * radial(p); },
        [radial, Rs](const PlanePoint& p) {
            return p.xhat(0) * p.t(0) / (Rs * Rs) * radial(p);
        },
        [radial, Rs](const PlanePoint& p) {
            return std::cos(3.0 * p.xhat(0) / Rs) * radial(p);
        },
        [radial, Rs](const PlanePoint& p) {
            return std::sin(8.0 * p.t(0) / (Rs * Rs)) * radial(p);
        },
        [radial](const PlanePoint& p) {
            double b = radial(p);
            return b * b;
        },
        [Rs](const PlanePoint& p) { return bump_profile(2.0 * gauge_rho(p) / Rs); },
        poly,
        [radial](const PlanePoint& p) { return std::abs(p.xhat(0)) * radial(p); },
        [radial, Rs](const PlanePoint& p) {
            return (1.0 + 0.5 * std::sin(5.0 * p.xhat(0) / Rs) *
                              std::sin(20.0 * p.t(0) / (Rs * Rs))) *
                   radial(p);
        },
        [poly, Rs](const PlanePoint& p) {
            double r = gauge_rho(p) / Rs;
            return std::exp(-4.0 * r * r) * poly(p);
        },
        [radial, Rs](const PlanePoint& p) {
            return (p.xhat(0) / Rs - 0.3) * (p.xhat(0) / Rs + 0.7) * radial(p);
        },
        [poly](const PlanePoint& p) { return p.xhat(0) * poly(p); },
        [poly, Rs](const PlanePoint& p) { return p.t(0) / (Rs * Rs) * poly(p); },
        [radial, Rs](const PlanePoint& p) {
            double r = gauge_rho(p) / Rs;
            return std::cos(0.5 * M_PI * r) * radial(p);
        },
        [radial, poly](const PlanePoint& p) { return radial(p) - 0.5 * poly(p); },
        [radial, Rs](const PlanePoint& p) {
            return std::tanh(3.0 * p.xhat(0) / Rs) * radial(p);
        },
        [poly, Rs](const PlanePoint& p) {
            return std::sin(6.0 * p.xhat(0) / Rs + 10.0 * p.t(0) / (Rs * Rs)) * poly(p);
        },
    };

    std::vector<Density> suite;
    for (int i = 0; i < count; ++i) {
        Density d;
        char buf[32];
        std::snprintf(buf, sizeof buf, "suite-%02d", i);
        d.name = buf;
        d.support_radius = Rs;
        if (i < static_cast<int>(defs.size())) {
            d.f = defs[i];
        } else {
            // Past the curated list: reuse with a mild frequency twist.
            auto base = defs[i % defs.size()];
            double fac = 1.0 + 0.25 * (i / static_cast<double>(defs.size()));
            d.f = [base, fac, radial](const PlanePoint& p) {
                return base(p) + fac * 0.1 * radial(p);
            };
        }
        suite.push_back(std::move(d));
    }

    // Offset-bump pulls in the group spec; swap it in near the end for variety.
    if (count >= 20) {
        suite[19] = make_density(spec, "offset-bump", Rs);
        suite[19].name = "suite-19";
    }
    return suite;
}

} // namespace htbem
