#include "htbem/plane_mesh.hpp"

#include "htbem/sphere_quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <stdexcept>

namespace htbem {

namespace {

// Gauge norm of a tilde-chart increment.
double chart_gauge(const Eigen::VectorXd& v, const Eigen::VectorXd& z) {
    const double v2 = v.squaredNorm();
    return std::pow(v2 * v2 + 16.0 * z.squaredNorm(), 0.25);
}

// Exact min/max of the gauge norm over an axis-aligned chart box, via the
// monotonicity of (|v|, |z|) -> (|v|^4 + 16|z|^2)^{1/4} and per-axis interval
// bounds of the absolute values.
void box_gauge_range(const Eigen::VectorXd& vlo, const Eigen::VectorXd& vhi,
                     const Eigen::VectorXd& zlo, const Eigen::VectorXd& zhi,
                     double& dmin, double& dmax) {
    double vmin2 = 0.0, vmax2 = 0.0, zmin2 = 0.0, zmax2 = 0.0;
    for (int i = 0; i < vlo.size(); ++i) {
        double lo = vlo(i), hi = vhi(i);
        double amin = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
        double amax = std::max(std::abs(lo), std::abs(hi));
        vmin2 += amin * amin;
        vmax2 += amax * amax;
    }
    for (int i = 0; i < zlo.size(); ++i) {
        double lo = zlo(i), hi = zhi(i);
        double amin = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
        double amax = std::max(std::abs(lo), std::abs(hi));
        zmin2 += amin * amin;
        zmax2 += amax * amax;
    }
    dmin = std::pow(vmin2 * vmin2 + 16.0 * zmin2, 0.25);
    dmax = std::pow(vmax2 * vmax2 + 16.0 * zmax2, 0.25);
}

struct LatticeLess {
    bool operator()(const Eigen::VectorXi& a, const Eigen::VectorXi& b) const {
        for (int i = 0; i < a.size(); ++i) {
            if (a(i) != b(i)) return a(i) < b(i);
        }
        return false;
    }
};

using LatticeMap = std::map<Eigen::VectorXi, int, LatticeLess>;

// One shared map per mesh, rebuilt on demand (the mesh struct itself stays a
// plain aggregate so it can be copied around freely).
LatticeMap build_lattice_map(const PanelMesh& mesh) {
    LatticeMap map;
    for (std::size_t i = 0; i < mesh.lattice.size(); ++i)
        map.emplace(mesh.lattice[i], static_cast<int>(i));
    return map;
}

} // namespace

double PanelMesh::total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

int PanelMesh::find_node(const Eigen::VectorXi& lat) const {
    // Meshes are immutable after build, so the lookup map can be cached per
    // thread keyed by the build stamp (copies share content and stamp).
    static thread_local std::uint64_t cached_id = 0;
    static thread_local LatticeMap cached_map;
    if (cached_id != build_id || build_id == 0) {
        cached_map = build_lattice_map(*this);
        cached_id = build_id;
    }
    auto it = cached_map.find(lat);
    return it == cached_map.end() ? -1 : it->second;
}

PanelMesh build_plane_mesh(const GroupSpec& spec, const PlanePoint& center, double R,
                           double h) {
    if (!(h > 0.0) || !(R > 4.0 * h))
        throw std::invalid_argument("build_plane_mesh: need 0 < 4h < R");
    const int dv = spec.m - 1, dz = spec.n;
    const double hz = h * h;

    static std::atomic<std::uint64_t> next_build_id{1};

    PanelMesh mesh;
    mesh.h = h;
    mesh.patch_radius = R;
    mesh.center = center;
    mesh.build_id = next_build_id.fetch_add(1);

    const int Iv = static_cast<int>(std::ceil(R / h)) + 1;
    const int Iz = static_cast<int>(std::ceil(R / hz)) + 1;
    const double cell = std::pow(h, dv) * std::pow(hz, dz);
    const int sub = (dv + dz <= 3) ? 4 : 2; // sub-samples per axis on straddling cells

    std::vector<int> idx(dv + dz, -0);
    // Odometer over the lattice box; lexicographic order keeps node ids stable.
    std::vector<int> lo(dv + dz), hi(dv + dz);
    for (int d = 0; d < dv; ++d) lo[d] = -Iv, hi[d] = Iv;
    for (int d = 0; d < dz; ++d) lo[dv + d] = -Iz, hi[dv + d] = Iz;
    idx = lo;

    Eigen::VectorXd v(dv), z(dz), vlo(dv), vhi(dv), zlo(dz), zhi(dz);
    while (true) {
        for (int d = 0; d < dv; ++d) {
            v(d) = h * idx[d];
            vlo(d) = v(d) - 0.5 * h;
            vhi(d) = v(d) + 0.5 * h;
        }
        for (int d = 0; d < dz; ++d) {
            z(d) = hz * idx[dv + d];
            zlo(d) = z(d) - 0.5 * hz;
            zhi(d) = z(d) + 0.5 * hz;
        }
        double dmin, dmax;
        box_gauge_range(vlo, vhi, zlo, zhi, dmin, dmax);
        double w = 0.0;
        if (dmax <= R) {
            w = cell;
        } else if (dmin < R) {
            // Straddling cell: keep the sub-sampled covered fraction.
            int total = 1;
            for (int d = 0; d < dv + dz; ++d) total *= sub;
            int inside = 0;
            std::vector<int> s(dv + dz, 0);
            Eigen::VectorXd sv(dv), sz(dz);
            while (true) {
                for (int d = 0; d < dv; ++d)
                    sv(d) = vlo(d) + (s[d] + 0.5) * h / sub;
                for (int d = 0; d < dz; ++d)
                    sz(d) = zlo(d) + (s[dv + d] + 0.5) * hz / sub;
                if (chart_gauge(sv, sz) <= R) ++inside;
                int c = 0;
                while (c < dv + dz && ++s[c] == sub) s[c++] = 0;
                if (c == dv + dz) break;
            }
            w = cell * inside / total;
        }
        if (w > 0.0) {
            mesh.nodes.push_back(plane_translate(spec, center, v, z));
            mesh.weights.push_back(w);
            Eigen::VectorXi lat(dv + dz);
            for (int d = 0; d < dv + dz; ++d) lat(d) = idx[d];
            mesh.lattice.push_back(lat);
        }
        int c = 0;
        while (c < dv + dz && ++idx[c] > hi[c]) idx[c] = lo[c], ++c;
        if (c == dv + dz) break;
    }

    // Pair each node with its horizontal mirror about the center (z kept).
    LatticeMap map = build_lattice_map(mesh);
    mesh.mirror_index.assign(mesh.nodes.size(), -1);
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        Eigen::VectorXi flip = mesh.lattice[i];
        for (int d = 0; d < dv; ++d) flip(d) = -flip(d);
        auto it = map.find(flip);
        if (it != map.end()) mesh.mirror_index[i] = it->second;
    }
    return mesh;
}

double ball_perimeter(const GroupSpec& spec, double r) {
    if (spec.m != 2 || spec.n != 1)
        throw std::invalid_argument("ball_perimeter: closed-form parametrization only on "
                                    "the first Heisenberg group");
    if (!(r > 0.0)) throw std::invalid_argument("ball_perimeter: need r > 0");
    // Gauge length of the curve (sign(cos) sqrt|cos|, sin/4) over a quadrant;
    // the substitution th = pi/2 - u^2 absorbs the 1/sqrt(cos) endpoint rate.
    auto speed = [](double th) {
        double s = std::sin(th), c = std::cos(th);
        return std::pow((s * s * s * s + 16.0 * c * c * c * c) / (16.0 * c * c), 0.25);
    };
    Eigen::VectorXd x1, w1, x2, w2;
    gauss_legendre(48, 0.0, 0.25 * M_PI, x1, w1);
    double L = 0.0;
    for (int i = 0; i < x1.size(); ++i) L += w1(i) * speed(x1(i));
    gauss_legendre(48, 0.0, std::sqrt(0.25 * M_PI), x2, w2);
    for (int i = 0; i < x2.size(); ++i) {
        double u = x2(i);
        L += w2(i) * 2.0 * u * speed(0.5 * M_PI - u * u);
    }
    return 4.0 * L * r;
}

double plane_ball_measure(const GroupSpec& spec, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("plane_ball_measure: need r > 0");
    const int m = spec.m, n = spec.n, Q = spec.q;
    auto beta = [](double a, double b) {
        return std::tgamma(a) * std::tgamma(b) / std::tgamma(a + b);
    };
    const double unit = unit_sphere_area(m - 1) * unit_sphere_area(n) *
                        std::pow(4.0, -n) / (Q - 1.0) * 0.5 *
                        beta(0.25 * (m - 1.0), 0.5 * n);
    return std::pow(r, Q - 1) * unit;
}

AnnulusRule annulus_rule(const GroupSpec& spec, double r_in, double r_out, int n_rho,
                         int n_phi, int n_sphere) {
    if (!(0.0 <= r_in && r_in < r_out))
        throw std::invalid_argument("annulus_rule: need 0 <= r_in < r_out");
    const int m = spec.m, n = spec.n;

    Eigen::VectorXd rho, rho_w;
    gauss_legendre(n_rho, r_in, r_out, rho, rho_w);

    // Polar-angle nodes: plain Gauss on [0, pi/4], then the u^2 chart near
    // pi/2 where the 1/sqrt(cos) factor lives.
    std::vector<double> phi, phi_w;
    {
        Eigen::VectorXd a, aw;
        gauss_legendre(n_phi, 0.0, 0.25 * M_PI, a, aw);
        for (int i = 0; i < n_phi; ++i) phi.push_back(a(i)), phi_w.push_back(aw(i));
        gauss_legendre(n_phi, 0.0, std::sqrt(0.25 * M_PI), a, aw);
        for (int i = 0; i < n_phi; ++i) {
            phi.push_back(0.5 * M_PI - a(i) * a(i));
            phi_w.push_back(aw(i) * 2.0 * a(i));
        }
    }

    std::vector<Eigen::VectorXd> wv, wz;
    std::vector<double> wv_w, wz_w;
    round_sphere_rule(m - 1, n_sphere, wv, wv_w);
    round_sphere_rule(n, n_sphere, wz, wz_w);

    AnnulusRule rule;
    rule.nodes.reserve(rho.size() * phi.size() * wv.size() * wz.size());
    for (int i = 0; i < rho.size(); ++i) {
        for (std::size_t j = 0; j < phi.size(); ++j) {
            const double c = std::cos(phi[j]), s = std::sin(phi[j]);
            const double rv = rho(i) * std::sqrt(c);
            const double rz = 0.25 * rho(i) * rho(i) * s;
            const double jac = std::pow(rv, m - 2) * std::pow(rz, n - 1) * rho(i) *
                               rho(i) / (4.0 * std::sqrt(c));
            for (std::size_t a = 0; a < wv.size(); ++a) {
                for (std::size_t b = 0; b < wz.size(); ++b) {
                    PlanePoint p;
                    p.xhat = rv * wv[a];
                    p.t = rz * wz[b];
                    p.level = 0.0;
                    rule.nodes.push_back(std::move(p));
                    rule.weights.push_back(jac * rho_w(i) * phi_w[j] * wv_w[a] * wz_w[b]);
                }
            }
        }
    }
    return rule;
}

double shell_quadrature(const GroupSpec& spec, const PlaneKernelFn& kernel,
                        const PlanePoint& center, double r_in, double r_out,
                        double exponent, double tol) {
    if (!(0.0 <= r_in && r_in < r_out))
        throw std::invalid_argument("shell_quadrature: need 0 <= r_in < r_out");
    // Geometric shells; an inner floor replaces r_in = 0 (the kernels fed in
    // here are integrable, so the dropped core is a vanishing tail).
    const double floor_r = (r_in > 0.0) ? r_in : r_out * std::pow(2.0, -24);

    auto integrate = [&](int level) {
        const int n_rho = 6 << level, n_phi = 8 << level, n_sphere = 6 << level;
        double total = 0.0;
        double hi = r_out;
        while (hi > floor_r * (1.0 + 1e-12)) {
            double lo = std::max(floor_r, 0.5 * hi);
            AnnulusRule rule = annulus_rule(spec, lo, hi, n_rho, n_phi, n_sphere);
            double shell = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                // In this chart the tilde distance to the center is exactly rho.
                const double rho = chart_gauge(rule.nodes[i].xhat, rule.nodes[i].t);
                PlanePoint q = plane_translate(spec, center, rule.nodes[i].xhat,
                                               rule.nodes[i].t);
                shell += rule.weights[i] * kernel(center, q) * std::pow(rho, exponent);
            }
            total += shell;
            hi = lo;
        }
        return total;
    };

    double prev = integrate(0);
    for (int level = 1; level <= 4; ++level) {
        double cur = integrate(level);
        if (std::abs(cur - prev) <= tol * std::max(1e-30, std::abs(cur)) ||
            std::abs(cur - prev) <= 1e-14)
            return cur;
        prev = cur;
    }
    return prev;
}

} // namespace htbem
