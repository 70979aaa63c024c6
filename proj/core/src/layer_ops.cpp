#include "htbem/layer_ops.hpp"

#include "htbem/fd_oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace htbem {

namespace {

double chart_gauge(const Eigen::VectorXd& v, const Eigen::VectorXd& z) {
    const double v2 = v.squaredNorm();
    return std::pow(v2 * v2 + 16.0 * z.squaredNorm(), 0.25);
}

// Full normal-derivative kernel (k1 + k) of a point against a level-0 plane
// point: first component of the second-variable horizontal gradient.
double full_kernel(const GroupSpec& spec, const Point& x, const PlanePoint& eta) {
    return grad_gamma_h(spec, x, embed_plane_point(spec, eta),
                        DerivativeSide::second)(0);
}

bool mesh_is_origin_centered(const PanelMesh& mesh) {
    return mesh.center.xhat.cwiseAbs().maxCoeff() < 1e-14 &&
           mesh.center.t.cwiseAbs().maxCoeff() < 1e-14;
}

double cell_full_weight(const PanelMesh& mesh, int dv, int dz) {
    return std::pow(mesh.h, dv) * std::pow(mesh.h * mesh.h, dz);
}

// ---------------------------------------------------------------------------
// Near-singularity cell quadrature.  A mesh cell is an axis box in the tilde
// chart of the mesh center; the integrand concentrates at the chart position
// of the evaluation point's plane projection at scale |x1|.  Bisections pick
// the axis with the largest gauge extent, so the anisotropy of the chart is
// respected, and each leaf gets a tensor 3-point Gauss rule.

struct ChartBox {
    Eigen::VectorXd vlo, vhi, zlo, zhi;
};

// Frame of the evaluation point's plane penetration.  An off-plane point x
// factors exactly as x = embed(eta*) . (x1, 0, ..., 0) where eta* carries the
// bracket correction t*_k = t_k - x1/2 sum_j A^k(0,j) xhat_j.  Relative to the
// chart position (fv, fz) of eta*, the group log of a chart point (v, z)
// against x has horizontal part (-x1, v - fv) and vertical part
// (z - fz) - T (v - fv): the shear T collects the within-plane bracket at fv
// together with the x1-proportional bracket of the lift.  Without the shear
// the refinement would aim at the wrong spot: the vertical offset x1*|fv|/2 of
// the concentration point is worth (8 x1 |fv|)^(1/2) in gauge units, which
// dwarfs x1 itself for small lifts.
struct ChartFrame {
    Eigen::VectorXd fv, fz;
    Eigen::MatrixXd T; // n rows, m-1 columns
};

double box_gauge_dist(const ChartBox& box, const ChartFrame& fr) {
    double v2 = 0.0, z2 = 0.0;
    const int dv = static_cast<int>(box.vlo.size());
    for (int i = 0; i < dv; ++i) {
        double lo = box.vlo(i) - fr.fv(i), hi = box.vhi(i) - fr.fv(i);
        double a = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
        v2 += a * a;
    }
    for (int k = 0; k < box.zlo.size(); ++k) {
        double slo = 0.0, shi = 0.0; // range of (T (v - fv))_k over the box
        for (int i = 0; i < dv; ++i) {
            double a = fr.T(k, i) * (box.vlo(i) - fr.fv(i));
            double b = fr.T(k, i) * (box.vhi(i) - fr.fv(i));
            slo += std::min(a, b);
            shi += std::max(a, b);
        }
        double lo = box.zlo(k) - fr.fz(k) - shi, hi = box.zhi(k) - fr.fz(k) - slo;
        double a = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
        z2 += a * a;
    }
    return std::pow(v2 * v2 + 16.0 * z2, 0.25);
}

// Per-axis gauge extents: a v axis contributes its width or, if larger, the
// gauge size of the vertical spread its shear column causes; a z axis
// contributes 2 sqrt(width).
int widest_gauge_axis(const ChartBox& box, const ChartFrame& fr, double& extent) {
    int axis = 0;
    extent = 0.0;
    for (int i = 0; i < box.vlo.size(); ++i) {
        double w = box.vhi(i) - box.vlo(i);
        double e = w;
        for (int k = 0; k < box.zlo.size(); ++k)
            e = std::max(e, 2.0 * std::sqrt(std::abs(fr.T(k, i)) * w));
        if (e > extent) extent = e, axis = i;
    }
    for (int i = 0; i < box.zlo.size(); ++i) {
        double e = 2.0 * std::sqrt(box.zhi(i) - box.zlo(i));
        if (e > extent) extent = e, axis = box.vlo.size() + i;
    }
    return axis;
}

double box_gauge_diam(const ChartBox& box, const ChartFrame& fr) {
    double v2 = 0.0, z2 = 0.0;
    const int dv = static_cast<int>(box.vlo.size());
    for (int i = 0; i < dv; ++i) {
        double e = box.vhi(i) - box.vlo(i);
        v2 += e * e;
    }
    for (int k = 0; k < box.zlo.size(); ++k) {
        double e = box.zhi(k) - box.zlo(k);
        for (int i = 0; i < dv; ++i)
            e += std::abs(fr.T(k, i)) * (box.vhi(i) - box.vlo(i));
        z2 += e * e;
    }
    return std::pow(v2 * v2 + 16.0 * z2, 0.25);
}

// integrand over chart coordinates (v, z) relative to the mesh center
using ChartIntegrand = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

double integrate_box(const ChartBox& box, const ChartFrame& fr, double x1_scale,
                     const ChartIntegrand& f, int depth) {
    const double dmin = box_gauge_dist(box, fr);
    const double scale = std::pow(std::pow(x1_scale, 4) + std::pow(dmin, 4), 0.25);
    const double diam = box_gauge_diam(box, fr);

    double extent;
    const int axis = widest_gauge_axis(box, fr, extent);
    if (diam > 0.3 * scale && depth < 52 && diam > 1e-10) {
        ChartBox a = box, b = box;
        if (axis < box.vlo.size()) {
            double mid = 0.5 * (box.vlo(axis) + box.vhi(axis));
            a.vhi(axis) = mid;
            b.vlo(axis) = mid;
        } else {
            int k = axis - static_cast<int>(box.vlo.size());
            double mid = 0.5 * (box.zlo(k) + box.zhi(k));
            a.zhi(k) = mid;
            b.zlo(k) = mid;
        }
        return integrate_box(a, fr, x1_scale, f, depth + 1) +
               integrate_box(b, fr, x1_scale, f, depth + 1);
    }

    static const double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const int dv = static_cast<int>(box.vlo.size());
    const int dz = static_cast<int>(box.zlo.size());
    const int dim = dv + dz;

    double vol = 1.0;
    Eigen::VectorXd mid(dim), half(dim);
    for (int i = 0; i < dv; ++i) {
        mid(i) = 0.5 * (box.vlo(i) + box.vhi(i));
        half(i) = 0.5 * (box.vhi(i) - box.vlo(i));
        vol *= 2.0 * half(i);
    }
    for (int i = 0; i < dz; ++i) {
        mid(dv + i) = 0.5 * (box.zlo(i) + box.zhi(i));
        half(dv + i) = 0.5 * (box.zhi(i) - box.zlo(i));
        vol *= 2.0 * half(dv + i);
    }

    std::vector<int> digit(dim, 0);
    double total = 0.0;
    Eigen::VectorXd v(dv), z(dz);
    while (true) {
        double w = 1.0;
        for (int a2 = 0; a2 < dim; ++a2) {
            double c = mid(a2) + half(a2) * gx[digit[a2]];
            w *= gw[digit[a2]] * 0.5; // weights normalized to the box measure
            if (a2 < dv)
                v(a2) = c;
            else
                z(a2 - dv) = c;
        }
        total += w * f(v, z);
        int c = 0;
        while (c < dim && ++digit[c] == 3) digit[c++] = 0;
        if (c == dim) break;
    }
    return total * vol;
}

// Internal double-layer evaluation without the near-plane guard.  The unit
// flag replaces the interpolated density by the constant 1 (the half-flux
// integrand), in which case the integration region is the whole patch.
double eval_dl_impl(const GroupSpec& spec, const PanelMesh& mesh,
                    const Eigen::VectorXd* values, const Point& x) {
    const int dv = spec.m - 1, dz = spec.n;
    const double h = mesh.h, x1 = x.x(0);

    // Penetration point of x through the plane: x = embed(foot) . (x1, 0, .., 0).
    PlanePoint foot;
    foot.xhat = x.x.tail(dv);
    foot.t.resize(dz);
    for (int k = 0; k < dz; ++k) {
        double s = 0.0;
        for (int j = 1; j < spec.m; ++j) s += spec.a[k](0, j) * x.x(j);
        foot.t(k) = x.t(k) - 0.5 * x1 * s;
    }
    foot.level = 0.0;

    const double rho0 = (std::abs(x1) >= 2.0 * h) ? 0.0 : 4.0 * h;
    const double full_w = cell_full_weight(mesh, dv, dz);

    // Chart frame of the foot relative to the mesh center, with the vertical
    // shear of the log map against x.
    ChartFrame fr;
    plane_log_coords(spec, mesh.center, foot, fr.fv, fr.fz);
    fr.T.setZero(dz, dv);
    for (int k = 0; k < dz; ++k)
        for (int i = 0; i < dv; ++i) {
            double s = 0.0; // within-plane bracket (Ahat^k fv)_i
            for (int j = 0; j < dv; ++j)
                s += spec.a[k](i + 1, j + 1) * fr.fv(j);
            fr.T(k, i) = 0.5 * s - 0.5 * x1 * spec.a[k](0, i + 1);
        }

    double far = 0.0;
    std::vector<int> near_cells;
    for (std::size_t j = 0; j < mesh.nodes.size(); ++j) {
        const double gj = values ? (*values)(j) : 1.0;
        bool near = false;
        if (rho0 > 0.0) {
            const double d =
                plane_distance(spec, foot, mesh.nodes[j], PlaneMetric::tilde);
            // Clipped boundary cells stay in the nodal sum; the near set only
            // forms around interior projections, where cells are complete.
            near = d <= rho0 && mesh.weights[j] >= full_w * (1.0 - 1e-12);
        }
        if (near) {
            near_cells.push_back(static_cast<int>(j));
        } else if (gj != 0.0) {
            far += mesh.weights[j] * full_kernel(spec, x, mesh.nodes[j]) * gj;
        }
    }

    double near = 0.0;
    ChartIntegrand f = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& z) {
        PlanePoint p = plane_translate(spec, mesh.center, v, z);
        const double gv = values ? mesh_interpolate(spec, mesh, *values, p) : 1.0;
        if (gv == 0.0) return 0.0;
        return full_kernel(spec, x, p) * gv;
    };
    for (int j : near_cells) {
        ChartBox box;
        box.vlo.resize(dv);
        box.vhi.resize(dv);
        box.zlo.resize(dz);
        box.zhi.resize(dz);
        for (int a = 0; a < dv; ++a) {
            const double c = h * mesh.lattice[j](a);
            box.vlo(a) = c - 0.5 * h;
            box.vhi(a) = c + 0.5 * h;
        }
        for (int a = 0; a < dz; ++a) {
            const double c = h * h * mesh.lattice[j](dv + a);
            box.zlo(a) = c - 0.5 * h * h;
            box.zhi(a) = c + 0.5 * h * h;
        }
        near += integrate_box(box, fr, std::abs(x1), f, 0);
    }
    return far + near;
}

double richardson_limit(const std::vector<double>& levels,
                        const std::vector<double>& vals, double* rate_out) {
    const std::size_t n = vals.size();
    if (n < 2) {
        if (rate_out) *rate_out = 0.0;
        return n ? vals.back() : 0.0;
    }
    double rate = 1.0;
    if (n >= 3) {
        const double d1 = vals[n - 2] - vals[n - 3];
        const double d2 = vals[n - 1] - vals[n - 2];
        const double lr = levels[n - 2] / levels[n - 1];
        if (d1 != 0.0 && d2 != 0.0 && d1 * d2 > 0.0 && lr > 1.0) {
            rate = std::log(std::abs(d1 / d2)) / std::log(lr);
            rate = std::min(3.0, std::max(0.2, rate));
        }
    }
    if (rate_out) *rate_out = rate;
    const double lr = levels[n - 2] / levels[n - 1];
    const double q = std::pow(lr, rate);
    if (q <= 1.0 + 1e-9) return vals.back();
    return vals.back() + (vals.back() - vals[n - 2]) / (q - 1.0);
}

} // namespace

BoundaryFunction sample_density(const PanelMesh& mesh,
                                const std::function<double(const PlanePoint&)>& f,
                                double support_radius) {
    BoundaryFunction g;
    g.mesh = &mesh;
    g.support_radius = support_radius;
    g.values.resize(mesh.nodes.size());
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) g.values(i) = f(mesh.nodes[i]);
    return g;
}

double mesh_interpolate(const GroupSpec& spec, const PanelMesh& mesh,
                        const Eigen::VectorXd& values, const PlanePoint& p) {
    const int dv = spec.m - 1, dz = spec.n, dim = dv + dz;
    Eigen::VectorXd v, z;
    plane_log_coords(spec, mesh.center, p, v, z);

    std::vector<int> base(dim);
    std::vector<double> frac(dim);
    for (int a = 0; a < dv; ++a) {
        double c = v(a) / mesh.h;
        base[a] = static_cast<int>(std::floor(c));
        frac[a] = c - base[a];
    }
    for (int a = 0; a < dz; ++a) {
        double c = z(a) / (mesh.h * mesh.h);
        base[dv + a] = static_cast<int>(std::floor(c));
        frac[dv + a] = c - base[dv + a];
    }

    double out = 0.0;
    Eigen::VectorXi lat(dim);
    for (int corner = 0; corner < (1 << dim); ++corner) {
        double w = 1.0;
        for (int a = 0; a < dim; ++a) {
            const int bit = (corner >> a) & 1;
            lat(a) = base[a] + bit;
            w *= bit ? frac[a] : 1.0 - frac[a];
        }
        if (w == 0.0) continue;
        const int id = mesh.find_node(lat);
        if (id >= 0) out += w * values(id);
    }
    return out;
}

Eigen::VectorXd BoundaryOperator::apply(const Eigen::VectorXd& g) const {
    const int N = size();
    if (g.size() != N)
        throw std::invalid_argument("BoundaryOperator::apply: size mismatch");
    if (!matrix_free) return matrix * g;
    Eigen::VectorXd out(N);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < N; ++i) {
        double s = 0.0;
        for (int j = 0; j < N; ++j) s += entry(i, j) * g(j);
        out(i) = s;
    }
    return out;
}

BoundaryOperator assemble_K(const GroupSpec& spec, const PanelMesh& mesh,
                            bool force_matrix_free) {
    const int N = static_cast<int>(mesh.nodes.size());
    BoundaryOperator op;
    op.kind = OperatorKind::K;
    op.mesh = &mesh;
    op.pv_correction.drop_radius = 3.0 * mesh.h;
    const double drop = op.pv_correction.drop_radius;

    auto value = [spec, mp = &mesh, drop](int i, int j) {
        if (i == j) return 0.0;
        KernelEval e = boundary_kernel(spec, mp->nodes[i], mp->nodes[j]);
        if (e.pole_distance < drop) return 0.0;
        return mp->weights[j] * e.value;
    };

    if (force_matrix_free || N > 6500) {
        op.matrix_free = true;
        op.entry = value;
        return op;
    }
    op.matrix.resize(N, N);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) op.matrix(i, j) = value(i, j);
    return op;
}

BoundaryOperator assemble_K_tilde(const GroupSpec& spec, const PanelMesh& mesh,
                                  double level) {
    if (level == 0.0)
        throw std::invalid_argument("assemble_K_tilde: level must be nonzero (the "
                                    "decoupled kernels live on parallel planes)");
    const int N = static_cast<int>(mesh.nodes.size());
    BoundaryOperator op;
    op.kind = OperatorKind::K_tilde;
    op.mesh = &mesh;
    op.matrix.resize(N, N);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < N; ++i) {
        Point xi = embed_plane_point(spec, mesh.nodes[i]);
        xi.x(0) = level;
        for (int j = 0; j < N; ++j) {
            auto [t1, t2] = tilde_kernels(spec, xi, mesh.nodes[j]);
            op.matrix(i, j) = mesh.weights[j] * (t1.value + t2.value);
        }
    }
    return op;
}

BoundaryOperator assemble_K_remainder(const GroupSpec& spec, const GraphDomain& dom,
                                      const PanelMesh& mesh) {
    const int N = static_cast<int>(mesh.nodes.size());
    const int dv = spec.m - 1, dz = spec.n;
    FlattenedChart chart = flatten_graph(spec, dom);
    const double drop = 3.0 * mesh.h;
    const double full_w = cell_full_weight(mesh, dv, dz);

    BoundaryOperator op;
    op.kind = OperatorKind::K_remainder;
    op.mesh = &mesh;
    op.matrix.resize(N, N);

    // Sub-cell offsets for the weakly singular near-diagonal entries; the
    // 4-per-axis midpoint pattern never lands on the node itself.
    const int sub = 4;
    std::vector<Eigen::VectorXd> offs_v, offs_z;
    {
        std::vector<int> digit(dv + dz, 0);
        while (true) {
            Eigen::VectorXd ov(dv), oz(dz);
            for (int a = 0; a < dv; ++a)
                ov(a) = ((digit[a] + 0.5) / sub - 0.5) * mesh.h;
            for (int a = 0; a < dz; ++a)
                oz(a) = ((digit[dv + a] + 0.5) / sub - 0.5) * mesh.h * mesh.h;
            offs_v.push_back(ov);
            offs_z.push_back(oz);
            int c = 0;
            while (c < dv + dz && ++digit[c] == sub) digit[c++] = 0;
            if (c == dv + dz) break;
        }
    }
    const double sub_frac = 1.0 / static_cast<double>(offs_v.size());

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            const double d =
                plane_distance(spec, mesh.nodes[i], mesh.nodes[j], PlaneMetric::tilde);
            if (d < drop && mesh.weights[j] >= full_w * (1.0 - 1e-12)) {
                // Integrate the weak singularity over the complete cell.
                double s = 0.0;
                for (std::size_t q = 0; q < offs_v.size(); ++q) {
                    PlanePoint p =
                        plane_translate(spec, mesh.nodes[j], offs_v[q], offs_z[q]);
                    s += chart.remainder_kernel(mesh.nodes[i], p);
                }
                op.matrix(i, j) = mesh.weights[j] * sub_frac * s;
            } else if (i == j) {
                // Clipped diagonal cell at the patch rim: weight is tiny and
                // the kernel is undefined at coincidence.
                op.matrix(i, j) = 0.0;
            } else {
                op.matrix(i, j) = mesh.weights[j] *
                                  chart.remainder_kernel(mesh.nodes[i], mesh.nodes[j]);
            }
        }
    }
    return op;
}

Eigen::VectorXd apply_T(const BoundaryOperator& op, double t, const Eigen::VectorXd& g) {
    if (t == 0.0) return 0.5 * g;
    return 0.5 * g + t * op.apply(g);
}

namespace {

Eigen::MatrixXd dense_T_matrix(const BoundaryOperator& op, const BoundaryOperator* extra) {
    const int N = op.size();
    Eigen::MatrixXd A = op.matrix;
    if (extra) A += extra->matrix;
    A += 0.5 * Eigen::MatrixXd::Identity(N, N);
    return A;
}

double relative_residual(const BoundaryOperator& op, const BoundaryOperator* extra,
                         const Eigen::VectorXd& phi, const Eigen::VectorXd& rhs) {
    Eigen::VectorXd r = 0.5 * phi + op.apply(phi);
    if (extra) r += extra->apply(phi);
    r -= rhs;
    const double denom = std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
    return r.cwiseAbs().maxCoeff() / denom;
}

} // namespace

BoundaryFunction solve_density(const BoundaryOperator& op, const BoundaryOperator* extra,
                               const BoundaryFunction& g, SolveMode mode,
                               SolveStats* stats) {
    const int N = op.size();
    if (g.values.size() != N)
        throw std::invalid_argument("solve_density: density does not match the mesh");
    if (extra && extra->size() != N)
        throw std::invalid_argument("solve_density: extra operator size mismatch");
    const bool dense = !op.matrix_free && (!extra || !extra->matrix_free);
    const Eigen::VectorXd& rhs = g.values;

    SolveStats local;
    Eigen::VectorXd phi;

    if (!dense && mode == SolveMode::homotopy)
        throw std::invalid_argument("solve_density: homotopy needs dense operators");

    if (!dense) {
        // Contraction iteration phi <- 2(rhs - K phi); converges because the
        // assembled operator norm is well below 1/2.
        phi = 2.0 * rhs;
        for (int it = 0; it < 500; ++it) {
            Eigen::VectorXd Kphi = op.apply(phi);
            if (extra) Kphi += extra->apply(phi);
            Eigen::VectorXd next = 2.0 * (rhs - Kphi);
            const double change = (next - phi).cwiseAbs().maxCoeff();
            phi = next;
            ++local.total_iterations;
            if (change <= 1e-13 * std::max(1.0, phi.cwiseAbs().maxCoeff())) break;
        }
    } else if (mode == SolveMode::direct) {
        Eigen::MatrixXd A = dense_T_matrix(op, extra);
        phi = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(rhs);
    } else {
        // Homotopy in t: T_t = I/2 + t(K [+R]), eight uniform steps; each step
        // is a Neumann iteration preconditioned by the most recent factorized
        // step (refreshed halfway), warm-started from the previous density.
        Eigen::MatrixXd M = op.matrix;
        if (extra) M += extra->matrix;
        const int steps = 8;
        local.homotopy_steps = steps;
        phi = 2.0 * rhs; // exact solution at t = 0
        Eigen::PartialPivLU<Eigen::MatrixXd> lu;
        bool have_lu = false;
        for (int s2 = 1; s2 <= steps; ++s2) {
            const double t = static_cast<double>(s2) / steps;
            if (s2 == steps / 2) {
                const double t_prev = t - 1.0 / steps;
                lu.compute(0.5 * Eigen::MatrixXd::Identity(N, N) + t_prev * M);
                have_lu = true;
            }
            for (int it = 0; it < 80; ++it) {
                Eigen::VectorXd r = 0.5 * phi + t * (M * phi) - rhs;
                const double rel =
                    r.cwiseAbs().maxCoeff() / std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
                ++local.total_iterations;
                if (rel <= 1e-13) break;
                if (have_lu)
                    phi -= lu.solve(r);
                else
                    phi -= 2.0 * r; // T_0^{-1} = 2 I
            }
        }
    }

    local.residual = relative_residual(op, extra, phi, rhs);
    if (!(local.residual <= 1e-10)) {
        std::ostringstream msg;
        msg << "solve_density: residual " << local.residual
            << " exceeds 1e-10; operator may be near-singular";
        throw std::runtime_error(msg.str());
    }
    if (stats) *stats = local;

    BoundaryFunction out;
    out.mesh = op.mesh;
    out.values = phi;
    out.support_radius = g.support_radius;
    return out;
}

double smallest_singular_value(const BoundaryOperator& op, const BoundaryOperator* extra) {
    if (op.matrix_free || (extra && extra->matrix_free))
        throw std::invalid_argument("smallest_singular_value: needs dense operators");
    const int N = op.size();
    Eigen::MatrixXd A = dense_T_matrix(op, extra);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);

    // Inverse power iteration on (A^T A)^{-1} via paired solves.
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(N);
    for (int i = 0; i < N; ++i) v(i) = gauss(rng);
    v.normalize();
    double sigma = 0.0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd u = lu.solve(v);
        Eigen::VectorXd w = lu.adjoint().solve(u);
        const double mu = w.norm();
        if (mu <= 0.0) return 0.0;
        const double next = 1.0 / std::sqrt(mu);
        v = w / mu;
        if (it > 2 && std::abs(next - sigma) <= 1e-10 * next) return next;
        sigma = next;
    }
    return sigma;
}

Eigen::VectorXd leading_singular_values(const BoundaryOperator& op, int count,
                                        uint64_t seed) {
    if (op.matrix_free)
        throw std::invalid_argument("leading_singular_values: needs a dense operator");
    const int N = op.size();
    count = std::min(count, N);
    const int block = std::min(N, count + 10);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd Q(N, block);
    for (int j = 0; j < block; ++j)
        for (int i = 0; i < N; ++i) Q(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Q);
    Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, block);

    const Eigen::MatrixXd& M = op.matrix;
    for (int it = 0; it < 30; ++it) {
        Eigen::MatrixXd Y = M.transpose() * (M * Q);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr2(Y);
        Q = qr2.householderQ() * Eigen::MatrixXd::Identity(N, block);
    }
    Eigen::MatrixXd B = M * Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B.transpose() * B);
    Eigen::VectorXd ev = eig.eigenvalues(); // ascending
    Eigen::VectorXd out(count);
    for (int i = 0; i < count; ++i)
        out(i) = std::sqrt(std::max(0.0, ev(block - 1 - i)));
    return out;
}

double eval_double_layer(const GroupSpec& spec, const PanelMesh& mesh,
                         const BoundaryFunction& g, const Point& x) {
    if (g.values.size() != static_cast<Eigen::Index>(mesh.nodes.size()))
        throw std::invalid_argument("eval_double_layer: density does not match mesh");
    if (std::abs(x.x(0)) < mesh.h * mesh.h)
        throw std::domain_error("eval_double_layer: evaluation closer to the plane "
                                "than h^2; the boundary-approach regime belongs to "
                                "jump_test");
    return eval_dl_impl(spec, mesh, &g.values, x);
}

std::vector<double> half_flux_test(const GroupSpec& spec, const PanelMesh& mesh,
                                   const PlanePoint& center, double R,
                                   const std::vector<double>& levels) {
    if (std::abs(mesh.patch_radius - R) > 1e-12)
        throw std::invalid_argument("half_flux_test: mesh patch radius must equal R");
    Eigen::VectorXd v0, z0;
    plane_log_coords(spec, mesh.center, center, v0, z0);
    if (chart_gauge(v0, z0) > 1e-12)
        throw std::invalid_argument("half_flux_test: mesh must be centered at the "
                                    "requested center");
    std::vector<double> out;
    out.reserve(levels.size());
    for (double level : levels) {
        Point x = embed_plane_point(spec, center);
        x.x(0) = level;
        out.push_back(eval_dl_impl(spec, mesh, nullptr, x));
    }
    return out;
}

JumpReport jump_test(const GroupSpec& spec, const PanelMesh& mesh,
                     const BoundaryOperator& K, const BoundaryFunction& g,
                     const PlanePoint& xhat0, const std::vector<double>& levels) {
    if (levels.empty())
        throw std::invalid_argument("jump_test: need at least one level");
    for (std::size_t i = 0; i + 1 < levels.size(); ++i)
        if (!(levels[i] > levels[i + 1]) || !(levels.back() > 0.0))
            throw std::invalid_argument("jump_test: levels must be strictly "
                                        "decreasing and positive");

    // Probe must sit on a mesh node; K g is nodal.
    int probe = -1;
    double best = 1e300;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        const double d = plane_distance(spec, mesh.nodes[i], xhat0, PlaneMetric::tilde);
        if (d < best) best = d, probe = static_cast<int>(i);
    }
    if (probe < 0 || best > 1e-10)
        throw std::invalid_argument("jump_test: probe point is not a mesh node");

    Eigen::VectorXd Kg = K.apply(g.values);

    JumpReport rep;
    rep.levels = levels;
    rep.target_above = 0.5 * g.values(probe) + Kg(probe);
    rep.target_below = -0.5 * g.values(probe) + Kg(probe);
    for (double level : levels) {
        Point xp = embed_plane_point(spec, xhat0);
        xp.x(0) = level;
        rep.values_above.push_back(eval_dl_impl(spec, mesh, &g.values, xp));
        xp.x(0) = -level;
        rep.values_below.push_back(eval_dl_impl(spec, mesh, &g.values, xp));
    }
    double rate_up = 0.0, rate_dn = 0.0;
    rep.limit_above = richardson_limit(levels, rep.values_above, &rate_up);
    rep.limit_below = richardson_limit(levels, rep.values_below, &rate_dn);
    rep.observed_rate = 0.5 * (rate_up + rate_dn);
    return rep;
}

double nodal_c2alpha_norm(const GroupSpec& spec, const PanelMesh& mesh,
                          const Eigen::VectorXd& values, double alpha) {
    const int dv = spec.m - 1, dz = spec.n, dim = dv + dz;
    if (values.size() != static_cast<Eigen::Index>(mesh.nodes.size()))
        throw std::invalid_argument("nodal_c2alpha_norm: values do not match mesh");
    const double h = mesh.h;

    double sup = values.cwiseAbs().maxCoeff();
    double grad = 0.0, second = 0.0, vertical = 0.0;

    // Arrays of lattice difference quotients for the seminorm stage.
    std::vector<std::vector<double>> diff2(dv), diffz(dz);
    std::vector<std::vector<int>> diff2_at(dv), diffz_at(dz);

    Eigen::VectorXi lat;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        for (int a = 0; a < dim; ++a) {
            lat = mesh.lattice[i];
            lat(a) += 1;
            const int up = mesh.find_node(lat);
            lat(a) -= 2;
            const int dn = mesh.find_node(lat);
            if (up < 0 || dn < 0) continue;
            if (a < dv) {
                grad = std::max(grad,
                                std::abs(values(up) - values(dn)) / (2.0 * h));
                const double d2 =
                    (values(up) - 2.0 * values(i) + values(dn)) / (h * h);
                second = std::max(second, std::abs(d2));
                diff2[a].push_back(d2);
                diff2_at[a].push_back(static_cast<int>(i));
            } else {
                const double dzq = (values(up) - values(dn)) / (2.0 * h * h);
                vertical = std::max(vertical, std::abs(dzq));
                diffz[a - dv].push_back(dzq);
                diffz_at[a - dv].push_back(static_cast<int>(i));
            }
        }
    }

    // Holder quotients over a deterministic pair subsample (multiplicative
    // stride walk; identical index pattern for any input values).
    auto seminorm = [&](const std::vector<double>& vals,
                        const std::vector<int>& at) {
        const std::size_t M = vals.size();
        if (M < 2) return 0.0;
        double best = 0.0;
        auto consider = [&](std::size_t i, std::size_t j) {
            if (i == j) return;
            const double d = plane_distance(spec, mesh.nodes[at[i]],
                                            mesh.nodes[at[j]], PlaneMetric::tilde);
            if (d < 1e-14) return;
            best = std::max(best, std::abs(vals[i] - vals[j]) / std::pow(d, alpha));
        };
        const std::size_t cap = 20000;
        if (M * (M - 1) / 2 <= cap) {
            for (std::size_t i = 0; i < M; ++i)
                for (std::size_t j = i + 1; j < M; ++j) consider(i, j);
        } else {
            std::size_t a = 0, b = 1;
            for (std::size_t s = 0; s < cap; ++s) {
                consider(a, b);
                a = (a + 2654435761ull) % M;
                b = (b + 40503ull * (s + 1)) % M;
            }
        }
        return best;
    };

    double total = sup + grad + second + vertical;
    for (int a = 0; a < dv; ++a) total += seminorm(diff2[a], diff2_at[a]);
    for (int a = 0; a < dz; ++a) total += seminorm(diffz[a], diffz_at[a]);
    return total;
}

std::pair<double, double> reflection_check(const GroupSpec& spec, const PanelMesh& mesh,
                                           const BoundaryFunction& g, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("reflection_check: need r > 0");
    if (!mesh_is_origin_centered(mesh))
        throw std::invalid_argument("reflection_check: mesh must be centered at the "
                                    "origin (the reflection fixes the origin)");
    const int N = static_cast<int>(mesh.nodes.size());
    for (int i = 0; i < N; ++i)
        if (mesh.mirror_index[i] < 0)
            throw std::invalid_argument("reflection_check: mesh is not closed under "
                                        "the horizontal mirror");
    if (g.values.size() != N)
        throw std::invalid_argument("reflection_check: density does not match mesh");

    auto tilde_sum = [&](const Point& xi, const std::vector<int>& order,
                         bool reflected_density) {
        double s = 0.0;
        for (int j : order) {
            auto [t1, t2] = tilde_kernels(spec, xi, mesh.nodes[j]);
            const double gj =
                reflected_density ? g.values(mesh.mirror_index[j]) : g.values(j);
            s += mesh.weights[j] * (t1.value + t2.value) * gj;
        }
        return s;
    };

    std::vector<int> fwd(N), mirrored(N);
    for (int i = 0; i < N; ++i) fwd[i] = i;
    for (int i = 0; i < N; ++i) mirrored[i] = mesh.mirror_index[i];

    Eigen::VectorXd plus(N), minus_aligned(N);
    for (int i = 0; i < N; ++i) {
        Point xi = embed_plane_point(spec, mesh.nodes[i]);
        xi.x(0) = r;
        plus(i) = tilde_sum(xi, fwd, false);

        // Same functional on the mirrored plane: reflected evaluation point,
        // reflected density, mirror-paired summation order.
        Point xm = embed_plane_point(spec, mesh.nodes[mesh.mirror_index[i]]);
        xm.x(0) = -r;
        minus_aligned(i) = tilde_sum(xm, mirrored, true);
    }

    const double alpha = 0.5;
    return {nodal_c2alpha_norm(spec, mesh, plus, alpha),
            nodal_c2alpha_norm(spec, mesh, minus_aligned, alpha)};
}

Point FlattenedChart::to_physical(const Point& flat) const {
    return graph_to_physical(spec, &dom, flat);
}

Point FlattenedChart::to_flat(const Point& phys) const {
    return graph_to_flat(spec, &dom, phys);
}

double FlattenedChart::curved_kernel(const Point& flat_xi,
                                     const PlanePoint& eta_hat) const {
    const Point px = to_physical(flat_xi);
    Point pe = embed_plane_point(spec, eta_hat);
    pe = graph_to_physical(spec, &dom, pe);
    return grad_gamma_h(spec, px, pe, DerivativeSide::second)(0);
}

double FlattenedChart::remainder_kernel(const PlanePoint& xi_hat,
                                        const PlanePoint& eta_hat) const {
    const Point flat_xi = embed_plane_point(spec, xi_hat);
    return curved_kernel(flat_xi, eta_hat) -
           boundary_kernel(spec, xi_hat, eta_hat).value;
}

FlattenedChart flatten_graph(const GroupSpec& spec, const GraphDomain& dom) {
    if (!spec.has_c_q())
        throw std::logic_error("flatten_graph: c_q is not calibrated");
    FlattenedChart chart;
    chart.spec = spec;
    chart.dom = dom;
    return chart;
}

namespace {

// Curved potential at a flat-chart point: flat double layer (with its adaptive
// near-plane quadrature) plus the weakly singular remainder bracket, whose
// near cells are integrated by the same sub-cell pattern as the assembly.
double curved_eval(const GroupSpec& spec, const FlattenedChart& chart,
                   const PanelMesh& mesh, const Eigen::VectorXd& phi,
                   const Point& x_flat) {
    const int dv = spec.m - 1, dz = spec.n;
    double u = eval_dl_impl(spec, mesh, &phi, x_flat);

    PlanePoint foot;
    foot.xhat = x_flat.x.tail(dv);
    foot.t = x_flat.t;
    foot.level = 0.0;

    auto bracket = [&](const PlanePoint& p) {
        return chart.curved_kernel(x_flat, p) - full_kernel(spec, x_flat, p);
    };

    const double drop = 3.0 * mesh.h;
    const double full_w = cell_full_weight(mesh, dv, dz);
    const int sub = 4;
    for (std::size_t j = 0; j < mesh.nodes.size(); ++j) {
        if (phi(j) == 0.0) continue;
        const double d =
            plane_distance(spec, foot, mesh.nodes[j], PlaneMetric::tilde);
        if (d >= drop || mesh.weights[j] < full_w * (1.0 - 1e-12)) {
            u += mesh.weights[j] * bracket(mesh.nodes[j]) * phi(j);
        } else {
            double s = 0.0;
            std::vector<int> digit(dv + dz, 0);
            Eigen::VectorXd ov(dv), oz(dz);
            int cnt = 0;
            while (true) {
                for (int a = 0; a < dv; ++a)
                    ov(a) = ((digit[a] + 0.5) / sub - 0.5) * mesh.h;
                for (int a = 0; a < dz; ++a)
                    oz(a) = ((digit[dv + a] + 0.5) / sub - 0.5) * mesh.h * mesh.h;
                s += bracket(plane_translate(spec, mesh.nodes[j], ov, oz));
                ++cnt;
                int c = 0;
                while (c < dv + dz && ++digit[c] == sub) digit[c++] = 0;
                if (c == dv + dz) break;
            }
            u += mesh.weights[j] * s / cnt * phi(j);
        }
    }
    return u;
}

} // namespace

double eval_curved_layer(const GroupSpec& spec, const FlattenedChart& chart,
                         const PanelMesh& mesh, const BoundaryFunction& g,
                         const Point& x_flat) {
    if (g.values.size() != static_cast<Eigen::Index>(mesh.nodes.size()))
        throw std::invalid_argument("eval_curved_layer: density does not match mesh");
    if (std::abs(x_flat.x(0)) < mesh.h * mesh.h)
        throw std::domain_error("eval_curved_layer: evaluation closer to the chart "
                                "plane than h^2; the boundary-approach regime "
                                "belongs to jump_test");
    return curved_eval(spec, chart, mesh, g.values, x_flat);
}

SolveReport poisson_solve(const GroupSpec& spec, const GraphDomain* dom,
                          const PanelMesh& mesh, const BoundaryFunction& g,
                          const std::vector<Point>& probes, SolveMode mode) {
    const bool curved = dom != nullptr && !dom->trivial();

    BoundaryOperator K = assemble_K(spec, mesh);
    BoundaryOperator R;
    if (curved) R = assemble_K_remainder(spec, *dom, mesh);

    SolveReport rep;
    rep.probes = probes;
    BoundaryFunction phi =
        solve_density(K, curved ? &R : nullptr, g, mode, &rep.stats);

    FlattenedChart chart;
    if (curved) chart = flatten_graph(spec, *dom);

    rep.u_values.resize(probes.size());
    for (std::size_t p = 0; p < probes.size(); ++p) {
        if (curved) {
            rep.u_values(p) =
                curved_eval(spec, chart, mesh, phi.values, chart.to_flat(probes[p]));
        } else {
            rep.u_values(p) = eval_double_layer(spec, mesh, phi, probes[p]);
        }
    }

    // Attainment at a whisker above the surface, over interior nodes inside
    // the density support.
    const double lift = 1e-3 * mesh.patch_radius;
    const std::size_t stride =
        std::max<std::size_t>(1, mesh.nodes.size() / 24);
    double worst = 0.0;
    for (std::size_t i = 0; i < mesh.nodes.size(); i += stride) {
        if (plane_distance(spec, mesh.center, mesh.nodes[i], PlaneMetric::tilde) >
            0.8 * g.support_radius)
            continue;
        Point xp = embed_plane_point(spec, mesh.nodes[i]);
        xp.x(0) = lift;
        const double u = curved ? curved_eval(spec, chart, mesh, phi.values, xp)
                                : eval_dl_impl(spec, mesh, &phi.values, xp);
        worst = std::max(worst, std::abs(u - g.values(i)));
    }
    rep.boundary_attainment_err = worst;
    return rep;
}

} // namespace htbem
