#include "htbem/holder.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace htbem {

double NormReport::c2alpha_total() const {
    double total = sup_norm + grad_sup + second_sup + vertical_sup;
    for (const auto& [label, value] : alpha_seminorms) total += value;
    return total;
}

double holder_alpha(const std::vector<PlanePoint>& pts, const Eigen::VectorXd& values,
                    const PlaneDistFn& dist, double alpha, std::size_t max_pairs,
                    uint64_t seed) {
    const std::size_t M = pts.size();
    if (values.size() != static_cast<Eigen::Index>(M))
        throw std::invalid_argument("holder_alpha: points and values disagree");
    if (M < 2) return 0.0;

    double best = 0.0;
    auto consider = [&](std::size_t i, std::size_t j) {
        const double d = dist(pts[i], pts[j]);
        if (d < 1e-14) return;
        best = std::max(best, std::abs(values(i) - values(j)) / std::pow(d, alpha));
    };

    const std::size_t all = M * (M - 1) / 2;
    if (all <= max_pairs) {
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t j = i + 1; j < M; ++j) consider(i, j);
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, M - 1);
        for (std::size_t s = 0; s < max_pairs; ++s) {
            std::size_t i = pick(rng), j = pick(rng);
            if (i != j) consider(i, j);
        }
    }
    return best;
}

namespace {

std::vector<std::size_t> stride_subsample(std::size_t total, std::size_t cap) {
    std::vector<std::size_t> out;
    if (total == 0) return out;
    const std::size_t stride = std::max<std::size_t>(1, total / std::max<std::size_t>(1, cap));
    for (std::size_t i = 0; i < total; i += stride) out.push_back(i);
    return out;
}

} // namespace

NormReport c2alpha_estimate(const GroupSpec& spec, const PlaneFn& f,
                            const PanelMesh& mesh, double alpha, double fd_step,
                            std::size_t max_base_points) {
    if (!(fd_step > 0.0))
        throw std::invalid_argument("c2alpha_estimate: need fd_step > 0");
    const int dv = spec.m - 1, dz = spec.n;
    const double s = fd_step;

    NormReport rep;
    for (const auto& node : mesh.nodes)
        rep.sup_norm = std::max(rep.sup_norm, std::abs(f(node)));

    auto shift = [&](const PlanePoint& u, int axis, double step) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dv), z = Eigen::VectorXd::Zero(dz);
        if (axis < dv)
            v(axis) = step;
        else
            z(axis - dv) = step;
        return plane_translate(spec, u, v, z);
    };
    // First difference along a tangential flow, centered at q.
    auto flow_diff = [&](const PlanePoint& q, int i) {
        return (f(shift(q, i, s)) - f(shift(q, i, -s))) / (2.0 * s);
    };

    const auto bases = stride_subsample(mesh.nodes.size(), max_base_points);
    std::vector<PlanePoint> base_pts;
    base_pts.reserve(bases.size());
    for (auto bi : bases) base_pts.push_back(mesh.nodes[bi]);

    // Per-base-point derivative samples, one array per labelled derivative.
    std::vector<Eigen::VectorXd> second(dv * dv), vertical(dz);
    for (auto& a : second) a.resize(base_pts.size());
    for (auto& a : vertical) a.resize(base_pts.size());

    for (std::size_t b = 0; b < base_pts.size(); ++b) {
        const PlanePoint& u = base_pts[b];
        for (int i = 0; i < dv; ++i) {
            rep.grad_sup = std::max(rep.grad_sup, std::abs(flow_diff(u, i)));
            for (int j = 0; j < dv; ++j) {
                const double hij =
                    (flow_diff(shift(u, i, s), j) - flow_diff(shift(u, i, -s), j)) /
                    (2.0 * s);
                second[i * dv + j](b) = hij;
                rep.second_sup = std::max(rep.second_sup, std::abs(hij));
            }
        }
        for (int k = 0; k < dz; ++k) {
            const double zk =
                (f(shift(u, dv + k, s * s)) - f(shift(u, dv + k, -s * s))) /
                (2.0 * s * s);
            vertical[k](b) = zk;
            rep.vertical_sup = std::max(rep.vertical_sup, std::abs(zk));
        }
    }

    // Pairs closer than the stencil width compare stencil error, not the
    // function; push them out of range instead of letting them set the sup.
    const double pair_floor = 3.0 * s;
    PlaneDistFn dist = [&spec, pair_floor](const PlanePoint& p, const PlanePoint& q) {
        double d = plane_distance(spec, p, q, PlaneMetric::tilde);
        return d < pair_floor ? std::numeric_limits<double>::infinity() : d;
    };
    for (int i = 0; i < dv; ++i) {
        for (int j = 0; j < dv; ++j) {
            // Symmetrize: the seminorm sees the averaged mixed derivative.
            Eigen::VectorXd sym = 0.5 * (second[i * dv + j] + second[j * dv + i]);
            if (j < i) continue;
            std::string label = "X2_" + std::to_string(i + 2) + std::to_string(j + 2);
            rep.alpha_seminorms[label] = holder_alpha(base_pts, sym, dist, alpha);
        }
    }
    for (int k = 0; k < dz; ++k) {
        std::string label = "Z_" + std::to_string(k + 1);
        rep.alpha_seminorms[label] = holder_alpha(base_pts, vertical[k], dist, alpha);
    }
    return rep;
}

NormReport gamma2alpha_estimate(const GroupSpec& spec, const PlaneFn& f,
                                const PanelMesh& mesh, const std::vector<double>& scales,
                                double alpha, std::size_t max_base_points) {
    if (scales.empty())
        throw std::invalid_argument("gamma2alpha_estimate: need at least one scale");
    const int dv = spec.m - 1, dz = spec.n;
    const int ncols = 1 + dv + dz + dv * (dv + 1) / 2;

    NormReport rep;
    for (const auto& node : mesh.nodes)
        rep.sup_norm = std::max(rep.sup_norm, std::abs(f(node)));

    // A base is usable at scale delta when the delta-ball stays inside the node
    // cloud, checked per scale: the small scales reach bases near the rim, which
    // is where derivative peaks of edge-supported densities live.
    const double min_scale = *std::min_element(scales.begin(), scales.end());
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        if (plane_distance(spec, mesh.center, mesh.nodes[i], PlaneMetric::tilde) <=
            mesh.patch_radius - min_scale)
            eligible.push_back(i);
    }
    if (eligible.empty())
        throw std::invalid_argument("gamma2alpha_estimate: smallest scale leaves no "
                                    "admissible base points");
    const auto picks = stride_subsample(eligible.size(), max_base_points);

    double worst_resid = 0.0;
    Eigen::VectorXd vhat, z;
    for (auto pi : picks) {
        const PlanePoint& base = mesh.nodes[eligible[pi]];
        const double base_room =
            mesh.patch_radius -
            plane_distance(spec, mesh.center, base, PlaneMetric::tilde);
        for (double delta : scales) {
            if (delta > base_room) continue;
            std::vector<std::size_t> in_ball;
            for (std::size_t q = 0; q < mesh.nodes.size(); ++q) {
                if (plane_distance(spec, base, mesh.nodes[q], PlaneMetric::tilde) <=
                    delta)
                    in_ball.push_back(q);
            }
            if (static_cast<int>(in_ball.size()) < ncols + 2) continue; // underdetermined

            Eigen::MatrixXd X(in_ball.size(), ncols);
            Eigen::VectorXd y(in_ball.size());
            for (std::size_t r = 0; r < in_ball.size(); ++r) {
                plane_log_coords(spec, base, mesh.nodes[in_ball[r]], vhat, z);
                int c = 0;
                X(r, c++) = 1.0;
                for (int i = 0; i < dv; ++i) X(r, c++) = vhat(i);
                for (int k = 0; k < dz; ++k) X(r, c++) = z(k);
                for (int i = 0; i < dv; ++i)
                    for (int j = i; j < dv; ++j) X(r, c++) = vhat(i) * vhat(j);
                y(r) = f(mesh.nodes[in_ball[r]]);
            }
            Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);

            PolyFit fit;
            fit.point = base;
            fit.scale = delta;
            fit.residual = (X * beta - y).cwiseAbs().maxCoeff();
            int c = 0;
            fit.a = beta(c++);
            fit.b.resize(dv);
            for (int i = 0; i < dv; ++i) fit.b(i) = beta(c++);
            fit.d.resize(dz);
            for (int k = 0; k < dz; ++k) fit.d(k) = beta(c++);
            fit.C = Eigen::MatrixXd::Zero(dv, dv);
            for (int i = 0; i < dv; ++i) {
                for (int j = i; j < dv; ++j) {
                    double v = beta(c++);
                    fit.C(i, j) = (i == j) ? v : 0.5 * v;
                    fit.C(j, i) = fit.C(i, j);
                }
            }
            worst_resid = std::max(worst_resid,
                                   fit.residual / std::pow(delta, 2.0 + alpha));
            rep.grad_sup = std::max(rep.grad_sup, fit.b.cwiseAbs().maxCoeff());
            rep.second_sup =
                std::max(rep.second_sup, 2.0 * fit.C.cwiseAbs().maxCoeff());
            rep.vertical_sup = std::max(rep.vertical_sup, fit.d.cwiseAbs().maxCoeff());
            rep.fit_polynomials.push_back(std::move(fit));
        }
    }
    if (rep.fit_polynomials.empty())
        throw std::runtime_error("gamma2alpha_estimate: every scale was underdetermined "
                                 "on this mesh");
    rep.alpha_seminorms["fit_residual"] = worst_resid;
    rep.gamma_norm = rep.sup_norm + rep.grad_sup + rep.second_sup + rep.vertical_sup +
                     worst_resid;
    return rep;
}

EquivalenceReport equivalence_check(const GroupSpec& spec, const PlaneFn& f,
                                    const PanelMesh& mesh, double alpha) {
    // The fd stencil spans ~4 steps and the smallest fitting ball is 2h; keeping
    // those equal stops the two routes from diverging at different rates on
    // merely Lipschitz inputs (both then probe the same finest scale).
    NormReport fd = c2alpha_estimate(spec, f, mesh, alpha, mesh.h / 2.0);

    // Scales span at least a decade, floored so gauge balls hold enough nodes.
    const double lo = std::max(2.0 * mesh.h, 0.03 * mesh.patch_radius);
    const double hi = 0.5 * mesh.patch_radius;
    std::vector<double> scales;
    for (int i = 0; i < 4; ++i)
        scales.push_back(lo * std::pow(hi / lo, i / 3.0));
    NormReport poly = gamma2alpha_estimate(spec, f, mesh, scales, alpha);

    EquivalenceReport out;
    out.c2alpha_norm = fd.c2alpha_total();
    out.gamma_norm = poly.gamma_norm;
    out.ratio = out.gamma_norm / std::max(out.c2alpha_norm, 1e-300);
    return out;
}

} // namespace htbem
