#include "htbem/fd_oracle.hpp"

#include "htbem/kernels.hpp"
#include "htbem/sphere_quadrature.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <cmath>
#include <random>
#include <stdexcept>

namespace htbem {

namespace {

// Split a flat-chart point into (y1, shat) with shat = (xhat, t).
Eigen::VectorXd shat_of(const GroupSpec& spec, const Point& p) {
    Eigen::VectorXd s(spec.m - 1 + spec.n);
    s.head(spec.m - 1) = p.x.tail(spec.m - 1);
    s.tail(spec.n) = p.t;
    return s;
}

} // namespace

GraphDomain make_quadratic_bump_domain(const GroupSpec& spec, double eps, double rho) {
    (void)spec;
    if (!(rho > 0.0))
        throw std::invalid_argument("make_quadratic_bump_domain: need rho > 0");
    const double r2 = rho * rho;
    GraphDomain dom;
    dom.curvature_radius = rho;
    // w = g(u), u = |shat|^2, g(u) = eps * u * (1 - u/rho^2)^4.
    auto g = [eps, r2](double u) {
        double q = 1.0 - u / r2;
        return eps * u * q * q * q * q;
    };
    auto gp = [eps, r2](double u) {
        double q = 1.0 - u / r2;
        return eps * q * q * q * (1.0 - 5.0 * u / r2);
    };
    auto gpp = [eps, r2](double u) {
        double q = 1.0 - u / r2;
        return -(eps / r2) * q * q * (8.0 - 20.0 * u / r2);
    };
    dom.w = [g, r2](const Eigen::VectorXd& s) {
        double u = s.squaredNorm();
        return u >= r2 ? 0.0 : g(u);
    };
    dom.grad_w = [gp, r2](const Eigen::VectorXd& s) {
        double u = s.squaredNorm();
        if (u >= r2) return Eigen::VectorXd::Zero(s.size()).eval();
        return (2.0 * gp(u) * s).eval();
    };
    dom.hess_w = [gp, gpp, r2](const Eigen::VectorXd& s) {
        double u = s.squaredNorm();
        const auto d = s.size();
        if (u >= r2) return Eigen::MatrixXd::Zero(d, d).eval();
        Eigen::MatrixXd H = 2.0 * gp(u) * Eigen::MatrixXd::Identity(d, d);
        H += 4.0 * gpp(u) * (s * s.transpose());
        return H.eval();
    };
    return dom;
}

Point graph_to_physical(const GroupSpec& spec, const GraphDomain* dom,
                        const Point& flat) {
    if (dom == nullptr || dom->trivial()) return flat;
    Point phys = flat;
    phys.x(0) += dom->w(shat_of(spec, flat));
    return phys;
}

Point graph_to_flat(const GroupSpec& spec, const GraphDomain* dom, const Point& phys) {
    if (dom == nullptr || dom->trivial()) return phys;
    Point flat = phys;
    flat.x(0) -= dom->w(shat_of(spec, phys));
    return flat;
}

FrameData flattened_frame(const GroupSpec& spec, const GraphDomain* dom,
                          const Point& pos) {
    const int m = spec.m, n = spec.n, dim = m + n;
    const bool curved = dom != nullptr && !dom->trivial();

    // Physical horizontal coordinates feed the group coefficients alpha.
    Eigen::VectorXd shat, p, q;
    Eigen::MatrixXd Hw;
    Eigen::VectorXd xphys = pos.x;
    if (curved) {
        shat = shat_of(spec, pos);
        xphys(0) += dom->w(shat);
        Eigen::VectorXd gw = dom->grad_w(shat);
        p = gw.head(m - 1); // d w / d x_i, i = 2..m
        q = gw.tail(n);     // d w / d t_k
        Hw = dom->hess_w(shat);
    } else {
        p = Eigen::VectorXd::Zero(m - 1);
        q = Eigen::VectorXd::Zero(n);
        Hw = Eigen::MatrixXd::Zero(m - 1 + n, m - 1 + n);
    }

    // alpha(j,k) = (A^k x)_j / 2 at the physical point.
    Eigen::MatrixXd alpha(m, n);
    for (int k = 0; k < n; ++k) alpha.col(k) = 0.5 * (spec.a[k] * xphys);

    FrameData fr;
    fr.fields.assign(m, Eigen::VectorXd::Zero(dim));
    for (int j = 0; j < m; ++j) {
        double cj;
        if (j == 0) {
            cj = 1.0 - alpha.row(0).dot(q);
        } else {
            cj = -p(j - 1) - alpha.row(j).dot(q);
            fr.fields[j](j) = 1.0;
        }
        fr.fields[j](0) = cj;
        for (int k = 0; k < n; ++k) fr.fields[j](m + k) = alpha(j, k);
    }

    fr.drift = Eigen::VectorXd::Zero(dim);
    if (!curved) return fr;

    // Only the y1 component of the drift survives; the vertical components of
    // sum_j Y_j(coefficients) cancel through the skew symmetry of the A^k.
    // grad_c[j] below is the coordinate gradient of c_j in the flat chart.
    auto hw_xx = [&](int i, int j2) { return Hw(i, j2); };          // 0-based xhat
    auto hw_xt = [&](int i, int k) { return Hw(i, m - 1 + k); };
    auto hw_tt = [&](int l, int k) { return Hw(m - 1 + l, m - 1 + k); };

    double drift0 = 0.0;
    Eigen::VectorXd grad_c(dim);
    for (int j = 0; j < m; ++j) {
        grad_c.setZero();
        double a1j = 0.0; // (A^k)_{j,1} enters every slot; gather per k below
        (void)a1j;
        // slot 0 (y1)
        double s0 = 0.0;
        for (int k = 0; k < n; ++k) s0 += spec.a[k](j, 0) * q(k);
        grad_c(0) = -0.5 * s0;
        // slots x_i, i = 2..m (0-based coordinate index i, 1 <= i <= m-1)
        for (int i = 1; i < m; ++i) {
            double s = (j >= 1) ? hw_xx(i - 1, j - 1) : 0.0;
            for (int k = 0; k < n; ++k) {
                s += 0.5 * (spec.a[k](j, i) + spec.a[k](j, 0) * p(i - 1)) * q(k);
                s += alpha(j, k) * hw_xt(i - 1, k);
            }
            grad_c(i) = -s;
        }
        // slots t_l
        for (int l = 0; l < n; ++l) {
            double s = (j >= 1) ? hw_xt(j - 1, l) : 0.0;
            for (int k = 0; k < n; ++k) {
                s += 0.5 * spec.a[k](j, 0) * q(l) * q(k);
                s += alpha(j, k) * hw_tt(l, k);
            }
            grad_c(m + l) = -s;
        }
        drift0 += fr.fields[j].dot(grad_c);
    }
    fr.drift(0) = drift0;
    return fr;
}

long GridSpec::size() const {
    long s = 1;
    for (int c : shape) s *= c;
    return s;
}

long GridSpec::index(const std::vector<int>& idx) const {
    long flat = 0;
    for (std::size_t a = 0; a < shape.size(); ++a) flat = flat * shape[a] + idx[a];
    return flat;
}

void GridSpec::unravel(long flat, std::vector<int>& idx) const {
    idx.resize(shape.size());
    for (int a = static_cast<int>(shape.size()) - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % shape[a]);
        flat /= shape[a];
    }
}

Point GridSpec::point_at(const std::vector<int>& idx) const {
    Point p;
    p.x.resize(m);
    p.t.resize(n);
    for (int a = 0; a < m; ++a) p.x(a) = lo(a) + hx * idx[a];
    for (int a = 0; a < n; ++a) p.t(a) = lo(m + a) + ht * idx[m + a];
    return p;
}

bool GridSpec::is_boundary(const std::vector<int>& idx) const {
    for (std::size_t a = 0; a < shape.size(); ++a)
        if (idx[a] == 0 || idx[a] == shape[a] - 1) return true;
    return false;
}

GridSpec make_grid(const GroupSpec& spec, const Eigen::VectorXd& lo,
                   const Eigen::VectorXd& hi, double hx, double ht) {
    if (lo.size() != spec.m + spec.n || hi.size() != spec.m + spec.n)
        throw std::invalid_argument("make_grid: box corners must have length m+n");
    if (!(hx > 0.0)) throw std::invalid_argument("make_grid: need hx > 0");
    GridSpec grid;
    grid.m = spec.m;
    grid.n = spec.n;
    grid.hx = hx;
    grid.ht = ht > 0.0 ? ht : hx * hx;
    grid.lo = lo;
    grid.hi = hi;
    grid.shape.resize(spec.m + spec.n);
    for (int a = 0; a < spec.m + spec.n; ++a) {
        double h = grid.spacing(a);
        int count = static_cast<int>(std::lround((hi(a) - lo(a)) / h)) + 1;
        if (count < 3)
            throw std::invalid_argument("make_grid: fewer than 3 nodes along an axis");
        grid.shape[a] = count;
        grid.hi(a) = lo(a) + (count - 1) * h; // snap so spacing stays exact
    }
    return grid;
}

namespace {

// Row of the discrete operator at interior node p: coefficient per touched
// node, encoded as (flat index, value).  Shared by the stencil evaluator and
// the matrix assembly so they cannot drift apart.
void stencil_row(const GroupSpec& spec, const GridSpec& grid, const std::vector<int>& p,
                 const GraphDomain* dom,
                 std::vector<std::pair<long, double>>& out) {
    const int dim = spec.m + spec.n;
    FrameData fr = flattened_frame(spec, dom, grid.point_at(p));
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& f : fr.fields) M += f * f.transpose();

    out.clear();
    std::vector<int> q = p;
    auto push = [&](const std::vector<int>& idx, double v) {
        out.emplace_back(grid.index(idx), v);
    };

    double diag = 0.0;
    for (int c = 0; c < dim; ++c) {
        const double hc = grid.spacing(c);
        const double mc = M(c, c);
        if (mc != 0.0) {
            q[c] = p[c] + 1;
            push(q, mc / (hc * hc));
            q[c] = p[c] - 1;
            push(q, mc / (hc * hc));
            q[c] = p[c];
            diag += -2.0 * mc / (hc * hc);
        }
        const double dc = fr.drift(c);
        if (dc != 0.0) {
            q[c] = p[c] + 1;
            push(q, dc / (2.0 * hc));
            q[c] = p[c] - 1;
            push(q, -dc / (2.0 * hc));
            q[c] = p[c];
        }
        for (int d = c + 1; d < dim; ++d) {
            const double mcd = M(c, d);
            if (mcd == 0.0) continue;
            const double s = 2.0 * mcd / (4.0 * hc * grid.spacing(d));
            for (int sc : {+1, -1}) {
                for (int sd : {+1, -1}) {
                    q[c] = p[c] + sc;
                    q[d] = p[d] + sd;
                    push(q, s * sc * sd);
                }
            }
            q[c] = p[c];
            q[d] = p[d];
        }
    }
    push(p, diag);
}

} // namespace

double sublaplacian_stencil(const GroupSpec& spec, const GridSpec& grid,
                            const Eigen::VectorXd& u, const std::vector<int>& p,
                            const GraphDomain* dom) {
    for (std::size_t a = 0; a < grid.shape.size(); ++a)
        if (p[a] < 1 || p[a] > grid.shape[a] - 2)
            throw std::invalid_argument("sublaplacian_stencil: node not interior");
    std::vector<std::pair<long, double>> row;
    stencil_row(spec, grid, p, dom, row);
    double v = 0.0;
    for (const auto& [j, c] : row) v += c * u(j);
    return v;
}

Eigen::VectorXd fd_dirichlet_solve(const GroupSpec& spec, const GridSpec& grid,
                                   const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                                   const GraphDomain* dom, double tol) {
    const long N = grid.size();
    if (f.size() != N || g.size() != N)
        throw std::invalid_argument("fd_dirichlet_solve: f and g must be grid vectors");

    std::vector<long> unk(N, -1);
    std::vector<long> node_of;
    std::vector<int> idx;
    for (long i = 0; i < N; ++i) {
        grid.unravel(i, idx);
        if (!grid.is_boundary(idx)) {
            unk[i] = static_cast<long>(node_of.size());
            node_of.push_back(i);
        }
    }
    const long nu = static_cast<long>(node_of.size());
    if (nu == 0) throw std::invalid_argument("fd_dirichlet_solve: no interior nodes");

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(nu) * 16);
    Eigen::VectorXd rhs(nu);
    std::vector<std::pair<long, double>> row;
    for (long r = 0; r < nu; ++r) {
        grid.unravel(node_of[r], idx);
        stencil_row(spec, grid, idx, dom, row);
        double b = f(node_of[r]);
        for (const auto& [j, c] : row) {
            if (unk[j] >= 0)
                trips.emplace_back(static_cast<int>(r), static_cast<int>(unk[j]), c);
            else
                b -= c * g(j);
        }
        rhs(r) = b;
    }

    Eigen::SparseMatrix<double> A(nu, nu);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();

    Eigen::VectorXd sol;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() == Eigen::Success) {
        sol = lu.solve(rhs);
    }
    if (lu.info() != Eigen::Success || !sol.allFinite()) {
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
        it.setMaxIterations(4000);
        it.setTolerance(1e-12);
        it.compute(A);
        sol = it.solve(rhs);
        if (it.info() != Eigen::Success)
            throw std::runtime_error("fd_dirichlet_solve: both direct and iterative "
                                     "solves failed");
    }

    Eigen::VectorXd u = g;
    for (long r = 0; r < nu; ++r) u(node_of[r]) = sol(r);

    // Residual in the relative sup norm against the assembled scale.
    double anorm = 0.0, res = 0.0;
    for (long r = 0; r < nu; ++r) {
        grid.unravel(node_of[r], idx);
        stencil_row(spec, grid, idx, dom, row);
        double s = 0.0, rsum = 0.0;
        for (const auto& [j, c] : row) {
            s += std::abs(c);
            rsum += c * u(j);
        }
        anorm = std::max(anorm, s);
        res = std::max(res, std::abs(rsum - f(node_of[r])));
    }
    const double scale = anorm * u.cwiseAbs().maxCoeff() + f.cwiseAbs().maxCoeff() + 1.0;
    if (res > tol * scale)
        throw std::runtime_error("fd_dirichlet_solve: residual exceeds tolerance");
    return u;
}

Eigen::VectorXd grid_sample(const GridSpec& grid,
                            const std::function<double(const Point&)>& f) {
    const long N = grid.size();
    Eigen::VectorXd out(N);
    std::vector<int> idx;
    for (long i = 0; i < N; ++i) {
        grid.unravel(i, idx);
        out(i) = f(grid.point_at(idx));
    }
    return out;
}

double mean_value_mc(const GroupSpec& spec,
                     const std::function<double(const Point&)>& psi, const Point& x,
                     double r, long n_samples, uint64_t seed) {
    if (!spec.has_c_q())
        throw std::logic_error("mean_value_mc: c_q is not calibrated");
    if (!(r > 0.0) || n_samples < 1)
        throw std::invalid_argument("mean_value_mc: need r > 0 and samples >= 1");
    const int m = spec.m, n = spec.n;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uth(0.0, 0.5 * M_PI);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Point origin{Eigen::VectorXd::Zero(spec.m), Eigen::VectorXd::Zero(spec.n)};
    auto sphere_dir = [&](int d) {
        Eigen::VectorXd v(d);
        double norm = 0.0;
        do {
            for (int i = 0; i < d; ++i) v(i) = gauss(rng);
            norm = v.norm();
        } while (norm < 1e-12);
        return (v / norm).eval();
    };

    double acc = 0.0;
    Point sig;
    sig.x.resize(m);
    sig.t.resize(n);
    for (long s = 0; s < n_samples; ++s) {
        const double th = uth(rng);
        const double c = std::max(std::cos(th), 1e-14), si = std::sin(th);
        sig.x = (r * std::sqrt(c)) * sphere_dir(m);
        sig.t = (0.25 * r * r * si) * sphere_dir(n);

        // Surface Jacobian of the (theta, omega_x, omega_t) chart.
        const double darc =
            std::sqrt(r * r * si * si / (4.0 * c) + std::pow(0.25 * r * r * c, 2));
        const double jac = darc * std::pow(r * std::sqrt(c), m - 1) *
                           std::pow(0.25 * r * r * si, n - 1);

        // Inward harmonic-measure weight <V, nu_in> at sig, V the horizontal
        // gradient field of the fundamental solution centered at the origin.
        Eigen::VectorXd gh = grad_gamma_h(spec, sig, origin, DerivativeSide::first);
        Eigen::VectorXd grad_x = 4.0 * sig.x.squaredNorm() * sig.x;
        Eigen::VectorXd grad_t = 32.0 * sig.t;
        double vn = gh.dot(grad_x);
        for (int k = 0; k < n; ++k)
            vn += 0.5 * gh.dot(spec.a[k] * sig.x) * grad_t(k);
        const double gn = std::sqrt(grad_x.squaredNorm() + grad_t.squaredNorm());
        const double weight = -vn / gn * jac;

        acc += psi(group_mul(spec, x, sig)) * weight;
    }
    const double area = unit_sphere_area(m) * unit_sphere_area(n) * 0.5 * M_PI;
    return area * acc / static_cast<double>(n_samples);
}

} // namespace htbem
