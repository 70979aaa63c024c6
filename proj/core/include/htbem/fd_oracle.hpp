#pragma once

#include "htbem/graph_domain.hpp"
#include "htbem/group.hpp"

#include <functional>
#include <vector>

namespace htbem {

// Finite-difference oracle: a discretization of the sub-Laplacian on box
// grids, independent of every closed-form kernel, used to cross-check
// harmonicity and the boundary value problem end to end.  Grids are
// dilation-adapted (vertical spacing tracks hx^2) unless the caller overrides
// ht, which the Dirichlet-solve comparisons do to keep the unknown count sane.

struct GridSpec {
    Eigen::VectorXd lo, hi; // box corners in (x, t), length m+n
    double hx = 0.0;        // spacing of every x-direction
    double ht = 0.0;        // spacing of every t-direction

    std::vector<int> shape;  // node counts, derived at construction
    int m = 0, n = 0;

    long size() const;
    long index(const std::vector<int>& idx) const;
    void unravel(long flat, std::vector<int>& idx) const;
    Point point_at(const std::vector<int>& idx) const;
    bool is_boundary(const std::vector<int>& idx) const;
    double spacing(int axis) const { return axis < m ? hx : ht; }
};

// ht < 0 requests the dilation-adapted default ht = hx^2.
GridSpec make_grid(const GroupSpec& spec, const Eigen::VectorXd& lo,
                   const Eigen::VectorXd& hi, double hx, double ht = -1.0);

// Second-order stencil for sum_j X_j^2 u at an interior node: pure second
// differences, four-point crosses for the mixed x-t terms, central first
// differences for the drift of a curved (flattened) frame.  Exact on
// quadratics of the coordinates.
double sublaplacian_stencil(const GroupSpec& spec, const GridSpec& grid,
                            const Eigen::VectorXd& u, const std::vector<int>& p,
                            const GraphDomain* dom = nullptr);

// Dirichlet solve: stencil(u) = f at interior nodes, u = g on the box
// boundary.  Sparse direct solve with an iterative fallback; residual checked
// against tol in the relative sup norm.
Eigen::VectorXd fd_dirichlet_solve(const GroupSpec& spec, const GridSpec& grid,
                                   const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                                   const GraphDomain* dom = nullptr, double tol = 1e-10);

// Convenience: sample a callable on every grid node (used to build f and g).
Eigen::VectorXd grid_sample(const GridSpec& grid,
                            const std::function<double(const Point&)>& f);

// Monte Carlo mean value identity: importance-samples the gauge sphere of
// radius r around x with the harmonic measure weight and averages psi; for
// harmonic psi this reproduces psi(x), and for psi == 1 the total mass 1.
double mean_value_mc(const GroupSpec& spec, const std::function<double(const Point&)>& psi,
                     const Point& x, double r, long n_samples, uint64_t seed = 1);

} // namespace htbem
