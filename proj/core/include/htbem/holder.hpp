#pragma once

#include "htbem/group.hpp"
#include "htbem/plane_mesh.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace htbem {

// Discrete estimators of the anisotropic Holder norms on the hypersurface.
// The finite-difference route walks the tangential horizontal flows and the
// vertical directions; the polynomial route fits the anisotropic degree-2
// model on gauge balls across scales.  Both use the level-free tilde distance,
// which is what makes estimates on parallel planes comparable.

struct PolyFit {
    PlanePoint point;
    double scale = 0.0;
    double residual = 0.0; // max |f - P| over the fitted ball
    double a = 0.0;
    Eigen::VectorXd b;     // (m-1) linear horizontal coefficients
    Eigen::MatrixXd C;     // (m-1)x(m-1) symmetric quadratic part
    Eigen::VectorXd d;     // n vertical coefficients
};

struct NormReport {
    double sup_norm = 0.0;
    double grad_sup = 0.0;
    double second_sup = 0.0;
    double vertical_sup = 0.0;
    std::map<std::string, double> alpha_seminorms; // per derivative label
    double gamma_norm = 0.0;                       // polynomial-fit norm
    std::vector<PolyFit> fit_polynomials;

    // Finite-difference C^{2,alpha} total: sups plus alpha seminorms.
    double c2alpha_total() const;
};

using PlaneFn = std::function<double(const PlanePoint&)>;
using PlaneDistFn = std::function<double(const PlanePoint&, const PlanePoint&)>;

// Largest |f(p)-f(q)| / dist(p,q)^alpha over a deterministic subsample of
// pairs (low-discrepancy stride, capped at max_pairs).
double holder_alpha(const std::vector<PlanePoint>& pts, const Eigen::VectorXd& values,
                    const PlaneDistFn& dist, double alpha, std::size_t max_pairs = 100000,
                    uint64_t seed = 1234);

// Finite-difference norm estimate on the mesh: central differences along the
// tangential horizontal flows (step fd_step) and the vertical directions
// (step fd_step^2), seminorms over subsampled tilde-distance pairs.
NormReport c2alpha_estimate(const GroupSpec& spec, const PlaneFn& f, const PanelMesh& mesh,
                            double alpha, double fd_step,
                            std::size_t max_base_points = 160);

// Polynomial-approximation norm: least-squares fit of a + b.v + v^T C v + d.z
// on gauge balls at the given scales; gamma_norm combines the worst
// residual/scale^{2+alpha} with the largest fitted coefficient.
NormReport gamma2alpha_estimate(const GroupSpec& spec, const PlaneFn& f,
                                const PanelMesh& mesh, const std::vector<double>& scales,
                                double alpha, std::size_t max_base_points = 60);

struct EquivalenceReport {
    double c2alpha_norm = 0.0;
    double gamma_norm = 0.0;
    double ratio = 0.0; // gamma / c2alpha
};

EquivalenceReport equivalence_check(const GroupSpec& spec, const PlaneFn& f,
                                    const PanelMesh& mesh, double alpha);

} // namespace htbem
