#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace htbem {

// Step-2 Carnot group on R^{m+n} in prototype coordinates.  A point is a pair
// (x, t) with x in R^m (horizontal layer) and t in R^n (vertical layer); the
// product of a = (x, t) and b = (y, tau) is
//
//     a o b = ( x + y ,  t_k + tau_k + 1/2 <A^(k) x, y> ),
//
// i.e. the *left* factor's horizontal part is hit by the structure matrices.
// The group is of Heisenberg type when every A^(k) is skew-symmetric and
// orthogonal and the A^(k) pairwise anticommute; all closed-form kernels below
// rely on those identities, so validate_h_type() should be consulted before
// trusting kernel output on a custom spec.

enum class GroupKind { heisenberg, quaternionic, custom };

struct GroupSpec {
    int m = 0;                      // horizontal dimension
    int n = 0;                      // vertical dimension
    std::vector<Eigen::MatrixXd> a; // n structure matrices, each m x m
    int q = 0;                      // homogeneous dimension m + 2n
    double c_q = std::numeric_limits<double>::quiet_NaN(); // unset until calibrated
    GroupKind kind = GroupKind::custom;

    bool has_c_q() const { return std::isfinite(c_q) && c_q > 0.0; }
};

struct Point {
    Eigen::VectorXd x; // R^m
    Eigen::VectorXd t; // R^n
};

// Point of the model hypersurface Pi_r = {x_1 = r}.  Coordinates are the
// remaining horizontal ones (xhat in R^{m-1}) plus the vertical ones.
struct PlanePoint {
    Eigen::VectorXd xhat; // R^{m-1}
    Eigen::VectorXd t;    // R^n
    double level = 0.0;
};

struct ValidationDefect {
    std::string what;
    double magnitude = 0.0;
};

struct ValidationReport {
    bool passed = false;
    double max_skew_defect = 0.0;     // max |A + A^T| entry over all k
    double max_orth_defect = 0.0;     // max |A^T A - I| entry over all k
    double max_anticomm_defect = 0.0; // max |A^k A^l + A^l A^k| entry, k != l
    std::vector<ValidationDefect> defects;
    // Rank at the origin of the horizontal fields tangent to Pi together with
    // their first brackets; equals (m-1)+n exactly when Pi is bracket-generating.
    int hoermander_rank_on_plane = 0;
};

GroupSpec make_prototype(GroupKind kind, int nu = 1);

ValidationReport validate_h_type(const GroupSpec& spec, double tol = 1e-12);

Point group_mul(const GroupSpec& spec, const Point& a, const Point& b);
Point group_inv(const GroupSpec& spec, const Point& a);
Point dilate(const GroupSpec& spec, const Point& a, double lambda);
double gauge_norm(const GroupSpec& spec, const Point& a);
double gauge_distance(const GroupSpec& spec, const Point& a, const Point& b);

// Log_base(p) = base^{-1} o p, returned in (x, t) coordinates.
Point log_coords(const GroupSpec& spec, const Point& base, const Point& p);

Point make_point(const GroupSpec& spec, std::initializer_list<double> coords);
Point embed_plane_point(const GroupSpec& spec, const PlanePoint& p);
PlanePoint make_plane_point(const GroupSpec& spec, std::initializer_list<double> coords,
                            double level = 0.0);

// Log coordinates of q relative to p within the hypersurface.  The vertical
// part uses the reduced matrices Ahat (first row/column removed), so the
// result does not depend on the common level; this is the "tilde" chart.
void plane_log_coords(const GroupSpec& spec, const PlanePoint& p, const PlanePoint& q,
                      Eigen::VectorXd& vhat, Eigen::VectorXd& z);

enum class PlaneMetric { tilde, induced };

// Quasi-distance on Pi_r.  The tilde variant is level-independent; the induced
// variant is the gauge distance of the embedded points (they agree at level 0).
double plane_distance(const GroupSpec& spec, const PlanePoint& p, const PlanePoint& q,
                      PlaneMetric mode = PlaneMetric::tilde);

// Group translation of a plane point by tangent-chart increments (vhat, z):
// returns base o (0, vhat, z) as a PlanePoint on the same level.
PlanePoint plane_translate(const GroupSpec& spec, const PlanePoint& base,
                           const Eigen::VectorXd& vhat, const Eigen::VectorXd& z);

// Text format: first line "m n", then n whitespace-separated m*m blocks
// (row-major).  The loader validates unless allow_invalid is set.
GroupSpec load_group_spec(const std::string& path, bool allow_invalid = false);
void save_group_spec(const GroupSpec& spec, const std::string& path);

std::string group_name(const GroupSpec& spec);

} // namespace htbem
