#include "htbem/group.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace htbem {

namespace {

void check_dims(const GroupSpec& spec, const Point& p, const char* who) {
    if (p.x.size() != spec.m || p.t.size() != spec.n)
        throw std::invalid_argument(std::string(who) + ": point dimensions do not match group spec");
}

// <A^(k) u, w> for the k-th structure matrix.
double bilinear(const GroupSpec& spec, int k, const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
    return (spec.a[k] * u).dot(w);
}

} // namespace

GroupSpec make_prototype(GroupKind kind, int nu) {
    GroupSpec spec;
    spec.kind = kind;
    switch (kind) {
    case GroupKind::heisenberg: {
        if (nu < 1) throw std::invalid_argument("make_prototype: heisenberg index must be >= 1");
        spec.m = 2 * nu;
        spec.n = 1;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(spec.m, spec.m);
        // Standard symplectic form, 2x2 blocks [[0,-1],[1,0]] on each (x_{2i-1}, x_{2i}) pair.
        for (int i = 0; i < nu; ++i) {
            A(2 * i, 2 * i + 1) = -1.0;
            A(2 * i + 1, 2 * i) = 1.0;
        }
        spec.a.push_back(A);
        break;
    }
    case GroupKind::quaternionic: {
        spec.m = 4;
        spec.n = 3;
        // Left multiplication by the quaternion units i, j, k in the basis (1, i, j, k).
        Eigen::MatrixXd Ai(4, 4), Aj(4, 4), Ak(4, 4);
        Ai << 0, -1, 0, 0,
              1,  0, 0, 0,
              0,  0, 0, -1,
              0,  0, 1, 0;
        Aj << 0, 0, -1, 0,
              0, 0,  0, 1,
              1, 0,  0, 0,
              0, -1, 0, 0;
        Ak << 0, 0,  0, -1,
              0, 0, -1, 0,
              0, 1,  0, 0,
              1, 0,  0, 0;
        spec.a = {Ai, Aj, Ak};
        break;
    }
    case GroupKind::custom:
        throw std::invalid_argument("make_prototype: custom groups are built from a spec file");
    }
    spec.q = spec.m + 2 * spec.n;
    return spec;
}

ValidationReport validate_h_type(const GroupSpec& spec, double tol) {
    ValidationReport rep;
    if (spec.m < 2 || spec.n < 1 || static_cast<int>(spec.a.size()) != spec.n) {
        rep.defects.push_back({"malformed spec (need m >= 2, n >= 1, n structure matrices)", 1.0});
        rep.passed = false;
        return rep;
    }

    for (int k = 0; k < spec.n; ++k) {
        const Eigen::MatrixXd& A = spec.a[k];
        if (A.rows() != spec.m || A.cols() != spec.m) {
            rep.defects.push_back({"A(" + std::to_string(k) + ") has wrong shape", 1.0});
            continue;
        }
        double skew = (A + A.transpose()).cwiseAbs().maxCoeff();
        if (skew > tol)
            rep.defects.push_back({"A(" + std::to_string(k) + ") not skew-symmetric", skew});
        double orth = (A.transpose() * A - Eigen::MatrixXd::Identity(spec.m, spec.m))
                          .cwiseAbs().maxCoeff();
        if (orth > tol)
            rep.defects.push_back({"A(" + std::to_string(k) + ") not orthogonal", orth});
        rep.max_skew_defect = std::max(rep.max_skew_defect, skew);
        rep.max_orth_defect = std::max(rep.max_orth_defect, orth);
    }
    for (int k = 0; k < spec.n; ++k) {
        for (int l = k + 1; l < spec.n; ++l) {
            if (spec.a[k].rows() != spec.m || spec.a[l].rows() != spec.m) continue;
            double anti = (spec.a[k] * spec.a[l] + spec.a[l] * spec.a[k]).cwiseAbs().maxCoeff();
            if (anti > tol)
                rep.defects.push_back({"A(" + std::to_string(k) + "), A(" + std::to_string(l) +
                                           ") do not anticommute", anti});
            rep.max_anticomm_defect = std::max(rep.max_anticomm_defect, anti);
        }
    }

    // Bracket-generation on the hypersurface {x_1 = 0}: available fields are the
    // m-1 tangent horizontal ones; their brackets span the vertical directions
    // (Ahat^(k))_{j,i} over pairs i,j >= 2.  Rank of that span decides Hoermander.
    {
        const int mh = spec.m - 1;
        std::vector<Eigen::VectorXd> bracket_dirs;
        for (int i = 0; i < mh; ++i) {
            for (int j = i + 1; j < mh; ++j) {
                Eigen::VectorXd dir(spec.n);
                for (int k = 0; k < spec.n; ++k) {
                    dir(k) = (spec.a[k].rows() == spec.m) ? spec.a[k](j + 1, i + 1) : 0.0;
                }
                if (dir.norm() > 0) bracket_dirs.push_back(dir);
            }
        }
        int vrank = 0;
        if (!bracket_dirs.empty()) {
            Eigen::MatrixXd B(bracket_dirs.size(), spec.n);
            for (size_t r = 0; r < bracket_dirs.size(); ++r) B.row(r) = bracket_dirs[r];
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
            double smax = svd.singularValues()(0);
            for (int i = 0; i < svd.singularValues().size(); ++i)
                if (svd.singularValues()(i) > 1e-10 * std::max(1.0, smax)) ++vrank;
        }
        rep.hoermander_rank_on_plane = mh + vrank;
    }

    rep.passed = rep.defects.empty();
    return rep;
}

Point group_mul(const GroupSpec& spec, const Point& a, const Point& b) {
    check_dims(spec, a, "group_mul");
    check_dims(spec, b, "group_mul");
    Point out;
    out.x = a.x + b.x;
    out.t.resize(spec.n);
    for (int k = 0; k < spec.n; ++k)
        out.t(k) = a.t(k) + b.t(k) + 0.5 * bilinear(spec, k, a.x, b.x);
    return out;
}

Point group_inv(const GroupSpec& spec, const Point& a) {
    check_dims(spec, a, "group_inv");
    Point out;
    out.x = -a.x;
    out.t.resize(spec.n);
    // Solves inv(a) o a = identity.  For skew A the quadratic term vanishes and
    // this reduces to (-x, -t); keeping it general lets non-prototype specs work.
    for (int k = 0; k < spec.n; ++k)
        out.t(k) = -a.t(k) + 0.5 * bilinear(spec, k, a.x, a.x);
    return out;
}

Point dilate(const GroupSpec& spec, const Point& a, double lambda) {
    check_dims(spec, a, "dilate");
    return Point{lambda * a.x, lambda * lambda * a.t};
}

double gauge_norm(const GroupSpec& spec, const Point& a) {
    check_dims(spec, a, "gauge_norm");
    double x2 = a.x.squaredNorm();
    return std::pow(x2 * x2 + 16.0 * a.t.squaredNorm(), 0.25);
}

double gauge_distance(const GroupSpec& spec, const Point& a, const Point& b) {
    return gauge_norm(spec, group_mul(spec, group_inv(spec, b), a));
}

Point log_coords(const GroupSpec& spec, const Point& base, const Point& p) {
    return group_mul(spec, group_inv(spec, base), p);
}

Point make_point(const GroupSpec& spec, std::initializer_list<double> coords) {
    if (static_cast<int>(coords.size()) != spec.m + spec.n)
        throw std::invalid_argument("make_point: expected m+n coordinates");
    Point p;
    p.x.resize(spec.m);
    p.t.resize(spec.n);
    auto it = coords.begin();
    for (int i = 0; i < spec.m; ++i) p.x(i) = *it++;
    for (int k = 0; k < spec.n; ++k) p.t(k) = *it++;
    return p;
}

Point embed_plane_point(const GroupSpec& spec, const PlanePoint& p) {
    if (p.xhat.size() != spec.m - 1 || p.t.size() != spec.n)
        throw std::invalid_argument("embed_plane_point: dimensions do not match group spec");
    Point out;
    out.x.resize(spec.m);
    out.x(0) = p.level;
    out.x.tail(spec.m - 1) = p.xhat;
    out.t = p.t;
    return out;
}

PlanePoint make_plane_point(const GroupSpec& spec, std::initializer_list<double> coords,
                            double level) {
    if (static_cast<int>(coords.size()) != spec.m - 1 + spec.n)
        throw std::invalid_argument("make_plane_point: expected (m-1)+n coordinates");
    PlanePoint p;
    p.xhat.resize(spec.m - 1);
    p.t.resize(spec.n);
    p.level = level;
    auto it = coords.begin();
    for (int i = 0; i < spec.m - 1; ++i) p.xhat(i) = *it++;
    for (int k = 0; k < spec.n; ++k) p.t(k) = *it++;
    return p;
}

void plane_log_coords(const GroupSpec& spec, const PlanePoint& p, const PlanePoint& q,
                      Eigen::VectorXd& vhat, Eigen::VectorXd& z) {
    vhat = q.xhat - p.xhat;
    z.resize(spec.n);
    for (int k = 0; k < spec.n; ++k) {
        // <Ahat^(k) p.xhat, q.xhat> without materializing the reduced matrix.
        double s = 0.0;
        for (int j = 1; j < spec.m; ++j) {
            double row = 0.0;
            for (int i = 1; i < spec.m; ++i) row += spec.a[k](j, i) * p.xhat(i - 1);
            s += row * q.xhat(j - 1);
        }
        z(k) = q.t(k) - p.t(k) - 0.5 * s;
    }
}

double plane_distance(const GroupSpec& spec, const PlanePoint& p, const PlanePoint& q,
                      PlaneMetric mode) {
    if (mode == PlaneMetric::induced) {
        if (std::abs(p.level - q.level) > 0)
            throw std::invalid_argument("plane_distance: induced metric needs a common level");
        return gauge_distance(spec, embed_plane_point(spec, p), embed_plane_point(spec, q));
    }
    Eigen::VectorXd v, z;
    plane_log_coords(spec, p, q, v, z);
    double v2 = v.squaredNorm();
    return std::pow(v2 * v2 + 16.0 * z.squaredNorm(), 0.25);
}

PlanePoint plane_translate(const GroupSpec& spec, const PlanePoint& base,
                           const Eigen::VectorXd& vhat, const Eigen::VectorXd& z) {
    if (vhat.size() != spec.m - 1 || z.size() != spec.n)
        throw std::invalid_argument("plane_translate: increment dimensions do not match");
    PlanePoint out;
    out.level = base.level;
    out.xhat = base.xhat + vhat;
    out.t.resize(spec.n);
    for (int k = 0; k < spec.n; ++k) {
        double s = 0.0;
        for (int j = 1; j < spec.m; ++j) {
            double row = 0.0;
            for (int i = 1; i < spec.m; ++i) row += spec.a[k](j, i) * base.xhat(i - 1);
            s += row * vhat(j - 1);
        }
        out.t(k) = base.t(k) + z(k) + 0.5 * s;
    }
    return out;
}

GroupSpec load_group_spec(const std::string& path, bool allow_invalid) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_group_spec: cannot open " + path);
    GroupSpec spec;
    spec.kind = GroupKind::custom;
    if (!(in >> spec.m >> spec.n))
        throw std::runtime_error("load_group_spec: missing 'm n' header in " + path);
    if (spec.m < 2 || spec.n < 1)
        throw std::runtime_error("load_group_spec: need m >= 2 and n >= 1");
    spec.a.resize(spec.n);
    for (int k = 0; k < spec.n; ++k) {
        spec.a[k].resize(spec.m, spec.m);
        for (int i = 0; i < spec.m; ++i)
            for (int j = 0; j < spec.m; ++j)
                if (!(in >> spec.a[k](i, j)))
                    throw std::runtime_error("load_group_spec: truncated matrix block " +
                                             std::to_string(k) + " in " + path);
    }
    spec.q = spec.m + 2 * spec.n;

    ValidationReport rep = validate_h_type(spec);
    if (!rep.passed && !allow_invalid) {
        std::ostringstream msg;
        msg << "load_group_spec: " << path << " is not of Heisenberg type:";
        for (const auto& d : rep.defects) msg << "\n  " << d.what << " (defect " << d.magnitude << ")";
        msg << "\nuse --allow-invalid to load anyway";
        throw std::runtime_error(msg.str());
    }
    return spec;
}

void save_group_spec(const GroupSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_group_spec: cannot open " + path);
    out.precision(17);
    out << spec.m << " " << spec.n << "\n";
    for (int k = 0; k < spec.n; ++k) {
        for (int i = 0; i < spec.m; ++i) {
            for (int j = 0; j < spec.m; ++j) out << spec.a[k](i, j) << (j + 1 < spec.m ? " " : "");
            out << "\n";
        }
        out << "\n";
    }
}

std::string group_name(const GroupSpec& spec) {
    switch (spec.kind) {
    case GroupKind::heisenberg:
        return "heisenberg" + std::to_string(spec.m / 2);
    case GroupKind::quaternionic:
        return "quaternionic";
    case GroupKind::custom:
        return "custom_m" + std::to_string(spec.m) + "n" + std::to_string(spec.n);
    }
    return "unknown";
}

} // namespace htbem
