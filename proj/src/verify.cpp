#include <floquetcm/verify.hpp>

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace fcm {

ConservedQuantity cylinder_invariant() {
    ConservedQuantity q;
    q.id = "cylinder";
    q.V = [](const Vec& x) {
        if (x.size() != 3) throw UsageError("cylinder invariant needs a 3-vector");
        return x(0) * x(0) + x(1) * x(1) - 1;
    };
    return q;
}

namespace {

// V_l on the slice x3 = 0 as a function of u = |(x1, x2)|.
double torus_slice(double u, double l) { return 0.5 * u * u - std::log(u) - 0.5 - l; }

}  // namespace

ConservedQuantity torus_invariant(double l) {
    if (!(l >= 0)) throw DomainError("torus level must be >= 0");
    ConservedQuantity q;
    q.id = "torus";
    q.level = 0;
    q.V = [l](const Vec& x) {
        if (x.size() != 3) throw UsageError("torus invariant needs a 3-vector");
        double u = std::hypot(x(0), x(1));
        if (!(u > 0)) throw DomainError("torus invariant undefined on the x3-axis");
        // (u-1)^2 + x3^2 - r_l^2(u) with r_l^2(u) = l + u(u-4)/2 + ln u + 3/2
        return torus_slice(u, l) + x(2) * x(2);
    };
    return q;
}

double drift(const ConservedQuantity& q, const Trajectory& traj) {
    if (traj.x.empty()) return 0;
    const double v0 = q.V(traj.x.front());
    double worst = 0;
    for (const auto& x : traj.x) {
        double v = q.V(x);
        if (!std::isfinite(v)) throw DomainError("conserved quantity is not finite along the trajectory");
        worst = std::max(worst, std::abs(v - v0));
    }
    return worst;
}

Vec torus_root(double l) {
    if (!(l >= 0)) throw DomainError("torus level must be >= 0");
    Vec x = Vec::Zero(3);
    if (l == 0) {
        // u = 1 is the strict minimizer of u^2/2 - ln u, so the slice has no other root.
        if (!(torus_slice(1 - 1e-3, 0) > 0 && torus_slice(1 + 1e-3, 0) > 0))
            throw NumericalError("torus level 0 is not an isolated root");
        x(0) = 1;
        return x;
    }
    double hi = 2;
    while (torus_slice(hi, l) <= 0) {
        hi *= 2;
        if (hi > 1e150) throw NumericalError("no bracket for the torus root");
    }
    const double lo = 1;
    if (!(torus_slice(lo, l) < 0)) throw NumericalError("no bracket for the torus root");
    auto f = [l](double u) { return torus_slice(u, l); };
    boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 1);
    std::uintmax_t iters = 400;
    auto [a, b] = boost::math::tools::bisect(f, lo, hi, tol, iters);
    x(0) = std::abs(f(a)) <= std::abs(f(b)) ? a : b;
    return x;
}

void SurfaceGrid::write_csv(std::ostream& os) const {
    os << "t,v,x1,x2,x3\n" << std::setprecision(17);
    for (const auto& p : points) {
        os << p.t << ',' << p.v;
        for (int i = 0; i < p.x.size(); ++i) os << ',' << p.x(i);
        os << '\n';
    }
}

namespace {

Vec ruling(const BundleBasis& basis, double t) {
    if (basis.basis_s.cols() != 1) throw UsageError("ruled surface needs a one-dimensional bundle");
    return basis.at(t).col(0);
}

}  // namespace

SurfaceGrid ruled_surface(const CycleOrbit& cycle, const BundleBasis& basis, double t0, double t1,
                          int nt, double v0, double v1, int nv) {
    if (nt < 2 || nv < 1) throw UsageError("ruled surface needs nt >= 2 and nv >= 1");
    SurfaceGrid g;
    g.points.reserve(static_cast<std::size_t>(nt) * nv);
    for (int i = 0; i < nt; ++i) {
        double t = t0 + (t1 - t0) * i / (nt - 1);
        Vec gam = cycle.gamma(t), z = ruling(basis, t);
        for (int j = 0; j < nv; ++j) {
            double v = nv == 1 ? v0 : v0 + (v1 - v0) * j / (nv - 1);
            g.points.push_back({t, v, gam + v * z});
        }
    }
    return g;
}

double seam_error(const CycleOrbit& cycle, const BundleBasis& basis, double t, double v) {
    const double T = cycle.period;
    Vec p = cycle.gamma(t) + v * ruling(basis, t);
    Vec q = cycle.gamma(t + T) - v * ruling(basis, t + T);
    return (p - q).norm();
}

bool VerificationReport::pass() const {
    for (const auto& c : checks)
        if (!c.passed()) return false;
    return true;
}

}  // namespace fcm
