#include <floquetcm/family.hpp>
#include <floquetcm/odecore.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace fcm {

double cylinder_graph(double z1, double) {
    if (!(std::abs(z1) < 1)) throw DomainError("cylinder graph needs |z1| < 1");
    // sqrt(1 - z^2) - 1 without cancellation
    return -z1 * z1 / (1 + std::sqrt(1 - z1 * z1));
}

double cylinder_graph_dz1(double z1) {
    if (!(std::abs(z1) < 1)) throw DomainError("cylinder graph needs |z1| < 1");
    return -z1 / std::sqrt(1 - z1 * z1);
}

double cylinder_graph_series(double z1, int K) {
    if (K < 0) throw UsageError("series order must be non-negative");
    // (-1)^k binom(1/2, k) z^{2k}, k >= 1
    double sum = 0, c = 1, p = 1;
    for (int k = 1; k <= K; ++k) {
        c *= (0.5 - (k - 1)) / k;
        p *= -z1 * z1;
        sum += c * p;
    }
    return sum;
}

double cylinder_graph_residual(double z1, double z3) {
    static const VectorField f = builtin("cylinder-eigenbasis").field;
    double H = cylinder_graph(z1, z3);
    Vec z(3);
    z << z1, H, z3;
    Vec v = f(0.0, z);
    return v(1) - cylinder_graph_dz1(z1) * v(0);
}

PhiId phi_from_string(const std::string& s) {
    if (s == "zero") return PhiId::Zero;
    if (s == "sin") return PhiId::Sin;
    if (s == "cos") return PhiId::Cos;
    throw UsageError("unknown phi '" + s + "' (expected zero, sin or cos)");
}

std::string to_string(PhiId p) {
    switch (p) {
        case PhiId::Zero: return "zero";
        case PhiId::Sin: return "sin";
        case PhiId::Cos: return "cos";
    }
    return "?";
}

namespace {

double phi_eval(PhiId p, double u) {
    switch (p) {
        case PhiId::Zero: return 0;
        case PhiId::Sin: return std::sin(u);
        case PhiId::Cos: return std::cos(u);
    }
    return 0;
}

// e^{-X} times the integral of e^u g(u) / u over u from L to X, written as an
// integral in v = X - u so nothing overflows.
double damped_integral(double X, double L, double shift, double rel_tol) {
    auto f = [X, shift](double v) {
        double u = X - v;
        return std::exp(-v) * std::sin(u + shift) / u;
    };
    double err = 0;
    double upper = std::isinf(L) ? std::numeric_limits<double>::infinity() : X - L;
    if (upper == 0) return 0;
    double sign = 1;
    double a = 0, b = upper;
    if (b < 0) {
        std::swap(a, b);
        sign = -1;
    }
    double l1 = 0;
    double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 25, rel_tol, &err, &l1);
    if (!std::isfinite(val) || err > std::max(rel_tol * l1, 1e-300) * 10)
        throw NumericalError("quadrature did not converge (error estimate " + std::to_string(err) + ")");
    return sign * val;
}

}  // namespace

double nonunique_family(double t, double x, double alpha, double beta, PhiId phi,
                        const FamilyOptions& opt) {
    if (!std::isfinite(t) || !std::isfinite(x)) throw UsageError("t and x must be finite");
    if (std::abs(x) > opt.x_max)
        throw UsageError("|x| exceeds the configured neighbourhood " + std::to_string(opt.x_max));
    if (x == 0) return 0;
    double La, Lb;
    if (x < 0) {
        if (alpha != 0 || beta != 0) throw UsageError("x < 0 admits only alpha = beta = 0");
        if (phi != PhiId::Zero) throw UsageError("x < 0 admits only phi = zero");
        La = Lb = -std::numeric_limits<double>::infinity();
    } else {
        if (!(alpha > 0) || !(beta > 0)) throw UsageError("x > 0 needs alpha > 0 and beta > 0");
        La = 1 / alpha;
        Lb = 1 / beta;
    }
    const double X = 1 / x, q = std::numbers::pi / 4;
    // Overall minus sign of the substitution u = 1/s.
    double J1 = -damped_integral(X, La, q, opt.rel_tol);
    double J2 = -damped_integral(X, Lb, -q, opt.rel_tol);
    double I = -std::numbers::sqrt2 * (std::cos(X - t) * J1 + std::sin(X - t) * J2);
    return std::exp(-X) * phi_eval(phi, X - t) + I - std::sin(t) * x;
}

double family_residual(double t, double x, double alpha, double beta, PhiId phi, double h,
                       const FamilyOptions& opt) {
    auto H = [&](double tt, double xx) { return nonunique_family(tt, xx, alpha, beta, phi, opt); };
    double Ht = (H(t + h, x) - H(t - h, x)) / (2 * h);
    double Hx = (H(t, x + h) - H(t, x - h)) / (2 * h);
    return Ht - x * x * Hx + H(t, x) - std::sin(t) * x * x;
}

}  // namespace fcm
