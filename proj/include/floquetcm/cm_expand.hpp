#pragma once

#include <floquetcm/types.hpp>

#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace fcm {

// Divisors below this are treated as exact zeros of the periodic BVP.
constexpr double kResonanceTol = 1e-10;

struct Harmonic {
    int k = 1;
    double sin = 0;  // coefficient of sin(2 pi k t / T)
    double cos = 0;
};

// Trig polynomial mean + sum (sin_k sin + cos_k cos) with exact coefficient arithmetic.
struct PeriodicScalar {
    double period = 2 * std::numbers::pi;
    double mean = 0;
    std::vector<Harmonic> harmonics;  // strictly increasing k

    static PeriodicScalar constant(double c, double T = 2 * std::numbers::pi);
    static PeriodicScalar trig(double mean, double sin1, double cos1, double T = 2 * std::numbers::pi);

    double operator()(double t) const;
    double derivative(double t) const;
    PeriodicScalar derivative() const;
    // Component at k (zero when absent).
    Harmonic harmonic(int k) const;
    double amplitude() const;  // |mean| + sum of harmonic moduli
    bool is_zero() const;

    PeriodicScalar& operator+=(const PeriodicScalar& o);
    PeriodicScalar& operator*=(double c);
};

PeriodicScalar operator+(PeriodicScalar a, const PeriodicScalar& b);
PeriodicScalar operator-(PeriodicScalar a, const PeriodicScalar& b);
PeriodicScalar operator*(double c, PeriodicScalar a);

// Thrown by the BVP solver; divisor is the offending |i omega + c|.
class ResonanceError : public NumericalError {
public:
    ResonanceError(const std::string& what, int harmonic, double divisor)
        : NumericalError(what), harmonic(harmonic), divisor(divisor) {}
    int harmonic;
    double divisor;
};

// Unique T-periodic a with a' + c a = g.
PeriodicScalar solve_periodic_scalar_bvp(double c, const PeriodicScalar& g, double T);
PeriodicScalar solve_periodic_scalar_bvp(double c, const PeriodicScalar& g);

enum class CoefStatus { Ok, Resonant, Blocked };
std::string to_string(CoefStatus s);

struct Coefficient {
    int degree = 2;
    CoefStatus status = CoefStatus::Ok;
    PeriodicScalar value;  // zero unless Ok
    double divisor = 0;    // damping of the degree's BVP
};

struct ResonanceEntry {
    int degree = 0;
    std::optional<double> z;
    double divisor = 0;  // witness
};

struct CoefficientSeries {
    std::string system;
    std::optional<double> z;
    int order = 2;
    std::vector<Coefficient> terms;  // degrees 2..order
    std::vector<ResonanceEntry> resonances;

    const Coefficient& term(int n) const;
    const PeriodicScalar& at(int n) const;  // throws unless status Ok
    bool complete() const { return resonances.empty(); }
    // Truncated graph and its partial derivatives; needs a complete series.
    double eval(double t, double x) const;
    double dt(double t, double x) const;
    double dx(double t, double x) const;
};

// x' = -x^2, y' = -y + sin(t) x^2 about the origin.
CoefficientSeries expand_driven2d(int N);
// x' = xz - x^3, y' = y + (1 + sin t) x^2, z' = 0; N even.
CoefficientSeries expand_driven3d(int N, double z);

// z values in (0, 1] where some even degree <= N has a vanishing divisor, ascending.
std::vector<double> driven3d_resonances(int N);

struct RadiusVerdict {
    bool divergent = false;
    double slope = 0;     // d(log|a_n| / n) / d(log n) over the upper half
    double limit = 0;     // |a_N|^{1/N} for bounded series
    std::vector<int> degrees;
    std::vector<double> roots;  // |a_n(t)|^{1/n}
    std::string verdict() const { return divergent ? "divergent" : "bounded"; }
};

RadiusVerdict radius_diagnostic(const CoefficientSeries& series, double t);

struct ResidualFit {
    std::vector<double> x;
    std::vector<double> residual;  // max over the t-grid
    double slope = 0;
};

// Pointwise residual of the invariance equation for a truncated graph.
double invariance_residual_at(const CoefficientSeries& series, double t, double x);
ResidualFit invariance_residual(const CoefficientSeries& series, const std::vector<double>& xs,
                                const std::vector<double>& ts);
ResidualFit invariance_residual(const CoefficientSeries& series);

}  // namespace fcm
