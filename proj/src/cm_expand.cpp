#include <floquetcm/cm_expand.hpp>

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace fcm {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

void check_period(const PeriodicScalar& a, const PeriodicScalar& b) {
    if (std::abs(a.period - b.period) > 1e-14 * std::max(a.period, b.period))
        throw UsageError("periodic scalars with different periods");
}

}  // namespace

PeriodicScalar PeriodicScalar::constant(double c, double T) {
    PeriodicScalar p;
    p.period = T;
    p.mean = c;
    return p;
}

PeriodicScalar PeriodicScalar::trig(double mean, double sin1, double cos1, double T) {
    PeriodicScalar p = constant(mean, T);
    p.harmonics.push_back({1, sin1, cos1});
    return p;
}

double PeriodicScalar::operator()(double t) const {
    double w = kTwoPi / period, v = mean;
    for (const auto& h : harmonics) v += h.sin * std::sin(w * h.k * t) + h.cos * std::cos(w * h.k * t);
    return v;
}

double PeriodicScalar::derivative(double t) const { return derivative()(t); }

PeriodicScalar PeriodicScalar::derivative() const {
    PeriodicScalar d;
    d.period = period;
    double w = kTwoPi / period;
    for (const auto& h : harmonics) d.harmonics.push_back({h.k, -w * h.k * h.cos, w * h.k * h.sin});
    return d;
}

Harmonic PeriodicScalar::harmonic(int k) const {
    for (const auto& h : harmonics)
        if (h.k == k) return h;
    return {k, 0, 0};
}

double PeriodicScalar::amplitude() const {
    double a = std::abs(mean);
    for (const auto& h : harmonics) a += std::hypot(h.sin, h.cos);
    return a;
}

bool PeriodicScalar::is_zero() const {
    if (mean != 0) return false;
    for (const auto& h : harmonics)
        if (h.sin != 0 || h.cos != 0) return false;
    return true;
}

PeriodicScalar& PeriodicScalar::operator+=(const PeriodicScalar& o) {
    check_period(*this, o);
    mean += o.mean;
    for (const auto& h : o.harmonics) {
        auto it = std::lower_bound(harmonics.begin(), harmonics.end(), h.k,
                                   [](const Harmonic& a, int k) { return a.k < k; });
        if (it != harmonics.end() && it->k == h.k) {
            it->sin += h.sin;
            it->cos += h.cos;
        } else {
            harmonics.insert(it, h);
        }
    }
    return *this;
}

PeriodicScalar& PeriodicScalar::operator*=(double c) {
    mean *= c;
    for (auto& h : harmonics) {
        h.sin *= c;
        h.cos *= c;
    }
    return *this;
}

PeriodicScalar operator+(PeriodicScalar a, const PeriodicScalar& b) { return a += b; }
PeriodicScalar operator-(PeriodicScalar a, const PeriodicScalar& b) { return a += -1.0 * b; }
PeriodicScalar operator*(double c, PeriodicScalar a) { return a *= c; }

PeriodicScalar solve_periodic_scalar_bvp(double c, const PeriodicScalar& g, double T) {
    if (!(T > 0) || !std::isfinite(T)) throw UsageError("period must be positive");
    if (!std::isfinite(c)) throw UsageError("damping must be finite");
    if (std::abs(g.period - T) > 1e-14 * T) throw UsageError("forcing period differs from T");
    PeriodicScalar a;
    a.period = T;
    if (g.mean != 0) {
        if (std::abs(c) < kResonanceTol)
            throw ResonanceError("no periodic solution: constant forcing without damping", 0, std::abs(c));
        a.mean = g.mean / c;
    }
    const double w = kTwoPi / T;
    for (const auto& h : g.harmonics) {
        if (h.sin == 0 && h.cos == 0) continue;
        double om = w * h.k, d = c * c + om * om;
        if (std::sqrt(d) < kResonanceTol)
            throw ResonanceError("no periodic solution at harmonic " + std::to_string(h.k), h.k, std::sqrt(d));
        // (i om + c) a_k = g_k in sin/cos form.
        a.harmonics.push_back({h.k, (c * h.sin + om * h.cos) / d, (c * h.cos - om * h.sin) / d});
    }
    return a;
}

PeriodicScalar solve_periodic_scalar_bvp(double c, const PeriodicScalar& g) {
    return solve_periodic_scalar_bvp(c, g, g.period);
}

std::string to_string(CoefStatus s) {
    switch (s) {
        case CoefStatus::Ok: return "ok";
        case CoefStatus::Resonant: return "resonant";
        case CoefStatus::Blocked: return "blocked";
    }
    return "?";
}

const Coefficient& CoefficientSeries::term(int n) const {
    if (n < 2 || n > order) throw UsageError("degree " + std::to_string(n) + " outside the series");
    return terms.at(n - 2);
}

const PeriodicScalar& CoefficientSeries::at(int n) const {
    const auto& c = term(n);
    if (c.status != CoefStatus::Ok)
        throw NumericalError("coefficient of degree " + std::to_string(n) + " is " + to_string(c.status));
    return c.value;
}

double CoefficientSeries::eval(double t, double x) const {
    double v = 0;
    for (int n = order; n >= 2; --n) v = (v + at(n)(t)) * x;
    return v * x;
}

double CoefficientSeries::dt(double t, double x) const {
    double v = 0;
    for (int n = order; n >= 2; --n) v = (v + at(n).derivative(t)) * x;
    return v * x;
}

double CoefficientSeries::dx(double t, double x) const {
    double v = 0;
    for (int n = order; n >= 2; --n) v = v * x + n * at(n)(t);
    return v * x;
}

namespace {

// Solve degree by degree; forcing(n, series) builds the right-hand side from lower degrees.
template <class Damping, class Forcing>
CoefficientSeries expand(const std::string& name, int N, std::optional<double> z, Damping damping,
                         Forcing forcing) {
    CoefficientSeries s;
    s.system = name;
    s.z = z;
    s.order = N;
    for (int n = 2; n <= N; ++n) {
        Coefficient c;
        c.degree = n;
        c.divisor = damping(n);
        std::optional<PeriodicScalar> g = forcing(n, s);
        if (!g) {
            c.status = CoefStatus::Blocked;
        } else {
            try {
                c.value = solve_periodic_scalar_bvp(c.divisor, *g, kTwoPi);
            } catch (const ResonanceError& e) {
                c.status = CoefStatus::Resonant;
                s.resonances.push_back({n, z, c.divisor});
            }
        }
        s.terms.push_back(c);
    }
    return s;
}

// (n-1) a_{n-1}-type forcing; nullopt when the lower term is missing.
std::optional<PeriodicScalar> lower(const CoefficientSeries& s, int m, double factor) {
    if (m < 2) return PeriodicScalar{};
    const auto& c = s.terms.at(m - 2);
    if (c.status != CoefStatus::Ok) return std::nullopt;
    return factor * c.value;
}

}  // namespace

CoefficientSeries expand_driven2d(int N) {
    if (N < 2) throw UsageError("order must be at least 2");
    return expand(
        "driven2d", N, std::nullopt, [](int) { return 1.0; },
        [](int n, const CoefficientSeries& s) -> std::optional<PeriodicScalar> {
            if (n == 2) return PeriodicScalar::trig(0, 1, 0);
            return lower(s, n - 1, n - 1);
        });
}

CoefficientSeries expand_driven3d(int N, double z) {
    if (N < 2 || N % 2) throw UsageError("order must be even and at least 2");
    if (!std::isfinite(z)) throw UsageError("z must be finite");
    return expand(
        "driven3d", N, z, [z](int n) { return n * z - 1; },
        [](int n, const CoefficientSeries& s) -> std::optional<PeriodicScalar> {
            if (n == 2) return PeriodicScalar::trig(1, 1, 0);
            return lower(s, n - 2, n - 2);
        });
}

std::vector<double> driven3d_resonances(int N) {
    if (N < 2 || N % 2) throw UsageError("order must be even and at least 2");
    std::vector<double> zs;
    boost::math::tools::eps_tolerance<double> tol(52);
    for (int n = 2; n <= N; n += 2) {
        auto divisor = [n](double z) { return n * z - 1; };
        // Bracket over (0, 1]; the divisor is increasing in z.
        std::uintmax_t iters = 200;
        auto [lo, hi] = boost::math::tools::bisect(divisor, 0.0, 1.0, tol, iters);
        zs.push_back(0.5 * (lo + hi));
    }
    std::sort(zs.begin(), zs.end());
    return zs;
}

RadiusVerdict radius_diagnostic(const CoefficientSeries& series, double t) {
    if (series.order < 10) throw UsageError("radius diagnostic needs degrees up to at least 10");
    RadiusVerdict v;
    for (const auto& c : series.terms) {
        if (c.status != CoefStatus::Ok) break;
        double a = std::abs(c.value(t));
        // Drop terms that vanish at this t up to rounding.
        if (!(a > 1e-9 * c.value.amplitude()) || a == 0) continue;
        v.degrees.push_back(c.degree);
        v.roots.push_back(std::log(a) / c.degree);
    }
    if (v.degrees.size() < 4) throw NumericalError("too few nonzero coefficients for a radius verdict");
    std::size_t start = v.degrees.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (std::size_t i = start; i < v.degrees.size(); ++i) {
        double x = std::log(static_cast<double>(v.degrees[i])), y = v.roots[i];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    v.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    v.divergent = v.slope >= 0.5;
    v.limit = std::exp(v.roots.back());
    for (auto& r : v.roots) r = std::exp(r);
    return v;
}

double invariance_residual_at(const CoefficientSeries& series, double t, double x) {
    const int N = series.order;
    // Residual as a polynomial in x with coefficients r_n(t).
    std::vector<double> r(N + 3, 0.0);
    auto a = [&](int n) { return (n >= 2 && n <= N) ? series.at(n)(t) : 0.0; };
    auto da = [&](int n) { return (n >= 2 && n <= N) ? series.at(n).derivative(t) : 0.0; };
    if (series.system == "driven2d") {
        // H_t - x^2 H_x + H - sin(t) x^2
        for (int n = 2; n <= N + 1; ++n) r[n] = da(n) + a(n) - (n - 1) * a(n - 1);
        r[2] -= std::sin(t);
    } else if (series.system == "driven3d") {
        // H_t + x(z - x^2) H_x - H - (1 + sin t) x^2
        double z = series.z.value_or(0.0);
        for (int n = 2; n <= N + 2; ++n) r[n] = da(n) + (n * z - 1) * a(n) - (n - 2) * a(n - 2);
        r[2] -= 1 + std::sin(t);
    } else {
        throw UsageError("no invariance equation for system '" + series.system + "'");
    }
    double v = 0;
    for (int n = static_cast<int>(r.size()) - 1; n >= 0; --n) v = v * x + r[n];
    return v;
}

ResidualFit invariance_residual(const CoefficientSeries& series, const std::vector<double>& xs,
                                const std::vector<double>& ts) {
    if (xs.size() < 2) throw UsageError("need at least two x values");
    ResidualFit f;
    f.x = xs;
    for (double x : xs) {
        double m = 0;
        for (double t : ts) m = std::max(m, std::abs(invariance_residual_at(series, t, x)));
        f.residual.push_back(m);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(f.residual[i] > 0)) continue;
        double lx = std::log(std::abs(xs[i])), ly = std::log(f.residual[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    f.slope = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : std::numeric_limits<double>::infinity();
    return f;
}

ResidualFit invariance_residual(const CoefficientSeries& series) {
    std::vector<double> xs, ts;
    for (int i = 0; i <= 8; ++i) xs.push_back(std::pow(10.0, -1 - i / 4.0));
    for (int i = 0; i < 256; ++i) ts.push_back(kTwoPi * i / 256);
    return invariance_residual(series, xs, ts);
}

}  // namespace fcm
