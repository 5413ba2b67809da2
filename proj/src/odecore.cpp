#include <floquetcm/odecore.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace fcm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec vec3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

void require_params(const std::string& name, const Params& params,
                    const std::vector<std::string>& allowed) {
    for (const auto& key : allowed)
        if (!params.count(key)) throw UsageError("missing parameter " + key);
    for (const auto& [key, value] : params) {
        bool known = false;
        for (const auto& a : allowed) known = known || a == key;
        if (!known) throw UsageError("system " + name + " takes no parameter " + key);
        if (!std::isfinite(value)) throw UsageError("parameter " + key + " must be finite");
    }
}

VectorField cylinder_field() {
    VectorField f;
    f.name = "cylinder";
    f.dim = 3;
    f.eval = [](double, const Vec& x) {
        double r2 = x(0) * x(0) + x(1) * x(1);
        return vec3(x(0) - x(1) - x(0) * r2, x(0) + x(1) - x(1) * r2, 0.0);
    };
    f.jac = [](double, const Vec& x) {
        double r2 = x(0) * x(0) + x(1) * x(1);
        Mat J = Mat::Zero(3, 3);
        J(0, 0) = 1 - r2 - 2 * x(0) * x(0);
        J(0, 1) = -1 - 2 * x(0) * x(1);
        J(1, 0) = 1 - 2 * x(0) * x(1);
        J(1, 1) = 1 - r2 - 2 * x(1) * x(1);
        return J;
    };
    return f;
}

VectorField mobius_field(double sigma) {
    VectorField f;
    f.name = "mobius";
    f.dim = 3;
    f.eval = [sigma](double, const Vec& x) {
        double q = x(0) * x(0) + x(1) * x(1) - 1.0;
        double phi = 0.25 * sigma * (1 - x(0)) * q - 0.5 * x(2) * (1 + sigma * x(1));
        return vec3(-x(1) + x(0) * phi, x(0) + x(1) * phi,
                    0.25 * (1 - sigma * x(1)) * q + 0.5 * sigma * x(2) * (1 + x(0)));
    };
    f.jac = [sigma](double, const Vec& x) {
        double q = x(0) * x(0) + x(1) * x(1) - 1.0;
        double phi = 0.25 * sigma * (1 - x(0)) * q - 0.5 * x(2) * (1 + sigma * x(1));
        double p1 = 0.25 * sigma * (-q + 2 * x(0) * (1 - x(0)));
        double p2 = 0.5 * sigma * (1 - x(0)) * x(1) - 0.5 * sigma * x(2);
        double p3 = -0.5 * (1 + sigma * x(1));
        Mat J(3, 3);
        J << phi + x(0) * p1, -1 + x(0) * p2, x(0) * p3,
             1 + x(1) * p1, phi + x(1) * p2, x(1) * p3,
             0.5 * (1 - sigma * x(1)) * x(0) + 0.5 * sigma * x(2),
             -0.25 * sigma * q + 0.5 * (1 - sigma * x(1)) * x(1),
             0.5 * sigma * (1 + x(0));
        return J;
    };
    return f;
}

VectorField driven2d_field() {
    VectorField f;
    f.name = "driven2d";
    f.dim = 2;
    f.period = kTwoPi;
    f.eval = [](double t, const Vec& x) {
        return vec2(-x(0) * x(0), -x(1) + std::sin(t) * x(0) * x(0));
    };
    f.jac = [](double t, const Vec& x) {
        Mat J(2, 2);
        J << -2 * x(0), 0, 2 * std::sin(t) * x(0), -1;
        return J;
    };
    return f;
}

VectorField driven3d_field() {
    VectorField f;
    f.name = "driven3d";
    f.dim = 3;
    f.period = kTwoPi;
    f.eval = [](double t, const Vec& x) {
        return vec3(x(0) * x(2) - x(0) * x(0) * x(0),
                    x(1) + (1 + std::sin(t)) * x(0) * x(0), 0.0);
    };
    f.jac = [](double t, const Vec& x) {
        Mat J = Mat::Zero(3, 3);
        J(0, 0) = x(2) - 3 * x(0) * x(0);
        J(0, 2) = x(0);
        J(1, 0) = 2 * (1 + std::sin(t)) * x(0);
        J(1, 1) = 1;
        return J;
    };
    return f;
}

// The cylinder system written about gamma(t) = (cos t, sin t, 0).
VectorField translated_cylinder_field() {
    VectorField f;
    f.name = "translated-cylinder";
    f.dim = 3;
    f.period = kTwoPi;
    f.eval = [](double t, const Vec& y) {
        double c = std::cos(t), s = std::sin(t);
        double y1 = y(0), y2 = y(1);
        double g1 = -2 * c * c * y1 - (1 + 2 * s * c) * y2 - 3 * c * y1 * y1 - 2 * s * y1 * y2 -
                    c * y2 * y2 - y1 * y1 * y1 - y1 * y2 * y2;
        double g2 = (1 - 2 * s * c) * y1 - 2 * s * s * y2 - s * y1 * y1 - 2 * c * y1 * y2 -
                    3 * s * y2 * y2 - y1 * y1 * y2 - y2 * y2 * y2;
        return vec3(g1, g2, 0.0);
    };
    f.jac = [](double t, const Vec& y) {
        double c = std::cos(t), s = std::sin(t);
        double y1 = y(0), y2 = y(1);
        Mat J = Mat::Zero(3, 3);
        J(0, 0) = -2 * c * c - 6 * c * y1 - 2 * s * y2 - 3 * y1 * y1 - y2 * y2;
        J(0, 1) = -(1 + 2 * s * c) - 2 * s * y1 - 2 * c * y2 - 2 * y1 * y2;
        J(1, 0) = (1 - 2 * s * c) - 2 * s * y1 - 2 * c * y2 - 2 * y1 * y2;
        J(1, 1) = -2 * s * s - 2 * c * y1 - 6 * s * y2 - y1 * y1 - 3 * y2 * y2;
        return J;
    };
    return f;
}

VectorField cylinder_eigenbasis_field() {
    VectorField f;
    f.name = "cylinder-eigenbasis";
    f.dim = 3;
    f.eval = [](double, const Vec& z) {
        double q = z(0) * z(0) + z(1) * z(1) + 2 * z(1);
        return vec3(-z(0) * q, -(z(1) + 1) * q, 0.0);
    };
    f.jac = [](double, const Vec& z) {
        double q = z(0) * z(0) + z(1) * z(1) + 2 * z(1);
        double q1 = 2 * z(0), q2 = 2 * z(1) + 2;
        Mat J = Mat::Zero(3, 3);
        J(0, 0) = -q - z(0) * q1;
        J(0, 1) = -z(0) * q2;
        J(1, 0) = -(z(1) + 1) * q1;
        J(1, 1) = -q - (z(1) + 1) * q2;
        return J;
    };
    return f;
}

CycleOrbit unit_circle_cycle() {
    CycleOrbit c;
    c.period = kTwoPi;
    c.gamma = [](double t) { return vec3(std::cos(t), std::sin(t), 0.0); };
    c.gamma_dot = [](double t) { return vec3(-std::sin(t), std::cos(t), 0.0); };
    return c;
}

// Solves the cyclic tridiagonal system a x_{i-1} + b x_i + a x_{i+1} = r_i.
std::vector<double> solve_cyclic(double a, double b, std::vector<double> r) {
    const int n = static_cast<int>(r.size());
    if (n == 1) return {r[0] / (b + 2 * a)};
    if (n == 2) {
        double d = b * b - 4 * a * a;
        return {(b * r[0] - 2 * a * r[1]) / d, (b * r[1] - 2 * a * r[0]) / d};
    }
    // Sherman-Morrison around the Thomas algorithm.
    double gamma = -b;
    std::vector<double> diag(n, b), u(n, 0.0);
    diag[0] = b - gamma;
    diag[n - 1] = b - a * a / gamma;
    u[0] = gamma;
    u[n - 1] = a;
    auto thomas = [&](std::vector<double> rhs) {
        std::vector<double> c(n), d(n);
        c[0] = a / diag[0];
        d[0] = rhs[0] / diag[0];
        for (int i = 1; i < n; ++i) {
            double m = diag[i] - a * c[i - 1];
            c[i] = a / m;
            d[i] = (rhs[i] - a * d[i - 1]) / m;
        }
        for (int i = n - 2; i >= 0; --i) d[i] -= c[i] * d[i + 1];
        return d;
    };
    auto x = thomas(r);
    auto z = thomas(u);
    double fact = (x[0] + a * x[n - 1] / gamma) / (1.0 + z[0] + a * z[n - 1] / gamma);
    for (int i = 0; i < n; ++i) x[i] -= fact * z[i];
    return x;
}

}  // namespace

Mat fd_jacobian(const FieldFn& f, double t, const Vec& x) {
    const int n = static_cast<int>(x.size());
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, x.norm());
    Vec xp = x, xm = x;
    Vec f0 = f(t, x);
    Mat J(f0.size(), n);
    for (int j = 0; j < n; ++j) {
        xp(j) = x(j) + h;
        xm(j) = x(j) - h;
        J.col(j) = (f(t, xp) - f(t, xm)) / (2 * h);
        xp(j) = x(j);
        xm(j) = x(j);
    }
    return J;
}

Mat VectorField::jacobian(double t, const Vec& x) const {
    if (jac) return jac(t, x);
    return fd_jacobian(eval, t, x);
}

CycleOrbit CycleOrbit::equilibrium(const Vec& point, double period) {
    if (!(period > 0)) throw UsageError("period must be positive");
    CycleOrbit c;
    c.period = period;
    c.gamma = [point](double) { return point; };
    c.gamma_dot = [n = point.size()](double) { return Vec(Vec::Zero(n)); };
    return c;
}

CycleOrbit CycleOrbit::from_samples(const std::vector<Vec>& samples, double period) {
    if (!(period > 0)) throw UsageError("period must be positive");
    const int m = static_cast<int>(samples.size());
    if (m < 4) throw UsageError("cycle needs at least 4 samples");
    const int n = static_cast<int>(samples[0].size());
    for (const auto& s : samples)
        if (s.size() != n) throw UsageError("cycle samples have inconsistent dimension");
    const double h = period / m;

    Mat y(n, m), M2(n, m);
    for (int k = 0; k < m; ++k) y.col(k) = samples[k];
    for (int i = 0; i < n; ++i) {
        std::vector<double> rhs(m);
        for (int k = 0; k < m; ++k)
            rhs[k] = 6.0 * (y(i, (k + 1) % m) - 2 * y(i, k) + y(i, (k + m - 1) % m)) / (h * h);
        auto sol = solve_cyclic(1.0, 4.0, rhs);
        for (int k = 0; k < m; ++k) M2(i, k) = sol[k];
    }
    auto locate = [m, h, period](double t, int& k, double& u) {
        double r = std::fmod(t, period);
        if (r < 0) r += period;
        double q = r / h;
        k = std::min(static_cast<int>(std::floor(q)), m - 1);
        u = q - k;
    };
    CycleOrbit c;
    c.period = period;
    c.sampled = true;
    c.gamma = [=](double t) {
        int k;
        double u;
        locate(t, k, u);
        int k1 = (k + 1) % m;
        double v = 1 - u;
        return Vec(v * y.col(k) + u * y.col(k1) +
                   h * h / 6 * ((v * v * v - v) * M2.col(k) + (u * u * u - u) * M2.col(k1)));
    };
    c.gamma_dot = [=](double t) {
        int k;
        double u;
        locate(t, k, u);
        int k1 = (k + 1) % m;
        double v = 1 - u;
        return Vec((y.col(k1) - y.col(k)) / h +
                   h / 6 * (-(3 * v * v - 1) * M2.col(k) + (3 * u * u - 1) * M2.col(k1)));
    };
    return c;
}

const std::vector<SystemInfo>& builtin_catalog() {
    static const std::vector<SystemInfo> catalog = {
        {"cylinder", 3, {}, "planar attracting circle times a neutral line"},
        {"mobius", 3, {"sigma"}, "cycle with a half-twisted center bundle; sigma sets the third multiplier"},
        {"driven2d", 2, {}, "x' = -x^2, y' = -y + sin(t) x^2 about the origin"},
        {"driven3d", 3, {}, "x' = xz - x^3, y' = y + (1 + sin t) x^2, z' = 0 about the origin"},
        {"translated-cylinder", 3, {}, "cylinder system in coordinates y = x - gamma(t)"},
        {"cylinder-eigenbasis", 3, {}, "cylinder system in the rotating eigenbasis"},
    };
    return catalog;
}

System builtin(const std::string& name, const Params& params) {
    System sys;
    sys.id = name;
    sys.params = params;
    if (name == "cylinder") {
        require_params(name, params, {});
        sys.field = cylinder_field();
        sys.cycle = unit_circle_cycle();
    } else if (name == "mobius") {
        require_params(name, params, {"sigma"});
        sys.field = mobius_field(params.at("sigma"));
        sys.cycle = unit_circle_cycle();
    } else if (name == "driven2d") {
        require_params(name, params, {});
        sys.field = driven2d_field();
        sys.cycle = CycleOrbit::equilibrium(Vec::Zero(2), kTwoPi);
    } else if (name == "driven3d") {
        require_params(name, params, {});
        sys.field = driven3d_field();
        sys.cycle = CycleOrbit::equilibrium(Vec::Zero(3), kTwoPi);
    } else if (name == "translated-cylinder") {
        require_params(name, params, {});
        sys.field = translated_cylinder_field();
        sys.cycle = CycleOrbit::equilibrium(Vec::Zero(3), kTwoPi);
    } else if (name == "cylinder-eigenbasis") {
        require_params(name, params, {});
        sys.field = cylinder_eigenbasis_field();
        sys.cycle = CycleOrbit::equilibrium(Vec::Zero(3), kTwoPi);
    } else {
        throw UsageError("unknown system '" + name + "'");
    }
    return sys;
}

double cycle_residual(const VectorField& field, const CycleOrbit& cycle, int samples) {
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        double t = cycle.period * k / samples;
        worst = std::max(worst, (cycle.gamma_dot(t) - field(t, cycle.gamma(t))).norm());
    }
    return worst;
}

TranslatedSystem translate_about_cycle(const VectorField& field, const CycleOrbit& cycle,
                                       double tol) {
    if (field.period && std::abs(*field.period - cycle.period) > 1e-12 * cycle.period) {
        double ratio = cycle.period / *field.period;
        if (std::abs(ratio - std::round(ratio)) > 1e-12)
            throw UsageError("cycle period is not a multiple of the field period");
    }
    double res = cycle_residual(field, cycle);
    if (!(res <= tol))
        throw UsageError("cycle is not a solution of the field: residual " + std::to_string(res));
    TranslatedSystem ts;
    ts.dim = field.dim;
    ts.period = cycle.period;
    ts.A = [field, g = cycle.gamma](double t) { return field.jacobian(t, g(t)); };
    ts.R = [field, g = cycle.gamma](double t, const Vec& y) {
        if (y.isZero(0.0)) return Vec(Vec::Zero(y.size()));
        Vec x = g(t);
        Vec lin = field.jacobian(t, x) * y;
        return Vec(field(t, x + y) - field(t, x) - lin);
    };
    return ts;
}

TranslatedSystem translate(const System& sys, double tol) {
    if (!sys.cycle) throw UsageError("system " + sys.id + " has no cycle");
    return translate_about_cycle(sys.field, *sys.cycle, tol);
}

TranslatedSystem constant_linear(const Mat& A, double period) {
    if (A.rows() != A.cols()) throw UsageError("matrix must be square");
    if (!(period > 0)) throw UsageError("period must be positive");
    TranslatedSystem ts;
    ts.dim = static_cast<int>(A.rows());
    ts.period = period;
    ts.A = [A](double) { return A; };
    ts.R = [n = A.rows()](double, const Vec&) { return Vec(Vec::Zero(n)); };
    return ts;
}

VectorField polynomial_field(const PolynomialSpec& spec) {
    if (spec.dim < 1) throw UsageError("polynomial.dim must be positive");
    bool timed = false;
    for (const auto& m : spec.terms) {
        if (m.eq < 0 || m.eq >= spec.dim) throw UsageError("polynomial term has bad equation index");
        if (static_cast<int>(m.pow.size()) != spec.dim)
            throw UsageError("polynomial term exponent list has wrong length");
        for (int p : m.pow)
            if (p < 0) throw UsageError("polynomial exponents must be nonnegative");
        if (m.time != TimeFactor::None) timed = true;
    }
    if (timed && !spec.period) throw UsageError("time-dependent polynomial needs a period");
    if (spec.period && !(*spec.period > 0)) throw UsageError("period must be positive");

    VectorField f;
    f.name = "polynomial";
    f.dim = spec.dim;
    f.period = timed ? spec.period : std::nullopt;
    const double omega = spec.period ? kTwoPi / *spec.period : 0.0;
    auto factor = [omega](const Monomial& m, double t) {
        switch (m.time) {
            case TimeFactor::Sin: return std::sin(omega * m.harmonic * t);
            case TimeFactor::Cos: return std::cos(omega * m.harmonic * t);
            default: return 1.0;
        }
    };
    auto terms = spec.terms;
    const int n = spec.dim;
    f.eval = [terms, n, factor](double t, const Vec& x) {
        Vec out = Vec::Zero(n);
        for (const auto& m : terms) {
            double v = m.coef * factor(m, t);
            for (int i = 0; i < n; ++i)
                if (m.pow[i]) v *= std::pow(x(i), m.pow[i]);
            out(m.eq) += v;
        }
        return out;
    };
    f.jac = [terms, n, factor](double t, const Vec& x) {
        Mat J = Mat::Zero(n, n);
        for (const auto& m : terms) {
            double base = m.coef * factor(m, t);
            for (int j = 0; j < n; ++j) {
                if (!m.pow[j]) continue;
                double v = base * m.pow[j] * std::pow(x(j), m.pow[j] - 1);
                for (int i = 0; i < n; ++i)
                    if (i != j && m.pow[i]) v *= std::pow(x(i), m.pow[i]);
                J(m.eq, j) += v;
            }
        }
        return J;
    };
    return f;
}

}  // namespace fcm
