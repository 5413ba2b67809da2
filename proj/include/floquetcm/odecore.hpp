#pragma once

#include <floquetcm/types.hpp>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fcm {

using Params = std::map<std::string, double>;
using FieldFn = std::function<Vec(double, const Vec&)>;
using JacobianFn = std::function<Mat(double, const Vec&)>;
using MatrixFn = std::function<Mat(double)>;

// Central differences with step cbrt(eps) * max(1, |x|).
Mat fd_jacobian(const FieldFn& f, double t, const Vec& x);

struct VectorField {
    std::string name;
    int dim = 0;
    std::optional<double> period;  // empty for autonomous fields
    int smoothness = -1;           // C^k class, -1 for C^infinity; metadata only
    FieldFn eval;
    JacobianFn jac;                // may be empty, then finite differences

    Vec operator()(double t, const Vec& x) const { return eval(t, x); }
    Mat jacobian(double t, const Vec& x) const;
};

struct CycleOrbit {
    double period = 0.0;
    std::function<Vec(double)> gamma;
    std::function<Vec(double)> gamma_dot;
    bool sampled = false;  // interpolated from samples rather than closed form

    static CycleOrbit equilibrium(const Vec& point, double period);
    // Uniform samples gamma(k T / m), k = 0..m-1; periodic cubic spline.
    static CycleOrbit from_samples(const std::vector<Vec>& samples, double period);
};

// y' = A(t) y + R(t, y) about a periodic solution.
struct TranslatedSystem {
    int dim = 0;
    double period = 0.0;
    MatrixFn A;
    FieldFn R;
};

struct System {
    std::string id;
    Params params;
    VectorField field;
    std::optional<CycleOrbit> cycle;
};

struct SystemInfo {
    std::string id;
    int dim;
    std::vector<std::string> params;
    std::string summary;
};

const std::vector<SystemInfo>& builtin_catalog();

// Throws UsageError for unknown ids, missing or unexpected parameters.
System builtin(const std::string& name, const Params& params = {});

// max over `samples` points of |gamma'(t) - f(t, gamma(t))|.
double cycle_residual(const VectorField& field, const CycleOrbit& cycle, int samples = 64);

// A(t) = Df(gamma(t)), R(t,y) = f(gamma+y) - f(gamma) - A y.
// Throws UsageError when the cycle residual exceeds `tol`.
TranslatedSystem translate_about_cycle(const VectorField& field, const CycleOrbit& cycle,
                                       double tol = 1e-8);

TranslatedSystem translate(const System& sys, double tol = 1e-8);

// Linear constant-coefficient system y' = A y, treated as T-periodic.
TranslatedSystem constant_linear(const Mat& A, double period);

// User polynomial fields: sum of coef * prod x_i^pow_i, optionally times
// sin or cos of 2 pi k t / T.
enum class TimeFactor { None, Sin, Cos };

struct Monomial {
    int eq = 0;
    double coef = 0.0;
    std::vector<int> pow;
    TimeFactor time = TimeFactor::None;
    int harmonic = 1;
};

struct PolynomialSpec {
    int dim = 0;
    std::vector<Monomial> terms;
    std::optional<double> period;
};

VectorField polynomial_field(const PolynomialSpec& spec);

}  // namespace fcm
