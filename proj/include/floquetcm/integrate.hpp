#pragma once

#include <floquetcm/odecore.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace fcm {

enum class Method { FixedRk4, AdaptiveDp54 };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct StepperConfig {
    Method method = Method::AdaptiveDp54;
    double h = 1e-2;  // fixed step; for the adaptive method a cap on |h|
    double atol = 1e-10;
    double rtol = 1e-10;
    std::int64_t max_steps = 1000000;

    void validate() const;
    bool operator==(const StepperConfig&) const = default;
};

using Rhs = std::function<void(double t, const Vec& x, Vec& dx)>;
// Fills per-component error scales from the states before and after a step.
using ScaleFn = std::function<void(const Vec& x0, const Vec& x1, Vec& scale)>;

// Interpolant over one accepted step, y(theta) in Hairer's continuous form.
struct DenseStep {
    double t0 = 0, t1 = 0;
    Vec r1, r2, r3, r4, r5;
    Vec operator()(double t) const;
};

using StepObserver = std::function<void(const DenseStep&)>;

struct SolveStats {
    std::int64_t accepted = 0;
    std::int64_t rejected = 0;
};

// Integrates x' = rhs(t, x) from t0 to t1 (either direction).
Vec solve_ode(const Rhs& rhs, double t0, const Vec& x0, double t1, const StepperConfig& cfg,
              const ScaleFn& scale = {}, const StepObserver& observer = {},
              SolveStats* stats = nullptr);

Vec flow(const VectorField& field, double t0, const Vec& x0, double t1,
         const StepperConfig& cfg = {});

struct Trajectory {
    std::vector<double> t;
    std::vector<Vec> x;
    void write_csv(std::ostream& out) const;
};

// `samples` >= 2 equally spaced outputs including both end points.
Trajectory integrate_trajectory(const VectorField& field, double t0, const Vec& x0, double t1,
                                const StepperConfig& cfg, int samples);

// Solves X' = A(t) X with the error of each column measured relative to its norm.
Mat propagate_matrix(const MatrixFn& A, double t0, const Mat& X0, double t1,
                     const StepperConfig& cfg);

// Default node count per period: max(256, ceil(T / 0.01)).
int default_nodes(double period);

// U(t, s) for a T-periodic linear system. Nodes over [s, s+T] are cached;
// other times use periodicity and powers of the monodromy.
class TransitionMatrix {
public:
    TransitionMatrix() = default;
    TransitionMatrix(MatrixFn A, double s, double period, const StepperConfig& cfg = {},
                     int nodes = 0);

    // Variational equation integrated together with the orbit through x_s.
    static TransitionMatrix along_orbit(const VectorField& field, const Vec& x_s, double s,
                                        double period, const StepperConfig& cfg = {},
                                        int nodes = 0);

    int dim() const { return dim_; }
    double base() const { return s_; }
    double period() const { return T_; }
    int nodes() const { return static_cast<int>(grid_.size()) - 1; }
    double node_time(int j) const { return s_ + T_ * j / nodes(); }
    const Mat& node(int j) const { return grid_.at(j); }
    const Mat& monodromy() const { return grid_.back(); }
    const StepperConfig& config() const { return cfg_; }

    Mat operator()(double t) const;            // U(t, s)
    Mat between(double t, double r) const;     // U(t, r) = U(t,s) U(r,s)^{-1}
    // U(t1, t0) by direct integration; intended for short intervals.
    Mat step(double t0, double t1) const;
    Mat generator(double t) const;             // A(t)

private:
    Mat within_period(double t) const;         // t in [s, s+T]
    Vec orbit_state(double t) const;

    int dim_ = 0;
    double s_ = 0, T_ = 0;
    StepperConfig cfg_;
    MatrixFn A_;
    // Set for along_orbit.
    FieldFn f_;
    JacobianFn jac_;
    std::vector<Vec> states_;
    std::vector<Mat> grid_;
};

}  // namespace fcm
