#pragma once

#include <floquetcm/floquet.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fcm {

struct WeightedContext {
    double eta = 0;
    double s = 0;
    double W = 0;      // window half-width, a multiple of h
    double h = 0;      // grid step, T / m
    int m = 0;         // grid steps per period
    double kappa = 0;  // min(-a, b), may be +inf
    double eta_minus = 0, eta_plus = 0;  // diagnostic scale endpoints only
    int half() const { return static_cast<int>(std::lround(W / h)); }
    int size() const { return 2 * half() + 1; }
    double time(int i) const { return s + (i - half()) * h; }
};

// Uniform samples on [s - W, s + W] with cubic interpolation in between.
struct GridFunction {
    double t0 = 0, h = 0;
    std::vector<Vec> values;

    GridFunction() = default;
    GridFunction(const WeightedContext& ctx, int dim);
    int size() const { return static_cast<int>(values.size()); }
    double time(int i) const { return t0 + i * h; }
    Vec operator()(double t) const;
};

double weighted_norm(const GridFunction& f, const WeightedContext& ctx);
double weighted_distance(const GridFunction& f, const GridFunction& g, const WeightedContext& ctx);

// 1 on [0,1], 0 on [2,inf), exp-bump transition with xi(1.5) = 1/2.
double cutoff_xi(double u);

struct CutoffSpec {
    double delta = 0;
    double N = 1;
    double L = 0;  // measured Lipschitz constant of R_delta
};

using NonlinearMap = std::function<Vec(double, const Vec&)>;

struct LipschitzSampling {
    double radius = 1;
    std::vector<double> times{0.0};
    int samples = 2000;
    std::uint64_t seed = 0;
};

// Max of |F(t,y) - F(t,z)| / |y - z| over random pairs in the ball, plus close pairs.
double measure_lipschitz(const NonlinearMap& F, int dim, const LipschitzSampling& how);

struct LpOptions {
    std::optional<double> eta;
    std::optional<double> delta;   // skip the ladder when set
    std::optional<double> window;  // W; chosen from the tail bound when unset
    double fp_tol = 1e-10;
    int max_iter = 200;
    double tail_tol = 1e-9;
    int lipschitz_samples = 2000;
    std::uint64_t seed = 0;
};

struct FixedPointResult {
    GridFunction u;
    Vec C, H;
    int iterations = 0;
    double rate = 0;          // observed geometric contraction rate
    double bound = 0;         // L_delta * |K|_est
    std::vector<double> increments;
    std::vector<std::string> warnings;
};

// Everything needed to apply K and iterate G around one base time.
class LpProblem {
public:
    LpProblem(TranslatedSystem sys, std::shared_ptr<const FloquetAnalysis> fa, double s,
              const LpOptions& opt = {});
    // Reuses a cutoff (and eta, W) so that problems at different base times share R_delta.
    LpProblem(TranslatedSystem sys, std::shared_ptr<const FloquetAnalysis> fa, double s,
              const LpOptions& opt, const CutoffSpec& cut, const WeightedContext& like);

    static LpProblem from_system(const System& sys, double s, const LpOptions& opt = {},
                                 const StepperConfig& cfg = {});

    int dim() const { return sys_.dim; }
    const WeightedContext& context() const { return ctx_; }
    const CutoffSpec& cutoff() const { return cut_; }
    const LpOptions& options() const { return opt_; }
    const TranslatedSystem& system() const { return sys_; }
    std::shared_ptr<const FloquetAnalysis> analysis() const { return fa_; }
    double K_estimate() const { return k_est_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    // Orthonormal basis of E_0(s), columns sign-normalized.
    const Mat& center_basis() const { return center_basis_; }
    Mat pi0_at_base() const;

    Vec R_delta(double t, const Vec& y) const;
    GridFunction substitute(const GridFunction& u) const;  // R_delta(t, u(t)) on the grid

    // Tail of the truncated integrals for a forcing of weighted norm F.
    double tail_estimate(double F) const;
    GridFunction K(const GridFunction& f) const;
    GridFunction homogeneous(const Vec& y0) const;  // t -> U(t,s) y0 for y0 in E_0(s)
    FixedPointResult fixed_point(const Vec& y0) const;
    Vec C(const Vec& y0) const { return fixed_point(y0).C; }

    // max |u(t) - U(t,s)u(s) - int_s^t U(t,r) f(r) dr| over test points near s.
    double inhomogeneous_residual(const GridFunction& u, const GridFunction& f) const;

private:
    void build_table();
    int period_index(int i) const;  // grid index -> index in one period

    TranslatedSystem sys_;
    std::shared_ptr<const FloquetAnalysis> fa_;
    LpOptions opt_;
    WeightedContext ctx_;
    CutoffSpec cut_;
    double k_est_ = 0;
    Mat center_basis_;
    std::vector<std::string> warnings_;
    // Per step of one period: U(t_{j+1}, t_j), its inverse, projectors at t_j.
    std::vector<Mat> step_, inv_;
    std::vector<std::array<Mat, 3>> pi_;
};

// Max deviation of the centred-difference Jacobian of y0 -> C(s, y0) at 0 from the identity on E_0(s).
double tangency_error(const LpProblem& p, double h = 1e-4);
// |C(s + T, y0) - C(s, y0)| using an independently built analysis at s + T.
double periodicity_error(const System& sys, const LpProblem& p, const Vec& y0, const StepperConfig& cfg = {});
// Flow the modified system from C(s, y0) to s + steps h and compare with the fibre through its center part.
double invariance_error(const LpProblem& p, const Vec& y0, int steps = 50);

}  // namespace fcm
