#include <floquetcm/lyapunov_perron.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <random>

namespace fcm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double bump(double v) { return v > 0 ? std::exp(-1 / v) : 0.0; }

int floor_mod(int a, int m) { return ((a % m) + m) % m; }

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Euclidean norm of R(t, y) scaled by both cutoffs.
Vec cut_field(const TranslatedSystem& sys, double Ndelta, double t, const Vec& y,
              const std::array<Mat, 3>& pi) {
    Vec center = pi[1] * y;
    double x0 = cutoff_xi(center.norm() / Ndelta);
    if (x0 == 0) return Vec::Zero(y.size());
    double xh = cutoff_xi((y - center).norm() / Ndelta);
    if (xh == 0) return Vec::Zero(y.size());
    return x0 * xh * sys.R(t, y);
}

}  // namespace

GridFunction::GridFunction(const WeightedContext& ctx, int dim)
    : t0(ctx.s - ctx.half() * ctx.h), h(ctx.h), values(ctx.size(), Vec::Zero(dim)) {}

Vec GridFunction::operator()(double t) const {
    const int n = size();
    if (n == 0) throw UsageError("empty grid function");
    if (n < 4) return values[std::clamp(static_cast<int>(std::lround((t - t0) / h)), 0, n - 1)];
    double r = (t - t0) / h;
    int i = std::clamp(static_cast<int>(std::floor(r)) - 1, 0, n - 4);
    double x = r - i;  // position relative to node i, in [0,3]
    Vec v = Vec::Zero(values[0].size());
    for (int a = 0; a < 4; ++a) {
        double w = 1;
        for (int b = 0; b < 4; ++b)
            if (b != a) w *= (x - b) / (a - b);
        v += w * values[i + a];
    }
    return v;
}

double weighted_norm(const GridFunction& f, const WeightedContext& ctx) {
    double m = 0;
    for (int i = 0; i < f.size(); ++i)
        m = std::max(m, std::exp(-ctx.eta * std::abs(f.time(i) - ctx.s)) * f.values[i].norm());
    return m;
}

double weighted_distance(const GridFunction& f, const GridFunction& g, const WeightedContext& ctx) {
    if (f.size() != g.size()) throw UsageError("grid functions on different grids");
    double m = 0;
    for (int i = 0; i < f.size(); ++i)
        m = std::max(m, std::exp(-ctx.eta * std::abs(f.time(i) - ctx.s)) * (f.values[i] - g.values[i]).norm());
    return m;
}

double cutoff_xi(double u) {
    if (!(u >= 0)) throw DomainError("cutoff argument must be non-negative");
    if (u <= 1) return 1;
    if (u >= 2) return 0;
    double a = bump(2 - u), b = bump(u - 1);
    return a / (a + b);
}

double measure_lipschitz(const NonlinearMap& F, int dim, const LipschitzSampling& how) {
    if (dim < 1 || how.samples < 1 || !(how.radius > 0)) throw UsageError("bad Lipschitz sampling request");
    std::mt19937_64 rng(how.seed);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u01(0, 1);
    auto in_ball = [&] {
        Vec v(dim);
        for (int i = 0; i < dim; ++i) v(i) = n01(rng);
        v.normalize();
        return Vec(v * how.radius * std::pow(u01(rng), 1.0 / dim));
    };
    double L = 0;
    for (int k = 0; k < how.samples; ++k) {
        double t = how.times[k % how.times.size()];
        Vec y = in_ball(), z;
        if (k % 2) {
            z = in_ball();
        } else {
            // Close pair probes the local derivative.
            Vec d(dim);
            for (int i = 0; i < dim; ++i) d(i) = n01(rng);
            z = y + 1e-4 * how.radius * d.normalized();
        }
        double dist = (y - z).norm();
        if (dist == 0) continue;
        L = std::max(L, (F(t, y) - F(t, z)).norm() / dist);
    }
    return L;
}

LpProblem::LpProblem(TranslatedSystem sys, std::shared_ptr<const FloquetAnalysis> fa, double s,
                     const LpOptions& opt)
    : sys_(std::move(sys)), fa_(std::move(fa)), opt_(opt) {
    if (!fa_) throw UsageError("missing Floquet analysis");
    const auto& r = fa_->rates;
    const double T = sys_.period;
    ctx_.s = s;
    ctx_.kappa = std::min(-r.a, r.b);
    if (opt.eta) {
        ctx_.eta = *opt.eta;
    } else {
        ctx_.eta = std::isfinite(ctx_.kappa) ? ctx_.kappa / 2 : 0.5;
    }
    if (!(ctx_.eta > 0) || !(ctx_.eta < ctx_.kappa))
        throw UsageError("eta must lie in (0, min(-a, b)) = (0, " + num(ctx_.kappa) + ")");
    ctx_.m = static_cast<int>(std::ceil(T / std::min(T / 256, 0.01) - 1e-9));
    ctx_.h = T / ctx_.m;
    build_table();

    cut_.N = fa_->projectors.bound();
    auto measure = [&](double delta) {
        LipschitzSampling how;
        how.radius = 5 * cut_.N * delta;
        how.samples = opt_.lipschitz_samples;
        how.seed = opt_.seed;
        how.times.clear();
        std::vector<std::array<Mat, 3>> pis;
        for (int j = 0; j < 16; ++j) {
            how.times.push_back(s + T * j / 16);
            pis.push_back(fa_->projectors.all_at(how.times.back()));
        }
        const double Nd = cut_.N * delta;
        NonlinearMap F = [&, Nd](double t, const Vec& y) {
            auto it = std::find(how.times.begin(), how.times.end(), t);
            return cut_field(sys_, Nd, t, y, pis[it - how.times.begin()]);
        };
        return measure_lipschitz(F, sys_.dim, how);
    };
    if (opt.delta) {
        if (!(*opt.delta > 0)) throw UsageError("delta must be positive");
        cut_.delta = *opt.delta;
        cut_.L = measure(cut_.delta);
    } else {
        for (int j = 0; j <= 40; ++j) {
            cut_.delta = 0.1 * std::ldexp(1.0, -j);
            cut_.L = measure(cut_.delta);
            if (cut_.L * k_est_ < 0.25) break;
        }
    }
    if (cut_.L * k_est_ >= 0.25)
        warnings_.push_back("L_delta * |K| estimate = " + num(cut_.L * k_est_) +
                            " is not below 1/4; contraction is only observed, not guaranteed");

    const double gap = std::min(ctx_.kappa - ctx_.eta, ctx_.eta);
    double Wmin = 5 / gap;
    if (opt.window) {
        if (!(*opt.window > 0)) throw UsageError("window must be positive");
        ctx_.W = *opt.window;
        if (ctx_.W < Wmin) warnings_.push_back("window below 5 / min(kappa - eta, eta)");
    } else {
        ctx_.W = Wmin;
        // Forcing scale: the sup bound 4 N L delta of R_delta, but at least 1 so K stays
        // usable on unit-size forcings.
        double F = std::max(1.0, 4 * cut_.N * cut_.L * cut_.delta);
        double k = ctx_.kappa - ctx_.eta;
        if (std::isfinite(k)) {
            double Wt = std::log(r.C * cut_.N * F / (k * opt_.tail_tol)) / k;
            ctx_.W = std::max(ctx_.W, Wt);
        }
    }
    ctx_.W = std::max(2, static_cast<int>(std::ceil(ctx_.W / ctx_.h - 1e-9))) * ctx_.h;
}

LpProblem::LpProblem(TranslatedSystem sys, std::shared_ptr<const FloquetAnalysis> fa, double s,
                     const LpOptions& opt, const CutoffSpec& cut, const WeightedContext& like)
    : sys_(std::move(sys)), fa_(std::move(fa)), opt_(opt), cut_(cut) {
    if (!fa_) throw UsageError("missing Floquet analysis");
    ctx_ = like;
    ctx_.s = s;
    build_table();
    ctx_.W = std::max(2L, std::lround(like.W / ctx_.h)) * ctx_.h;
}

void LpProblem::build_table() {
    const auto& r = fa_->rates;
    const auto& P = fa_->projectors;
    const double T = sys_.period;
    ctx_.m = static_cast<int>(std::ceil(T / std::min(T / 256, 0.01) - 1e-9));
    ctx_.h = T / ctx_.m;
    double plus = std::isfinite(ctx_.kappa) ? 0.5 * (ctx_.eta + ctx_.kappa) : ctx_.eta + 0.5;
    int k = fa_->system.dim > 0 ? 2 : 1;
    ctx_.eta_plus = plus;
    ctx_.eta_minus = plus / (k + 1);

    const double eps = ctx_.eta / 2;
    double sum = 0;
    if (P.rank(Band::Center) > 0) sum += 1 / (ctx_.eta - eps);
    if (std::isfinite(r.b)) sum += 1 / (r.b - ctx_.eta);
    if (std::isfinite(r.a)) sum += 1 / (-r.a - ctx_.eta);
    k_est_ = r.C * P.bound() * sum;
    if (r.eps >= ctx_.eta) warnings_.push_back("center growth bound is not below eta");

    const int m = ctx_.m;
    step_.resize(m);
    inv_.resize(m);
    pi_.resize(m);
    const auto& U = *fa_->U;
    for (int j = 0; j < m; ++j) {
        double t0 = ctx_.s + j * ctx_.h, t1 = ctx_.s + (j + 1) * ctx_.h;
        step_[j] = U.step(t0, t1);
        inv_[j] = step_[j].inverse();
        pi_[j] = P.all_at(t0);
    }
    Mat B = P.all_at(ctx_.s)[1];
    Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeFullU);
    int rank = P.rank(Band::Center);
    center_basis_ = svd.matrixU().leftCols(rank);
    for (int c = 0; c < rank; ++c) {
        Eigen::Index i;
        center_basis_.col(c).cwiseAbs().maxCoeff(&i);
        if (center_basis_(i, c) < 0) center_basis_.col(c) *= -1;
    }
}

LpProblem LpProblem::from_system(const System& sys, double s, const LpOptions& opt,
                                 const StepperConfig& cfg) {
    auto fa = std::make_shared<const FloquetAnalysis>(analyze(sys, cfg, kDefaultRhoTol, s));
    return LpProblem(fa->system, fa, s, opt);
}

int LpProblem::period_index(int i) const { return floor_mod(i - ctx_.half(), ctx_.m); }

Mat LpProblem::pi0_at_base() const { return pi_[0][1]; }

Vec LpProblem::R_delta(double t, const Vec& y) const {
    if (y.size() != sys_.dim) throw UsageError("state has the wrong dimension");
    return cut_field(sys_, cut_.N * cut_.delta, t, y, fa_->projectors.all_at(t));
}

GridFunction LpProblem::substitute(const GridFunction& u) const {
    GridFunction f = u;
    const double Nd = cut_.N * cut_.delta;
    for (int i = 0; i < u.size(); ++i) f.values[i] = cut_field(sys_, Nd, u.time(i), u.values[i], pi_[period_index(i)]);
    return f;
}

double LpProblem::tail_estimate(double F) const {
    double k = ctx_.kappa - ctx_.eta;
    if (!std::isfinite(k) || F == 0) return 0;
    return fa_->rates.C * cut_.N * F * std::exp(-k * ctx_.W) / k;
}

GridFunction LpProblem::K(const GridFunction& f) const {
    const int n = ctx_.size(), c = ctx_.half();
    if (f.size() != n) throw UsageError("forcing is not on the problem grid");
    double F = weighted_norm(f, ctx_);
    double tail = tail_estimate(F);
    if (tail > opt_.tail_tol)
        throw NumericalError("window W = " + num(ctx_.W) + " too small: tail estimate " +
                             num(tail) + " exceeds " + num(opt_.tail_tol) +
                             "; increase the window");
    const double h = ctx_.h;
    GridFunction u = f;
    for (auto& v : u.values) v.setZero();
    std::vector<Vec> p(n);
    auto S = [&](int i) -> const Mat& { return step_[period_index(i)]; };
    auto Si = [&](int i) -> const Mat& { return inv_[period_index(i)]; };
    auto Pi = [&](int i, int b) -> const Mat& { return pi_[period_index(i)][b]; };
    // Carry p_k from t_k to t_ref with the step propagators.
    auto transport = [&](int k, int ref) {
        Vec v = p[k];
        for (; k < ref; ++k) v = S(k) * v;
        for (; k > ref; --k) v = Si(k - 1) * v;
        return v;
    };
    // int_{t_i}^{t_{i+1}} U(t_ref, r) p(r) dr with a four-node stencil, centred when possible.
    static const double kW[3][4] = {{9, 19, -5, 1}, {-1, 13, 13, -1}, {1, -5, 19, 9}};
    auto integral = [&](int i, int ref) {
        int j0 = std::clamp(i - 1, 0, n - 4);
        const double* w = kW[i - j0];
        Vec acc = Vec::Zero(sys_.dim);
        for (int a = 0; a < 4; ++a) acc += w[a] * transport(j0 + a, ref);
        return Vec(acc * (h / 24));
    };
    auto forward = [&](int band, int from, int to) {
        Vec I = Vec::Zero(sys_.dim);
        for (int i = from; i < to; ++i) {
            I = Pi(i + 1, band) * (S(i) * I + integral(i, i + 1));
            u.values[i + 1] += I;
        }
    };
    auto backward = [&](int band, int from, int to) {
        Vec I = Vec::Zero(sys_.dim);
        for (int i = from - 1; i >= to; --i) {
            I = Pi(i, band) * (Si(i) * I - integral(i, i));
            u.values[i] += I;
        }
    };
    const auto& P = fa_->projectors;
    if (P.rank(Band::Stable) > 0) {
        for (int i = 0; i < n; ++i) p[i] = Pi(i, 0) * f.values[i];
        forward(0, 0, n - 1);
    }
    if (P.rank(Band::Center) > 0) {
        for (int i = 0; i < n; ++i) p[i] = Pi(i, 1) * f.values[i];
        forward(1, c, n - 1);
        backward(1, c, 0);
    }
    if (P.rank(Band::Unstable) > 0) {
        for (int i = 0; i < n; ++i) p[i] = Pi(i, 2) * f.values[i];
        backward(2, n - 1, 0);
    }
    return u;
}

GridFunction LpProblem::homogeneous(const Vec& y0) const {
    const int n = ctx_.size(), c = ctx_.half();
    GridFunction u(ctx_, sys_.dim);
    u.values[c] = y0;
    for (int i = c; i + 1 < n; ++i) u.values[i + 1] = pi_[period_index(i + 1)][1] * (step_[period_index(i)] * u.values[i]);
    for (int i = c - 1; i >= 0; --i) u.values[i] = pi_[period_index(i)][1] * (inv_[period_index(i)] * u.values[i + 1]);
    return u;
}

FixedPointResult LpProblem::fixed_point(const Vec& y0) const {
    if (y0.size() != sys_.dim) throw UsageError("y0 has the wrong dimension");
    Mat P0 = pi0_at_base();
    if ((y0 - P0 * y0).norm() > 1e-8 * std::max(1.0, y0.norm()))
        throw UsageError("y0 is not in the center subspace at the base time");
    FixedPointResult res;
    res.warnings = warnings_;
    res.bound = cut_.L * k_est_;
    const GridFunction base = homogeneous(y0);
    GridFunction u = base;
    for (int k = 1;; ++k) {
        GridFunction next = K(substitute(u));
        for (int i = 0; i < next.size(); ++i) next.values[i] += base.values[i];
        double inc = weighted_distance(next, u, ctx_);
        res.increments.push_back(inc);
        u = std::move(next);
        res.iterations = k;
        if (inc < opt_.fp_tol) break;
        if (k >= opt_.max_iter)
            throw NumericalError("fixed-point iteration did not converge in " + std::to_string(k) +
                                 " iterations (last increment " + num(inc) + ")");
        if (k >= 3 && inc > res.increments[k - 2] && inc > res.increments[k - 3])
            throw NumericalError("fixed-point iteration is not contracting (increment grew to " +
                                 num(inc) + ")");
    }
    double logsum = 0;
    int count = 0;
    for (std::size_t k = 1; k < res.increments.size(); ++k) {
        if (res.increments[k - 1] <= 100 * opt_.fp_tol || res.increments[k] == 0) break;
        logsum += std::log(res.increments[k] / res.increments[k - 1]);
        ++count;
    }
    res.rate = count ? std::exp(logsum / count) : 0.0;
    if (res.rate >= 1) throw NumericalError("contraction failed: observed rate " + num(res.rate));
    res.C = u.values[ctx_.half()];
    res.H = res.C - P0 * res.C;
    res.u = std::move(u);
    return res;
}

double LpProblem::inhomogeneous_residual(const GridFunction& u, const GridFunction& f) const {
    const int c = ctx_.half();
    const int reach = std::max(1, static_cast<int>(std::min(ctx_.W / 2, 3.0) / ctx_.h));
    StepperConfig cfg;
    cfg.atol = cfg.rtol = 1e-12;
    Rhs rhs = [&](double t, const Vec& v, Vec& dv) { dv = sys_.A(t) * v + f(t); };
    double worst = 0;
    for (int k = -6; k <= 6; ++k) {
        if (k == 0) continue;
        int i = c + k * reach / 6;
        Vec v = solve_ode(rhs, ctx_.s, u.values[c], u.time(i), cfg);
        worst = std::max(worst, (v - u.values[i]).norm());
    }
    return worst;
}

double tangency_error(const LpProblem& p, double h) {
    const Mat& B = p.center_basis();
    double worst = 0;
    for (int c = 0; c < B.cols(); ++c) {
        Vec e = B.col(c);
        Vec d = (p.C(h * e) - p.C(-h * e)) / (2 * h);
        worst = std::max(worst, (d - e).norm());
    }
    return worst;
}

double periodicity_error(const System& sys, const LpProblem& p, const Vec& y0, const StepperConfig& cfg) {
    const double s1 = p.context().s + p.system().period;
    auto fa = std::make_shared<const FloquetAnalysis>(analyze(sys, cfg, kDefaultRhoTol, s1));
    LpProblem q(fa->system, fa, s1, p.options(), p.cutoff(), p.context());
    return (q.C(y0) - p.C(y0)).norm();
}

double invariance_error(const LpProblem& p, const Vec& y0, int steps) {
    const auto& ctx = p.context();
    const double t1 = ctx.s + steps * ctx.h;
    Vec ystar = p.C(y0);
    const auto& sys = p.system();
    StepperConfig cfg;
    cfg.atol = cfg.rtol = 1e-12;
    Rhs rhs = [&](double t, const Vec& y, Vec& dy) { dy = sys.A(t) * y + p.R_delta(t, y); };
    Vec S = solve_ode(rhs, ctx.s, ystar, t1, cfg);
    LpProblem q(sys, p.analysis(), t1, p.options(), p.cutoff(), ctx);
    Vec center = q.pi0_at_base() * S;
    return (S - q.C(center)).norm();
}

}  // namespace fcm
