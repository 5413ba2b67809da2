#include <floquetcm/integrate.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>

namespace fcm {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense output weights (Hairer, DOPRI5 contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

void default_scale(double atol, double rtol, const Vec& x0, const Vec& x1, Vec& sc) {
    sc = atol + rtol * x0.cwiseAbs().cwiseMax(x1.cwiseAbs()).array();
}

double error_norm(const Vec& err, const Vec& sc) {
    return std::sqrt((err.array() / sc.array()).square().mean());
}

void check_finite(const Vec& x, double t) {
    if (!x.allFinite())
        throw NumericalError("non-finite state encountered at t = " + std::to_string(t));
}

// Column-relative error scale for vec(X) with X having `rows` rows, starting at `offset`.
void column_scale(double atol, double rtol, int rows, int offset, const Vec& x0, const Vec& x1,
                  Vec& sc) {
    const int cols = (static_cast<int>(x0.size()) - offset) / rows;
    for (int j = 0; j < cols; ++j) {
        const int o = offset + j * rows;
        double m = std::max(x0.segment(o, rows).lpNorm<Eigen::Infinity>(),
                            x1.segment(o, rows).lpNorm<Eigen::Infinity>());
        sc.segment(o, rows).setConstant(atol + rtol * m);
    }
}

Vec solve_rk4(const Rhs& rhs, double t0, const Vec& x0, double t1, const StepperConfig& cfg,
              const StepObserver& observer, SolveStats* stats) {
    const double span = t1 - t0;
    const auto steps = static_cast<std::int64_t>(std::ceil(std::abs(span) / cfg.h - 1e-12));
    if (steps > cfg.max_steps) throw NumericalError("step count exceeded");
    const double h = span / static_cast<double>(std::max<std::int64_t>(steps, 1));
    const int n = static_cast<int>(x0.size());
    Vec x = x0, k1(n), k2(n), k3(n), k4(n), tmp(n);
    double t = t0;
    rhs(t, x, k1);
    for (std::int64_t i = 0; i < steps; ++i) {
        tmp = x + 0.5 * h * k1;
        rhs(t + 0.5 * h, tmp, k2);
        tmp = x + 0.5 * h * k2;
        rhs(t + 0.5 * h, tmp, k3);
        tmp = x + h * k3;
        rhs(t + h, tmp, k4);
        Vec xn = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        double tn = (i + 1 == steps) ? t1 : t0 + h * static_cast<double>(i + 1);
        check_finite(xn, tn);
        Vec f1(n);
        rhs(tn, xn, f1);
        if (observer) {
            DenseStep d;
            d.t0 = t;
            d.t1 = tn;
            d.r1 = x;
            d.r2 = xn - x;
            d.r3 = h * k1 - d.r2;
            d.r4 = d.r2 - h * f1 - d.r3;
            d.r5 = Vec::Zero(n);
            observer(d);
        }
        x = std::move(xn);
        k1 = f1;
        t = tn;
        if (stats) ++stats->accepted;
    }
    return x;
}

Vec solve_dp54(const Rhs& rhs, double t0, const Vec& x0, double t1, const StepperConfig& cfg,
               const ScaleFn& scale, const StepObserver& observer, SolveStats* stats) {
    const int n = static_cast<int>(x0.size());
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    auto fill_scale = [&](const Vec& a, const Vec& b, Vec& sc) {
        if (scale)
            scale(a, b, sc);
        else
            default_scale(cfg.atol, cfg.rtol, a, b, sc);
    };

    Vec x = x0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), xn(n), err(n), sc(n);
    rhs(t0, x, k1);
    check_finite(k1, t0);

    // Initial step guess (Hairer, hinit).
    fill_scale(x, x, sc);
    double dnf = error_norm(k1, sc), dny = error_norm(x, sc);
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h = std::min(h, span);
    tmp = x + dir * h * k1;
    rhs(t0 + dir * h, tmp, k2);
    double der2 = error_norm(k2 - k1, sc) / h;
    double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    h = std::min({100 * h, h1, span});

    double t = t0;
    bool last_rejected = false;
    std::int64_t steps = 0;
    while (dir * (t1 - t) > 0) {
        if (++steps > cfg.max_steps) throw NumericalError("step count exceeded");
        bool final_step = false;
        if (h >= std::abs(t1 - t) * (1 - 1e-12)) {
            h = std::abs(t1 - t);
            final_step = true;
        }
        if (h <= 1e-14 * std::max(1.0, std::abs(t)))
            throw NumericalError("step size underflow at t = " + std::to_string(t));
        const double hs = dir * h;
        tmp = x + hs * a21 * k1;
        rhs(t + c2 * hs, tmp, k2);
        tmp = x + hs * (a31 * k1 + a32 * k2);
        rhs(t + c3 * hs, tmp, k3);
        tmp = x + hs * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * hs, tmp, k4);
        tmp = x + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * hs, tmp, k5);
        tmp = x + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        const double tn = final_step ? t1 : t + hs;
        rhs(tn, tmp, k6);
        xn = x + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        rhs(tn, xn, k7);
        err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        fill_scale(x, xn, sc);
        double e = error_norm(err, sc);
        if (!std::isfinite(e) || !xn.allFinite() || !k7.allFinite()) {
            h *= 0.2;
            last_rejected = true;
            if (stats) ++stats->rejected;
            continue;
        }
        double fac = e == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 10.0);
        if (e > 1.0) {
            h *= std::min(fac, 1.0);
            last_rejected = true;
            if (stats) ++stats->rejected;
            continue;
        }
        if (observer) {
            DenseStep d;
            d.t0 = t;
            d.t1 = tn;
            d.r1 = x;
            d.r2 = xn - x;
            d.r3 = hs * k1 - d.r2;
            d.r4 = d.r2 - hs * k7 - d.r3;
            d.r5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            observer(d);
        }
        t = tn;
        x.swap(xn);
        k1.swap(k7);
        if (stats) ++stats->accepted;
        if (last_rejected) fac = std::min(fac, 1.0);
        last_rejected = false;
        h *= fac;
    }
    return x;
}

}  // namespace

std::string to_string(Method m) {
    return m == Method::FixedRk4 ? "fixed-rk4" : "adaptive-dp54";
}

Method method_from_string(const std::string& s) {
    if (s == "fixed-rk4") return Method::FixedRk4;
    if (s == "adaptive-dp54") return Method::AdaptiveDp54;
    throw UsageError("unknown integrator method '" + s + "'");
}

void StepperConfig::validate() const {
    if (!(h > 0)) throw UsageError("integrator.h must be positive");
    if (!(atol > 0)) throw UsageError("integrator.atol must be positive");
    if (!(rtol > 0)) throw UsageError("integrator.rtol must be positive");
    if (max_steps < 1) throw UsageError("integrator.max_steps must be at least 1");
}

Vec DenseStep::operator()(double t) const {
    const double th = t1 == t0 ? 1.0 : (t - t0) / (t1 - t0);
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
}

Vec solve_ode(const Rhs& rhs, double t0, const Vec& x0, double t1, const StepperConfig& cfg,
              const ScaleFn& scale, const StepObserver& observer, SolveStats* stats) {
    cfg.validate();
    check_finite(x0, t0);
    if (t1 == t0) return x0;
    if (cfg.method == Method::FixedRk4) return solve_rk4(rhs, t0, x0, t1, cfg, observer, stats);
    return solve_dp54(rhs, t0, x0, t1, cfg, scale, observer, stats);
}

Vec flow(const VectorField& field, double t0, const Vec& x0, double t1, const StepperConfig& cfg) {
    if (x0.size() != field.dim) throw UsageError("state has wrong dimension");
    Rhs rhs = [&field](double t, const Vec& x, Vec& dx) { dx = field(t, x); };
    return solve_ode(rhs, t0, x0, t1, cfg);
}

void Trajectory::write_csv(std::ostream& out) const {
    out << "t";
    const int n = x.empty() ? 0 : static_cast<int>(x[0].size());
    for (int i = 1; i <= n; ++i) out << ",x" << i;
    out << "\n" << std::setprecision(17);
    for (std::size_t k = 0; k < t.size(); ++k) {
        out << t[k];
        for (int i = 0; i < n; ++i) out << "," << x[k](i);
        out << "\n";
    }
}

Trajectory integrate_trajectory(const VectorField& field, double t0, const Vec& x0, double t1,
                                const StepperConfig& cfg, int samples) {
    if (samples < 2) throw UsageError("trajectory needs at least 2 samples");
    if (!(t1 > t0)) throw UsageError("trajectory needs t1 > t0");
    if (x0.size() != field.dim) throw UsageError("state has wrong dimension");
    Trajectory tr;
    tr.t.reserve(samples);
    tr.x.reserve(samples);
    for (int k = 0; k < samples; ++k)
        tr.t.push_back(k + 1 == samples ? t1 : t0 + (t1 - t0) * k / (samples - 1));
    tr.x.push_back(x0);
    std::size_t next = 1;
    Rhs rhs = [&field](double t, const Vec& x, Vec& dx) { dx = field(t, x); };
    Vec end = solve_ode(rhs, t0, x0, t1, cfg, {}, [&](const DenseStep& d) {
        while (next + 1 < tr.t.size() && tr.t[next] <= d.t1) tr.x.push_back(d(tr.t[next++]));
    });
    while (tr.x.size() < tr.t.size()) tr.x.push_back(end);
    tr.x.back() = end;
    return tr;
}

Mat propagate_matrix(const MatrixFn& A, double t0, const Mat& X0, double t1,
                     const StepperConfig& cfg) {
    const int n = static_cast<int>(X0.rows()), m = static_cast<int>(X0.cols());
    if (t0 == t1) return X0;
    Rhs rhs = [&A, n, m](double t, const Vec& x, Vec& dx) {
        Eigen::Map<const Mat> X(x.data(), n, m);
        dx.resize(n * m);
        Eigen::Map<Mat> dX(dx.data(), n, m);
        dX.noalias() = A(t) * X;
    };
    ScaleFn sc = [&cfg, n](const Vec& a, const Vec& b, Vec& s) {
        s.resize(a.size());
        column_scale(cfg.atol, cfg.rtol, n, 0, a, b, s);
    };
    Vec x0 = Eigen::Map<const Vec>(X0.data(), n * m);
    Vec x1 = solve_ode(rhs, t0, x0, t1, cfg, sc);
    return Eigen::Map<Mat>(x1.data(), n, m);
}

int default_nodes(double period) {
    return std::max(256, static_cast<int>(std::ceil(period / 0.01 - 1e-9)));
}

namespace {

// Augmented state [x; vec(X)] for the variational equation along an orbit.
struct Augmented {
    FieldFn f;
    JacobianFn jac;
    int n;
    StepperConfig cfg;

    std::pair<Vec, Mat> run(double t0, const Vec& x0, const Mat& X0, double t1) const {
        const int m = static_cast<int>(X0.cols());
        if (t0 == t1) return {x0, X0};
        Vec z(n + n * m);
        z.head(n) = x0;
        z.tail(n * m) = Eigen::Map<const Vec>(X0.data(), n * m);
        const int nn = n;
        Rhs rhs = [this, nn, m](double t, const Vec& s, Vec& ds) {
            ds.resize(s.size());
            Vec x = s.head(nn);
            ds.head(nn) = f(t, x);
            Eigen::Map<const Mat> X(s.data() + nn, nn, m);
            Eigen::Map<Mat> dX(ds.data() + nn, nn, m);
            dX.noalias() = jac(t, x) * X;
        };
        ScaleFn sc = [this, nn](const Vec& a, const Vec& b, Vec& s) {
            s.resize(a.size());
            s.head(nn) = cfg.atol + cfg.rtol * a.head(nn).cwiseAbs().cwiseMax(b.head(nn).cwiseAbs()).array();
            column_scale(cfg.atol, cfg.rtol, nn, nn, a, b, s);
        };
        Vec z1 = solve_ode(rhs, t0, z, t1, cfg, sc);
        return {z1.head(n), Eigen::Map<Mat>(z1.data() + n, n, m)};
    }
};

}  // namespace

TransitionMatrix::TransitionMatrix(MatrixFn A, double s, double period, const StepperConfig& cfg,
                                   int nodes)
    : s_(s), T_(period), cfg_(cfg), A_(std::move(A)) {
    cfg_.validate();
    if (!(period > 0)) throw UsageError("period must be positive");
    dim_ = static_cast<int>(A_(s).rows());
    const int m = nodes > 0 ? nodes : default_nodes(period);
    grid_.reserve(m + 1);
    grid_.push_back(Mat::Identity(dim_, dim_));
    for (int j = 0; j < m; ++j)
        grid_.push_back(propagate_matrix(A_, s_ + T_ * j / m, grid_.back(), s_ + T_ * (j + 1) / m, cfg_));
}

TransitionMatrix TransitionMatrix::along_orbit(const VectorField& field, const Vec& x_s, double s,
                                               double period, const StepperConfig& cfg,
                                               int nodes) {
    cfg.validate();
    if (!(period > 0)) throw UsageError("period must be positive");
    TransitionMatrix U;
    U.s_ = s;
    U.T_ = period;
    U.cfg_ = cfg;
    U.dim_ = field.dim;
    U.f_ = field.eval;
    U.jac_ = [field](double t, const Vec& x) { return field.jacobian(t, x); };
    U.A_ = [](double) -> Mat { throw Error("generator unavailable"); };
    Augmented aug{U.f_, U.jac_, field.dim, cfg};
    const int m = nodes > 0 ? nodes : default_nodes(period);
    U.grid_.push_back(Mat::Identity(U.dim_, U.dim_));
    U.states_.push_back(x_s);
    for (int j = 0; j < m; ++j) {
        auto [x, X] = aug.run(s + period * j / m, U.states_.back(), U.grid_.back(),
                              s + period * (j + 1) / m);
        U.states_.push_back(x);
        U.grid_.push_back(X);
    }
    // The generator along the orbit is the Jacobian at the propagated state.
    U.A_ = [field, self = std::make_shared<TransitionMatrix>(U)](double t) -> Mat {
        return field.jacobian(t, self->orbit_state(t));
    };
    return U;
}

Vec TransitionMatrix::orbit_state(double t) const {
    double r = std::fmod(t - s_, T_);
    if (r < 0) r += T_;
    const int m = nodes();
    int j = std::clamp(static_cast<int>(std::floor(r / T_ * m)), 0, m - 1);
    Augmented aug{f_, jac_, dim_, cfg_};
    return aug.run(s_ + T_ * j / m, states_[j], Mat::Zero(dim_, 0), s_ + r).first;
}

Mat TransitionMatrix::generator(double t) const { return A_(t); }

Mat TransitionMatrix::within_period(double t) const {
    const int m = nodes();
    double q = (t - s_) / T_ * m;
    int j = std::clamp(static_cast<int>(std::floor(q)), 0, m);
    if (std::abs(q - std::round(q)) < 1e-12 * std::max(1.0, std::abs(q)))
        return grid_[std::clamp(static_cast<int>(std::round(q)), 0, m)];
    if (j == m) j = m - 1;
    const double tj = s_ + T_ * j / m;
    if (f_) {
        Augmented aug{f_, jac_, dim_, cfg_};
        return aug.run(tj, states_[j], grid_[j], t).second;
    }
    return propagate_matrix(A_, tj, grid_[j], t, cfg_);
}

Mat TransitionMatrix::operator()(double t) const {
    double k = std::floor((t - s_) / T_);
    double tau = t - s_ - k * T_;
    if (tau >= T_) {
        tau -= T_;
        k += 1;
    }
    Mat W = within_period(s_ + tau);
    const Mat& M = monodromy();
    const auto p = static_cast<long>(k);
    if (p > 0) {
        for (long i = 0; i < p; ++i) W = W * M;
    } else if (p < 0) {
        Eigen::PartialPivLU<Mat> lu(M.transpose());
        for (long i = 0; i < -p; ++i) W = lu.solve(W.transpose()).transpose();
    }
    return W;
}

Mat TransitionMatrix::between(double t, double r) const {
    Mat Ut = (*this)(t), Ur = (*this)(r);
    return Ur.transpose().partialPivLu().solve(Ut.transpose()).transpose();
}

Mat TransitionMatrix::step(double t0, double t1) const {
    if (f_) {
        Augmented aug{f_, jac_, dim_, cfg_};
        return aug.run(t0, orbit_state(t0), Mat::Identity(dim_, dim_), t1).second;
    }
    return propagate_matrix(A_, t0, Mat::Identity(dim_, dim_), t1, cfg_);
}

}  // namespace fcm
