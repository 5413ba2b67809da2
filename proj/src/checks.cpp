#include <floquetcm/cm_expand.hpp>
#include <floquetcm/family.hpp>
#include <floquetcm/lyapunov_perron.hpp>
#include <floquetcm/verify.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <thread>

namespace fcm {

namespace {

using json = nlohmann::json;
constexpr double kPi = std::numbers::pi;

double spectral_norm(const Mat& A) { return Eigen::JacobiSVD<Mat>(A).singularValues()(0); }

// Shared inputs of one suite run; the Floquet analysis is built at most once.
class Context {
public:
    Context(const ProblemSpec& spec, std::uint64_t seed)
        : spec_(spec), sys_(build_system(spec)), seed_(seed) {}

    const ProblemSpec& spec() const { return spec_; }
    const System& system() const { return sys_; }
    const StepperConfig& cfg() const { return spec_.integrator; }
    std::uint64_t seed() const { return seed_; }
    const std::string& id() const { return sys_.id; }
    double param(const std::string& name) const {
        auto it = sys_.params.find(name);
        return it == sys_.params.end() ? 0.0 : it->second;
    }

    const FloquetAnalysis& analysis() const {
        std::call_once(once_, [this] {
            try {
                fa_ = std::make_shared<const FloquetAnalysis>(analyze(sys_, cfg()));
            } catch (...) {
                err_ = std::current_exception();
            }
        });
        if (err_) std::rethrow_exception(err_);
        return *fa_;
    }

private:
    ProblemSpec spec_;
    System sys_;
    std::uint64_t seed_;
    mutable std::once_flag once_;
    mutable std::shared_ptr<const FloquetAnalysis> fa_;
    mutable std::exception_ptr err_;
};

struct Builder {
    CheckResult r;
    void le(const std::string& name, double value, double tol) {
        r.measurements.push_back({name, value, tol, value <= tol});
    }
    void ge(const std::string& name, double value, double tol) {
        r.measurements.push_back({name, value, tol, value >= tol});
    }
    void eq(const std::string& name, double value, double want) {
        r.measurements.push_back({name, value, want, value == want});
    }
    CheckResult done(const json& data = nullptr) {
        bool ok = !r.measurements.empty();
        for (const auto& m : r.measurements) ok = ok && m.pass;
        r.status = ok ? "pass" : "fail";
        if (!r.measurements.empty()) {
            r.value = r.measurements.front().value;
            r.tolerance = r.measurements.front().tolerance;
        }
        if (!data.is_null()) r.data = data.dump();
        return r;
    }
};

[[noreturn]] void not_applicable(const Context& c, const std::string& check) {
    throw UsageError("check '" + check + "' does not apply to system '" + c.id() + "'");
}

bool is_cylinder(const std::string& id) {
    return id == "cylinder" || id == "translated-cylinder" || id == "cylinder-eigenbasis";
}

std::optional<std::vector<cplx>> reference_multipliers(const Context& c) {
    const auto& id = c.id();
    if (is_cylinder(id)) return std::vector<cplx>{1.0, std::exp(-4 * kPi), 1.0};
    if (id == "mobius") return std::vector<cplx>{1.0, -1.0, -std::exp(2 * kPi * c.param("sigma"))};
    if (id == "driven2d") return std::vector<cplx>{1.0, std::exp(-2 * kPi)};
    if (id == "driven3d") return std::vector<cplx>{1.0, std::exp(2 * kPi), 1.0};
    return std::nullopt;
}

// Greedy nearest matching, error relative to max(1, |reference|).
double multiset_error(const std::vector<cplx>& got, const std::vector<cplx>& want) {
    if (got.size() != want.size()) return std::numeric_limits<double>::infinity();
    std::vector<bool> used(got.size(), false);
    double worst = 0;
    for (const auto& w : want) {
        std::size_t best = 0;
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < got.size(); ++i)
            if (!used[i] && std::abs(got[i] - w) < d) {
                d = std::abs(got[i] - w);
                best = i;
            }
        used[best] = true;
        worst = std::max(worst, d / std::max(1.0, std::abs(w)));
    }
    return worst;
}

json spectrum_json(const FloquetSpectrum& spec) {
    json arr = json::array();
    for (const auto& m : spec.multipliers)
        arr.push_back({{"re", m.value.real()},
                       {"im", m.value.imag()},
                       {"modulus", std::abs(m.value)},
                       {"multiplicity", m.multiplicity},
                       {"band", to_string(m.band)}});
    return {{"multipliers", arr}, {"center_dim", spec.center_dim()}, {"has_trivial", spec.has_trivial}};
}

CheckResult check_multipliers(const Context& c) {
    Builder b;
    const auto& spec = c.analysis().spectrum;
    if (auto ref = reference_multipliers(c))
        b.le("eigenvalue-error", multiset_error(spec.expanded(), *ref), 1e-7);
    else
        b.eq("dimension", static_cast<double>(spec.expanded().size()), c.system().field.dim);
    return b.done(spectrum_json(spec));
}

Mat mobius_V(double sigma, double t) {
    double co = std::cos(t), si = std::sin(t), ch = std::cos(t / 2), sh = std::sin(t / 2);
    double e = std::exp(sigma * t);
    Mat V(3, 3);
    V << co * ch, -si, -e * sh * co,
         si * ch, co, -e * sh * si,
         sh, 0, e * ch;
    return V;
}

Mat cylinder_V(double t) {
    double co = std::cos(t), si = std::sin(t), e = std::exp(-2 * t);
    Mat V(3, 3);
    V << e * co, -si, 0,
         e * si, co, 0,
         0, 0, 1;
    return V;
}

CheckResult check_fundamental(const Context& c) {
    std::function<Mat(double)> V;
    if (c.id() == "mobius") {
        double sigma = c.param("sigma");
        V = [sigma](double t) { return mobius_V(sigma, t); };
    } else if (c.id() == "cylinder" || c.id() == "translated-cylinder") {
        V = cylinder_V;
    } else {
        not_applicable(c, "fundamental-matrix");
    }
    const auto& U = *c.analysis().U;
    const Mat V0inv = V(0).inverse();
    double worst = 0;
    for (int k = 1; k <= 16; ++k) {
        double t = 2 * kPi * k / 16;
        worst = std::max(worst, (U(t) - V(t) * V0inv).cwiseAbs().maxCoeff());
    }
    Builder b;
    b.le("max-entry-error", worst, 1e-6);
    return b.done();
}

CheckResult check_center_dimension(const Context& c) {
    const auto& spec = c.analysis().spectrum;
    Builder b;
    const auto& id = c.id();
    std::optional<int> want;
    if (is_cylinder(id) || id == "driven3d") want = 2;
    if (id == "driven2d") want = 1;
    if (id == "mobius") want = c.param("sigma") == 0 ? 3 : 2;
    if (want)
        b.eq("center-dim", spec.center_dim(), *want);
    else
        b.ge("center-dim", spec.center_dim(), 0);
    if (id == "mobius") {
        int mult = 0;
        for (const auto& m : spec.multipliers)
            if (std::abs(m.value + 1.0) <= 1e-6) mult = m.multiplicity;
        b.eq("minus-one-multiplicity", mult, c.param("sigma") == 0 ? 2 : 1);
    }
    return b.done(spectrum_json(spec));
}

CheckResult check_projectors(const Context& c) {
    const auto& fa = c.analysis();
    const auto& P = fa.projectors;
    const auto& U = *fa.U;
    const int n = P.dim();
    const double T = P.period(), s = P.base();
    const Mat I = Mat::Identity(n, n);
    double idem = 0, annih = 0, part = 0, per = 0, fd = 0, comm = 0;
    const double h = 1e-3;
    for (double t : period_grid(s, T, 20)) {
        auto pi = P.all_at(t);
        auto pT = P.all_at(t + T);
        auto pp = P.all_at(t + h), pm = P.all_at(t - h);
        const Mat A = fa.system.A(t);
        Mat sum = Mat::Zero(n, n);
        for (int i = 0; i < 3; ++i) {
            idem = std::max(idem, (pi[i] * pi[i] - pi[i]).norm());
            for (int j = 0; j < 3; ++j)
                if (i != j) annih = std::max(annih, (pi[i] * pi[j]).norm());
            per = std::max(per, (pT[i] - pi[i]).norm());
            Mat dp = (pp[i] - pm[i]) / (2 * h);
            fd = std::max(fd, (dp - A * pi[i] + pi[i] * A).norm());
            sum += pi[i];
        }
        part = std::max(part, (sum - I).norm());
    }
    std::mt19937_64 rng(c.seed());
    std::uniform_real_distribution<double> over(s, s + T);
    for (int k = 0; k < 20; ++k) {
        double t = over(rng), r = over(rng);
        Mat Utr = U.between(t, r);
        auto pr = P.all_at(r), pt = P.all_at(t);
        for (int i = 0; i < 3; ++i)
            comm = std::max(comm, (Utr * pr[i] - pt[i] * Utr).norm() / std::max(1.0, Utr.norm()));
    }
    Builder b;
    b.le("idempotence", idem, 1e-6);
    b.le("annihilation", annih, 1e-6);
    b.le("partition", part, 1e-6);
    b.le("periodicity", per, 1e-6);
    b.le("commutation", comm, 1e-6);
    b.le("ode-residual", fd, 1e-5);
    return b.done(json{{"N", P.bound()}});
}

json rate_json(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

CheckResult check_trichotomy(const Context& c) {
    const auto& fa = c.analysis();
    const auto& r = fa.rates;
    const auto& P = fa.projectors;
    const double s = P.base();
    // Independent pass over the fit grid with the reported constants.
    double ratio = 0;
    for (double t : r.grid) {
        double dt = t - s;
        if (P.rank(Band::Stable) && dt >= 0)
            ratio = std::max(ratio, spectral_norm(P.restricted(Band::Stable, t)) / (r.C * std::exp(r.a * dt)));
        if (P.rank(Band::Unstable) && dt <= 0)
            ratio = std::max(ratio, spectral_norm(P.restricted(Band::Unstable, t)) / (r.C * std::exp(r.b * dt)));
        if (P.rank(Band::Center))
            ratio = std::max(ratio, spectral_norm(P.restricted(Band::Center, t)) / (r.C * std::exp(r.eps * std::abs(dt))));
    }
    Builder b;
    b.le("bound-ratio", ratio, 1 + 1e-9);
    b.eq("bounds-hold", r.bounds_hold ? 1 : 0, 1);
    const auto& id = c.id();
    if (is_cylinder(id)) b.le("a-error", std::abs(r.a + 2), 0.05);
    if (id == "driven2d") b.le("a-error", std::abs(r.a + 1), 0.05);
    if (id == "driven3d") b.le("b-error", std::abs(r.b - 1), 0.05);
    if (id == "mobius") {
        double sigma = c.param("sigma");
        if (sigma < 0) b.le("a-error", std::abs(r.a - sigma), 0.05);
        if (sigma > 0) b.le("b-error", std::abs(r.b - sigma), 0.05);
    }
    return b.done(json{{"a", rate_json(r.a)}, {"b", rate_json(r.b)}, {"eps", r.eps}, {"C", r.C}});
}

CheckResult check_drift(const Context& c) {
    Builder b;
    if (c.id() == "cylinder") {
        Vec x0(3);
        x0 << 1, 0, 0.3;
        auto traj = integrate_trajectory(c.system().field, 0, x0, 10, c.cfg(), 1001);
        b.le("cylinder-drift", drift(cylinder_invariant(), traj), 1e-7);
    } else if (c.id() == "mobius" && c.param("sigma") == 0) {
        for (double l : {1.0, 0.25}) {
            auto traj = integrate_trajectory(c.system().field, 0, torus_root(l), 20, c.cfg(), 2001);
            b.le("torus-drift-l" + json(l).dump(), drift(torus_invariant(l), traj), 1e-6);
        }
    } else {
        not_applicable(c, "drift");
    }
    return b.done();
}

CheckResult check_ruled_surface(const Context& c) {
    const auto& fa = c.analysis();
    const auto& cycle = *c.system().cycle;
    Builder b;
    if (c.id() == "cylinder") {
        Vec e3 = Vec::Unit(3, 2);
        auto basis = bundle_from_vectors(*fa.U, e3, 0, period_grid(0, 2 * kPi, 24));
        auto grid = ruled_surface(cycle, basis, 0, 2 * kPi, 65, -1, 1, 11);
        double worst = 0;
        for (const auto& p : grid.points) worst = std::max(worst, std::abs(p.x(0) * p.x(0) + p.x(1) * p.x(1) - 1));
        b.le("circle-error", worst, 1e-10);
    } else if (c.id() == "mobius" && c.param("sigma") != 0) {
        auto basis = bundle_basis(*fa.U, fa.spectrum, {-1.0}, 0, period_grid(0, 4 * kPi, 48));
        double seam = seam_error(cycle, basis, 0, 0.5);
        for (double t : {0.4, 1.7, 3.3, 5.9}) seam = std::max(seam, seam_error(cycle, basis, t, 0.5));
        b.le("seam-error", seam, 1e-7);
        auto grid = ruled_surface(cycle, basis, 0, 2 * kPi, 33, 0, 0, 1);
        double on_cycle = 0;
        for (const auto& p : grid.points) on_cycle = std::max(on_cycle, (p.x - cycle.gamma(p.t)).norm());
        b.le("zero-ruling", on_cycle, 0);
    } else {
        not_applicable(c, "ruled-surface");
    }
    return b.done();
}

CheckResult check_torus(const Context& c) {
    if (!(c.id() == "mobius" && c.param("sigma") == 0)) not_applicable(c, "torus");
    Builder b;
    Vec one = Vec::Unit(3, 0);
    b.le("level0-point", (torus_root(0) - one).norm(), 0);
    for (double l : {1.0, 0.25, 3.0}) {
        auto q = torus_invariant(l);
        b.le("residual-l" + json(l).dump(), std::abs(q.V(torus_root(l))), 1e-12);
    }
    return b.done(json{{"u_l1", torus_root(1)(0)}});
}

json periodic_json(const PeriodicScalar& p) {
    json h = json::array();
    for (const auto& hk : p.harmonics) h.push_back({{"k", hk.k}, {"sin", hk.sin}, {"cos", hk.cos}});
    return {{"mean", p.mean}, {"harmonics", h}};
}

CheckResult check_expansion(const Context& c) {
    Builder b;
    json data;
    if (c.id() == "driven2d") {
        auto s = expand_driven2d(20);
        auto a2 = s.at(2).harmonic(1);
        b.le("a2-exact", std::max({std::abs(a2.sin - 0.5), std::abs(a2.cos + 0.5), std::abs(s.at(2).mean)}), 0);
        double worst = 0;
        for (int n = 2; n <= 20; ++n) {
            // ((n-1)!/2^{(n-1)/2}) sin(t - (n-1) pi/4)
            double logA = std::lgamma(n) - 0.5 * (n - 1) * std::log(2.0);
            double ph = (n - 1) * kPi / 4;
            auto h = s.at(n).harmonic(1);
            double amp = std::hypot(h.sin, h.cos);
            double rel = std::hypot(h.sin / amp - std::cos(ph), h.cos / amp + std::sin(ph));
            worst = std::max({worst, std::abs(std::log(amp) - logA), rel});
        }
        b.le("closed-form-log-error", worst, 1e-9);
        data["a2"] = periodic_json(s.at(2));
    } else if (c.id() == "driven3d") {
        std::mt19937_64 rng(c.seed());
        std::uniform_real_distribution<double> U(-2, 2);
        double worst = 0;
        for (int i = 0; i < 10; ++i) {
            double z = U(rng), cc = 2 * z - 1;
            if (std::abs(cc) < 1e-3) {
                --i;
                continue;
            }
            double d = cc * cc + 1;
            auto s = expand_driven3d(2, z);
            for (double t : {0.0, 1.0, 2.5, 4.0}) {
                double ref = 1 / cc + cc / d * std::sin(t) - 1 / d * std::cos(t);
                worst = std::max(worst, std::abs(s.at(2)(t) - ref) / std::max(1.0, std::abs(ref)));
            }
        }
        b.le("a2-error", worst, 1e-12);
        auto res = driven3d_resonances(8);
        std::vector<double> want{1.0 / 8, 1.0 / 6, 1.0 / 4, 1.0 / 2};
        double rerr = res.size() == want.size() ? 0.0 : std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < std::min(res.size(), want.size()); ++i)
            rerr = std::max(rerr, std::abs(res[i] - want[i]));
        b.le("resonance-set-error", rerr, 1e-12);
        double odd = 0;
        for (double z : {-0.37, 0.3, 1.7}) {
            auto s = expand_driven3d(8, z);
            for (int n = 3; n <= 8; n += 2) odd = std::max(odd, s.term(n).value.amplitude());
        }
        b.le("odd-amplitude", odd, 0);
        data["resonances"] = res;
    } else {
        not_applicable(c, "expansion");
    }
    return b.done(data);
}

CheckResult check_radius(const Context& c) {
    if (c.id() != "driven2d") not_applicable(c, "radius");
    auto s = expand_driven2d(20);
    Builder b;
    json data;
    for (auto [name, t] : {std::pair{"slope-t0", 0.0}, std::pair{"slope-t-half-pi", kPi / 2}}) {
        auto v = radius_diagnostic(s, t);
        b.ge(name, v.slope, 0.5);
        data[name] = v.verdict();
    }
    return b.done(data);
}

CheckResult check_residual_order(const Context& c) {
    Builder b;
    json data;
    if (c.id() == "driven2d") {
        for (int N : {2, 4, 6}) {
            auto fit = invariance_residual(expand_driven2d(N));
            b.ge("slope-N" + std::to_string(N), fit.slope, N + 0.8);
            data["slope-N" + std::to_string(N)] = fit.slope;
        }
    } else if (c.id() == "driven3d") {
        auto fit = invariance_residual(expand_driven3d(4, -0.3));
        b.ge("slope-N4", fit.slope, 4.8);
    } else if (is_cylinder(c.id())) {
        double worst = 0;
        for (int i = 0; i <= 20; ++i)
            for (double z3 : {-1.0, 0.0, 0.5, 2.0}) {
                double z1 = -0.9 + 1.8 * i / 20;
                worst = std::max(worst, std::abs(cylinder_graph_residual(z1, z3)));
            }
        b.le("exact-graph-residual", worst, 1e-12);
    } else {
        not_applicable(c, "residual-order");
    }
    return b.done(data);
}

CheckResult check_family(const Context& c) {
    if (c.id() != "driven2d") not_applicable(c, "family");
    double r11 = 0, r23 = 0, diff = 0;
    for (int i = 0; i <= 8; ++i)
        for (int j = 0; j <= 5; ++j) {
            double t = 2 * kPi * i / 8, x = 0.05 + 0.05 * j;
            r11 = std::max(r11, std::abs(family_residual(t, x, 1, 1, PhiId::Zero)));
            r23 = std::max(r23, std::abs(family_residual(t, x, 2, 3, PhiId::Zero)));
            diff = std::max(diff, std::abs(nonunique_family(t, x, 1, 1, PhiId::Zero) -
                                           nonunique_family(t, x, 2, 3, PhiId::Zero)));
        }
    Builder b;
    b.le("residual-1-1", r11, 1e-5);
    b.le("residual-2-3", r23, 1e-5);
    b.ge("branch-difference", diff, 1e-6);
    return b.done();
}

CheckResult check_smooth_branch(const Context& c) {
    if (c.id() != "driven2d") not_applicable(c, "smooth-branch");
    double neg = 0, pos = 0, taylor = 0;
    auto s = expand_driven2d(3);
    for (double t : {0.0, 1.5, 3.0, 5.0}) {
        for (double x : {-0.3, -0.1, -0.05}) neg = std::max(neg, std::abs(family_residual(t, x, 0, 0, PhiId::Zero)));
        for (double x : {0.05, 0.15, 0.3}) pos = std::max(pos, std::abs(family_residual(t, x, 1, 1, PhiId::Zero)));
    }
    for (double t : {0.5, 2.0})
        for (double x : {-0.02, 0.02}) {
            double a = x < 0 ? 0 : 1;
            double q = nonunique_family(t, x, a, a, PhiId::Zero) / (x * x);
            double want = s.at(2)(t) + s.at(3)(t) * x;
            taylor = std::max(taylor, std::abs(q / want - 1));
        }
    Builder b;
    b.le("residual-negative", neg, 1e-5);
    b.le("residual-positive", pos, 1e-5);
    b.le("taylor-relative", taylor, 1e-2);
    return b.done();
}

CheckResult check_pseudo_inverse(const Context& c) {
    Builder b;
    double scalar = 0, scalar_res = 0;
    for (auto [a, want] : {std::pair{-1.0, 1.0}, std::pair{1.0, -1.0}}) {
        Mat A(1, 1);
        A(0, 0) = a;
        auto ts = constant_linear(A, 1.0);
        LpProblem p(ts, std::make_shared<const FloquetAnalysis>(analyze(ts, c.cfg())), 0.0);
        GridFunction f(p.context(), 1);
        for (auto& v : f.values) v = Vec::Ones(1);
        auto u = p.K(f);
        const auto& ctx = p.context();
        for (int i = 0; i < u.size(); ++i)
            if (std::abs(u.time(i) - ctx.s) <= ctx.W / 2) scalar = std::max(scalar, std::abs(u.values[i](0) - want));
        scalar_res = std::max(scalar_res, p.inhomogeneous_residual(u, f));
    }
    b.le("scalar-oracles", scalar, 1e-5);
    b.le("scalar-residual", scalar_res, 1e-5);

    LpOptions opt;
    opt.delta = 0.01;
    opt.seed = c.seed();
    const double s = 0.7;
    auto p = LpProblem::from_system(c.system(), s, opt, c.cfg());
    GridFunction f(p.context(), p.dim());
    // Unit-bounded forcing so the window chosen for unit forcings applies.
    const double scale = 1 / std::sqrt(static_cast<double>(p.dim()));
    for (int i = 0; i < f.size(); ++i) {
        double t = f.time(i);
        for (int k = 0; k < p.dim(); ++k) f.values[i](k) = scale * std::sin((k + 1) * t + k);
    }
    auto u = p.K(f);
    b.le("center-at-base", (p.pi0_at_base() * u(s)).norm(), 1e-7);
    b.le("inhomogeneous-residual", p.inhomogeneous_residual(u, f), 1e-5);
    return b.done();
}

CheckResult check_fixed_point(const Context& c) {
    if (c.id() != "driven2d") not_applicable(c, "lp-fixed-point");
    LpOptions opt;
    opt.delta = 0.01;
    opt.seed = c.seed();
    const double s = 0, x0 = 1e-2;
    auto p = LpProblem::from_system(c.system(), s, opt, c.cfg());
    Vec y0 = Vec::Zero(2);
    y0(0) = x0;
    auto r = p.fixed_point(y0);
    double a2 = 0.5 * std::sin(s) - 0.5 * std::cos(s);
    Builder b;
    b.le("graph-relative", std::abs(r.H(1) / (a2 * x0 * x0) - 1), 0.1);
    b.le("rate", r.rate, 0.3);
    b.le("tangency", tangency_error(p), 1e-4);
    Vec y1 = 0.5 * y0;
    b.le("periodicity", periodicity_error(c.system(), p, y1, c.cfg()), 1e-4);
    b.le("invariance", invariance_error(p, y1), 1e-4);
    b.le("inhomogeneous-residual", p.inhomogeneous_residual(r.u, p.substitute(r.u)), 1e-5);
    json H = json::array();
    for (int i = 0; i < r.H.size(); ++i) H.push_back(r.H(i));
    return b.done(json{{"H", H}, {"iterations", r.iterations}, {"rate", r.rate}, {"warnings", r.warnings}});
}

using CheckFn = CheckResult (*)(const Context&);

const std::vector<std::pair<std::string, CheckFn>>& registry() {
    static const std::vector<std::pair<std::string, CheckFn>> r{
        {"multipliers", check_multipliers},
        {"fundamental-matrix", check_fundamental},
        {"center-dimension", check_center_dimension},
        {"projectors", check_projectors},
        {"trichotomy", check_trichotomy},
        {"drift", check_drift},
        {"ruled-surface", check_ruled_surface},
        {"torus", check_torus},
        {"expansion", check_expansion},
        {"radius", check_radius},
        {"residual-order", check_residual_order},
        {"family", check_family},
        {"smooth-branch", check_smooth_branch},
        {"lp-pseudo-inverse", check_pseudo_inverse},
        {"lp-fixed-point", check_fixed_point},
    };
    return r;
}

CheckResult run_one(const Context& c, const std::string& id) {
    CheckResult r;
    r.id = id;
    try {
        CheckFn fn = nullptr;
        for (const auto& [name, f] : registry())
            if (name == id) fn = f;
        if (!fn) throw UsageError("unknown check '" + id + "'");
        r = fn(c);
        r.id = id;
    } catch (const std::exception& e) {
        r.status = "error";
        r.message = e.what();
        r.measurements.clear();
    }
    return r;
}

unsigned worker_count(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("FLOQUET_CM_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) throw UsageError("FLOQUET_CM_THREADS must be a positive integer");
        n = static_cast<unsigned>(v);
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

}  // namespace

const std::vector<std::string>& known_analyses() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> v;
        for (const auto& [name, fn] : registry()) v.push_back(name);
        return v;
    }();
    return ids;
}

VerificationReport run_suite(const ProblemSpec& spec, const std::vector<std::string>& checks,
                             std::uint64_t seed) {
    VerificationReport rep;
    rep.system = spec.system;
    rep.params = spec.params;
    std::vector<std::string> ids;
    std::set<std::string> seen;
    for (const auto& id : checks)
        if (seen.insert(id).second) ids.push_back(id);
    if (ids.empty()) return rep;

    const Context ctx(spec, seed);
    rep.checks.resize(ids.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < ids.size();) rep.checks[i] = run_one(ctx, ids[i]);
    };
    unsigned n = worker_count(ids.size());
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < n; ++k) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return rep;
}

namespace {

struct Bundle {
    std::string system;
    Params params;
    std::vector<std::string> checks;
};

const std::map<std::string, std::vector<Bundle>>& bundles() {
    static const std::map<std::string, std::vector<Bundle>> b{
        {"example-5.1",
         {{"cylinder",
           {},
           {"multipliers", "fundamental-matrix", "center-dimension", "projectors", "trichotomy", "drift",
            "ruled-surface", "residual-order", "lp-pseudo-inverse"}}}},
        {"example-5.2",
         {{"mobius",
           {{"sigma", -1.0}},
           {"multipliers", "fundamental-matrix", "center-dimension", "projectors", "trichotomy", "ruled-surface"}},
          {"mobius", {{"sigma", 0.0}}, {"multipliers", "center-dimension", "drift", "torus"}}}},
        {"example-5.3",
         {{"driven2d",
           {},
           {"multipliers", "expansion", "radius", "residual-order", "lp-pseudo-inverse", "lp-fixed-point"}}}},
        {"example-5.4", {{"driven2d", {}, {"family"}}}},
        {"example-5.5", {{"driven2d", {}, {"smooth-branch"}}}},
        {"example-5.6", {{"driven3d", {}, {"multipliers", "center-dimension", "expansion", "residual-order"}}}},
    };
    return b;
}

}  // namespace

const std::vector<std::string>& example_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : bundles()) v.push_back(k);
        return v;
    }();
    return ids;
}

std::vector<VerificationReport> reproduce(const std::string& example_id, std::uint64_t seed) {
    auto it = bundles().find(example_id);
    if (it == bundles().end()) throw UsageError("unknown example id '" + example_id + "'");
    std::vector<VerificationReport> out;
    for (const auto& b : it->second) {
        ProblemSpec spec;
        spec.system = b.system;
        spec.params = b.params;
        spec.analyses = b.checks;
        out.push_back(run_suite(spec, b.checks, seed));
    }
    return out;
}

std::string report_json(const std::vector<VerificationReport>& reports, const std::string& label) {
    json arr = json::array();
    bool all = true;
    for (const auto& rep : reports) {
        json checks = json::array();
        for (const auto& c : rep.checks) {
            json ms = json::array();
            for (const auto& m : c.measurements)
                ms.push_back({{"name", m.name}, {"value", m.value}, {"tolerance", m.tolerance}, {"pass", m.pass}});
            json entry{{"id", c.id},           {"status", c.status}, {"value", c.value},
                       {"tolerance", c.tolerance}, {"measurements", ms}};
            if (!c.message.empty()) entry["message"] = c.message;
            if (!c.data.empty()) entry["data"] = json::parse(c.data);
            checks.push_back(entry);
        }
        json params = json::object();
        for (const auto& [k, v] : rep.params) params[k] = v;
        arr.push_back({{"system", rep.system}, {"params", params}, {"checks", checks}, {"pass", rep.pass()}});
        all = all && rep.pass();
    }
    json out{{"reports", arr}, {"pass", all}};
    if (!label.empty()) out["label"] = label;
    return out.dump(2) + "\n";
}

}  // namespace fcm
