#include <floquetcm/cli.hpp>
#include <floquetcm/cm_expand.hpp>
#include <floquetcm/family.hpp>
#include <floquetcm/lyapunov_perron.hpp>
#include <floquetcm/verify.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <unistd.h>

namespace fcm {

namespace {

using json = nlohmann::json;
constexpr double kPi = std::numbers::pi;

// Temp file in the target directory, then rename.
void write_atomic(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw UsageError("cannot write " + tmp.string());
        f << text;
        f.flush();
        if (!f) {
            f.close();
            std::remove(tmp.c_str());
            throw UsageError("cannot write " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        std::remove(tmp.c_str());
        throw UsageError("cannot write " + path + ": " + ec.message());
    }
}

json number(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

json matrix_json(const Mat& M) {
    json rows = json::array();
    for (int i = 0; i < M.rows(); ++i) {
        json r = json::array();
        for (int j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        rows.push_back(r);
    }
    return rows;
}

json vector_json(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json periodic_json(const PeriodicScalar& p) {
    json h = json::array();
    for (const auto& hk : p.harmonics) h.push_back({{"k", hk.k}, {"sin", hk.sin}, {"cos", hk.cos}});
    return {{"mean", p.mean}, {"harmonics", h}, {"period", p.period}};
}

Vec to_vec(const std::vector<double>& v) {
    Vec x(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<int>(i)) = v[i];
    return x;
}

struct SystemOpts {
    std::string system;
    std::string problem;
    std::vector<std::string> params;
    std::optional<double> sigma;
    std::string fallback;  // used when neither --system nor --problem is given

    void attach(CLI::App* sc, bool required = true) {
        auto* o = sc->add_option("--system", system, "builtin system id (see list-systems)");
        auto* p = sc->add_option("--problem", problem, "problem file (JSON)")->check(CLI::ExistingFile);
        if (required) {
            o->excludes(p);
            p->excludes(o);
        }
        sc->add_option("--param", params, "parameter as name=value, repeatable");
        sc->add_option("--sigma", sigma, "shorthand for --param sigma=<value>");
    }

    ProblemSpec spec() const {
        ProblemSpec s;
        if (!problem.empty()) {
            s = load_problem(problem);
        } else {
            if (system.empty() && fallback.empty()) throw UsageError("one of --system or --problem is required");
            s.system = system.empty() ? fallback : system;
        }
        for (const auto& kv : params) {
            auto eq = kv.find('=');
            if (eq == std::string::npos || eq == 0) throw UsageError("--param expects name=value, got '" + kv + "'");
            std::string v = kv.substr(eq + 1);
            std::size_t used = 0;
            double d = 0;
            try {
                d = std::stod(v, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != v.size()) throw UsageError("--param " + kv + ": value is not a number");
            s.params[kv.substr(0, eq)] = d;
        }
        if (sigma) s.params["sigma"] = *sigma;
        return s;
    }
};

struct OutputOpts {
    std::string path;
    std::string format = "json";

    void attach(CLI::App* sc, bool csv) {
        sc->add_option("-o,--output", path, "output file, written atomically (default stdout)");
        if (csv) sc->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    }
    void emit(std::ostream& out, const std::string& text) const {
        if (path.empty())
            out << text;
        else
            write_atomic(path, text);
    }
    void emit(std::ostream& out, const json& j) const { emit(out, j.dump(2) + "\n"); }
};

std::string csv_num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void report_warnings(std::ostream& err, const std::vector<std::string>& w) {
    for (const auto& s : w) err << "warning: " << s << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Floquet multipliers, center bundles and center manifolds of periodic orbits", "floquet-cm"};
    app.require_subcommand(1, 1);
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "seed for randomized sampling")->capture_default_str();

    auto* list = app.add_subcommand("list-systems", "list builtin systems");
    OutputOpts list_out;
    list_out.attach(list, false);

    // floquet
    auto* floq = app.add_subcommand("floquet", "monodromy, multipliers and trichotomy rates");
    SystemOpts floq_sys;
    floq_sys.attach(floq);
    double floq_s = 0, rho_tol = kDefaultRhoTol;
    floq->add_option("--s", floq_s, "base time")->capture_default_str();
    floq->add_option("--rho-tol", rho_tol, "unit-circle tolerance")->capture_default_str();
    OutputOpts floq_out;
    floq_out.attach(floq, false);

    // projectors
    auto* proj = app.add_subcommand("projectors", "spectral projectors on a period grid");
    SystemOpts proj_sys;
    proj_sys.attach(proj);
    int proj_count = 20;
    double proj_s = 0;
    proj->add_option("--count", proj_count, "grid points over one period")->check(CLI::PositiveNumber)->capture_default_str();
    proj->add_option("--s", proj_s, "base time")->capture_default_str();
    OutputOpts proj_out;
    proj_out.attach(proj, true);

    // expand
    auto* exp = app.add_subcommand("expand", "harmonic coefficients of the center-manifold graph");
    std::string exp_system;
    int exp_order = 10;
    std::optional<double> exp_z;
    std::vector<double> exp_radius;
    exp->add_option("--system", exp_system, "driven2d or driven3d")->required()->check(CLI::IsMember({"driven2d", "driven3d"}));
    exp->add_option("--order", exp_order, "highest degree")->capture_default_str();
    exp->add_option("--z", exp_z, "parameter z (driven3d)");
    exp->add_option("--radius-t", exp_radius, "times for the radius diagnostic")->delimiter(',');
    OutputOpts exp_out;
    exp_out.attach(exp, true);

    // family
    auto* fam = app.add_subcommand("family", "non-unique graph family of driven2d");
    double alpha = 1, beta = 1;
    std::string phi = "zero";
    std::vector<double> fam_t, fam_x;
    bool fam_res = false;
    fam->add_option("--alpha", alpha)->capture_default_str();
    fam->add_option("--beta", beta)->capture_default_str();
    fam->add_option("--phi", phi, "zero, sin or cos")->capture_default_str();
    fam->add_option("--t", fam_t, "times (default 9 points on [0, 2 pi])")->delimiter(',');
    fam->add_option("--x", fam_x, "abscissae (default 0.05, 0.10, ..., 0.30)")->delimiter(',');
    fam->add_flag("--residual", fam_res, "also report the invariance residual");
    OutputOpts fam_out;
    fam_out.attach(fam, true);

    // residual
    auto* res = app.add_subcommand("residual", "invariance residual of a truncated graph");
    std::string res_system;
    int res_order = 4;
    std::optional<double> res_z;
    res->add_option("--system", res_system, "driven2d, driven3d or cylinder")
        ->required()
        ->check(CLI::IsMember({"driven2d", "driven3d", "cylinder"}));
    res->add_option("--order", res_order)->capture_default_str();
    res->add_option("--z", res_z, "parameter z (driven3d)");
    OutputOpts res_out;
    res_out.attach(res, false);

    // lp-fixed-point
    auto* lp = app.add_subcommand("lp-fixed-point", "Lyapunov-Perron fixed point C(s, y0)");
    SystemOpts lp_sys;
    lp_sys.attach(lp, false);
    lp_sys.fallback = "driven2d";
    double lp_s = 0;
    std::vector<double> lp_y0;
    std::optional<double> lp_delta, lp_eta, lp_window;
    double fp_tol = 1e-10;
    int max_iter = 200;
    lp->add_option("--s", lp_s, "base time")->capture_default_str();
    lp->add_option("--y0", lp_y0, "point of E_0(s), comma separated")->required()->delimiter(',');
    lp->add_option("--delta", lp_delta, "cutoff radius (default: ladder)");
    lp->add_option("--eta", lp_eta, "weight exponent");
    lp->add_option("--window", lp_window, "half width W of the time window");
    lp->add_option("--fp-tol", fp_tol)->capture_default_str();
    lp->add_option("--max-iter", max_iter)->capture_default_str();
    OutputOpts lp_out;
    lp_out.attach(lp, false);

    // reproduce
    auto* rep = app.add_subcommand("reproduce", "run the check bundle of a worked example");
    std::string rep_id;
    rep->add_option("example", rep_id, "example-5.1 ... example-5.6 or all")->required();
    OutputOpts rep_out;
    rep_out.attach(rep, false);

    // verify
    auto* ver = app.add_subcommand("verify", "run named checks on a system");
    SystemOpts ver_sys;
    ver_sys.attach(ver);
    std::vector<std::string> ver_checks;
    ver->add_option("--check", ver_checks, "check id, repeatable; adds to the problem's analyses");
    OutputOpts ver_out;
    ver_out.attach(ver, false);

    // export
    auto* ex = app.add_subcommand("export", "CSV point data: trajectory, surface or torus");
    std::string ex_kind;
    ex->add_option("kind", ex_kind)->required()->check(CLI::IsMember({"trajectory", "surface", "torus"}));
    SystemOpts ex_sys;
    ex_sys.attach(ex, false);
    std::vector<double> ex_x0, ex_dir;
    std::optional<double> ex_mult;
    double t0 = 0, t1 = 2 * kPi, level = 1, vmin = -0.5, vmax = 0.5;
    int samples = 201, nv = 11;
    ex->add_option("--x0", ex_x0, "initial state (trajectory)")->delimiter(',');
    ex->add_option("--t0", t0)->capture_default_str();
    ex->add_option("--t1", t1)->capture_default_str();
    ex->add_option("--samples", samples, "samples in t")->capture_default_str();
    ex->add_option("--level", level, "torus level l (torus)")->capture_default_str();
    ex->add_option("--direction", ex_dir, "ruling direction at t = 0 (surface)")->delimiter(',');
    ex->add_option("--multiplier", ex_mult, "real multiplier whose bundle gives the ruling (surface)");
    ex->add_option("--v-min", vmin)->capture_default_str();
    ex->add_option("--v-max", vmax)->capture_default_str();
    ex->add_option("--nv", nv, "samples in v")->capture_default_str();
    OutputOpts ex_out;
    ex_out.attach(ex, false);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (list->parsed()) {
            json a = json::array();
            for (const auto& s : builtin_catalog())
                a.push_back({{"id", s.id}, {"dim", s.dim}, {"params", s.params}, {"summary", s.summary}});
            list_out.emit(out, a);
            return kExitOk;
        }

        if (floq->parsed()) {
            auto spec = floq_sys.spec();
            auto sys = build_system(spec);
            auto fa = analyze(sys, spec.integrator, rho_tol, floq_s);
            const auto& sp = fa.spectrum;
            json mult = json::array();
            for (const auto& m : sp.multipliers)
                mult.push_back({{"re", m.value.real()},
                                {"im", m.value.imag()},
                                {"modulus", std::abs(m.value)},
                                {"multiplicity", m.multiplicity},
                                {"band", to_string(m.band)}});
            std::vector<std::string> warnings = sp.warnings;
            warnings.insert(warnings.end(), fa.projectors.warnings().begin(), fa.projectors.warnings().end());
            json j{{"system", spec.system},
                   {"s", floq_s},
                   {"period", fa.system.period},
                   {"monodromy", matrix_json(fa.U->monodromy())},
                   {"multipliers", mult},
                   {"center_dim", sp.center_dim()},
                   {"n0", sp.center_dim() - 1},
                   {"stable_dim", sp.count(Band::Stable)},
                   {"unstable_dim", sp.count(Band::Unstable)},
                   {"has_trivial", sp.has_trivial},
                   {"nonhyperbolic", sp.nonhyperbolic()},
                   {"rates",
                    {{"a", number(fa.rates.a)},
                     {"b", number(fa.rates.b)},
                     {"eps", fa.rates.eps},
                     {"C", fa.rates.C},
                     {"bounds_hold", fa.rates.bounds_hold}}},
                   {"N", fa.projectors.bound()},
                   {"warnings", warnings}};
            report_warnings(err, warnings);
            floq_out.emit(out, j);
            return kExitOk;
        }

        if (proj->parsed()) {
            auto spec = proj_sys.spec();
            auto fa = analyze(build_system(spec), spec.integrator, kDefaultRhoTol, proj_s);
            const auto& P = fa.projectors;
            auto grid = period_grid(proj_s, P.period(), proj_count);
            if (proj_out.format == "csv") {
                std::ostringstream os;
                os << "t,band,i,j,value\n";
                for (double t : grid) {
                    auto pi = P.all_at(t);
                    for (int b = 0; b < 3; ++b)
                        for (int i = 0; i < P.dim(); ++i)
                            for (int k = 0; k < P.dim(); ++k)
                                os << csv_num(t) << ',' << to_string(static_cast<Band>(b)) << ',' << i << ',' << k
                                   << ',' << csv_num(pi[b](i, k)) << '\n';
                }
                proj_out.emit(out, os.str());
            } else {
                json bands = json::object();
                for (int b = 0; b < 3; ++b) {
                    json mats = json::array();
                    for (double t : grid) mats.push_back(matrix_json(P.at(static_cast<Band>(b), t)));
                    bands[to_string(static_cast<Band>(b))] = {{"rank", P.rank(static_cast<Band>(b))}, {"values", mats}};
                }
                proj_out.emit(out, json{{"system", spec.system}, {"times", grid}, {"N", P.bound()}, {"bands", bands}});
            }
            report_warnings(err, P.warnings());
            return kExitOk;
        }

        if (exp->parsed()) {
            CoefficientSeries s;
            if (exp_system == "driven2d") {
                if (exp_z) throw UsageError("--z applies to driven3d only");
                s = expand_driven2d(exp_order);
            } else {
                if (!exp_z) throw UsageError("driven3d needs --z");
                s = expand_driven3d(exp_order, *exp_z);
            }
            for (const auto& r : s.resonances)
                err << "warning: resonance at degree " << r.degree << " (divisor " << r.divisor << ")\n";
            if (exp_out.format == "csv") {
                std::ostringstream os;
                os << "degree,status,k,sin,cos\n";
                for (const auto& c : s.terms) {
                    os << c.degree << ',' << to_string(c.status) << ",0,0," << csv_num(c.value.mean) << '\n';
                    for (const auto& h : c.value.harmonics)
                        os << c.degree << ',' << to_string(c.status) << ',' << h.k << ',' << csv_num(h.sin) << ','
                           << csv_num(h.cos) << '\n';
                }
                exp_out.emit(out, os.str());
                return kExitOk;
            }
            json terms = json::array();
            for (const auto& c : s.terms) {
                json t = periodic_json(c.value);
                t["degree"] = c.degree;
                t["status"] = to_string(c.status);
                t["divisor"] = c.divisor;
                terms.push_back(t);
            }
            json resn = json::array();
            for (const auto& r : s.resonances)
                resn.push_back({{"degree", r.degree}, {"z", r.z ? json(*r.z) : json(nullptr)}, {"divisor", r.divisor}});
            json j{{"system", s.system}, {"order", s.order}, {"terms", terms}, {"resonances", resn}};
            j["z"] = s.z ? json(*s.z) : json(nullptr);
            if (!exp_radius.empty()) {
                json rad = json::array();
                for (double t : exp_radius) {
                    auto v = radius_diagnostic(s, t);
                    rad.push_back({{"t", t}, {"verdict", v.verdict()}, {"slope", v.slope}, {"limit", v.limit}});
                }
                j["radius"] = rad;
            }
            exp_out.emit(out, j);
            return kExitOk;
        }

        if (fam->parsed()) {
            PhiId ph = phi_from_string(phi);
            if (fam_t.empty())
                for (int i = 0; i <= 8; ++i) fam_t.push_back(2 * kPi * i / 8);
            if (fam_x.empty())
                for (int i = 0; i <= 5; ++i) fam_x.push_back(0.05 + 0.05 * i);
            std::ostringstream os;
            json rows = json::array();
            os << "t,x,H" << (fam_res ? ",residual" : "") << '\n';
            for (double t : fam_t)
                for (double x : fam_x) {
                    double H = nonunique_family(t, x, alpha, beta, ph);
                    json r{{"t", t}, {"x", x}, {"H", H}};
                    os << csv_num(t) << ',' << csv_num(x) << ',' << csv_num(H);
                    if (fam_res) {
                        double rv = family_residual(t, x, alpha, beta, ph);
                        r["residual"] = rv;
                        os << ',' << csv_num(rv);
                    }
                    os << '\n';
                    rows.push_back(r);
                }
            if (fam_out.format == "csv")
                fam_out.emit(out, os.str());
            else
                fam_out.emit(out, json{{"alpha", alpha}, {"beta", beta}, {"phi", to_string(ph)}, {"points", rows}});
            return kExitOk;
        }

        if (res->parsed()) {
            if (res_system == "cylinder") {
                json pts = json::array();
                double worst = 0;
                for (int i = 0; i <= 20; ++i)
                    for (double z3 : {-1.0, 0.0, 1.0}) {
                        double z1 = -0.9 + 1.8 * i / 20, r = cylinder_graph_residual(z1, z3);
                        worst = std::max(worst, std::abs(r));
                        pts.push_back({{"z1", z1}, {"z3", z3}, {"residual", r}});
                    }
                res_out.emit(out, json{{"system", "cylinder"}, {"graph", "exact"}, {"max_residual", worst}, {"points", pts}});
                return kExitOk;
            }
            CoefficientSeries s;
            if (res_system == "driven2d")
                s = expand_driven2d(res_order);
            else if (!res_z)
                throw UsageError("driven3d needs --z");
            else
                s = expand_driven3d(res_order, *res_z);
            if (!s.complete())
                throw NumericalError("resonant expansion: degree " + std::to_string(s.resonances.front().degree) +
                                     " has no periodic solution");
            auto fit = invariance_residual(s);
            res_out.emit(out, json{{"system", s.system}, {"order", s.order}, {"x", fit.x}, {"residual", fit.residual}, {"slope", fit.slope}});
            return kExitOk;
        }

        if (lp->parsed()) {
            auto spec = lp_sys.spec();
            auto sys = build_system(spec);
            LpOptions opt;
            opt.delta = lp_delta;
            opt.eta = lp_eta;
            opt.window = lp_window;
            opt.fp_tol = fp_tol;
            opt.max_iter = max_iter;
            opt.seed = seed;
            auto p = LpProblem::from_system(sys, lp_s, opt, spec.integrator);
            Vec y0 = to_vec(lp_y0);
            if (y0.size() != p.dim()) throw UsageError("--y0 needs " + std::to_string(p.dim()) + " components");
            auto r = p.fixed_point(y0);
            double inhom = p.inhomogeneous_residual(r.u, p.substitute(r.u));
            double pi0 = (p.pi0_at_base() * r.C - y0).norm();
            double inv = invariance_error(p, y0);
            std::vector<std::string> warnings = p.warnings();
            for (const auto& w : r.warnings)
                if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
            const auto& ctx = p.context();
            json j{{"system", spec.system},
                   {"s", lp_s},
                   {"y0", vector_json(y0)},
                   {"C", vector_json(r.C)},
                   {"H", vector_json(r.H)},
                   {"iterations", r.iterations},
                   {"rate", r.rate},
                   {"bound", r.bound},
                   {"increments", r.increments},
                   {"delta", p.cutoff().delta},
                   {"L", p.cutoff().L},
                   {"N", p.cutoff().N},
                   {"eta", ctx.eta},
                   {"window", ctx.W},
                   {"K_estimate", p.K_estimate()},
                   {"residuals", {{"inhomog", inhom}, {"pi0", pi0}, {"invariance", inv}}},
                   {"warnings", warnings}};
            report_warnings(err, warnings);
            lp_out.emit(out, j);
            return kExitOk;
        }

        if (rep->parsed()) {
            std::vector<std::string> ids;
            if (rep_id == "all")
                ids = example_ids();
            else
                ids.push_back(rep_id);
            json all = json::array();
            bool pass = true;
            for (const auto& id : ids) {
                auto reports = reproduce(id, seed);
                auto j = json::parse(report_json(reports, id));
                pass = pass && j["pass"].get<bool>();
                all.push_back(j);
            }
            json outj = ids.size() == 1 ? all[0] : json{{"examples", all}, {"pass", pass}};
            rep_out.emit(out, outj);
            return pass ? kExitOk : kExitCheckFailed;
        }

        if (ver->parsed()) {
            auto spec = ver_sys.spec();
            std::vector<std::string> checks = spec.analyses;
            checks.insert(checks.end(), ver_checks.begin(), ver_checks.end());
            auto report = run_suite(spec, checks, seed);
            ver_out.emit(out, report_json({report}));
            return report.pass() ? kExitOk : kExitCheckFailed;
        }

        if (ex->parsed()) {
            if (samples < 2) throw UsageError("--samples must be >= 2");
            if (ex_kind == "torus") {
                if (!ex_sys.system.empty() || !ex_sys.problem.empty())
                    throw UsageError("export torus always uses the mobius system with sigma = 0");
                auto sys = builtin("mobius", {{"sigma", 0.0}});
                auto traj = integrate_trajectory(sys.field, t0, torus_root(level), t1, {}, samples);
                std::ostringstream os;
                traj.write_csv(os);
                ex_out.emit(out, os.str());
                return kExitOk;
            }
            auto spec = ex_sys.spec();
            auto sys = build_system(spec);
            if (ex_kind == "trajectory") {
                if (ex_x0.empty()) throw UsageError("export trajectory needs --x0");
                Vec x0 = to_vec(ex_x0);
                if (x0.size() != sys.field.dim)
                    throw UsageError("--x0 needs " + std::to_string(sys.field.dim) + " components");
                auto traj = integrate_trajectory(sys.field, t0, x0, t1, spec.integrator, samples);
                std::ostringstream os;
                traj.write_csv(os);
                ex_out.emit(out, os.str());
                return kExitOk;
            }
            // surface
            if (!sys.cycle) throw UsageError("system has no cycle");
            if (nv < 1) throw UsageError("--nv must be >= 1");
            auto fa = analyze(sys, spec.integrator);
            const double T = fa.system.period;
            auto grid = period_grid(0, 2 * T, 48);
            BundleBasis basis;
            if (!ex_dir.empty() && ex_mult) throw UsageError("--direction and --multiplier are exclusive");
            if (!ex_dir.empty()) {
                Vec d = to_vec(ex_dir);
                if (d.size() != fa.system.dim) throw UsageError("--direction has the wrong dimension");
                basis = bundle_from_vectors(*fa.U, d, 0, grid);
            } else if (ex_mult) {
                basis = bundle_basis(*fa.U, fa.spectrum, {*ex_mult}, 0, grid);
            } else if (spec.system == "cylinder") {
                basis = bundle_from_vectors(*fa.U, Vec::Unit(3, 2), 0, grid);
            } else if (spec.system == "mobius") {
                basis = bundle_basis(*fa.U, fa.spectrum, {-1.0}, 0, grid);
            } else {
                throw UsageError("export surface needs --direction or --multiplier for this system");
            }
            auto g = ruled_surface(*sys.cycle, basis, t0, t1, samples, vmin, vmax, nv);
            std::ostringstream os;
            g.write_csv(os);
            ex_out.emit(out, os.str());
            return kExitOk;
        }
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace fcm
