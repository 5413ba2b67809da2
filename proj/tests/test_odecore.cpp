#include <doctest.h>

#include <floquetcm/odecore.hpp>
#include <floquetcm/problem.hpp>

#include "oracles.hpp"

#include <random>

using namespace fcm;

namespace {

Vec v3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

}  // namespace

TEST_CASE("builtin fields evaluate to known values") {
    auto cyl = builtin("cylinder");
    CHECK((cyl.field(0.0, v3(1, 0, 0)) - v3(0, 1, 0)).norm() == doctest::Approx(0.0));

    auto mob = builtin("mobius", {{"sigma", 0.0}});
    CHECK(mob.field(0.0, v3(1, 0, 0))(2) == 0.0);

    auto d2 = builtin("driven2d");
    Vec x(2);
    x << 1, 0;
    Vec f = d2.field(oracle::pi / 2, x);
    CHECK(f(0) == doctest::Approx(-1.0));
    CHECK(f(1) == doctest::Approx(1.0));
}

TEST_CASE("builtin parameter errors") {
    CHECK_THROWS_WITH_AS(builtin("mobius"), "missing parameter sigma", UsageError);
    CHECK_THROWS_AS(builtin("lorenz"), UsageError);
    CHECK_THROWS_AS(builtin("cylinder", {{"sigma", 1.0}}), UsageError);
}

TEST_CASE("explicit cycles solve their fields") {
    for (const char* name : {"cylinder", "driven2d", "driven3d", "translated-cylinder", "cylinder-eigenbasis"})
        CHECK(cycle_residual(builtin(name).field, *builtin(name).cycle, 64) <= 1e-10);
    for (double sigma : {-1.0, 0.0, 0.5}) {
        auto m = builtin("mobius", {{"sigma", sigma}});
        CHECK(cycle_residual(m.field, *m.cycle, 64) <= 1e-10);
    }
}

TEST_CASE("jacobians agree with finite differences") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    for (const auto& info : builtin_catalog()) {
        Params p;
        if (info.id == "mobius") p["sigma"] = -0.7;
        auto sys = builtin(info.id, p);
        for (int k = 0; k < 20; ++k) {
            Vec x(sys.field.dim);
            for (int i = 0; i < x.size(); ++i) x(i) = U(rng);
            double t = 3 * U(rng);
            Mat J = sys.field.jacobian(t, x);
            Mat F = fd_jacobian(sys.field.eval, t, x);
            CHECK((J - F).norm() <= std::max(1e-6, 1e-6 * J.norm()));
            if (sys.field.period)
                CHECK((sys.field(t + *sys.field.period, x) - sys.field(t, x)).norm() <= 1e-12);
        }
    }
}

TEST_CASE("translation about the cylinder cycle") {
    auto ts = translate(builtin("cylinder"));
    for (double t : {0.0, 0.4, 2.0, 5.5}) {
        CHECK(ts.A(t)(0, 0) == doctest::Approx(-2 * std::cos(t) * std::cos(t)).epsilon(1e-14));
        CHECK((ts.A(t + ts.period) - ts.A(t)).norm() <= 1e-12);
        CHECK(ts.R(t, Vec::Zero(3)).norm() == 0.0);
        Mat D = fd_jacobian(ts.R, t, Vec::Zero(3));
        CHECK(D.norm() <= 1e-8);
    }
    // The builtin translated system is the same field.
    auto tc = builtin("translated-cylinder");
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    for (int k = 0; k < 20; ++k) {
        Vec y = v3(U(rng), U(rng), U(rng));
        double t = 10 * U(rng);
        Vec lhs = tc.field(t, y);
        Vec rhs = ts.A(t) * y + ts.R(t, y);
        CHECK((lhs - rhs).norm() <= 1e-13);
    }
    // Pure cubic direction: y = (e, 0, 0) at t with cos t = 0 leaves -e^3 in the first row.
    double t = oracle::pi / 2, e = 0.1;
    CHECK(ts.R(t, v3(e, 0, 0))(0) == doctest::Approx(-e * e * e).epsilon(1e-12));
}

TEST_CASE("remainder is quadratic in y") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> N(0, 1);
    for (const char* name : {"cylinder", "driven2d", "driven3d"}) {
        auto ts = translate(builtin(name));
        Vec v(ts.dim);
        for (int i = 0; i < v.size(); ++i) v(i) = N(rng);
        v.normalize();
        std::vector<double> lx, ly;
        for (double e : {1e-1, 1e-2, 1e-3, 1e-4}) {
            lx.push_back(std::log(e));
            ly.push_back(std::log(ts.R(0.7, e * v).norm()));
        }
        double slope = (ly.back() - ly.front()) / (lx.back() - lx.front());
        CHECK(slope >= 1.9);
    }
    auto mob = translate(builtin("mobius", {{"sigma", -1.0}}));
    Vec v = v3(0.3, -0.5, 0.8).normalized();
    double r1 = mob.R(1.0, 1e-2 * v).norm(), r2 = mob.R(1.0, 1e-4 * v).norm();
    CHECK(std::log(r1 / r2) / std::log(100.0) >= 1.9);
}

TEST_CASE("translate rejects a non-solution") {
    auto cyl = builtin("cylinder");
    auto bad = CycleOrbit::equilibrium(v3(2, 0, 0), 1.0);
    CHECK_THROWS_AS(translate_about_cycle(cyl.field, bad), UsageError);
}

TEST_CASE("sampled cycles interpolate with a periodic spline") {
    std::vector<Vec> samples;
    const int m = 2048;
    for (int k = 0; k < m; ++k) {
        double t = 2 * oracle::pi * k / m;
        samples.push_back(v3(std::cos(t), std::sin(t), 0));
    }
    auto c = CycleOrbit::from_samples(samples, 2 * oracle::pi);
    CHECK(c.sampled);
    for (double t : {0.1, 1.234, 5.0, -2.0, 8.0}) {
        CHECK((c.gamma(t) - v3(std::cos(t), std::sin(t), 0)).norm() <= 1e-10);
        CHECK((c.gamma(t + c.period) - c.gamma(t)).norm() <= 1e-10);
    }
    CHECK(cycle_residual(builtin("cylinder").field, c) <= 1e-8);
}

TEST_CASE("polynomial fields") {
    PolynomialSpec p;
    p.dim = 2;
    p.period = 2 * oracle::pi;
    p.terms = {{0, -1.0, {2, 0}}, {1, -1.0, {0, 1}}, {1, 1.0, {2, 0}, TimeFactor::Sin, 1}};
    auto f = polynomial_field(p);
    auto d2 = builtin("driven2d");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int k = 0; k < 10; ++k) {
        Vec x(2);
        x << U(rng), U(rng);
        double t = U(rng);
        CHECK((f(t, x) - d2.field(t, x)).norm() <= 1e-14);
        CHECK((f.jacobian(t, x) - d2.field.jacobian(t, x)).norm() <= 1e-14);
    }
    PolynomialSpec bad = p;
    bad.terms[0].pow = {1};
    CHECK_THROWS_AS(polynomial_field(bad), UsageError);
}

TEST_CASE("problem files") {
    auto a = parse_problem(R"({"system":"mobius","params":{"sigma":-1}})");
    CHECK(a.system == "mobius");
    CHECK(a.params.at("sigma") == -1.0);

    auto b = parse_problem(R"({"system":"cylinder"})");
    CHECK(b.integrator.method == Method::AdaptiveDp54);
    CHECK(b.integrator.atol == 1e-10);
    CHECK(b.integrator.rtol == 1e-10);

    CHECK_THROWS_WITH_AS(parse_problem(R"({"system":"mobius"})"), "missing parameter sigma", UsageError);
    CHECK_THROWS_AS(parse_problem(R"({"system":"nope"})"), UsageError);
    CHECK_THROWS_WITH_AS(parse_problem(R"({"system":"cylinder","integrator":{"tol":1}})"),
                         "/integrator/tol: unknown key", UsageError);
    CHECK_THROWS_AS(parse_problem(R"({"system":"cylinder","extra":1})"), UsageError);
    CHECK_THROWS_AS(parse_problem(R"({"system":"cylinder","integrator":{"atol":-1}})"), UsageError);
    CHECK_THROWS_AS(parse_problem("{not json"), UsageError);

    const char* poly = R"({"system":"polynomial","period":-1,
        "polynomial":{"dim":1,"terms":[{"eq":0,"coef":-1,"pow":[2]}]}})";
    CHECK_THROWS_WITH_AS(parse_problem(poly), "/period: non-positive period", UsageError);
}

TEST_CASE("problem round trip is canonical") {
    const char* texts[] = {
        R"({"system":"mobius","params":{"sigma":-1},"integrator":{"method":"fixed-rk4","h":0.005}})",
        R"({"system":"cylinder","analyses":["multipliers"]})",
        R"({"system":"polynomial","period":6.283185307179586,
            "polynomial":{"dim":2,"terms":[{"eq":0,"coef":-1,"pow":[2,0]},
            {"eq":1,"coef":1,"pow":[2,0],"time":"sin","harmonic":1}]}})",
    };
    for (const char* t : texts) {
        auto once = serialize_problem(parse_problem(t));
        auto twice = serialize_problem(parse_problem(once));
        CHECK(once == twice);
    }
}
