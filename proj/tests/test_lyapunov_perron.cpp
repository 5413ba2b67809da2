#include <doctest.h>

#include <floquetcm/lyapunov_perron.hpp>

#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace fcm;

namespace {

std::shared_ptr<const FloquetAnalysis> analysis_of(const TranslatedSystem& ts) {
    return std::make_shared<const FloquetAnalysis>(analyze(ts));
}

LpProblem scalar_problem(double a) {
    Mat A(1, 1);
    A(0, 0) = a;
    auto ts = constant_linear(A, 1.0);
    return LpProblem(ts, analysis_of(ts), 0.0);
}

GridFunction constant_forcing(const LpProblem& p, const Vec& v) {
    GridFunction f(p.context(), p.dim());
    for (auto& x : f.values) x = v;
    return f;
}

LpOptions with_delta(double d) {
    LpOptions o;
    o.delta = d;
    return o;
}

}  // namespace

TEST_CASE("weighted norm") {
    WeightedContext ctx;
    ctx.eta = 1;
    ctx.s = 0.3;
    ctx.h = 0.01;
    ctx.W = 10;
    GridFunction f(ctx, 2);
    CHECK(weighted_norm(f, ctx) == 0.0);
    for (int i = 0; i < f.size(); ++i) {
        double d = std::abs(f.time(i) - ctx.s);
        f.values[i] << std::exp(ctx.eta * d), 0;
    }
    CHECK(weighted_norm(f, ctx) == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < f.size(); ++i) f.values[i] << f.time(i) - ctx.s, 0;
    CHECK(weighted_norm(f, ctx) == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
    // Cubic interpolation reproduces the linear function.
    CHECK(f(0.3 + 0.123)(0) == doctest::Approx(0.123).epsilon(1e-12));
}

TEST_CASE("cutoff function") {
    CHECK(cutoff_xi(0.0) == 1.0);
    CHECK(cutoff_xi(0.5) == 1.0);
    CHECK(cutoff_xi(1.0) == 1.0);
    CHECK(cutoff_xi(3.0) == 0.0);
    CHECK(cutoff_xi(2.0) == 0.0);
    CHECK(cutoff_xi(1.5) == doctest::Approx(0.5).epsilon(1e-15));
    double prev = 1;
    for (int i = 1; i < 100; ++i) {
        double v = cutoff_xi(1 + i / 100.0);
        CHECK(v <= prev);
        CHECK(cutoff_xi(1 + i / 100.0) + cutoff_xi(2 - i / 100.0) == doctest::Approx(1.0));
        prev = v;
    }
    // Flat at the junctions.
    CHECK(std::abs(cutoff_xi(1.01) - 1) < 1e-30);
    CHECK(cutoff_xi(1.99) < 1e-30);
    CHECK_THROWS_AS(cutoff_xi(-0.1), DomainError);
}

TEST_CASE("Lipschitz sampling") {
    LipschitzSampling how;
    how.radius = 0.1;
    NonlinearMap zero = [](double, const Vec& y) { return Vec(Vec::Zero(y.size())); };
    CHECK(measure_lipschitz(zero, 2, how) == 0.0);
    NonlinearMap sq = [](double, const Vec& y) { return Vec(y.cwiseProduct(y)); };
    CHECK(measure_lipschitz(sq, 1, how) == doctest::Approx(0.2).epsilon(0.1));
    CHECK(measure_lipschitz(sq, 1, how) == measure_lipschitz(sq, 1, how));
}

TEST_CASE("modified nonlinearity") {
    auto sys = builtin("driven2d");
    std::vector<double> L;
    for (double d : {0.1, 0.05, 0.025}) {
        auto p = LpProblem::from_system(sys, 0.0, with_delta(d));
        const auto& cut = p.cutoff();
        CHECK(cut.delta == d);
        CHECK(cut.N == doctest::Approx(2.0).epsilon(1e-6));
        L.push_back(cut.L);
        auto ts = p.system();
        Vec zero = Vec::Zero(2);
        CHECK(p.R_delta(0.4, zero).norm() == 0.0);
        std::mt19937_64 rng(3);
        std::normal_distribution<double> n01;
        for (int k = 0; k < 200; ++k) {
            Vec y(2);
            y << n01(rng), n01(rng);
            y.normalize();
            double t = 7 * std::abs(n01(rng));
            CHECK(p.R_delta(t, 10 * cut.N * d * y).norm() == 0.0);
            Vec yin = 0.5 * d * std::abs(n01(rng)) / 3 * y;
            if (yin.norm() < d / 2) CHECK((p.R_delta(t, yin) - ts.R(t, yin)).norm() == 0.0);
            Vec any = 5 * cut.N * d * std::abs(n01(rng)) / 2 * y;
            CHECK(p.R_delta(t, any).norm() <= 4 * cut.N * cut.L * d * (1 + 1e-12));
        }
    }
    CHECK(L[0] > L[1]);
    CHECK(L[1] > L[2]);
}

TEST_CASE("pseudo-inverse scalar oracles") {
    for (auto [a, want] : {std::pair{-1.0, 1.0}, std::pair{1.0, -1.0}}) {
        auto p = scalar_problem(a);
        auto f = constant_forcing(p, Vec::Ones(1));
        auto u = p.K(f);
        const auto& ctx = p.context();
        double err = 0;
        for (int i = 0; i < u.size(); ++i)
            if (std::abs(u.time(i) - ctx.s) <= ctx.W / 2) err = std::max(err, std::abs(u.values[i](0) - want));
        CHECK(err <= 1e-5);
        CHECK(p.inhomogeneous_residual(u, f) <= 1e-5);
        auto z = p.K(constant_forcing(p, Vec::Zero(1)));
        CHECK(weighted_norm(z, ctx) == 0.0);
    }
}

TEST_CASE("pseudo-inverse on the cylinder") {
    auto sys = builtin("cylinder");
    auto p = LpProblem::from_system(sys, 0.7);
    GridFunction f(p.context(), 3);
    for (int i = 0; i < f.size(); ++i) {
        double t = f.time(i);
        f.values[i] << std::sin(t), std::cos(2 * t), 0.3 + 0.1 * std::sin(3 * t);
    }
    auto u = p.K(f);
    Vec us = u(0.7);
    CHECK((p.pi0_at_base() * us).norm() <= 1e-7);
    CHECK(p.inhomogeneous_residual(u, f) <= 1e-5);
    // The center part grows at most linearly, so the weighted norm is finite and modest.
    CHECK(weighted_norm(u, p.context()) < 10.0);

    // Window too small for the tail bound.
    LpOptions small;
    small.window = 0.5;
    auto q = LpProblem::from_system(sys, 0.0, small);
    GridFunction g(q.context(), 3);
    for (auto& v : g.values) v = Vec::Ones(3);
    CHECK_THROWS_AS(q.K(g), NumericalError);
}

TEST_CASE("fixed point on driven2d") {
    auto sys = builtin("driven2d");
    for (double s : {0.0, 1.0, 2.5, 4.0}) {
        auto p = LpProblem::from_system(sys, s, with_delta(0.01));
        CHECK(p.center_basis().cols() == 1);
        CHECK(p.center_basis()(0, 0) == doctest::Approx(1.0));
        Vec y0(2);
        y0 << 1e-2, 0;
        auto r = p.fixed_point(y0);
        double a2 = 0.5 * std::sin(s) - 0.5 * std::cos(s);
        CHECK(r.H(1) == doctest::Approx(a2 * 1e-4).epsilon(0.1));
        CHECK(r.C(0) == doctest::Approx(1e-2).epsilon(1e-9));
        CHECK(r.rate <= 0.3);
        CHECK(r.iterations < 200);
        CHECK(p.C(Vec::Zero(2)).norm() == 0.0);
    }
    auto p = LpProblem::from_system(sys, 0.0, with_delta(0.01));
    Vec bad(2);
    bad << 0, 1e-3;
    CHECK_THROWS_AS(p.fixed_point(bad), UsageError);
}

TEST_CASE("fixed point properties") {
    auto sys = builtin("driven2d");
    auto p = LpProblem::from_system(sys, 0.5, with_delta(0.01));
    CHECK(tangency_error(p) <= 1e-4);
    Vec y0(2);
    y0 << 5e-3, 0;
    CHECK(periodicity_error(sys, p, y0) <= 1e-4);
    CHECK(invariance_error(p, y0) <= 1e-4);

    // One Lipschitz constant for the fibre map across base times.
    double worst = 0;
    for (double s : {0.0, 1.3, 2.6, 3.9, 5.2}) {
        auto q = LpProblem::from_system(sys, s, with_delta(0.01));
        for (double a : {-8e-3, -2e-3, 3e-3}) {
            Vec y(2), z(2);
            y << a, 0;
            z << a + 4e-3, 0;
            worst = std::max(worst, (q.C(y) - q.C(z)).norm() / (y - z).norm());
        }
    }
    CHECK(worst < 1.1);

    // The fixed point stays bounded in a weaker weighted norm too.
    auto r = p.fixed_point(y0);
    auto ctx = p.context();
    ctx.eta *= 0.9;
    CHECK(weighted_norm(r.u, ctx) < 10 * y0.norm());
}

TEST_CASE("linear systems have flat fibres") {
    Mat A = Mat::Zero(2, 2);
    A(1, 1) = -1;
    auto ts = constant_linear(A, 2 * oracle::pi);
    LpProblem p(ts, analysis_of(ts), 0.0);
    Vec y0(2);
    y0 << 0.3, 0;
    auto r = p.fixed_point(y0);
    CHECK((r.C - y0).norm() <= 1e-12);
    CHECK(r.H.norm() <= 1e-12);
    CHECK(p.cutoff().L == 0.0);
}
