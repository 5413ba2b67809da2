#include <doctest.h>

#include <floquetcm/integrate.hpp>

#include "oracles.hpp"

#include <random>
#include <sstream>

using namespace fcm;

namespace {

VectorField scalar_cos_field() {
    VectorField f;
    f.name = "cos";
    f.dim = 1;
    f.period = 2 * oracle::pi;
    f.eval = [](double t, const Vec& x) { return Vec(std::cos(t) * x); };
    return f;
}

VectorField zero_field(int n) {
    VectorField f;
    f.dim = n;
    f.eval = [n](double, const Vec&) { return Vec(Vec::Zero(n)); };
    return f;
}

double rel_cocycle(const Mat& a, const Mat& b, const Mat& ab) {
    return (a * b - ab).norm() / std::max(1.0, a.norm() * b.norm());
}

}  // namespace

TEST_CASE("flow oracles") {
    auto cyl = builtin("cylinder");
    Vec x0(3);
    x0 << 1, 0, 0.4;
    CHECK((flow(cyl.field, 0, x0, 2 * oracle::pi) - x0).norm() <= 1e-8);
    CHECK((flow(cyl.field, 1.5, x0, 1.5) - x0).norm() == 0.0);

    Vec y0 = Vec::Ones(1);
    CHECK(flow(scalar_cos_field(), 0, y0, oracle::pi / 2)(0) == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
    // Backward in time.
    CHECK(flow(scalar_cos_field(), 0, y0, -oracle::pi / 2)(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("backward consistency") {
    auto mob = builtin("mobius", {{"sigma", -1.0}});
    Vec x0(3);
    x0 << 1.1, 0.1, -0.2;
    Vec x1 = flow(mob.field, 0.3, x0, 2.4);
    Vec back = flow(mob.field, 2.4, x1, 0.3);
    CHECK((back - x0).norm() <= 2e-7);
    // Group property.
    Vec mid = flow(mob.field, 0.3, x0, 1.0);
    CHECK((flow(mob.field, 1.0, mid, 2.4) - x1).norm() <= 1e-7);
}

TEST_CASE("fixed RK4 is fourth order") {
    StepperConfig cfg;
    cfg.method = Method::FixedRk4;
    const double exact = std::exp(std::sin(2.0));
    auto err = [&](double h) {
        cfg.h = h;
        return std::abs(flow(scalar_cos_field(), 0, Vec::Ones(1), 2.0, cfg)(0) - exact);
    };
    double e1 = err(0.1), e2 = err(0.05);
    CHECK(e1 / e2 >= 12.0);
}

TEST_CASE("fixed RK4 and adaptive agree on the cylinder") {
    StepperConfig cfg;
    cfg.method = Method::FixedRk4;
    cfg.h = 1e-3;
    auto cyl = builtin("cylinder");
    Vec x0(3);
    x0 << 0.5, 0.2, 1.0;
    CHECK((flow(cyl.field, 0, x0, 3.0, cfg) - flow(cyl.field, 0, x0, 3.0)).norm() <= 1e-9);
}

TEST_CASE("stepper configuration is validated") {
    StepperConfig cfg;
    cfg.atol = 0;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg = {};
    cfg.max_steps = 3;
    auto cyl = builtin("cylinder");
    Vec x0(3);
    x0 << 1, 0, 0;
    CHECK_THROWS_AS(flow(cyl.field, 0, x0, 100.0, cfg), NumericalError);
}

TEST_CASE("blow-up is reported") {
    VectorField f;
    f.dim = 1;
    f.eval = [](double, const Vec& x) { return Vec(x.array().square()); };
    CHECK_THROWS_AS(flow(f, 0, Vec::Ones(1), 2.0), NumericalError);
}

TEST_CASE("trajectories") {
    auto cyl = builtin("cylinder");
    Vec x0(3);
    x0 << 1, 0, 0;
    auto tr = integrate_trajectory(cyl.field, 0, x0, 2 * oracle::pi, {}, 65);
    REQUIRE(tr.x.size() == 65);
    CHECK((tr.x.back() - x0).norm() <= 1e-8);
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        CHECK(tr.x[k](0) == doctest::Approx(std::cos(tr.t[k])).epsilon(1e-8));
        if (k) CHECK(tr.t[k] > tr.t[k - 1]);
    }

    auto zt = integrate_trajectory(zero_field(2), 0, Vec::Ones(2), 5, {}, 11);
    for (const auto& x : zt.x) CHECK((x - Vec::Ones(2)).norm() == 0.0);

    auto d2 = builtin("driven2d");
    Vec y0(2);
    y0 << 0.1, 0;
    auto dt = integrate_trajectory(d2.field, 0, y0, 2 * oracle::pi, {}, 9);
    CHECK(dt.x.back()(0) == doctest::Approx(0.1 / (1 + 0.1 * 2 * oracle::pi)).epsilon(1e-8));
    for (std::size_t k = 0; k < dt.t.size(); ++k)
        CHECK(std::abs(dt.x[k](0) - 0.1 / (1 + 0.1 * dt.t[k])) <= 1e-10);

    std::ostringstream os;
    dt.write_csv(os);
    CHECK(os.str().rfind("t,x1,x2\n0,0.10000000000000001,0\n", 0) == 0);
}

TEST_CASE("fundamental matrix oracles") {
    TransitionMatrix Z([](double) { return Mat(Mat::Zero(2, 2)); }, 0.0, 1.0);
    CHECK((Z(3.7) - Mat::Identity(2, 2)).norm() == 0.0);

    TransitionMatrix C([](double t) { return Mat(Mat::Constant(1, 1, std::cos(t))); }, 0.0,
                       2 * oracle::pi);
    for (double t : {0.3, 1.2, 4.0, 9.0, -2.5})
        CHECK(C(t)(0, 0) == doctest::Approx(std::exp(std::sin(t))).epsilon(1e-9));

    auto mob = translate(builtin("mobius", {{"sigma", -1.0}}));
    TransitionMatrix U(mob.A, 0.0, mob.period);
    Mat V0inv = oracle::mobius_V(-1, 0).inverse();
    for (int k = 0; k <= 16; ++k) {
        double t = 2 * oracle::pi * k / 16 + 0.05;
        Mat ref = oracle::mobius_V(-1, t) * V0inv;
        CHECK((U(t) - ref).cwiseAbs().maxCoeff() <= 1e-7);
    }
    CHECK((U(0.0) - Mat::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("cocycle, inverse and periodicity") {
    auto mob = translate(builtin("mobius", {{"sigma", -1.0}}));
    auto cyl = translate(builtin("cylinder"));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U01(0, 2 * oracle::pi);
    for (const auto* sys : {&mob, &cyl}) {
        TransitionMatrix U(sys->A, 0.0, sys->period);
        double worst = 0;
        for (int k = 0; k < 50; ++k) {
            double t = U01(rng), r = U01(rng), s = U01(rng);
            // Independent integrations from r and s.
            TransitionMatrix Ur(sys->A, r, sys->period, {}, 64), Us(sys->A, s, sys->period, {}, 64);
            worst = std::max(worst, rel_cocycle(Ur(t), Us(r), Us(t)));
            if (k < 10) {
                CHECK(rel_cocycle(Us(t), U.between(s, t), Mat::Identity(3, 3)) <= 1e-7);
            }
        }
        CHECK(worst <= 1e-7);
        TransitionMatrix Ushift(sys->A, sys->period, sys->period, {}, 64);
        for (double t : {0.5, 3.0, 6.0})
            CHECK((Ushift(t + sys->period) - U(t)).norm() / std::max(1.0, U(t).norm()) <= 1e-7);
    }
}

TEST_CASE("transition matrix along an orbit") {
    auto cyl = builtin("cylinder");
    auto ts = translate(cyl);
    TransitionMatrix A(ts.A, 0.0, ts.period);
    TransitionMatrix B = TransitionMatrix::along_orbit(cyl.field, cyl.cycle->gamma(0), 0.0, ts.period);
    CHECK((A.monodromy() - B.monodromy()).norm() <= 1e-8);
    CHECK((A(2.345) - B(2.345)).norm() <= 1e-8);
    CHECK((A.step(1.0, 1.01) - B.step(1.0, 1.01)).norm() <= 1e-10);
}
