#include <doctest.h>

#include <floquetcm/floquet.hpp>

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <random>

using namespace fcm;

namespace {

const double E4pi = std::exp(-4 * oracle::pi);
const double E2pi = std::exp(-2 * oracle::pi);

// Sorted multiset distance (both sorted with the library ordering).
double multiset_error(std::vector<cplx> got, std::vector<cplx> want) {
    if (got.size() != want.size()) return 1e300;
    auto key = [](cplx a, cplx b) {
        if (std::abs(a.real() - b.real()) > 1e-6) return a.real() < b.real();
        return a.imag() < b.imag();
    };
    std::sort(got.begin(), got.end(), key);
    std::sort(want.begin(), want.end(), key);
    double e = 0;
    for (std::size_t i = 0; i < got.size(); ++i) e = std::max(e, std::abs(got[i] - want[i]));
    return e;
}

TransitionMatrix transition(const char* name, Params p = {}) {
    auto ts = translate(builtin(name, p));
    return TransitionMatrix(ts.A, 0.0, ts.period);
}

double spectral_norm(const Mat& A) { return Eigen::JacobiSVD<Mat>(A).singularValues()(0); }

}  // namespace

TEST_CASE("cylinder multipliers") {
    auto t0 = std::chrono::steady_clock::now();
    auto U = transition("cylinder");
    auto spec = classify(monodromy(U, 0.0));
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(multiset_error(spec.expanded(), {1.0, E4pi, 1.0}) <= 1e-7);
    CHECK(secs < 1.0);
    CHECK(spec.center_dim() == 2);
    CHECK(spec.count(Band::Stable) == 1);
    CHECK(spec.has_trivial);
    CHECK(spec.nonhyperbolic());
    // Tangent vector is fixed by the monodromy.
    Vec gdot(3);
    gdot << 0, 1, 0;
    CHECK((U.monodromy() * gdot - gdot).norm() <= 1e-6);
}

TEST_CASE("zero generator gives identity monodromy") {
    TransitionMatrix U([](double) { return Mat(Mat::Zero(3, 3)); }, 0.0, 1.0);
    CHECK((monodromy(U, 0.0) - Mat::Identity(3, 3)).norm() == 0.0);
    auto spec = classify(U.monodromy());
    CHECK(spec.multipliers.size() == 1);
    CHECK(spec.multipliers[0].multiplicity == 3);
    auto P = projectors(U, spec, period_grid(0, 1, 8));
    CHECK((P.at(Band::Center, 0.3) - Mat::Identity(3, 3)).norm() <= 1e-14);
    CHECK(P.at(Band::Stable, 0.3).norm() == 0.0);
    CHECK(P.at(Band::Unstable, 0.3).norm() == 0.0);
    auto est = trichotomy_fit(P, spec, trichotomy_grid(0, 1));
    CHECK(est.a == -std::numeric_limits<double>::infinity());
    CHECK(est.b == std::numeric_limits<double>::infinity());
    auto nf = floquet_normal_form(U, 0.0);
    CHECK(!nf.doubled);
    CHECK(nf.B.norm() <= 1e-14);
    CHECK((nf.Q(0.7) - U(0.7)).norm() <= 1e-14);
}

TEST_CASE("driven3d monodromy") {
    auto U = transition("driven3d");
    Mat M = U.monodromy();
    Mat ref = Mat::Identity(3, 3);
    ref(1, 1) = std::exp(2 * oracle::pi);
    CHECK((M - ref).norm() <= 1e-7 * ref.norm());
    auto spec = classify(M);
    CHECK(spec.count(Band::Unstable) == 1);
    CHECK(spec.center_dim() == 2);
}

TEST_CASE("Mobius classification") {
    auto spec = classify(transition("mobius", {{"sigma", -1.0}}).monodromy());
    CHECK(multiset_error(spec.expanded(), {1.0, -1.0, -E2pi}) <= 1e-7);
    CHECK(spec.center_dim() == 2);
    CHECK(spec.count(Band::Stable) == 1);
    for (const auto& m : spec.multipliers)
        if (m.band == Band::Stable) CHECK(m.value.real() == doctest::Approx(-E2pi).epsilon(1e-6));

    auto spec0 = classify(transition("mobius", {{"sigma", 0.0}}).monodromy());
    CHECK(spec0.center_dim() == 3);
    bool found = false;
    for (const auto& m : spec0.multipliers)
        if (std::abs(m.value + 1.0) < 1e-6) {
            found = true;
            CHECK(m.multiplicity == 2);
        }
    CHECK(found);
}

TEST_CASE("classification of a diagonal matrix") {
    Mat M = Mat::Zero(3, 3);
    M.diagonal() << 2, 1, 0.5;
    auto spec = classify(M);
    REQUIRE(spec.multipliers.size() == 3);
    CHECK(spec.multipliers[0].value == cplx(0.5));
    CHECK(spec.multipliers[0].band == Band::Stable);
    CHECK(spec.multipliers[1].band == Band::Center);
    CHECK(spec.multipliers[2].value == cplx(2.0));
    CHECK(spec.multipliers[2].band == Band::Unstable);
    CHECK(spec.warnings.empty());

    // Near the band edge a warning is carried.
    M.diagonal() << 1 + 2e-6, 1, 0.5;
    CHECK(!classify(M).warnings.empty());

    // Complex pairs stay together.
    Mat R(2, 2);
    R << std::cos(1.0), -std::sin(1.0), std::sin(1.0), std::cos(1.0);
    auto rs = classify(0.5 * R);
    CHECK(rs.count(Band::Stable) == 2);
    CHECK(!rs.has_trivial);
}

TEST_CASE("projector oracles") {
    auto cylU = transition("cylinder");
    auto cspec = classify(cylU.monodromy());
    auto P = projectors(cylU, cspec, period_grid(0, 2 * oracle::pi, 16));
    Mat ref = Mat::Zero(3, 3);
    ref(1, 1) = ref(2, 2) = 1;
    CHECK((P.at(Band::Center, 0.0) - ref).norm() <= 1e-8);
    // Closed form at other times: pi0(t) = I - zeta2 zeta2^T with zeta2 = (cos t, sin t, 0).
    for (double t : {0.4, 2.0, 5.0}) {
        Vec z(3);
        z << std::cos(t), std::sin(t), 0;
        Mat P0 = Mat::Identity(3, 3) - z * z.transpose();
        CHECK((P.at(Band::Center, t) - P0).norm() <= 1e-8);
    }
    CHECK(P.bound() == doctest::Approx(2.0).epsilon(1e-6));

    auto dU = transition("driven2d");
    auto dspec = classify(dU.monodromy());
    auto Pd = projectors(dU, dspec, period_grid(0, 2 * oracle::pi, 16));
    for (double t : {0.0, 1.0, 3.3, 6.0}) {
        Mat P0 = Pd.at(Band::Center, t), Pm = Pd.at(Band::Stable, t);
        CHECK(std::abs(P0(0, 0) - 1) + std::abs(P0(0, 1)) + std::abs(P0(1, 0)) + std::abs(P0(1, 1)) <= 1e-9);
        CHECK(std::abs(Pm(1, 1) - 1) + std::abs(Pm(0, 1)) + std::abs(Pm(1, 0)) + std::abs(Pm(0, 0)) <= 1e-9);
    }
}

TEST_CASE("projector invariants") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U01(0, 2 * oracle::pi);
    for (Params p : {Params{}, Params{{"sigma", -1.0}}}) {
        auto ts = translate(builtin(p.empty() ? "cylinder" : "mobius", p));
        TransitionMatrix U(ts.A, 0.0, ts.period);
        auto spec = classify(U.monodromy());
        auto grid = period_grid(0, ts.period, 20);
        auto P = projectors(U, spec, grid);
        const Mat I = Mat::Identity(3, 3);
        for (double t : grid) {
            auto pi = P.all_at(t);
            auto pT = P.all_at(t + ts.period);
            Mat sum = Mat::Zero(3, 3);
            for (int i = 0; i < 3; ++i) {
                CHECK((pi[i] * pi[i] - pi[i]).norm() <= 1e-7);
                for (int j = 0; j < 3; ++j)
                    if (i != j) CHECK((pi[i] * pi[j]).norm() <= 1e-7);
                CHECK((pT[i] - pi[i]).norm() <= 1e-7);
                sum += pi[i];
            }
            CHECK((sum - I).norm() <= 1e-7);
            // Projector ODE by central differences.
            const double h = 1e-3;
            auto pp = P.all_at(t + h), pm = P.all_at(t - h);
            Mat A = ts.A(t);
            for (int i = 0; i < 3; ++i) {
                Mat dp = (pp[i] - pm[i]) / (2 * h);
                CHECK((dp - A * pi[i] + pi[i] * A).norm() <= 1e-5);
            }
            // Restricted propagator is invertible on each bundle.
            for (Band b : {Band::Stable, Band::Center, Band::Unstable}) {
                int r = P.rank(b);
                if (!r) continue;
                Mat X = P.subspace(b).basis;
                Mat Y = P.restricted(b, t) * X;  // spans E_b(t)
                Eigen::HouseholderQR<Mat> qr(Y);
                Mat Q = qr.householderQ() * Mat::Identity(3, r);
                CHECK(std::abs((Q.transpose() * Y).determinant()) > 1e-10);
            }
        }
        for (int k = 0; k < 20; ++k) {
            double t = U01(rng), s = U01(rng);
            Mat Uts = U.between(t, s);
            auto ps = P.all_at(s), pt = P.all_at(t);
            for (int i = 0; i < 3; ++i)
                CHECK((Uts * ps[i] - pt[i] * Uts).norm() / std::max(1.0, Uts.norm()) <= 1e-6);
        }
    }
}

TEST_CASE("multipliers do not depend on the base time") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U01(0, 2 * oracle::pi);
    auto ts = translate(builtin("mobius", {{"sigma", -1.0}}));
    auto ref = classify(TransitionMatrix(ts.A, 0.0, ts.period).monodromy()).expanded();
    for (int k = 0; k < 5; ++k) {
        double s = U01(rng);
        auto got = classify(TransitionMatrix(ts.A, s, ts.period, {}, 64).monodromy()).expanded();
        CHECK(multiset_error(got, ref) <= 1e-6);
    }
}

TEST_CASE("bundle bases") {
    auto mobU = transition("mobius", {{"sigma", -1.0}});
    auto spec = classify(mobU.monodromy());
    auto grid = period_grid(0, 4 * oracle::pi, 24);
    auto Z = bundle_basis(mobU, spec, {-1.0}, 0.0, grid);
    CHECK(Z.basis_s.cols() == 1);
    CHECK(!Z.ill_conditioned);
    CHECK(Z.min_singular > 1e-8);
    for (std::size_t k = 0; k < grid.size(); ++k)
        CHECK(oracle::parallel_error(Z.values[k].col(0), oracle::mobius_zeta2(grid[k])) <= 1e-7);
    for (double t : {0.0, 0.8, 3.0}) CHECK((Z.at(t + 2 * oracle::pi) + Z.at(t)).norm() <= 1e-7);

    auto triv = bundle_basis(mobU, spec, {1.0}, 0.0, grid);
    for (double t : {0.3, 2.2, 5.1}) {
        Vec gdot(3);
        gdot << -std::sin(t), std::cos(t), 0;
        CHECK(oracle::parallel_error(triv.at(t).col(0), gdot) <= 1e-7);
    }
    CHECK_THROWS_AS(bundle_basis(mobU, spec, {cplx(0, 1)}, 0.0, grid), UsageError);
}

TEST_CASE("trichotomy rates") {
    for (auto [name, sigma, a] : {std::tuple{"cylinder", 0.0, -2.0}, std::tuple{"mobius", -1.0, -1.0}}) {
        Params p;
        if (std::string(name) == "mobius") p["sigma"] = sigma;
        auto fa = analyze(builtin(name, p));
        CHECK(fa.rates.a == doctest::Approx(a).epsilon(0.025));
        CHECK(std::abs(fa.rates.a - a) <= 0.05);
        CHECK(fa.rates.b == std::numeric_limits<double>::infinity());
        CHECK(fa.rates.bounds_hold);
        CHECK(fa.rates.C >= 1.0);
        // The bound holds on the fit grid.
        for (double t : fa.rates.grid) {
            if (t < 0) continue;
            double n = spectral_norm(fa.projectors.restricted(Band::Stable, t));
            CHECK(n <= fa.rates.C * std::exp(fa.rates.a * t) * (1 + 1e-9));
        }
    }
    auto d3 = analyze(builtin("driven3d"));
    CHECK(d3.rates.b == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(d3.rates.a == -std::numeric_limits<double>::infinity());
}

TEST_CASE("Floquet normal form") {
    auto dU = transition("driven2d");
    auto nf = floquet_normal_form(dU, 0.0);
    CHECK(!nf.doubled);
    Mat B = Mat::Zero(2, 2);
    B(1, 1) = -1;
    CHECK((nf.B - B).norm() <= 1e-8);
    for (double t : {0.5, 2.0, 5.0}) CHECK((nf.Q(t) - Mat::Identity(2, 2)).norm() <= 1e-8);

    auto mU = transition("mobius", {{"sigma", -1.0}});
    auto mf = floquet_normal_form(mU, 0.0);
    CHECK(mf.doubled);
    CHECK((mf.Q(0.0) - Mat::Identity(3, 3)).norm() <= 1e-12);
    for (double t : {0.3, 1.7, 4.0})
        CHECK((mf.Q(t + 4 * oracle::pi) - mf.Q(t)).norm() <= 1e-6);

    auto cU = transition("cylinder");
    auto cf = floquet_normal_form(cU, 0.0);
    CHECK(!cf.doubled);
    for (double t : {0.3, 1.7})
        CHECK((cf.Q(t + 2 * oracle::pi) - cf.Q(t)).norm() <= 1e-6);
}
