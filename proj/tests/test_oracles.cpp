#include <doctest.h>

#include "rrlmi/oracles.hpp"

#include <cmath>

using namespace rrlmi;

TEST_SUITE("oracles") {

TEST_CASE("Wirtinger extremal and trivial cases") {
    const double a = 0.3, b = 1.1, L = b - a;
    const auto z = SampledFunction::from(
        [&](double s) { return Vec::Constant(1, std::sin(M_PI * (s - a) / (2 * L))); },
        [&](double s) { return Vec::Constant(1, M_PI / (2 * L) * std::cos(M_PI * (s - a) / (2 * L))); }, a, b, 400);
    const auto m = check_lemma1(z, Mat::Identity(1, 1));
    CHECK(std::abs(m.normalized()) < 1e-8);

    const auto zero = SampledFunction::from([](double) { return Vec::Zero(2); }, [](double) { return Vec::Zero(2); },
                                            0, 1, 10);
    CHECK(check_lemma1(zero, Mat::Identity(2, 2)).margin == 0.0);

    const auto bad = SampledFunction::from([](double) { return Vec::Ones(1); }, [](double) { return Vec::Zero(1); },
                                           0, 1, 10);
    CHECK_THROWS(check_lemma1(bad, Mat::Identity(1, 1)));
}

TEST_CASE("Lemma 2 equality cases") {
    Vec c0(2), c1(2);
    c0 << 1, -2;
    c1 << 0.5, 3;
    const auto aff = SampledFunction::from([&](double s) { return Vec(c0 + s * c1); }, [&](double) { return c1; },
                                           -0.5, 0.7, 20);
    Mat R(2, 2);
    R << 2, 0.3, 0.3, 1;
    CHECK(std::abs(check_lemma2(aff, R).normalized()) < 1e-12);

    const auto cst = SampledFunction::from([&](double) { return c0; }, [](double) { return Vec::Zero(2); }, 0, 1, 10);
    CHECK(std::abs(check_lemma2(cst, R).margin) < 1e-14);
}

TEST_CASE("Lemma 3 closed-form cases") {
    std::mt19937_64 rng(4);
    const int n = 2, d = 2;
    const Mat R = random_psd(n, rng);
    Mat Rh = Mat::Zero(2 * n, 2 * n);
    Rh.topLeftCorner(n, n) = R;
    Rh.bottomRightCorner(n, n) = 3 * R;
    std::vector<Vec> delta;
    double sum = 0;
    for (int v = 0; v <= d; ++v) {
        delta.push_back(Vec::Random(2 * n));
        sum += delta.back().dot(Rh * delta.back());
    }
    const double tau = 0.3;
    const std::vector<double> equal(d + 1, tau / (d + 1));
    const auto m = check_lemma3(delta, Rh, Mat::Zero(2 * n, 2 * n), equal);
    CHECK(m.margin == doctest::Approx(d * sum).epsilon(1e-12));

    std::vector<Vec> single(d + 1, Vec::Zero(2 * n));
    single[1] = delta[1];
    const std::vector<double> lens{0.05, 0.1, 0.15};
    const double q = delta[1].dot(Rh * delta[1]);
    const auto ms = check_lemma3(single, Rh, random_G_for(Rh, rng), lens);
    CHECK(ms.margin == doctest::Approx((tau / 0.1 - 1) * q).epsilon(1e-10));
}

TEST_CASE("Monte-Carlo sweeps") {
    const auto s1 = sweep_lemma1(60, 1);
    const auto s2 = sweep_lemma2(60, 2);
    CHECK(s1.failures == 0);
    CHECK(s2.failures == 0);
    for (int d = 1; d <= 3; ++d) CHECK(sweep_lemma3(60, d, 3 + d).failures == 0);
}

TEST_CASE("delta = Y xi") {
    for (int d = 1; d <= 3; ++d)
        for (double th : {0.1, 0.5, 0.9}) CHECK(delta_Y_residual(d, 2, 0.0005, th, 10 + d) < 1e-6);
}

TEST_CASE("oracle suite on a small closed loop") {
    const auto sys = example2_system(0.0, 3);
    SynthesisOptions so;
    so.structure = MultiplierStructure::ZeroTop;
    const auto r = minimize_gamma(sys, SynthesisParams::uniform(3, 0.4, 0.1), so);
    REQUIRE(r.feasible);
    const auto rep = run_oracle_suite(sys, r.gains, 0.4, 5, 40, 6);
    CHECK(rep.lemmas_pass());
    CHECK(rep.delta_Y_pass());
    CHECK(rep.prop1_pass());
    CHECK(rep.prop1.size() == 6);
}

TEST_CASE("T invariance") {
    const auto sys = example2_system(0.0, 3);
    SynthesisOptions so;
    so.structure = MultiplierStructure::ZeroTop;
    const auto rep = check_T_invariance(sys, SynthesisParams::uniform(3, 0.4, 0.1), 2, 8, so);
    CHECK(rep.ref_feasible);
    CHECK(rep.all_feasible());
    CHECK(rep.max_rel_dev < 5e-3);

    SynthesisOptions bad = so;
    bad.T.assign(3, Mat::Identity(2, 2));
    CHECK_THROWS_AS(build_synthesis_problem(sys, SynthesisParams::uniform(3, 0.4, 0.1), bad), ConfigError);
}

}
