#include <doctest.h>

#include "rrlmi/sdp.hpp"
#include "rrlmi/simulate.hpp"

using namespace rrlmi;

namespace {

LargeScaleSystem decoupled_scalar_pair() {
    LargeScaleSystem sys;
    for (int i = 1; i <= 2; ++i) {
        SubsystemModel s;
        s.index = i;
        s.A = -Mat::Identity(1, 1);
        s.B = s.E = s.C = Mat::Identity(1, 1);
        s.F = Mat::Zero(1, 1);
        s.couplings.push_back({3 - i, Mat::Zero(1, 1)});
        sys.subsystems.push_back(s);
    }
    return sys;
}

const std::vector<ControllerGains>& example2_gains() {
    static const std::vector<ControllerGains> gains = [] {
        SynthesisOptions so;
        so.structure = MultiplierStructure::ZeroTop;
        const auto sys = example2_system(0.0, 3);
        auto r = minimize_gamma(sys, SynthesisParams::uniform(3, 0.4, 0.1), so);
        REQUIRE(r.feasible);
        return r.gains;
    }();
    return gains;
}

DisturbanceSpec pulse(double amp) {
    DisturbanceSpec d;
    d.kind = DisturbanceKind::FinitePulse;
    d.amplitude = {amp};
    d.t_on = 0.0;
    d.t_off = 2.0;
    return d;
}

} // namespace

TEST_SUITE("simulate") {

TEST_CASE("zero state and zero disturbance stay at zero") {
    const auto sys = example2_system(0.0, 3);
    const auto rec = integrate_closed_loop(sys, example2_gains(), zero_state(sys), DisturbanceSpec{}, 1.0);
    for (const auto& x : rec.x) CHECK(x.norm() == 0.0);
    CHECK(rec.total_zz() == 0.0);
}

TEST_CASE("paper initial state") {
    const auto x0 = paper_initial_state(example2_system(0.0, 3));
    CHECK(x0[0][0] == -1);
    CHECK(x0[0][1] == 2);
    CHECK(x0[2][0] == -5);
    CHECK(x0[2][1] == 6);
}

TEST_CASE("decay rate of a known exponential") {
    const auto sys = decoupled_scalar_pair();
    const std::vector<Vec> x0{Vec::Ones(1), Vec::Ones(1)};
    const auto rec = integrate_closed_loop(sys, {}, x0, DisturbanceSpec{}, 5.0);
    CHECK(decay_estimate(rec) == doctest::Approx(-1.0).epsilon(0.01));
    CHECK(rec.x.back()[0] == doctest::Approx(std::exp(-5.0)).epsilon(1e-8));
}

TEST_CASE("closed loop decays, open loop example 4 does not") {
    const auto sys = example2_system(0.0, 3);
    SimulationOptions so;
    so.substeps = 2;
    const auto rec = integrate_closed_loop(sys, example2_gains(), paper_initial_state(sys), DisturbanceSpec{}, 30.0, so);
    CHECK_FALSE(rec.diverged);
    CHECK(decay_estimate(rec) < 0);
    CHECK(rec.x.back().norm() / rec.x.front().norm() < 1e-3);

    const auto s4 = example4_system(20);
    const auto open = integrate_closed_loop(s4, {}, paper_initial_state(s4), DisturbanceSpec{}, 30.0, so);
    CHECK((open.diverged || decay_estimate(open) > 0));
}

TEST_CASE("empirical gain: identity, homogeneity, certified bound") {
    SimulationRecord r;
    r.zz = {1.5, 0.5};
    r.ww = {0.5, 1.5};
    CHECK(l2_ratio(r) == doctest::Approx(1.0));
    r.ww = {0, 0};
    CHECK_THROWS(l2_ratio(r));

    const auto sys = example2_system(0.0, 3);
    SimulationOptions so;
    so.substeps = 2;
    const auto r1 = integrate_closed_loop(sys, example2_gains(), zero_state(sys), pulse(1.0), 20.0, so);
    const auto r2 = integrate_closed_loop(sys, example2_gains(), zero_state(sys), pulse(2.0), 20.0, so);
    CHECK(l2_ratio(r1) == doctest::Approx(l2_ratio(r2)).epsilon(1e-9));
    CHECK(l2_ratio(r1) <= 2.02 * 1.02);
    CHECK(r1.tail_fraction < 1e-6);
}

TEST_CASE("trajectories converge as the sampling period shrinks") {
    const auto base = example2_system(0.0, 3);
    std::vector<SimulationRecord> recs;
    for (double D : {0.02, 0.002, 0.0002}) {
        auto sys = base;
        sys.delta = D;
        SimulationOptions so;
        so.substeps = 4;
        so.auto_substeps = false;
        recs.push_back(integrate_closed_loop(sys, example2_gains(), paper_initial_state(sys), DisturbanceSpec{}, 1.0, so));
    }
    // compare at t = 0.02 m on the finest grid
    auto diff = [&](const SimulationRecord& a, long long stride_a) {
        double worst = 0;
        const auto& f = recs.back();
        const long long stride_f = 100;
        for (long long m = 0; m * stride_f < static_cast<long long>(f.x.size()) &&
                              m * stride_a < static_cast<long long>(a.x.size());
             ++m)
            worst = std::max(worst, (a.x[m * stride_a] - f.x[m * stride_f]).lpNorm<Eigen::Infinity>());
        return worst;
    };
    const double d0 = diff(recs[0], 1), d1 = diff(recs[1], 10);
    CHECK(d1 < d0);
    CHECK(d1 > 0);
}

TEST_CASE("disturbance family") {
    const auto fam = disturbance_family(3, 9);
    REQUIRE(fam.size() == 12);
    int random = 0, pulses = 0;
    for (const auto& f : fam) {
        random += f.kind == DisturbanceKind::SeededRandomSmooth;
        pulses += f.kind == DisturbanceKind::FinitePulse;
    }
    CHECK(random == 8);
    CHECK(pulses == 4);
    CHECK(fam[0].eval(1, 1, 10.0).norm() == 0.0);
}

}
