#include <doctest.h>

#include "rrlmi/model.hpp"

using namespace rrlmi;

namespace {

bool mentions(const std::vector<Violation>& v, const std::string& needle) {
    for (const auto& x : v)
        if (x.message.find(needle) != std::string::npos) return true;
    return false;
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("example 2 chain validates") {
    const auto sys = example2_system(0.0, 10);
    CHECK(validate_system(sys).empty());
    CHECK(sys.N() == 10);
    CHECK(sys.sub(5).neighbors() == std::vector<int>{4, 6});
    CHECK(sys.sub(5).d() == 2);
    CHECK(sys.sub(1).neighbors() == std::vector<int>{2});
}

TEST_CASE("smallest chain") {
    const auto sys = example2_system(0.0, 2);
    CHECK(sys.sub(1).neighbors() == std::vector<int>{2});
    CHECK(sys.sub(2).neighbors() == std::vector<int>{1});
    CHECK_THROWS_AS(example2_system(0.0, 1), ConfigError);
}

TEST_CASE("example 2 matrices") {
    const auto sys = example2_system(0.0, 10);
    Mat expect(2, 2);
    expect << -1.1, -0.3, 0.0, -1.0;
    CHECK((sys.sub(4).A - expect).norm() < 1e-14);
    CHECK(sys.sub(4).F(0, 0) == doctest::Approx(2.0));
    CHECK(sys.sub(4).C(0, 0) == doctest::Approx(0.1));
    CHECK(sys.sub(4).C(0, 1) == doctest::Approx(0.0));

    // a = 0.4: A_a = [[-0.3, -0.1], [0, -0.76]]; the boundary subsystem adds one coupling block.
    const auto s4 = example2_system(0.4, 3);
    Mat Aa(2, 2), Ab(2, 2);
    Aa << -0.3, -0.1, 0.0, -0.76;
    Ab << -0.2, -0.1 + 0.08, 0.0, -0.1;
    CHECK((s4.sub(1).A - (Aa + Ab)).norm() < 1e-14);
    CHECK((s4.sub(2).A - (Aa + 2 * Ab)).norm() < 1e-14);
    CHECK(s4.sub(2).F(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("example 4 matrices") {
    const auto sys = example4_system(100);
    CHECK(validate_system(sys).empty());
    CHECK(sys.sub(3).A(0, 0) == doctest::Approx(0.2));
    CHECK(sys.sub(3).A(0, 1) == doctest::Approx(0.1875));
    CHECK(sys.sub(3).A(1, 0) == doctest::Approx(0.0));
    CHECK(sys.sub(3).A(1, 1) == doctest::Approx(-1.2));
    CHECK(sys.sub(4).A(0, 0) == doctest::Approx(-1.9));
    CHECK(sys.sub(1).d() == 1);
    CHECK(sys.sub(100).d() == 1);
    int sum_d = 0, twos = 0;
    for (const auto& s : sys.subsystems) {
        sum_d += s.d();
        twos += s.d() == 2;
    }
    CHECK(twos == 98);
    CHECK(sum_d == 2 * (100 - 1));
}

TEST_CASE("example 4 open loop has 25 unstable eigenvalues") {
    const auto sys = example4_system(100);
    const Mat A = assemble_open_loop_A(sys);
    CHECK(A.rows() == 200);
    CHECK(count_unstable_eigenvalues(A) == 25);
}

TEST_CASE("validation catches malformed subsystems") {
    auto sys = example2_system(0.0, 3);
    sys.subsystems[1].B.setZero();
    CHECK(mentions(validate_system(sys), "B not full column rank"));

    auto dup = example2_system(0.0, 3);
    dup.subsystems[0].couplings = {dup.subsystems[0].couplings[0], dup.subsystems[0].couplings[0]};
    CHECK(mentions(validate_system(dup), "duplicate neighbor"));

    auto self = example2_system(0.0, 3);
    self.subsystems[0].couplings[0].j = 1;
    CHECK(mentions(validate_system(self), "self-loop"));

    auto lonely = example2_system(0.0, 3);
    lonely.subsystems[0].couplings.clear();
    CHECK(mentions(validate_system(lonely), "d_i = 0"));
    CHECK_THROWS_AS(require_valid(lonely), ConfigError);
}

TEST_CASE("parameter bound h < 2 alpha / d") {
    const auto sys = example2_system(0.0, 10);
    CHECK(validate_params(sys, SynthesisParams::uniform(10, 0.4, 0.1)).empty());
    // Interior subsystems have d = 2, so the bound is h < alpha.
    CHECK_FALSE(validate_params(sys, SynthesisParams::uniform(10, 0.4, 0.4)).empty());
    CHECK_FALSE(validate_params(sys, SynthesisParams::uniform(10, -0.1, 0.01)).empty());
}

TEST_CASE("state offsets") {
    const auto sys = example4_system(5);
    CHECK(sys.total_states() == 10);
    CHECK(sys.state_offset(1) == 0);
    CHECK(sys.state_offset(4) == 6);
    CHECK(sys.coupled_states(1) == 2);
    CHECK(sys.coupled_states(3) == 4);
    CHECK(sys.tau(3) == doctest::Approx(2 * 0.0005));
}

}
