#include <doctest.h>

#include "rrlmi/sdp.hpp"

#include <Eigen/Eigenvalues>
#include <random>
#include <sstream>

using namespace rrlmi;

namespace {

// s I - M >= 0 over the scalar s.
ConicProgram lambda_max_program(const Mat& M) {
    ConicProgram cp;
    cp.num_vars = 1;
    cp.objective = Vec::Ones(1);
    AffinePsdConstraint c;
    c.label = "lmax";
    c.expr = AffineMat(Mat(-M));
    c.expr.add_term(0, Mat::Identity(M.rows(), M.cols()));
    cp.constraints.push_back(c);
    return cp;
}

} // namespace

TEST_SUITE("sdp") {

TEST_CASE("lambda max of a fixed matrix") {
    Mat M(2, 2);
    M << 2, 1, 1, 1;
    auto out = solve(lambda_max_program(M));
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.y[0] == doctest::Approx((3 + std::sqrt(5.0)) / 2).epsilon(1e-7));

    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 5; ++rep) {
        Mat R(6, 6);
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b) R(a, b) = nd(rng);
        const Mat S = R + R.transpose();
        Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
        out = solve(lambda_max_program(S));
        REQUIRE(out.status == SolveStatus::Optimal);
        CHECK(out.y[0] == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-6));
        CHECK(out.max_violation < 1e-6);
    }
}

TEST_CASE("constant negative definite constraint is infeasible") {
    ConicProgram cp;
    cp.num_vars = 1;
    cp.objective = Vec::Zero(1);
    AffinePsdConstraint c;
    c.label = "neg";
    c.expr = AffineMat(Mat(-Mat::Identity(3, 3)));
    c.expr.add_term(0, Mat::Zero(3, 3));
    cp.constraints.push_back(c);
    const auto out = solve(cp);
    CHECK(out.status == SolveStatus::Infeasible);
    REQUIRE_FALSE(out.certificate.empty());
    CHECK(check_farkas(cp, out.certificate).proves_infeasible());
}

TEST_CASE("interval feasibility") {
    ConicProgram cp;
    cp.num_vars = 1;
    cp.objective = Vec::Zero(1);
    AffinePsdConstraint c;
    c.label = "interval";
    Mat c0 = Mat::Zero(2, 2);
    c0(1, 1) = 1;
    c.expr = AffineMat(c0);
    c.expr.add_term(0, (Mat(2, 2) << 1, 0, 0, -1).finished());
    cp.constraints.push_back(c);
    const auto out = solve(cp);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.y[0] >= -1e-7);
    CHECK(out.y[0] <= 1 + 1e-7);
}

TEST_CASE("negative definite sense with margin") {
    // -s + 1 <= -eps  ->  min s = 1 + eps
    ConicProgram cp;
    cp.num_vars = 1;
    cp.objective = Vec::Ones(1);
    AffinePsdConstraint c;
    c.label = "nd";
    c.expr = AffineMat(Mat::Ones(1, 1));
    c.expr.add_term(0, -Mat::Ones(1, 1));
    c.sense = Sense::NegativeDefiniteMargin;
    c.margin = 1e-3;
    cp.constraints.push_back(c);
    const auto out = solve(cp);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.y[0] == doctest::Approx(1.001).epsilon(1e-7));
}

TEST_CASE("SDPA export") {
    Mat M(2, 2);
    M << 2, 1, 1, 1;
    std::ostringstream os;
    write_sdpa(os, lambda_max_program(M));
    const std::string s = os.str();
    CHECK(s.find("1 = mDIM") != std::string::npos);
    CHECK(s.find("1 = nBLOCK") != std::string::npos);
}

TEST_CASE("example 2 with the zero-top multipliers gives gamma near 2") {
    const auto sys = example2_system(0.0, 4);
    SynthesisOptions so;
    so.structure = MultiplierStructure::ZeroTop;
    const auto r = minimize_gamma(sys, SynthesisParams::uniform(4, 0.4, 0.1), so);
    REQUIRE(r.feasible);
    CHECK(r.gamma == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(r.gamma_certified >= r.gamma);
    CHECK(r.min_certificate_eig > -1e-7);
    CHECK(r.gains.size() == 4);

    // monotonicity around the optimum
    const auto hi = feasibility_at_gamma(sys, SynthesisParams::uniform(4, 0.4, 0.1), 1.1 * r.gamma, so);
    const auto lo = feasibility_at_gamma(sys, SynthesisParams::uniform(4, 0.4, 0.1), 0.5 * r.gamma, so);
    CHECK(hi.feasible);
    CHECK_FALSE(lo.feasible);
}

TEST_CASE("example 2 with the shared-U multipliers is certified infeasible") {
    const auto sys = example2_system(0.0, 3);
    const auto prob = build_synthesis_problem(sys, SynthesisParams::uniform(3, 0.4, 0.1));
    const auto r = solve_synthesis(prob);
    CHECK(r.status == SolveStatus::Infeasible);
    CHECK_FALSE(r.feasible);
    REQUIRE_FALSE(r.outcome.certificate.empty());
    const auto fc = check_farkas(ConicProgram::from(prob), r.outcome.certificate);
    CHECK(fc.f0_inner < 0);
    CHECK(fc.proves_infeasible(1e-5));
}

}
