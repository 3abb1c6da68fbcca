#pragma once

#include "rrlmi/lmi.hpp"
#include "rrlmi/model.hpp"
#include "rrlmi/sdp.hpp"
#include "rrlmi/simulate.hpp"

#include <functional>
#include <random>
#include <vector>

namespace rrlmi {

// Function sampled on a uniform grid with exactly known derivative values.
struct SampledFunction {
    double a = 0, b = 1;
    std::vector<double> s;
    std::vector<Vec> v, dv;

    static SampledFunction from(std::function<Vec(double)> f, std::function<Vec(double)> df, double a, double b,
                                int panels);
    int dim() const { return v.empty() ? 0 : static_cast<int>(v.front().size()); }
};

// Composite Simpson over a uniform grid (even panel count).
double simpson(const std::vector<double>& values, double h);
Vec simpson(const std::vector<Vec>& values, double h);

struct Margin {
    double margin = 0; // >= 0 when the inequality holds
    double scale = 0;  // magnitude of the larger side, for relative tolerances
    double normalized() const { return margin / std::max(scale, 1e-300); }
};

// (b-a)^2 int zdot' R zdot - (pi^2/4) int z' R z
Margin check_lemma1(const SampledFunction& z, const Mat& R);
// int xdot' R xdot - (1/(b-a)) [U0; U1]' diag(R, 3R) [U0; U1]
Margin check_lemma2(const SampledFunction& x, const Mat& R);
// tau * sum_v (1/l_v) delta_v' Rhat delta_v - delta' Psi delta; lengths sum to tau.
Margin check_lemma3(const std::vector<Vec>& delta, const Mat& Rhat, const Mat& G, const std::vector<double>& lengths);

// Dense trajectory of one subsystem (record from integrate_closed_loop with dense_record + record_derivative).
struct Prop1Input {
    const SimulationRecord* rec = nullptr;
    const LargeScaleSystem* sys = nullptr;
    int i = 1;
    long long sample = 0; // index into rec->t; must lie strictly inside a sampling interval
    Mat R, G;
    double alpha = 0;
};
struct Prop1Result {
    double lhs_integral; // tau * int e^{2 alpha (s - t)} xdot' R xdot
    double quad_form;    // xi' Psibar xi
    Margin margin;       // integral - quad_form (>= 0 expected)
};
Prop1Result check_proposition1(const Prop1Input& in);

// Assemble xi for subsystem i at record index `sample` (states, held samples, running integrals).
Vec assemble_xi(const SimulationRecord& rec, const LargeScaleSystem& sys, int i, long long sample);

// delta = Y xi on an analytic test trajectory: xi from quadrature, delta from closed-form integrals.
double delta_Y_residual(int d, int n, double Delta, double theta, std::uint64_t seed);

// Random data helpers.
Mat random_psd(int n, std::mt19937_64& rng);
// G scaled by 0.99^k until the G coupling constraint holds with R-hat = diag(R, 3R).
Mat random_G_for(const Mat& Rhat, std::mt19937_64& rng);

struct SweepSummary {
    int draws = 0;
    double worst_normalized = INFINITY; // min over draws of margin/scale
    int failures = 0;                   // margins below -tol * scale
};
SweepSummary sweep_lemma1(int draws, std::uint64_t seed, double tol = 1e-9);
SweepSummary sweep_lemma2(int draws, std::uint64_t seed, double tol = 1e-9);
SweepSummary sweep_lemma3(int draws, int d, std::uint64_t seed, double tol = 1e-9);

struct TInvarianceReport {
    double gamma_ref = NAN;
    bool ref_feasible = false;
    std::vector<double> gammas;
    std::vector<bool> feasible;
    std::vector<SolveStatus> statuses;
    double max_rel_dev = NAN;
    bool all_feasible() const;
};
TInvarianceReport check_T_invariance(const LargeScaleSystem& sys, const SynthesisParams& params, int count,
                                     std::uint64_t seed, const SynthesisOptions& base = {},
                                     const SolverOptions& opts = {});

// Everything the property suite checks, in one pass.
struct OracleSuiteReport {
    SweepSummary lemma1, lemma2;
    std::vector<SweepSummary> lemma3; // d = 1, 2, 3
    std::vector<double> delta_Y;      // residuals over d and theta
    double delta_Y_max = 0;
    std::vector<Prop1Result> prop1;
    std::vector<std::pair<int, double>> prop1_points; // (i, t)
    double prop1_worst_normalized = INFINITY;
    bool prop1_closed_loop = false;
    double tol = 1e-9;

    bool lemmas_pass() const;
    bool delta_Y_pass() const { return delta_Y_max < 1e-6; }
    bool prop1_pass() const;
};
// Prop 1 points are drawn on a dense simulation of `sys` with the given gains (open loop if empty).
OracleSuiteReport run_oracle_suite(const LargeScaleSystem& sys, const std::vector<ControllerGains>& gains,
                                   double alpha, std::uint64_t seed, int draws = 500, int prop1_points = 20);

} // namespace rrlmi
