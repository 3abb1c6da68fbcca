#pragma once

#include "rrlmi/affine.hpp"
#include "rrlmi/lmi.hpp"

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace rrlmi {

struct SolverOptions {
    int max_iterations = 120;
    double feas_tol = 1e-8;
    double gap_tol = 1e-8;
    // Relative threshold for accepting a Farkas ray as an infeasibility proof.
    double infeas_tol = 1e-8;
    // Fallbacks when the iteration stalls: best iterate accepted against these looser tolerances.
    double relaxed_tol = 1e-6;
    double relaxed_infeas_tol = 1e-5;
    bool verbose = false;
};

// min c^T y  s.t. every constraint holds (each normalized to F0 + sum y_a F_a >= 0).
struct ConicProgram {
    int num_vars = 0;
    Vec objective;
    std::vector<AffinePsdConstraint> constraints;
    SolverOptions options;

    static ConicProgram from(const SynthesisProblem& p);
};

enum class SolveStatus { Optimal, Infeasible, MaxIter, NumericalError };
std::string to_string(SolveStatus s);

struct SolveOutcome {
    SolveStatus status = SolveStatus::NumericalError;
    Vec y;                   // present iff Optimal or MaxIter
    double objective = NAN;  // c^T y
    double max_violation = NAN;
    int iterations = 0;
    double primal_residual = NAN, dual_residual = NAN, rel_gap = NAN;
    std::string message;
    // Farkas certificate when Infeasible: Z_k >= 0 with sum_k <F_a,k, Z_k> ~ 0, sum_k <F0_k, Z_k> = -1.
    std::vector<Mat> certificate;
    // Dual matrices (original scaling) when values are present.
    std::vector<Mat> dual;
    // Optimal value of max t s.t. F(y) >= tI when the phase-one fallback ran.
    double phase_one_margin = NAN;

    bool has_values() const { return status == SolveStatus::Optimal || status == SolveStatus::MaxIter; }
};

// The single reference backend: homogeneous self-dual primal-dual interior point
// method with Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
SolveOutcome solve(const ConicProgram& program);

struct FarkasCheck {
    double min_eig = NAN;          // smallest eigenvalue over the Z_k
    double max_abs_adjoint = NAN;  // max_a |sum_k <F_a,k, Z_k>|
    double f0_inner = NAN;         // sum_k <F0_k, Z_k>  (< 0 proves infeasibility)
    double worst_coefficient_norm_ratio = NAN;
    bool proves_infeasible(double tol = 1e-6) const;
};
FarkasCheck check_farkas(const ConicProgram& program, const std::vector<Mat>& Z);

// SDPA sparse (.dat-s) export of: min c^T y s.t. sum y_a F_a - (-F0) >= 0.
void write_sdpa(std::ostream& os, const ConicProgram& program);

// ---------------------------------------------------------------------------
// Synthesis drivers
// ---------------------------------------------------------------------------

struct SynthesisResult {
    SolveStatus status = SolveStatus::NumericalError;
    bool feasible = false;
    double gamma = NAN; // sqrt(s) at the optimum, or the fixed gamma
    double gamma_certified = NAN; // gamma the returned gains/certificate satisfy (>= gamma after back-off)
    std::vector<ControllerGains> gains;
    Vec certificate;    // all decision values
    double min_certificate_eig = NAN; // replay margin over all constraints
    std::string worst_constraint;
    SolveOutcome outcome;
    std::string diagnostic;
    double solve_seconds = 0.0;
};

SynthesisResult solve_synthesis(const SynthesisProblem& prob, const SolverOptions& opts = {});
SynthesisResult minimize_gamma(const LargeScaleSystem& sys, const SynthesisParams& params,
                               const SynthesisOptions& sopts = {}, const SolverOptions& opts = {});
SynthesisResult feasibility_at_gamma(const LargeScaleSystem& sys, SynthesisParams params, double gamma,
                                     const SynthesisOptions& sopts = {}, const SolverOptions& opts = {});
// Bisection on gamma using fixed-gamma feasibility; [lo, hi] must bracket the optimum.
SynthesisResult bisect_gamma(const LargeScaleSystem& sys, const SynthesisParams& params, double lo, double hi,
                             double rel_width = 1e-4, const SynthesisOptions& sopts = {},
                             const SolverOptions& opts = {});

} // namespace rrlmi
