#pragma once

#include "rrlmi/io.hpp"

#include <ostream>

namespace rrlmi {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitInfeasible = 2, kExitDiverged = 3, kExitConfig = 4 };

struct SynthesisRun {
    SynthesisProblem problem; // the problem the reported certificate belongs to
    SynthesisResult result;
    double gamma_min = NAN;
};

// Minimization (or fixed-gamma feasibility) plus the gain back-off re-solve.
SynthesisRun synthesize(const LargeScaleSystem& sys, const SynthesisParams& params, const SynthesisOptions& sopts,
                        const SolverOptions& opts);

int run_synthesize(const ExperimentConfig& cfg, std::ostream& log);
int run_simulate(const ExperimentConfig& cfg, std::ostream& log);
int run_sweep_a(const ExperimentConfig& cfg, std::ostream& log);
int run_sweep_N(const ExperimentConfig& cfg, std::ostream& log);
int run_oracle_suite(const ExperimentConfig& cfg, std::ostream& log);

// Dispatch on cfg.command; ConfigError -> 4.
int run_command(const ExperimentConfig& cfg, std::ostream& log);

} // namespace rrlmi
