#pragma once

#include "rrlmi/lmi.hpp"
#include "rrlmi/model.hpp"
#include "rrlmi/sdp.hpp"
#include "rrlmi/simulate.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace rrlmi {

using json = nlohmann::json;

json to_json(const Mat& M);
Mat matrix_from_json(const json& j, const std::string& what = "matrix");

// System description: {"delta", "subsystems": [{"A","B","E","C","F","neighbors":[{"j","Aij"}]}]}
json system_to_json(const LargeScaleSystem& sys);
LargeScaleSystem system_from_json(const json& j);
LargeScaleSystem load_system(const std::string& path);

json gains_to_json(const std::vector<ControllerGains>& gains);
std::vector<ControllerGains> gains_from_json(const json& j);

// Decision values by subsystem and variable name, plus solver status and Farkas data.
json certificate_to_json(const SynthesisProblem& prob, const SynthesisResult& res);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

// ---------------------------------------------------------------------------
// Experiment configuration (defaults are the Example 2 settings)
// ---------------------------------------------------------------------------

struct SystemSource {
    std::string builtin = "example2"; // "example2", "example4", or "" when path/inline is used
    double a = 0.0;                   // example2 coupling parameter
    int N = 10;
    std::string path;                 // JSON system file
    json inline_system;               // inline system description
};

struct ExperimentConfig {
    std::string command = "synthesize";
    SystemSource system;
    double delta = 0.0005;
    std::vector<double> alpha{0.4}; // one entry broadcasts to every subsystem
    std::vector<double> h{0.1};
    double eps = 1e-6;
    bool minimize = true;
    double gamma = 0.0;
    MultiplierStructure structure = MultiplierStructure::SharedU;
    double gain_backoff = 0.01;
    SolverOptions solver;

    // simulation
    double horizon = 0.0; // <= 0 -> default_horizon
    int substeps = 2;
    long long record_stride = 10;
    std::string disturbance = "zero"; // zero | pulse | sine | random | family
    double amplitude = 1.0, t_on = 0.0, t_off = 5.0, frequency = 0.5;
    std::string initial = "paper";    // paper | zero
    std::string gains_path;           // reuse gains.json instead of synthesizing
    long long audit_steps = 200;

    // sweeps
    std::vector<double> a_grid{-0.4, -0.35, -0.3, -0.25, -0.2, -0.15, -0.1, -0.05, 0.0,
                               0.05, 0.1,   0.15, 0.2,   0.25, 0.3,   0.35, 0.4};
    std::vector<int> N_list{4, 6, 8, 10, 12};

    std::uint64_t seed = 1;
    std::string out_dir = "out";
    bool export_sdpa = false;
    bool export_dump = false;

    LargeScaleSystem build_system() const;
    SynthesisParams build_params(const LargeScaleSystem& sys) const;
    SynthesisOptions synthesis_options() const;
    DisturbanceSpec disturbance_spec(int N) const;
};

// Missing keys take defaults; unknown keys are rejected (ConfigError).
ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& c); // fully resolved

// Runs fn(0..n-1) on up to RRLMI_THREADS workers (default: hardware concurrency).
void parallel_for(int n, const std::function<void(int)>& fn);
int worker_count();

} // namespace rrlmi
