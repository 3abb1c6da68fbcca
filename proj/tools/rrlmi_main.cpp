#include "rrlmi/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace rrlmi;

int main(int argc, char** argv) {
    CLI::App app{"Distributed L2-gain controller synthesis under the Round-Robin protocol"};
    app.set_help_all_flag("--help-all");

    std::string command, config_path, out_dir, system, structure, disturbance, gains_path;
    std::uint64_t seed = 0;
    double a = NAN, gamma = NAN, alpha = NAN, h = NAN, horizon = NAN, eps = NAN;
    int N = 0, substeps = 0;
    bool sdpa = false, dump = false, verbose = false, print_config = false;

    app.add_option("command", command, "synthesize | simulate | sweep-a | sweep-N | oracle-suite")
        ->required()
        ->check(CLI::IsMember({"synthesize", "simulate", "sweep-a", "sweep-N", "oracle-suite"}));
    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "seed for random disturbances and oracles");
    app.add_option("--system", system, "example2 | example4 | path to a system JSON");
    app.add_option("--a", a, "example2 coupling parameter");
    app.add_option("--N", N, "number of subsystems for builtin systems");
    app.add_option("--structure", structure, "multiplier structure: shared-U (default) | zero-top");
    app.add_option("--gamma", gamma, "fixed gamma (feasibility) instead of minimizing");
    app.add_option("--alpha", alpha, "decay alpha_i for all subsystems");
    app.add_option("--h_i", h, "h_i for all subsystems");
    app.add_option("--eps", eps, "strictness margin");
    app.add_option("--disturbance", disturbance, "zero | pulse | sine | random | family");
    app.add_option("--horizon", horizon, "simulation horizon in seconds");
    app.add_option("--substeps", substeps, "RK4 substeps per sampling period");
    app.add_option("--gains", gains_path, "reuse a gains.json instead of synthesizing");
    app.add_flag("--sdpa", sdpa, "also write the lowered SDP in SDPA sparse format");
    app.add_flag("--dump", dump, "also write the plain-text constraint dump");
    app.add_flag("--verbose", verbose, "solver iteration log on stderr");
    app.add_flag("--print-config", print_config, "print the resolved config and exit");

    CLI11_PARSE(app, argc, argv);

    ExperimentConfig cfg;
    try {
        json j = config_path.empty() ? json::object() : read_json_file(config_path);
        j["command"] = command;
        if (!system.empty()) {
            if (system == "example2" || system == "example4") {
                json s = j.contains("system") && j["system"].is_object() && !j["system"].contains("subsystems") &&
                                 !j["system"].contains("path")
                             ? j["system"]
                             : json::object();
                s["builtin"] = system;
                if (system == "example4" && !s.contains("N")) s["N"] = 100;
                j["system"] = s;
            } else {
                j["system"] = {{"path", system}};
            }
        }
        auto sys_obj = [&]() -> json& {
            if (!j.contains("system") || !j["system"].is_object()) j["system"] = {{"builtin", "example2"}};
            return j["system"];
        };
        if (!std::isnan(a)) sys_obj()["a"] = a;
        if (N > 0) sys_obj()["N"] = N;
        if (!structure.empty()) j["params"]["structure"] = structure;
        if (!std::isnan(gamma)) j["params"]["gamma"] = gamma;
        if (!std::isnan(alpha)) j["params"]["alpha"] = alpha;
        if (!std::isnan(h)) j["params"]["h"] = h;
        if (!std::isnan(eps)) j["params"]["eps"] = eps;
        if (!disturbance.empty()) j["simulation"]["disturbance"] = disturbance;
        if (!std::isnan(horizon)) j["simulation"]["horizon"] = horizon;
        if (substeps > 0) j["simulation"]["substeps"] = substeps;
        if (!gains_path.empty()) j["simulation"]["gains"] = gains_path;
        if (!out_dir.empty()) j["output"]["dir"] = out_dir;
        if (sdpa) j["output"]["sdpa"] = true;
        if (dump) j["output"]["dump"] = true;
        if (verbose) j["solver"]["verbose"] = true;
        if (*seed_opt) j["seed"] = seed;
        cfg = config_from_json(j);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (print_config) {
        std::cout << config_to_json(cfg).dump(2) << "\n";
        return kExitOk;
    }
    try {
        return run_command(cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
