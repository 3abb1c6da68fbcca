#include "rrlmi/commands.hpp"

#include "rrlmi/oracles.hpp"
#include "rrlmi/protocol.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fs = std::filesystem;

namespace rrlmi {

SynthesisRun synthesize(const LargeScaleSystem& sys, const SynthesisParams& params, const SynthesisOptions& sopts,
                        const SolverOptions& opts) {
    SynthesisRun run;
    run.problem = build_synthesis_problem(sys, params, sopts);
    run.result = solve_synthesis(run.problem, opts);
    run.gamma_min = run.result.gamma;
    if (!params.minimize || !run.result.feasible || !(sopts.gain_backoff > 0)) return run;

    SynthesisParams fixed = params;
    fixed.minimize = false;
    fixed.gamma = run.gamma_min * (1.0 + sopts.gain_backoff);
    SynthesisProblem bp = build_synthesis_problem(sys, fixed, sopts);
    SynthesisResult br = solve_synthesis(bp, opts);
    if (br.feasible) {
        br.solve_seconds += run.result.solve_seconds;
        br.gamma = run.gamma_min;
        br.gamma_certified = fixed.gamma;
        run.problem = std::move(bp);
        run.result = std::move(br);
    } else {
        run.result.diagnostic += " gain back-off solve failed; gains are taken at the optimum.";
    }
    return run;
}

namespace {

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

json bandwidth_json(const LargeScaleSystem& sys) {
    const auto b = bandwidth(sys);
    return {{"round_robin_per_step", b.round_robin_per_step},
            {"broadcast_per_step", b.broadcast_per_step},
            {"saving", b.saving()}};
}

json nan_safe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_problem_exports(const ExperimentConfig& cfg, const SynthesisProblem& prob) {
    if (cfg.export_sdpa) {
        std::ofstream os(out_path(cfg, "problem.dat-s"));
        write_sdpa(os, ConicProgram::from(prob));
    }
    if (cfg.export_dump) {
        std::ofstream os(out_path(cfg, "constraints.txt"));
        write_constraint_dump(os, prob);
    }
}

// Synthesizes and writes gains/certificate/summary; returns the run.
SynthesisRun synthesize_and_write(const ExperimentConfig& cfg, const LargeScaleSystem& sys,
                                  const SynthesisParams& params, std::ostream& log) {
    SynthesisRun run = synthesize(sys, params, cfg.synthesis_options(), cfg.solver);
    const auto& r = run.result;
    write_problem_exports(cfg, run.problem);
    write_json_file(out_path(cfg, "certificate.json"), certificate_to_json(run.problem, r));
    if (r.feasible) write_json_file(out_path(cfg, "gains.json"), gains_to_json(r.gains));

    json summary;
    summary["config"] = config_to_json(cfg);
    summary["status"] = to_string(r.status);
    summary["feasible"] = r.feasible;
    summary["structure"] = to_string(cfg.structure);
    summary["gamma_min"] = nan_safe(run.gamma_min);
    summary["gamma_certified"] = nan_safe(r.gamma_certified);
    summary["min_constraint_eigenvalue"] = nan_safe(r.min_certificate_eig);
    summary["solve_seconds"] = r.solve_seconds;
    summary["iterations"] = r.outcome.iterations;
    summary["solver_message"] = r.outcome.message;
    summary["num_variables"] = run.problem.layout.size();
    summary["num_constraints"] = run.problem.constraints.size();
    summary["N"] = sys.N();
    summary["bandwidth"] = bandwidth_json(sys);
    if (!r.diagnostic.empty()) summary["diagnostic"] = r.diagnostic;
    write_json_file(out_path(cfg, "summary.json"), summary);

    log << "structure " << to_string(cfg.structure) << ": " << to_string(r.status)
        << (r.feasible ? " (feasible)" : " (not feasible)");
    if (r.feasible) log << " gamma_min = " << std::setprecision(8) << run.gamma_min;
    if (!r.outcome.message.empty()) log << "  [" << r.outcome.message << "]";
    log << "\n";
    if (!r.diagnostic.empty()) log << r.diagnostic << "\n";
    return run;
}

} // namespace

int run_synthesize(const ExperimentConfig& cfg, std::ostream& log) {
    const LargeScaleSystem sys = cfg.build_system();
    const SynthesisParams params = cfg.build_params(sys);
    const SynthesisRun run = synthesize_and_write(cfg, sys, params, log);
    return run.result.feasible ? kExitOk : kExitInfeasible;
}

int run_simulate(const ExperimentConfig& cfg, std::ostream& log) {
    const LargeScaleSystem sys = cfg.build_system();
    const SynthesisParams params = cfg.build_params(sys);

    std::vector<ControllerGains> gains;
    double gamma_cert = NAN;
    if (!cfg.gains_path.empty()) {
        gains = gains_from_json(read_json_file(cfg.gains_path));
        if (static_cast<int>(gains.size()) != sys.N()) throw ConfigError("gains file does not match the system size");
    } else {
        const SynthesisRun run = synthesize_and_write(cfg, sys, params, log);
        if (!run.result.feasible) {
            log << "no gains: synthesis infeasible\n";
            return kExitInfeasible;
        }
        gains = run.result.gains;
        gamma_cert = run.result.gamma_certified;
    }

    const DisturbanceSpec dist = cfg.disturbance_spec(sys.N());
    const double T = cfg.horizon > 0 ? cfg.horizon : default_horizon(dist, params);
    SimulationOptions so;
    so.substeps = cfg.substeps;
    so.record_stride = cfg.record_stride;
    so.audit_steps = cfg.audit_steps;
    const auto x0 = cfg.initial == "zero" ? zero_state(sys) : paper_initial_state(sys);
    const SimulationRecord rec = integrate_closed_loop(sys, gains, x0, dist, T, so);

    {
        std::ofstream os(out_path(cfg, "trajectories.csv"));
        write_trajectories_csv(os, sys, rec);
    }
    bool audit_ok = true;
    {
        std::ofstream os(out_path(cfg, "schedule_audit.csv"));
        os << "step,i,j,held_step,staleness_steps,d_i\n";
        for (const auto& a : rec.audit) {
            const int d = sys.sub(a.i).d();
            const long long stale = a.k - a.held_step;
            audit_ok = audit_ok && stale >= 0 && stale < d && a.held_step == held_step(a.i, a.j, a.k, sys);
            os << a.k << "," << a.i << "," << a.j << "," << a.held_step << "," << stale << "," << d << "\n";
        }
    }

    json m;
    m["config"] = config_to_json(cfg);
    m["horizon"] = T;
    m["substeps"] = rec.substeps;
    m["diverged"] = rec.diverged;
    if (rec.diverged) m["diverged_at"] = rec.diverged_at;
    const double n0 = rec.x.front().norm(), n1 = rec.x.back().norm();
    m["initial_norm"] = n0;
    m["final_norm"] = n1;
    m["final_ratio"] = n0 > 0 ? json(n1 / n0) : json(nullptr);
    if (n0 > 0 && !rec.diverged) {
        try {
            m["rho"] = decay_estimate(rec);
        } catch (const std::exception& e) {
            m["rho"] = nullptr;
            m["rho_note"] = e.what();
        }
    }
    m["output_energy"] = rec.total_zz();
    m["disturbance_energy"] = rec.total_ww();
    m["tail_fraction"] = rec.tail_fraction;
    m["transmissions"] = rec.transmissions;
    m["bandwidth"] = bandwidth_json(sys);
    m["schedule_audit_ok"] = audit_ok;
    m["gamma_certified"] = nan_safe(gamma_cert);
    if (rec.total_ww() > 0) m["gamma_empirical"] = l2_ratio(rec);

    if (cfg.disturbance == "family") {
        const auto fam = disturbance_family(sys.N(), cfg.seed, cfg.t_on, cfg.t_off);
        std::vector<SimulationRecord> recs(fam.size());
        SimulationOptions fo = so;
        fo.record_stride = 1000000;
        fo.audit_steps = 0;
        parallel_for(static_cast<int>(fam.size()), [&](int k) {
            const double Tk = cfg.horizon > 0 ? cfg.horizon : default_horizon(fam[k], params);
            recs[k] = integrate_closed_loop(sys, gains, zero_state(sys), fam[k], Tk, fo);
        });
        bool any_div = false;
        for (const auto& r : recs) any_div = any_div || r.diverged;
        if (any_div) {
            m["family_diverged"] = true;
        } else {
            const GainEstimate g = empirical_l2_gain(recs);
            m["gamma_empirical"] = g.gain;
            m["family_ratios"] = g.ratios;
            m["family_worst_tail_fraction"] = g.worst_tail_fraction;
            json kinds = json::array();
            for (const auto& f : fam) kinds.push_back(to_string(f.kind));
            m["family_kinds"] = kinds;
        }
        if (any_div) {
            write_json_file(out_path(cfg, "metrics.json"), m);
            log << "divergence in the disturbance family\n";
            return kExitDiverged;
        }
    }
    write_json_file(out_path(cfg, "metrics.json"), m);
    log << "simulated " << T << " s (" << rec.steps << " steps, " << rec.substeps << " RK4 substeps/step)";
    if (m.contains("rho") && m["rho"].is_number()) log << ", rho = " << m["rho"].get<double>();
    if (m.contains("gamma_empirical")) log << ", gamma_empirical = " << m["gamma_empirical"].get<double>();
    log << "\n";
    if (rec.diverged) {
        log << "divergence guard tripped at t = " << rec.diverged_at << "\n";
        return kExitDiverged;
    }
    return kExitOk;
}

namespace {

struct SweepRow {
    double key;
    SynthesisResult res;
};

void write_sweep(const std::string& path, const std::string& key, const std::vector<SweepRow>& rows) {
    std::ofstream os(path);
    os << key << ",gamma_min,status,feasible,iterations,solve_seconds\n" << std::setprecision(10);
    for (const auto& r : rows) {
        os << r.key << ",";
        if (r.res.feasible) os << r.res.gamma;
        os << "," << to_string(r.res.status) << "," << (r.res.feasible ? 1 : 0) << "," << r.res.outcome.iterations
           << "," << std::setprecision(4) << r.res.solve_seconds << std::setprecision(10) << "\n";
    }
}

} // namespace

int run_sweep_a(const ExperimentConfig& cfg, std::ostream& log) {
    if (cfg.system.builtin != "example2") throw ConfigError("sweep-a needs the builtin example2 system");
    const std::vector<double>& grid = cfg.a_grid;
    if (grid.empty()) throw ConfigError("sweep-a: empty a_grid");
    std::vector<SweepRow> rows(grid.size());
    SynthesisOptions so = cfg.synthesis_options();
    so.gain_backoff = 0; // gamma only
    parallel_for(static_cast<int>(grid.size()), [&](int k) {
        const auto sys = example2_system(grid[k], cfg.system.N, cfg.delta);
        rows[k] = {grid[k], minimize_gamma(sys, cfg.build_params(sys), so, cfg.solver)};
    });
    write_sweep(out_path(cfg, "sweep_a.csv"), "a", rows);
    int feasible = 0;
    for (const auto& r : rows) feasible += r.res.feasible;
    log << "sweep-a: " << feasible << "/" << rows.size() << " grid points feasible\n";
    return kExitOk;
}

int run_sweep_N(const ExperimentConfig& cfg, std::ostream& log) {
    if (cfg.system.builtin != "example2") throw ConfigError("sweep-N needs the builtin example2 system");
    const std::vector<int>& Ns = cfg.N_list;
    if (Ns.empty()) throw ConfigError("sweep-N: empty N_list");
    for (int n : Ns)
        if (n < 2) throw ConfigError("sweep-N: N must be >= 2");
    std::vector<SweepRow> rows(Ns.size());
    SynthesisOptions so = cfg.synthesis_options();
    so.gain_backoff = 0;
    parallel_for(static_cast<int>(Ns.size()), [&](int k) {
        const auto sys = example2_system(cfg.system.a, Ns[k], cfg.delta);
        rows[k] = {static_cast<double>(Ns[k]), minimize_gamma(sys, cfg.build_params(sys), so, cfg.solver)};
    });
    write_sweep(out_path(cfg, "sweep_N.csv"), "N", rows);
    int feasible = 0;
    for (const auto& r : rows) feasible += r.res.feasible;
    log << "sweep-N: " << feasible << "/" << rows.size() << " values feasible\n";
    return kExitOk;
}

int run_oracle_suite(const ExperimentConfig& cfg, std::ostream& log) {
    const LargeScaleSystem sys = cfg.build_system();
    const SynthesisParams params = cfg.build_params(sys);
    SynthesisOptions so = cfg.synthesis_options();

    const SynthesisRun run = synthesize(sys, params, so, cfg.solver);
    const double alpha = *std::min_element(params.alpha.begin(), params.alpha.end());
    const OracleSuiteReport rep =
        run_oracle_suite(sys, run.result.feasible ? run.result.gains : std::vector<ControllerGains>{}, alpha, cfg.seed);
    so.gain_backoff = 0;
    const TInvarianceReport ti = check_T_invariance(sys, params, 5, cfg.seed, so, cfg.solver);
    const bool ti_pass = ti.all_feasible() && ti.max_rel_dev <= 5e-3;

    auto sweep_json = [](const SweepSummary& s) {
        return json{{"draws", s.draws}, {"failures", s.failures}, {"worst_normalized_margin", s.worst_normalized}};
    };
    json j;
    j["config"] = config_to_json(cfg);
    j["lemma1"] = sweep_json(rep.lemma1);
    j["lemma2"] = sweep_json(rep.lemma2);
    for (size_t d = 0; d < rep.lemma3.size(); ++d) j["lemma3"]["d" + std::to_string(d + 1)] = sweep_json(rep.lemma3[d]);
    j["delta_Y"] = {{"max_residual", rep.delta_Y_max}, {"residuals", rep.delta_Y}};
    json pts = json::array();
    for (size_t k = 0; k < rep.prop1.size(); ++k)
        pts.push_back({{"i", rep.prop1_points[k].first},
                       {"t", rep.prop1_points[k].second},
                       {"lhs_integral", rep.prop1[k].lhs_integral},
                       {"quad_form", rep.prop1[k].quad_form},
                       {"normalized_margin", rep.prop1[k].margin.normalized()}});
    j["proposition1"] = {{"closed_loop", rep.prop1_closed_loop}, {"pass", rep.prop1_pass()}, {"points", pts}};
    json tij;
    tij["structure"] = to_string(so.structure);
    tij["reference_feasible"] = ti.ref_feasible;
    tij["gamma_ref"] = nan_safe(ti.gamma_ref);
    json gs = json::array();
    for (size_t k = 0; k < ti.gammas.size(); ++k)
        gs.push_back({{"gamma", nan_safe(ti.gammas[k])}, {"feasible", static_cast<bool>(ti.feasible[k])},
                      {"status", to_string(ti.statuses[k])}});
    tij["alternatives"] = gs;
    tij["max_rel_dev"] = nan_safe(ti.max_rel_dev);
    tij["pass"] = ti_pass;
    j["t_invariance"] = tij;
    const bool pass = rep.lemmas_pass() && rep.delta_Y_pass() && rep.prop1_pass() && ti_pass;
    j["pass"] = pass;
    write_json_file(out_path(cfg, "oracle_report.json"), j);

    log << "lemmas " << (rep.lemmas_pass() ? "ok" : "FAIL") << ", delta=Y xi " << (rep.delta_Y_pass() ? "ok" : "FAIL")
        << " (max " << rep.delta_Y_max << "), integral bound " << (rep.prop1_pass() ? "ok" : "FAIL")
        << ", T invariance " << (ti_pass ? "ok" : "FAIL") << " [" << to_string(so.structure)
        << (ti.ref_feasible ? "" : ", reference infeasible") << "]\n";
    return pass ? kExitOk : kExitFailure;
}

int run_command(const ExperimentConfig& cfg, std::ostream& log) {
    try {
        if (cfg.command == "synthesize") return run_synthesize(cfg, log);
        if (cfg.command == "simulate") return run_simulate(cfg, log);
        if (cfg.command == "sweep-a") return run_sweep_a(cfg, log);
        if (cfg.command == "sweep-N") return run_sweep_N(cfg, log);
        if (cfg.command == "oracle-suite") return run_oracle_suite(cfg, log);
        throw ConfigError("unknown command '" + cfg.command + "'");
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
}

} // namespace rrlmi
