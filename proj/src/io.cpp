#include "rrlmi/io.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <set>
#include <thread>

namespace rrlmi {

json to_json(const Mat& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_json(const json& j, const std::string& what) {
    if (j.is_number()) return Mat::Constant(1, 1, j.get<double>());
    if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a non-empty array of rows");
    // A flat array is read as a column vector.
    if (!j.front().is_array()) {
        Mat M(j.size(), 1);
        for (size_t r = 0; r < j.size(); ++r) {
            if (!j[r].is_number()) throw ConfigError(what + ": non-numeric entry");
            M(r, 0) = j[r].get<double>();
        }
        return M;
    }
    const size_t cols = j.front().size();
    Mat M(j.size(), cols);
    for (size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(what + ": ragged rows");
        for (size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw ConfigError(what + ": non-numeric entry");
            M(r, c) = j[r][c].get<double>();
        }
    }
    return M;
}

json system_to_json(const LargeScaleSystem& sys) {
    json subs = json::array();
    for (const auto& s : sys.subsystems) {
        json nb = json::array();
        for (const auto& c : s.couplings) nb.push_back({{"j", c.j}, {"Aij", to_json(c.Aij)}});
        subs.push_back({{"A", to_json(s.A)},
                        {"B", to_json(s.B)},
                        {"E", to_json(s.E)},
                        {"C", to_json(s.C)},
                        {"F", to_json(s.F)},
                        {"neighbors", nb}});
    }
    return {{"delta", sys.delta}, {"subsystems", subs}};
}

LargeScaleSystem system_from_json(const json& j) {
    if (!j.is_object() || !j.contains("subsystems")) throw ConfigError("system: missing 'subsystems'");
    LargeScaleSystem sys;
    sys.delta = j.value("delta", 0.0005);
    int idx = 0;
    for (const auto& js : j.at("subsystems")) {
        ++idx;
        const std::string w = "subsystem " + std::to_string(idx);
        SubsystemModel s;
        s.index = idx;
        for (const char* key : {"A", "B", "E", "C", "F"})
            if (!js.contains(key)) throw ConfigError(w + ": missing '" + key + "'");
        s.A = matrix_from_json(js.at("A"), w + ".A");
        s.B = matrix_from_json(js.at("B"), w + ".B");
        s.E = matrix_from_json(js.at("E"), w + ".E");
        s.C = matrix_from_json(js.at("C"), w + ".C");
        s.F = matrix_from_json(js.at("F"), w + ".F");
        for (const auto& nb : js.value("neighbors", json::array())) {
            if (!nb.contains("j") || !nb.contains("Aij")) throw ConfigError(w + ": neighbor needs 'j' and 'Aij'");
            s.couplings.push_back({nb.at("j").get<int>(), matrix_from_json(nb.at("Aij"), w + ".Aij")});
        }
        sys.subsystems.push_back(std::move(s));
    }
    const auto v = validate_system(sys);
    if (!v.empty()) {
        std::string msg = "invalid system:";
        for (const auto& e : v) msg += " [" + std::to_string(e.subsystem) + "] " + e.message + ";";
        throw ConfigError(msg);
    }
    return sys;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

LargeScaleSystem load_system(const std::string& path) { return system_from_json(read_json_file(path)); }

json gains_to_json(const std::vector<ControllerGains>& gains) {
    json arr = json::array();
    for (const auto& g : gains) {
        json kij = json::array();
        for (const auto& c : g.Kij) kij.push_back({{"j", c.j}, {"K", to_json(c.Aij)}});
        arr.push_back({{"i", g.i}, {"Kii", to_json(g.Kii)}, {"Kij", kij}, {"cond_U", g.cond_U}});
    }
    return {{"gains", arr}};
}

std::vector<ControllerGains> gains_from_json(const json& j) {
    const json& arr = j.is_object() ? j.at("gains") : j;
    std::vector<ControllerGains> out;
    for (const auto& g : arr) {
        ControllerGains c;
        c.i = g.at("i").get<int>();
        c.Kii = matrix_from_json(g.at("Kii"), "Kii");
        for (const auto& k : g.at("Kij")) c.Kij.push_back({k.at("j").get<int>(), matrix_from_json(k.at("K"), "Kij")});
        c.cond_U = g.value("cond_U", 0.0);
        out.push_back(std::move(c));
    }
    return out;
}

json certificate_to_json(const SynthesisProblem& prob, const SynthesisResult& res) {
    json j;
    j["status"] = to_string(res.status);
    j["feasible"] = res.feasible;
    j["solver_message"] = res.outcome.message;
    j["iterations"] = res.outcome.iterations;
    if (res.certificate.size() == prob.layout.size()) {
        j["min_constraint_eigenvalue"] = res.min_certificate_eig;
        j["worst_constraint"] = res.worst_constraint;
        json vars = json::object();
        for (const auto& b : prob.layout.blocks()) {
            const std::string key = b.subsystem == 0 ? "global" : std::to_string(b.subsystem);
            if (b.rows * b.cols == 0) continue;
            vars[key][b.name] = to_json(prob.layout.value(b.subsystem, b.name, res.certificate));
        }
        j["variables"] = vars;
    }
    if (res.status == SolveStatus::Infeasible && !res.outcome.certificate.empty()) {
        const FarkasCheck fc = check_farkas(ConicProgram::from(prob), res.outcome.certificate);
        json cert = json::object();
        cert["f0_inner"] = fc.f0_inner;
        cert["min_eig"] = fc.min_eig;
        cert["max_abs_adjoint"] = fc.max_abs_adjoint;
        cert["worst_coefficient_norm_ratio"] = fc.worst_coefficient_norm_ratio;
        cert["proves_infeasible"] = fc.proves_infeasible();
        if (!std::isnan(res.outcome.phase_one_margin)) cert["phase_one_margin"] = res.outcome.phase_one_margin;
        json weights = json::object();
        for (size_t k = 0; k < prob.constraints.size(); ++k)
            weights[prob.constraints[k].label] =
                (prob.constraints[k].standard_constant().array() * res.outcome.certificate[k].array()).sum();
        cert["f0_share_by_constraint"] = weights;
        j["farkas"] = cert;
    }
    if (!res.diagnostic.empty()) j["diagnostic"] = res.diagnostic;
    return j;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> number_or_list(const json& j, const std::string& key) {
    if (j.is_number()) return {j.get<double>()};
    if (j.is_array()) {
        std::vector<double> v;
        for (const auto& e : j) v.push_back(e.get<double>());
        if (v.empty()) throw ConfigError(key + ": empty list");
        return v;
    }
    throw ConfigError(key + ": expected a number or a list of numbers");
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

std::vector<double> broadcast(const std::vector<double>& v, int N, const char* what) {
    if (v.size() == 1) return std::vector<double>(N, v[0]);
    if (static_cast<int>(v.size()) != N)
        throw ConfigError(std::string(what) + ": expected 1 or N=" + std::to_string(N) + " values");
    return v;
}

} // namespace

LargeScaleSystem ExperimentConfig::build_system() const {
    LargeScaleSystem sys;
    if (!system.inline_system.is_null())
        sys = system_from_json(system.inline_system);
    else if (!system.path.empty())
        sys = load_system(system.path);
    else if (system.builtin == "example2")
        sys = example2_system(system.a, system.N, delta);
    else if (system.builtin == "example4")
        sys = example4_system(system.N, delta);
    else
        throw ConfigError("system: unknown builtin '" + system.builtin + "'");
    // Builtins take params.delta; file-provided systems keep their own delta.
    return sys;
}

SynthesisParams ExperimentConfig::build_params(const LargeScaleSystem& sys) const {
    SynthesisParams p;
    p.alpha = broadcast(alpha, sys.N(), "alpha");
    p.h = broadcast(h, sys.N(), "h");
    p.eps = eps;
    p.minimize = minimize;
    p.gamma = gamma;
    const auto v = validate_params(sys, p);
    if (!v.empty()) {
        std::string msg = "invalid parameters:";
        for (const auto& e : v) msg += " [" + std::to_string(e.subsystem) + "] " + e.message + ";";
        throw ConfigError(msg);
    }
    return p;
}

SynthesisOptions ExperimentConfig::synthesis_options() const {
    SynthesisOptions o;
    o.structure = structure;
    o.gain_backoff = gain_backoff;
    return o;
}

DisturbanceSpec ExperimentConfig::disturbance_spec(int N) const {
    (void)N;
    DisturbanceSpec d;
    d.amplitude = {amplitude};
    d.t_on = t_on;
    d.t_off = t_off;
    d.frequency = frequency;
    d.seed = seed;
    if (disturbance == "zero" || disturbance == "family")
        d.kind = DisturbanceKind::Zero;
    else if (disturbance == "pulse")
        d.kind = DisturbanceKind::FinitePulse;
    else if (disturbance == "sine")
        d.kind = DisturbanceKind::WindowedSine;
    else if (disturbance == "random")
        d.kind = DisturbanceKind::SeededRandomSmooth;
    else
        d.kind = disturbance_kind_from_string(disturbance);
    return d;
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown(j, {"command", "system", "params", "solver", "simulation", "sweep", "output", "seed"}, "config");
    ExperimentConfig c;
    try {
        c.command = j.value("command", c.command);
        if (j.contains("system")) {
            const json& s = j.at("system");
            if (s.is_string()) {
                const std::string v = s.get<std::string>();
                if (v == "example2" || v == "example4")
                    c.system.builtin = v;
                else {
                    c.system.builtin.clear();
                    c.system.path = v;
                }
            } else if (s.contains("subsystems")) {
                c.system.builtin.clear();
                c.system.inline_system = s;
            } else {
                reject_unknown(s, {"builtin", "a", "N", "path"}, "system");
                if (s.contains("path")) {
                    c.system.builtin.clear();
                    c.system.path = s.at("path").get<std::string>();
                } else {
                    c.system.builtin = s.value("builtin", c.system.builtin);
                }
                c.system.a = s.value("a", c.system.a);
                c.system.N = s.value("N", c.system.builtin == "example4" ? 100 : c.system.N);
            }
            if (c.system.builtin == "example4" && !(s.is_object() && s.contains("N"))) c.system.N = 100;
        }
        if (j.contains("params")) {
            const json& p = j.at("params");
            reject_unknown(p, {"delta", "alpha", "h", "eps", "gamma", "structure", "gain_backoff"}, "params");
            c.delta = p.value("delta", c.delta);
            if (p.contains("alpha")) c.alpha = number_or_list(p.at("alpha"), "alpha");
            if (p.contains("h")) c.h = number_or_list(p.at("h"), "h");
            c.eps = p.value("eps", c.eps);
            if (p.contains("gamma")) {
                if (p.at("gamma").is_string()) {
                    if (p.at("gamma").get<std::string>() != "minimize") throw ConfigError("params.gamma: number or \"minimize\"");
                    c.minimize = true;
                } else {
                    c.minimize = false;
                    c.gamma = p.at("gamma").get<double>();
                }
            }
            if (p.contains("structure"))
                c.structure = multiplier_structure_from_string(p.at("structure").get<std::string>());
            c.gain_backoff = p.value("gain_backoff", c.gain_backoff);
        }
        if (j.contains("solver")) {
            const json& s = j.at("solver");
            reject_unknown(s, {"max_iterations", "tol", "verbose"}, "solver");
            c.solver.max_iterations = s.value("max_iterations", c.solver.max_iterations);
            if (s.contains("tol")) c.solver.feas_tol = c.solver.gap_tol = c.solver.infeas_tol = s.at("tol").get<double>();
            c.solver.verbose = s.value("verbose", false);
        }
        if (j.contains("simulation")) {
            const json& s = j.at("simulation");
            reject_unknown(s, {"horizon", "substeps", "record_stride", "disturbance", "amplitude", "t_on", "t_off",
                               "frequency", "initial", "gains", "audit_steps"},
                           "simulation");
            c.horizon = s.value("horizon", c.horizon);
            c.substeps = s.value("substeps", c.substeps);
            c.record_stride = s.value("record_stride", c.record_stride);
            c.disturbance = s.value("disturbance", c.disturbance);
            c.amplitude = s.value("amplitude", c.amplitude);
            c.t_on = s.value("t_on", c.t_on);
            c.t_off = s.value("t_off", c.t_off);
            c.frequency = s.value("frequency", c.frequency);
            c.initial = s.value("initial", c.initial);
            c.gains_path = s.value("gains", c.gains_path);
            c.audit_steps = s.value("audit_steps", c.audit_steps);
        }
        if (j.contains("sweep")) {
            const json& s = j.at("sweep");
            reject_unknown(s, {"a_grid", "N_list"}, "sweep");
            if (s.contains("a_grid")) c.a_grid = number_or_list(s.at("a_grid"), "a_grid");
            if (s.contains("N_list")) c.N_list = s.at("N_list").get<std::vector<int>>();
        }
        if (j.contains("output")) {
            const json& o = j.at("output");
            reject_unknown(o, {"dir", "sdpa", "dump"}, "output");
            c.out_dir = o.value("dir", c.out_dir);
            c.export_sdpa = o.value("sdpa", false);
            c.export_dump = o.value("dump", false);
        }
        c.seed = j.value("seed", c.seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    static const std::set<std::string> commands{"synthesize", "simulate", "sweep-a", "sweep-N", "oracle-suite"};
    if (!commands.count(c.command)) throw ConfigError("config: unknown command '" + c.command + "'");
    static const std::set<std::string> inits{"paper", "zero"};
    if (!inits.count(c.initial)) throw ConfigError("simulation.initial: 'paper' or 'zero'");
    if (c.substeps < 1 || c.record_stride < 1) throw ConfigError("simulation: substeps and record_stride must be >= 1");
    if (!(c.delta > 0)) throw ConfigError("params.delta must be positive");
    (void)c.disturbance_spec(1); // validates the disturbance name
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json sys;
    if (!c.system.inline_system.is_null())
        sys = c.system.inline_system;
    else if (!c.system.path.empty())
        sys = {{"path", c.system.path}};
    else
        sys = {{"builtin", c.system.builtin}, {"a", c.system.a}, {"N", c.system.N}};
    json gamma = c.minimize ? json("minimize") : json(c.gamma);
    return {{"command", c.command},
            {"system", sys},
            {"params",
             {{"delta", c.delta},
              {"alpha", c.alpha},
              {"h", c.h},
              {"eps", c.eps},
              {"gamma", gamma},
              {"structure", to_string(c.structure)},
              {"gain_backoff", c.gain_backoff}}},
            {"solver",
             {{"max_iterations", c.solver.max_iterations}, {"tol", c.solver.feas_tol}, {"verbose", c.solver.verbose}}},
            {"simulation",
             {{"horizon", c.horizon},
              {"substeps", c.substeps},
              {"record_stride", c.record_stride},
              {"disturbance", c.disturbance},
              {"amplitude", c.amplitude},
              {"t_on", c.t_on},
              {"t_off", c.t_off},
              {"frequency", c.frequency},
              {"initial", c.initial},
              {"gains", c.gains_path},
              {"audit_steps", c.audit_steps}}},
            {"sweep", {{"a_grid", c.a_grid}, {"N_list", c.N_list}}},
            {"output", {{"dir", c.out_dir}, {"sdpa", c.export_sdpa}, {"dump", c.export_dump}}},
            {"seed", c.seed}};
}

int worker_count() {
    if (const char* e = std::getenv("RRLMI_THREADS")) {
        const int v = std::atoi(e);
        if (v >= 1) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, const std::function<void(int)>& fn) {
    const int w = std::min(n, worker_count());
    if (w <= 1) {
        for (int k = 0; k < n; ++k) fn(k);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n);
    for (int t = 0; t < w; ++t)
        pool.emplace_back([&] {
            for (int k; (k = next++) < n;) {
                try {
                    fn(k);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace rrlmi
