#include "rrlmi/commands.hpp"
#include "rrlmi/protocol.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace rrlmi;

namespace {

SynthesisParams make_params(const LargeScaleSystem& sys, double alpha, double h, double eps, py::object gamma) {
    auto p = SynthesisParams::uniform(sys.N(), alpha, h, eps);
    if (!gamma.is_none()) {
        p.minimize = false;
        p.gamma = gamma.cast<double>();
    }
    return p;
}

SynthesisOptions make_options(const std::string& structure, double backoff) {
    SynthesisOptions so;
    so.structure = multiplier_structure_from_string(structure);
    so.gain_backoff = backoff;
    return so;
}

py::dict run_to_dict(const SynthesisRun& run) {
    const auto& r = run.result;
    py::dict d;
    d["status"] = to_string(r.status);
    d["feasible"] = r.feasible;
    d["gamma_min"] = run.gamma_min;
    d["gamma_certified"] = r.gamma_certified;
    d["min_constraint_eigenvalue"] = r.min_certificate_eig;
    d["phase_one_margin"] = r.outcome.phase_one_margin;
    d["iterations"] = r.outcome.iterations;
    d["message"] = r.outcome.message;
    d["diagnostic"] = r.diagnostic;
    d["gains_json"] = r.feasible ? gains_to_json(r.gains).dump() : std::string();
    return d;
}

} // namespace

PYBIND11_MODULE(_rrlmi, m) {
    m.doc() = "Round-Robin distributed L2-gain synthesis (C++ core)";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<LargeScaleSystem>(m, "System")
        .def_property_readonly("N", &LargeScaleSystem::N)
        .def_readwrite("delta", &LargeScaleSystem::delta)
        .def("neighbors", [](const LargeScaleSystem& s, int i) { return s.sub(i).neighbors(); })
        .def("A", [](const LargeScaleSystem& s, int i) { return s.sub(i).A; })
        .def("to_json", [](const LargeScaleSystem& s) { return system_to_json(s).dump(); })
        .def("__repr__", [](const LargeScaleSystem& s) { return "<rrlmi.System N=" + std::to_string(s.N()) + ">"; });

    m.def("example2_system", &example2_system, py::arg("a") = 0.0, py::arg("N") = 10, py::arg("delta") = 0.0005);
    m.def("example4_system", &example4_system, py::arg("N") = 100, py::arg("delta") = 0.0005);
    m.def("system_from_json", [](const std::string& s) { return system_from_json(json::parse(s)); });
    m.def("open_loop_A", &assemble_open_loop_A);
    m.def("count_unstable_eigenvalues", &count_unstable_eigenvalues, py::arg("A"), py::arg("tol") = 0.0);

    m.def("shift_permutation", &shift_permutation);
    m.def("polled_neighbor", &polled_neighbor, py::arg("i"), py::arg("k"), py::arg("system"));
    m.def("neighbor_index", &neighbor_index, py::arg("j"), py::arg("k"), py::arg("i"), py::arg("system"));

    m.def(
        "synthesize",
        [](const LargeScaleSystem& sys, double alpha, double h, double eps, py::object gamma,
           const std::string& structure, double backoff) {
            const auto params = make_params(sys, alpha, h, eps, gamma);
            SynthesisRun run;
            {
                py::gil_scoped_release nogil;
                run = synthesize(sys, params, make_options(structure, backoff), {});
            }
            return run_to_dict(run);
        },
        py::arg("system"), py::arg("alpha") = 0.4, py::arg("h") = 0.1, py::arg("eps") = 1e-6,
        py::arg("gamma") = py::none(), py::arg("structure") = "shared-U", py::arg("gain_backoff") = 0.01);

    m.def(
        "sdpa",
        [](const LargeScaleSystem& sys, double alpha, double h, double eps, py::object gamma,
           const std::string& structure) {
            const auto prob =
                build_synthesis_problem(sys, make_params(sys, alpha, h, eps, gamma), make_options(structure, 0));
            std::ostringstream os;
            write_sdpa(os, ConicProgram::from(prob));
            return os.str();
        },
        py::arg("system"), py::arg("alpha") = 0.4, py::arg("h") = 0.1, py::arg("eps") = 1e-6,
        py::arg("gamma") = py::none(), py::arg("structure") = "shared-U");

    m.def(
        "simulate",
        [](const LargeScaleSystem& sys, const std::string& gains_json, double horizon, const std::string& disturbance,
           double amplitude, double t_off, bool zero_initial, int substeps, long long stride, std::uint64_t seed) {
            const auto gains = gains_json.empty() ? std::vector<ControllerGains>{}
                                                  : gains_from_json(json::parse(gains_json));
            DisturbanceSpec dist;
            dist.kind = disturbance_kind_from_string(disturbance);
            dist.amplitude = {amplitude};
            dist.t_off = t_off;
            dist.seed = seed;
            SimulationOptions so;
            so.substeps = substeps;
            so.record_stride = stride;
            const auto x0 = zero_initial ? zero_state(sys) : paper_initial_state(sys);
            SimulationRecord rec;
            {
                py::gil_scoped_release nogil;
                rec = integrate_closed_loop(sys, gains, x0, dist, horizon, so);
            }
            Mat X(static_cast<Eigen::Index>(rec.x.size()), sys.total_states());
            for (std::size_t k = 0; k < rec.x.size(); ++k) X.row(static_cast<Eigen::Index>(k)) = rec.x[k].transpose();
            py::dict d;
            d["t"] = Vec(Eigen::Map<const Vec>(rec.t.data(), static_cast<Eigen::Index>(rec.t.size())));
            d["x"] = X;
            d["diverged"] = rec.diverged;
            d["substeps"] = rec.substeps;
            d["output_energy"] = rec.total_zz();
            d["disturbance_energy"] = rec.total_ww();
            d["l2_ratio"] = rec.total_ww() > 0 ? l2_ratio(rec) : NAN;
            d["rho"] = (!rec.diverged && rec.x.front().norm() > 0) ? decay_estimate(rec) : NAN;
            return d;
        },
        py::arg("system"), py::arg("gains_json") = "", py::arg("horizon") = 20.0, py::arg("disturbance") = "zero",
        py::arg("amplitude") = 1.0, py::arg("t_off") = 5.0, py::arg("zero_initial") = false, py::arg("substeps") = 2,
        py::arg("record_stride") = 10, py::arg("seed") = 1);

    m.def(
        "run_cli_config",
        [](const std::string& config_json) {
            std::ostringstream log;
            const int code = run_command(config_from_json(json::parse(config_json)), log);
            return py::make_tuple(code, log.str());
        },
        py::arg("config_json"));
}
