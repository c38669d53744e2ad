#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dqec/harness.hpp"

namespace py = pybind11;
using namespace dqec;

PYBIND11_MODULE(pydqec, m) {
    m.doc() = "distributed toric-code threshold simulator";

    py::enum_<Architecture>(m, "Architecture")
        .value("WT4", Architecture::WT4)
        .value("WT3", Architecture::WT3);

    py::enum_<StabType>(m, "StabType").value("Z", StabType::Z).value("X", StabType::X);

    py::class_<SchemeResult>(m, "SchemeResult")
        .def_property_readonly("state",
                               [](const SchemeResult& r) { return r.state.matrix(); })
        .def_readonly("p_succ", &SchemeResult::p_succ)
        .def_readonly("duration", &SchemeResult::duration)
        .def_property_readonly("ghz_fidelity", [](const SchemeResult& r) {
            return r.state.overlap(ghz_vector(r.state.n_qubits()));
        });

    py::class_<ExperimentConfig>(m, "Config")
        .def_static("from_file", &ExperimentConfig::from_file, py::arg("path"))
        .def_static("from_string", &ExperimentConfig::from_string, py::arg("text"),
                    py::arg("base_dir") = "")
        .def_readwrite("n_trials", &ExperimentConfig::n_trials)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("distances", &ExperimentConfig::distances)
        .def_readwrite("p_values", &ExperimentConfig::p_values)
        .def_readwrite("n_threads", &ExperimentConfig::n_threads)
        .def_readwrite("x_cut", &ExperimentConfig::x_cut)
        .def_readwrite("t_cut", &ExperimentConfig::t_cut);

    py::class_<SuperoperatorTable>(m, "SuperoperatorTable")
        .def_property_readonly("architecture", &SuperoperatorTable::architecture)
        .def("column_sum", &SuperoperatorTable::column_sum)
        .def("save", [](const SuperoperatorTable& t, const std::string& p) { save_table(t, p); })
        .def_static("load", &load_table)
        .def("row_probability",
             [](const SuperoperatorTable& t, const std::string& error, bool ghz_success,
                bool meas_error, StabType type) {
                 const auto& r = t.row(SuperoperatorTable::row_index(PauliString(error).index(),
                                                                     ghz_success, meas_error));
                 return type == StabType::Z ? r.p_plaquette : r.p_vertex;
             });

    py::class_<LogicalErrorResult>(m, "LogicalErrorResult")
        .def_readonly("trials", &LogicalErrorResult::trials)
        .def_readonly("failures", &LogicalErrorResult::failures)
        .def_readonly("p_l", &LogicalErrorResult::p_l)
        .def_readonly("ci_lo", &LogicalErrorResult::ci_lo)
        .def_readonly("ci_hi", &LogicalErrorResult::ci_hi);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("a", &FitResult::a)
        .def_readonly("b", &FitResult::b)
        .def_readonly("c", &FitResult::c)
        .def_readonly("p_th", &FitResult::p_th)
        .def_readonly("nu0", &FitResult::nu0)
        .def_readonly("residual_norm", &FitResult::residual_norm);

    py::class_<RunRow>(m, "RunRow")
        .def_readonly("d", &RunRow::d)
        .def_readonly("p", &RunRow::p)
        .def_readonly("trials", &RunRow::trials)
        .def_readonly("failures", &RunRow::failures)
        .def_readonly("p_l", &RunRow::p_l)
        .def_readonly("ci_lo", &RunRow::ci_lo)
        .def_readonly("ci_hi", &RunRow::ci_hi);

    m.def("generate_ghz", &generate_ghz, py::arg("config"), py::arg("p"));
    m.def(
        "evaluate_scheme",
        [](const ExperimentConfig& cfg, double p) {
            SchemeReport r = evaluate_scheme(cfg, p);
            return py::make_tuple(r.fidelity, r.p_succ, r.duration);
        },
        py::arg("config"), py::arg("p"));
    m.def("build_table", &build_table_for, py::arg("config"), py::arg("p"),
          py::call_guard<py::gil_scoped_release>());
    m.def("estimate_logical_error", &estimate_logical_error, py::arg("config"),
          py::arg("table"), py::arg("d"), py::arg("seed_offset") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "run_sweep",
        [](const ExperimentConfig& cfg) { return run_sweep(cfg, nullptr); },
        py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def(
        "fit_threshold",
        [](const std::vector<std::tuple<int, double, double, double>>& pts) {
            std::vector<FitPoint> data;
            for (auto& [d, p, pl, sigma] : pts) data.push_back({d, p, pl, sigma});
            return fit_threshold(data);
        },
        py::arg("points"), "points: list of (d, p, p_L, sigma)");
    m.def("cutoff_attempts", &cutoff_attempts, py::arg("x"), py::arg("p_succ"));
    m.def("cutoff_to_time", &cutoff_to_time, py::arg("x"), py::arg("p_succ"),
          py::arg("attempt_duration"));
    m.def("ege", &ege, py::arg("p_succ"), py::arg("t"), py::arg("t1"), py::arg("t2"));
    m.def("lambda_from_phase_std", &lambda_from_phase_std, py::arg("sigma_phi"));
}
