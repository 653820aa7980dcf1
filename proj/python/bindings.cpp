// Python bindings: experiment configuration, runs, slope fits and small dense spectra.
#include "fetidg/error.hpp"
#include "fetidg/experiment.hpp"
#include "fetidg/oracle.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace fetidg;

namespace {

py::dict row_dict(const ReportRow& r)
{
    py::dict d;
    d["preset"] = r.preset;
    d["nx"] = r.nx;
    d["H_over_h"] = r.H_over_h;
    d["alpha_hat"] = r.alpha_hat;
    d["iterations"] = r.iterations;
    d["cond_estimate"] = r.cond_estimate;
    d["final_rel_residual"] = r.final_rel_residual;
    d["converged"] = r.converged;
    d["t_setup_s"] = r.t_setup_s;
    d["t_solve_s"] = r.t_solve_s;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "FETI-DP for composite FE/DG discretizations";

    static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
    static py::exception<SolverError> solver_error(m, "SolverError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            config_error(e.what());
        } catch (const SolverError& e) {
            solver_error(e.what());
        }
    });

    py::enum_<Preset>(m, "Preset")
        .value("ex1", Preset::Ex1)
        .value("ex2", Preset::Ex2)
        .value("ex3", Preset::Ex3)
        .value("custom", Preset::Custom);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("preset", &ExperimentConfig::preset)
        .def_readwrite("nx", &ExperimentConfig::nx)
        .def_readwrite("ny", &ExperimentConfig::ny)
        .def_readwrite("mesh", &ExperimentConfig::mesh)
        .def_readwrite("alpha_hat", &ExperimentConfig::alpha_hat)
        .def_readwrite("background", &ExperimentConfig::background)
        .def_readwrite("delta", &ExperimentConfig::delta)
        .def_readwrite("tol", &ExperimentConfig::tol)
        .def_readwrite("max_it", &ExperimentConfig::max_it)
        .def_readwrite("oracle", &ExperimentConfig::oracle)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("probes", &ExperimentConfig::probes)
        .def("set", &set_config_field, py::arg("key"), py::arg("value"), "Set a field by its config-file key.")
        .def("validate", &ExperimentConfig::validate)
        .def("mesh_sizes", &ExperimentConfig::mesh_sizes);

    m.def("load_config", [](const std::string& path) {
        ExperimentConfig c;
        load_config_file(path, c);
        return c;
    }, py::arg("path"));

    m.def("run", [](const ExperimentConfig& c) {
        ExperimentResult r;
        {
            py::gil_scoped_release release;
            r = run_experiment(c);
        }
        py::dict d = row_dict(r.row);
        d["ritz_min"] = r.solve.ritz_min;
        d["ritz_max"] = r.solve.ritz_max;
        d["residual_history"] = r.solve.residual_history;
        d["probes_passed"] = r.probes.passed;
        if (r.oracle) {
            d["oracle_solution_error"] = r.oracle->solution_error;
            d["oracle_subassembly_error"] = r.oracle->subassembly_error;
            if (r.oracle->ran_dense)
                d["dense_cond"] = r.oracle->dense_cond;
        }
        return d;
    }, py::arg("config"), "Run one experiment; returns the report row plus solver diagnostics.");

    m.def("dense_eigenvalues", [](const ExperimentConfig& c, int guard) {
        py::gil_scoped_release release;
        return oracle::dense_spectrum(build_problem(c), guard).eigenvalues;
    }, py::arg("config"), py::arg("guard") = oracle::kDefaultMultiplierGuard,
       "Eigenvalues of the preconditioned operator, ascending. Small problems only.");

    m.def("fit_slope", &fit_slope, py::arg("x"), py::arg("y"));
    m.def("parse_mesh_list", &parse_mesh_list, py::arg("text"), py::arg("nx"), py::arg("ny"));
    m.attr("CSV_HEADER") = kCsvHeader;
}
