#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dsdc/config.hpp"
#include "dsdc/convergence.hpp"
#include "dsdc/diagnostics.hpp"
#include "dsdc/integrator.hpp"
#include "dsdc/io.hpp"
#include "dsdc/kernel.hpp"
#include "dsdc/runner.hpp"
#include "dsdc/truncated_system.hpp"

namespace py = pybind11;
using namespace dsdc;

namespace {

KernelSpec make_kernel(double a, double p, const std::string& kappa, double c, const std::string& declared) {
  KappaModel k;
  if (kappa == "zero") {
    k = KappaModel::zero();
  } else if (kappa == "scaled_product") {
    k = KappaModel::scaled_product(c);
  } else {
    throw ValidationError("kappa must be 'zero' or 'scaled_product' (use kernel_from_tables for tables)");
  }
  return {ThetaSequence::power(a, p), k, declared_class_from_string(declared)};
}

KernelSpec kernel_from_tables(std::vector<double> theta, std::size_t size, std::vector<double> kappa,
                              const std::string& declared) {
  KappaModel k = kappa.empty() ? KappaModel::zero() : KappaModel::table(size, std::move(kappa));
  return {ThetaSequence::table(std::move(theta)), k, declared_class_from_string(declared)};
}

// Column of one sample field, in sample order.
template <class F>
std::vector<double> column(const Trajectory& tr, F&& f) {
  std::vector<double> out;
  out.reserve(tr.samples.size());
  for (const auto& s : tr.samples) out.push_back(f(s));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Truncated discrete Safronov-Dubovskii coagulation system";
  m.attr("__version__") = kVersion;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<RangeError>(m, "RangeError", base);
  py::register_exception<ClassificationError>(m, "ClassificationError", base);
  py::register_exception<ValidationError>(m, "ValidationError", base);
  py::register_exception<NumericInputError>(m, "NumericInputError", base);
  py::register_exception<UnsupportedKernelError>(m, "UnsupportedKernelError", base);
  py::register_exception<InsufficientResolutionError>(m, "InsufficientResolutionError", base);
  py::register_exception<OracleInvalidError>(m, "OracleInvalidError", base);
  py::register_exception<IntegrationFailure>(m, "IntegrationFailure", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);

  py::class_<KernelSpec>(m, "KernelSpec")
      .def("max_index", &KernelSpec::max_index)
      .def_property_readonly("declared_class", [](const KernelSpec& k) { return to_string(k.declared_class); })
      .def("__eq__", [](const KernelSpec& a, const KernelSpec& b) { return a == b; });

  m.def("power_kernel", &make_kernel, py::arg("a") = 1.0, py::arg("p") = 1.0, py::arg("kappa") = "zero",
        py::arg("c") = 0.0, py::arg("declared_class") = "unclassified",
        "Lambda_ij = (1 + c) a^2 (ij)^p, or a^2 (ij)^p when kappa is 'zero'.");
  m.def("table_kernel", &kernel_from_tables, py::arg("theta"), py::arg("size") = 0,
        py::arg("kappa") = std::vector<double>{}, py::arg("declared_class") = "unclassified",
        "Tabulated theta_1..theta_N and an optional symmetric row-major kappa table of the given size.");
  m.def("eval_kernel", &eval_kernel, py::arg("spec"), py::arg("i"), py::arg("j"));

  py::class_<ClassReport>(m, "ClassReport")
      .def_readonly("B", &ClassReport::B)
      .def_readonly("A", &ClassReport::A)
      .def_readonly("sublinear_trend", &ClassReport::sublinear_trend)
      .def_readonly("C", &ClassReport::C)
      .def_readonly("kappa0", &ClassReport::kappa0)
      .def_readonly("zeta", &ClassReport::zeta)
      .def_readonly("uniform_min", &ClassReport::uniform_min)
      .def_readonly("C_probe_min", &ClassReport::C_probe_min)
      .def_readonly("zeta_probe_min", &ClassReport::zeta_probe_min)
      .def_readonly("zeta_decays", &ClassReport::zeta_decays)
      .def_readonly("C_decays", &ClassReport::C_decays);
  m.def("classify_kernel", &classify_kernel, py::arg("spec"), py::arg("n_probe"));
  m.def("lower_bound_constants", &lower_bound_constants, py::arg("spec"), py::arg("n_probe"), py::arg("kappa0"));

  py::class_<Monodisperse>(m, "Monodisperse").def(py::init<double>(), py::arg("a") = 1.0);
  py::class_<Geometric>(m, "Geometric").def(py::init<double, double>(), py::arg("a"), py::arg("r"));
  py::class_<PowerTail>(m, "PowerTail").def(py::init<double, double>(), py::arg("a"), py::arg("q"));
  py::class_<TableInit>(m, "TableInit").def(py::init<std::vector<double>>(), py::arg("values"));

  py::class_<State>(m, "State")
      .def(py::init<double, std::vector<double>>(), py::arg("t"), py::arg("omega"))
      .def_readonly("t", &State::t)
      .def_readonly("omega", &State::omega)
      .def_property_readonly("n", &State::n);
  m.def("make_initial_state", &make_initial_state, py::arg("family"), py::arg("n"));
  m.def("rhs_general", &rhs_general, py::arg("spec"), py::arg("state"));
  m.def("rhs_separable_fast", &rhs_separable_fast, py::arg("spec"), py::arg("state"));
  m.def("moment", &moment, py::arg("state"), py::arg("m"));

  py::class_<IntegratorConfig>(m, "IntegratorConfig")
      .def(py::init<>())
      .def_readwrite("rel_tol", &IntegratorConfig::rel_tol)
      .def_readwrite("abs_tol", &IntegratorConfig::abs_tol)
      .def_readwrite("h_init", &IntegratorConfig::h_init)
      .def_readwrite("h_min", &IntegratorConfig::h_min)
      .def_readwrite("h_max", &IntegratorConfig::h_max)
      .def_readwrite("clamp_tol", &IntegratorConfig::clamp_tol)
      .def_readwrite("h_fixed", &IntegratorConfig::h_fixed)
      .def_property(
          "method", [](const IntegratorConfig& c) { return to_string(c.method); },
          [](IntegratorConfig& c, const std::string& s) { c.method = method_from_string(s); });

  py::class_<Accumulators>(m, "Accumulators")
      .def_readonly("I_theta_sq", &Accumulators::theta_sq)
      .def_readonly("I_M1_sq", &Accumulators::m1_sq)
      .def_readonly("I_M0_sq", &Accumulators::m0_sq)
      .def_readonly("I_total_coag", &Accumulators::total_coag)
      .def_readonly("boundary_flux", &Accumulators::boundary_flux)
      .def_readonly("I_tail_theta_sq", &Accumulators::tail_theta_sq)
      .def_readonly("I_tail_coag", &Accumulators::tail_coag);

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("n", &Trajectory::n)
      .def_readonly("tail_cutoffs", &Trajectory::tail_cutoffs)
      .def("__len__", [](const Trajectory& tr) { return tr.samples.size(); })
      .def("times", [](const Trajectory& tr) { return column(tr, [](const Sample& s) { return s.t(); }); })
      .def("moments", [](const Trajectory& tr, double mo) {
        return column(tr, [mo](const Sample& s) { return moment(s.state, mo); });
      }, py::arg("m"))
      .def("state", [](const Trajectory& tr, std::size_t k) { return tr.samples.at(k).state; }, py::arg("k"))
      .def("accumulators", [](const Trajectory& tr, std::size_t k) { return tr.samples.at(k).acc; }, py::arg("k"))
      .def_property_readonly("step_stats", [](const Trajectory& tr) {
        py::dict d;
        d["accepted"] = tr.stats.accepted;
        d["rejected"] = tr.stats.rejected;
        d["negativity_rejections"] = tr.stats.negativity_rejections;
        d["clamped"] = tr.stats.clamped;
        d["rhs_evals"] = tr.stats.rhs_evals;
        return d;
      });

  m.def("uniform_grid", &uniform_grid, py::arg("T"), py::arg("intervals"));
  m.def("integrate", &integrate, py::arg("spec"), py::arg("init"), py::arg("T"), py::arg("grid"),
        py::arg("config") = IntegratorConfig{}, py::arg("tail_cutoffs") = std::vector<std::size_t>{},
        py::call_guard<py::gil_scoped_release>());
  m.def("solution_residual", &solution_residual, py::arg("traj"), py::arg("i"), py::arg("t1"), py::arg("t2"));

  py::class_<BoundReport>(m, "BoundReport")
      .def_property_readonly("bound_id", [](const BoundReport& r) { return to_string(r.bound_id); })
      .def_readonly("lhs", &BoundReport::lhs)
      .def_readonly("rhs", &BoundReport::rhs)
      .def_readonly("margin", &BoundReport::margin)
      .def_readonly("passed", &BoundReport::pass)
      .def_readonly("applicable", &BoundReport::applicable)
      .def_readonly("params", &BoundReport::params)
      .def_readonly("tolerance_used", &BoundReport::tolerance_used)
      .def_readonly("note", &BoundReport::note)
      .def("__repr__", [](const BoundReport& r) { return to_json(r).dump(); });

  py::class_<ConstantOne>(m, "ConstantOne").def(py::init<>());
  py::class_<Identity>(m, "Identity").def(py::init<>());
  py::class_<Capped>(m, "Capped").def(py::init<std::size_t>(), py::arg("r"));
  py::class_<PowerSequence>(m, "PowerSequence").def(py::init<double>(), py::arg("eta"));
  py::class_<CustomSequence>(m, "CustomSequence").def(py::init<std::vector<double>>(), py::arg("values"));
  m.def("weak_form_residual", &weak_form_residual, py::arg("traj"), py::arg("psi"), py::arg("t1"), py::arg("t2"));

  m.def("check_est1", &check_est1, py::arg("traj"), py::arg("t1"), py::arg("t2"));
  m.def("check_est2", &check_est2, py::arg("traj"), py::arg("t1"), py::arg("t2"));
  m.def("check_est3", &check_est3, py::arg("traj"), py::arg("r"), py::arg("eta"), py::arg("t1"), py::arg("t2"));
  m.def("check_tailest", &check_tailest, py::arg("traj"), py::arg("r"), py::arg("t1"), py::arg("t2"));
  m.def("check_massrbnd", &check_massrbnd, py::arg("traj"), py::arg("t"));
  m.def("check_gel_infmass", &check_gel_infmass, py::arg("traj"), py::arg("t"));
  m.def("check_gel_product", &check_gel_product, py::arg("traj"), py::arg("zeta"), py::arg("t"));
  m.def("check_m1_square_integral", &check_m1_square_integral, py::arg("traj"), py::arg("C"), py::arg("kappa0"));
  m.def("check_appendix_m0", &check_appendix_m0, py::arg("traj"), py::arg("C"));
  m.def("check_amc", &check_amc, py::arg("traj"));
  m.def("check_fm", &check_fm, py::arg("traj"));
  m.def("estimate_gelation_time", &estimate_gelation_time, py::arg("traj"), py::arg("delta"));
  m.def("series_zeta", &series_zeta, py::arg("s"));

  py::class_<ConvergenceReport>(m, "ConvergenceReport")
      .def_readonly("n_list", &ConvergenceReport::n_list)
      .def_readonly("mass_retention", &ConvergenceReport::mass_retention)
      .def_readonly("mass_loss", &ConvergenceReport::mass_loss)
      .def_readonly("initial_mass", &ConvergenceReport::initial_mass)
      .def_readonly("gel_times", &ConvergenceReport::gel_times)
      .def_readonly("oracle_errors", &ConvergenceReport::oracle_errors)
      .def_readonly("failures", &ConvergenceReport::failures)
      .def_property_readonly("classification", [](const ConvergenceReport& r) { return to_string(r.classification); });
  m.def(
      "refine_in_n",
      [](const KernelSpec& spec, const InitialData& family, std::vector<std::size_t> n_list, double T, double delta,
         const IntegratorConfig& cfg) {
        SweepOptions so;
        so.T = T;
        so.delta = delta;
        py::gil_scoped_release release;
        return refine_in_n(spec, family, n_list, so, cfg);
      },
      py::arg("spec"), py::arg("family"), py::arg("n_list"), py::arg("T"), py::arg("delta") = 0.01,
      py::arg("config") = IntegratorConfig{});
  m.def("oracle_compare", &oracle_compare, py::arg("spec"), py::arg("init"), py::arg("T"),
        py::arg("config") = IntegratorConfig{}, py::arg("h_oracle") = 1e-4, py::arg("samples") = 20,
        py::call_guard<py::gil_scoped_release>());

  m.def("run_file", [](const std::string& path, const std::string& mode, std::optional<std::string> out_dir,
                       bool quiet) {
        Mode md;
        if (mode == "simulate") {
          md = Mode::simulate;
        } else if (mode == "check") {
          md = Mode::check;
        } else if (mode == "sweep") {
          md = Mode::sweep;
        } else {
          throw ValidationError("mode must be simulate, check or sweep");
        }
        RunOptions opts{std::move(out_dir), quiet};
        py::gil_scoped_release release;
        return run_file(path, md, opts);
      },
      py::arg("path"), py::arg("mode") = "check", py::arg("out_dir") = std::nullopt, py::arg("quiet") = true,
      "Runs a config file; returns the process exit status (0 ok, 1 config, 2 bound failure, 3 numerical).");
}
