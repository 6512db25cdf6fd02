#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <sstream>

#include "sbpp/bopp_podolsky.hpp"
#include "sbpp/errors.hpp"
#include "sbpp/grid_field.hpp"
#include "sbpp/ground_state.hpp"
#include "sbpp/nehari_energy.hpp"
#include "sbpp/profile_analysis.hpp"
#include "sbpp/variational_solver.hpp"

namespace py = pybind11;
using namespace sbpp;

namespace {

// Arrays are indexed [ix, iy, iz]; storage is x fastest, i.e. Fortran order.
using FArray = py::array_t<double, py::array::f_style | py::array::forcecast>;

ScalarField field_from_array(const FArray& values, double length) {
  if (values.ndim() != 3 || values.shape(0) != values.shape(1) || values.shape(0) != values.shape(2)) {
    throw ParameterError("expected an n x n x n array");
  }
  const TorusGrid grid(static_cast<int>(values.shape(0)), length);
  std::vector<double> v(values.data(), values.data() + values.size());
  return ScalarField(grid, std::move(v));
}

FArray field_to_array(const ScalarField& f) {
  const auto n = static_cast<py::ssize_t>(f.grid().n());
  FArray out({n, n, n});
  std::memcpy(out.mutable_data(), f.values().data(), f.size() * sizeof(double));
  return out;
}

}  // namespace

PYBIND11_MODULE(_sbpp, m) {
  m.doc() = "Pseudospectral Schrodinger-Bopp-Podolsky solver on the flat 3-torus";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  auto numerical_error = py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<IntegrationFailure>(m, "IntegrationFailure", numerical_error.ptr());
  py::register_exception<BracketError>(m, "BracketError", numerical_error.ptr());
  py::register_exception<ProjectionUndefined>(m, "ProjectionUndefined", numerical_error.ptr());
  py::register_exception<BarycenterUndefined>(m, "BarycenterUndefined", numerical_error.ptr());
  py::register_exception<ConsistencyError>(m, "ConsistencyError", numerical_error.ptr());
  py::register_exception<NonDescent>(m, "NonDescent", numerical_error.ptr());

  py::enum_<Dealiasing>(m, "Dealiasing")
      .value("none", Dealiasing::none)
      .value("three_halves", Dealiasing::three_halves);

  py::class_<TorusGrid>(m, "TorusGrid")
      .def(py::init<int, double>(), py::arg("n"), py::arg("length"))
      .def_property_readonly("n", &TorusGrid::n)
      .def_property_readonly("length", &TorusGrid::length)
      .def_property_readonly("spacing", &TorusGrid::spacing)
      .def_property_readonly("volume", &TorusGrid::volume)
      .def("distance", &TorusGrid::distance)
      .def("__repr__", [](const TorusGrid& g) {
        std::ostringstream s;
        s << "TorusGrid(n=" << g.n() << ", length=" << g.length() << ")";
        return s.str();
      });

  py::class_<ScalarField>(m, "ScalarField")
      .def(py::init(&field_from_array), py::arg("values"), py::arg("length"))
      .def_static("constant", &ScalarField::constant)
      .def_static("sample", &ScalarField::sample, py::arg("grid"), py::arg("f"))
      .def_property_readonly("grid", &ScalarField::grid)
      .def("to_numpy", &field_to_array)
      .def("max", &ScalarField::max)
      .def("min", &ScalarField::min)
      .def("mean", &ScalarField::mean)
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(py::self * py::self)
      .def(double() * py::self)
      .def(py::self * double());

  m.def("integrate", &integrate);
  m.def("norm_eps_sq", &norm_eps_sq, py::arg("u"), py::arg("epsilon"));
  m.def("inner_eps", &inner_eps, py::arg("u"), py::arg("v"), py::arg("epsilon"));
  m.def("write_field_dump",
        py::overload_cast<const std::string&, const ScalarField&, double>(&write_field_dump),
        py::arg("path"), py::arg("field"), py::arg("epsilon"));
  m.def("read_field_dump", [](const std::string& path) {
    FieldDump d = read_field_dump(path);
    return py::make_tuple(std::move(d.field), d.epsilon);
  });

  py::class_<RadialProfile>(m, "RadialProfile")
      .def_readonly("p", &RadialProfile::p)
      .def_readonly("u0", &RadialProfile::u0)
      .def_readonly("decay_rate", &RadialProfile::decay_rate)
      .def_readonly("tail_amplitude", &RadialProfile::tail_amplitude)
      .def_readonly("r", &RadialProfile::r_nodes)
      .def_readonly("u", &RadialProfile::u_values)
      .def("__call__", [](const RadialProfile& U, double r) { return evaluate(U, r); });

  m.def("find_ground_state", [](double p, double tol) { return find_ground_state(p, tol); },
        py::arg("p"), py::arg("tol") = 1e-13);
  m.def("h1_norm_sq", &h1_norm_sq);
  m.def("limit_energy", &limit_energy);
  m.def("limit_energy_h1", &limit_energy_h1);
  m.def("nehari_identity_error", &nehari_identity_error);
  m.def("half_max_radius", &half_max_radius);

  m.def("solve_phi", &solve_phi, py::arg("u"), py::arg("a"), py::arg("mode") = Dealiasing::none);
  m.def("coupling_energy", &coupling_energy, py::arg("u"), py::arg("a"),
        py::arg("mode") = Dealiasing::none);
  m.def("h2_norm_sq", &h2_norm_sq, py::arg("phi"), py::arg("a"));

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init(&SystemParams::checked), py::arg("p"), py::arg("a"), py::arg("epsilon"),
           py::arg("dealiasing") = Dealiasing::none)
      .def_readonly("p", &SystemParams::p)
      .def_readonly("a", &SystemParams::a)
      .def_readonly("epsilon", &SystemParams::epsilon)
      .def_readonly("dealiasing", &SystemParams::dealiasing);

  py::class_<EnergyParts>(m, "EnergyParts")
      .def_readonly("A", &EnergyParts::A)
      .def_readonly("B", &EnergyParts::B)
      .def_readonly("C", &EnergyParts::C);
  py::class_<NehariProjection>(m, "NehariProjection")
      .def_readonly("t", &NehariProjection::t)
      .def_readonly("field", &NehariProjection::field)
      .def_readonly("energy", &NehariProjection::energy)
      .def_readonly("nehari_residual", &NehariProjection::nehari_residual);
  py::class_<GradientEvaluation>(m, "GradientEvaluation")
      .def_readonly("gradient", &GradientEvaluation::gradient)
      .def_readonly("gradient_norm", &GradientEvaluation::gradient_norm)
      .def_readonly("field_norm", &GradientEvaluation::field_norm)
      .def_readonly("pde_residual", &GradientEvaluation::pde_residual);

  m.def("energy_parts", &energy_parts);
  m.def("energy", &energy);
  m.def("nehari_residual", &nehari_residual);
  m.def("project_nehari", &project_nehari);
  m.def("evaluate_gradient", &evaluate_gradient);

  m.def("psi_map", &psi_map, py::arg("grid"), py::arg("center"), py::arg("params"),
        py::arg("profile"), py::arg("cutoff_radius"));
  m.def("barycenter", &barycenter, py::arg("u"), py::arg("p"));

  py::class_<ConstantBranch>(m, "ConstantBranch")
      .def_readonly("c_star", &ConstantBranch::c_star)
      .def_readonly("energy_coefficient", &ConstantBranch::energy_coefficient)
      .def_readonly("residual", &ConstantBranch::residual);
  m.def("constant_branch", &constant_branch);

  py::class_<ProfileDiagnostics>(m, "ProfileDiagnostics")
      .def_readonly("max_point", &ProfileDiagnostics::max_point)
      .def_readonly("max_value", &ProfileDiagnostics::max_value)
      .def_readonly("n_local_maxima", &ProfileDiagnostics::n_local_maxima)
      .def_readonly("barycenter", &ProfileDiagnostics::barycenter)
      .def_readonly("concentration_ratio", &ProfileDiagnostics::concentration_ratio)
      .def_readonly("profile_error", &ProfileDiagnostics::profile_error)
      .def_readonly("phi_c2", &ProfileDiagnostics::phi_c2)
      .def("to_json", [](const ProfileDiagnostics& d) { return to_json(d); });
  m.def("diagnose", &diagnose, py::arg("u"), py::arg("params"), py::arg("profile"),
        py::arg("cutoff_radius") = 0.0);

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("max_iters", &SolverOptions::max_iters)
      .def_readwrite("grad_tol", &SolverOptions::grad_tol)
      .def_readwrite("step_init", &SolverOptions::step_init)
      .def_readwrite("backtrack_factor", &SolverOptions::backtrack_factor)
      .def_readwrite("armijo_c", &SolverOptions::armijo_c)
      .def_readwrite("min_step", &SolverOptions::min_step);

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("field", &SolveReport::field)
      .def_readonly("params", &SolveReport::params)
      .def_readonly("energy", &SolveReport::energy)
      .def_readonly("grad_norm", &SolveReport::grad_norm)
      .def_readonly("pde_residual", &SolveReport::pde_residual)
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("t_history", &SolveReport::t_history)
      .def_readonly("energy_history", &SolveReport::energy_history)
      .def_readonly("converged", &SolveReport::converged)
      .def_readonly("nonconstant", &SolveReport::nonconstant)
      .def_readonly("peak_width_points", &SolveReport::peak_width_points)
      .def_readonly("resolved", &SolveReport::resolved);

  m.def("minimize_from", &minimize_from, py::arg("u0"), py::arg("params"),
        py::arg("options") = SolverOptions{}, py::call_guard<py::gil_scoped_release>());
}
