#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qmframe/cli.hpp"
#include "qmframe/evolution.hpp"
#include "qmframe/hamilton_jacobi.hpp"
#include "qmframe/kernels.hpp"

namespace py = pybind11;
using namespace qmframe;

namespace {

kernels::Representation parse_rep(const std::string& name) {
  if (name == "position") return kernels::Representation::PositionQ;
  if (name == "momentum") return kernels::Representation::MomentumP;
  throw Error(ErrorKind::ConfigParse, "representation must be 'position' or 'momentum'");
}

hj::GenRep parse_gen(const std::string& name) {
  if (name == "qQ") return hj::GenRep::qQ;
  if (name == "qP") return hj::GenRep::qP;
  throw Error(ErrorKind::ConfigParse, "generating function must be 'qQ' or 'qP'");
}

py::dict metadata_dict(const CheckResult& r) {
  py::dict d;
  for (const auto& [k, v] : r.metadata) d[py::str(k)] = v;
  return d;
}

std::shared_ptr<const Propagator> balanced(const SystemParams& p, Index n) {
  return std::make_shared<const Propagator>(p, evolution::balanced_grid(p, n));
}

}  // namespace

PYBIND11_MODULE(qmframe, m) {
  m.doc() = "Closed-form propagators of the moving frame, checked against dense evolution";

  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  py::enum_<System>(m, "System").value("Free", System::Free).value("Harmonic", System::Harmonic);

  py::class_<SystemParams>(m, "SystemParams")
      .def_static("free", &SystemParams::free, py::arg("mass") = 1.0, py::arg("hbar") = 1.0)
      .def_static("harmonic", &SystemParams::harmonic, py::arg("mass") = 1.0, py::arg("omega") = 1.0,
                  py::arg("hbar") = 1.0)
      .def_readonly("system", &SystemParams::system)
      .def_readonly("mass", &SystemParams::mass)
      .def_readonly("hbar", &SystemParams::hbar)
      .def_readonly("omega", &SystemParams::omega)
      .def("potential", &SystemParams::potential)
      .def("__repr__", [](const SystemParams& p) {
        std::ostringstream os;
        os << "SystemParams(" << to_string(p.system) << ", m=" << p.mass << ", hbar=" << p.hbar;
        if (p.omega) os << ", omega=" << *p.omega;
        return os.str() + ")";
      });

  py::class_<Grid>(m, "Grid")
      .def(py::init<double, double, Index>(), py::arg("q_min"), py::arg("q_max"), py::arg("n"))
      .def_property_readonly("q_min", &Grid::q_min)
      .def_property_readonly("q_max", &Grid::q_max)
      .def_property_readonly("n", &Grid::n)
      .def_property_readonly("dq", &Grid::dq)
      .def("points", &Grid::points);

  py::class_<CheckResult>(m, "CheckResult")
      .def_readonly("residual", &CheckResult::residual)
      .def_readonly("tolerance", &CheckResult::tolerance)
      .def_readonly("passed", &CheckResult::passed)
      .def_readonly("skipped", &CheckResult::skipped)
      .def_readonly("note", &CheckResult::note)
      .def_property_readonly("metadata", &metadata_dict)
      .def("__repr__", [](const CheckResult& r) {
        return "CheckResult(residual=" + format_double(r.residual) + ", tolerance=" + format_double(r.tolerance) +
               (r.skipped ? ", skipped" : r.passed ? ", passed" : ", failed") + ")";
      });

  // States and dense evolution.
  m.def(
      "gaussian_packet",
      [](const Grid& g, double q0, double p0, double sigma, double hbar) {
        return gaussian_packet(g, q0, p0, sigma, hbar).amp;
      },
      py::arg("grid"), py::arg("q0"), py::arg("p0"), py::arg("sigma"), py::arg("hbar") = 1.0);

  py::class_<Propagator>(m, "Propagator")
      .def(py::init<const SystemParams&, const Grid&>(), py::arg("params"), py::arg("grid"))
      .def_property_readonly("energies", &Propagator::energies)
      .def("evolution_operator", [](const Propagator& p, double t) { return p.evolution_operator(t).mat; })
      .def("evolve", [](const Propagator& p, const CVector& psi, double t) {
        return p.evolve(WaveFunction(p.grid(), psi), t).amp;
      });

  // Closed forms.
  m.def(
      "kernel",
      [](const SystemParams& p, double q, double x, double t, const std::string& rep) {
        return kernels::kernel({parse_rep(rep), p}, q, x, t);
      },
      py::arg("params"), py::arg("q"), py::arg("x"), py::arg("t"), py::arg("representation") = "position",
      "<q|Q;t> (position) or <q|P;t> (momentum)");
  m.def(
      "in_window",
      [](const SystemParams& p, double t, const std::string& rep) { return kernels::in_window({parse_rep(rep), p}, t); },
      py::arg("params"), py::arg("t"), py::arg("representation") = "position");
  m.def("hermite", &kernels::hermite, py::arg("n"), py::arg("xi"));
  m.def("ho_eigenfunction", &kernels::ho_eigenfunction, py::arg("params"), py::arg("q"), py::arg("n"));
  m.def("moving_momentum_state", &kernels::moving_momentum_state, py::arg("params"), py::arg("Q"), py::arg("p"),
        py::arg("t"));
  m.def("moving_number_state", &kernels::moving_number_state, py::arg("params"), py::arg("Q"), py::arg("n"),
        py::arg("t"));
  m.def("moving_coherent_state", &kernels::moving_coherent_state, py::arg("params"), py::arg("Q"), py::arg("z"),
        py::arg("t"));

  m.def(
      "generating_function",
      [](const SystemParams& p, const std::string& rep, double q, double x, double t) {
        return hj::GeneratingFunction(parse_gen(rep), p).value(q, x, t);
      },
      py::arg("params"), py::arg("rep"), py::arg("q"), py::arg("x"), py::arg("t"));
  m.def(
      "quantum_action",
      [](const SystemParams& p, const std::string& rep, double q, double x, double t) {
        return hj::quantum_action(hj::GeneratingFunction(parse_gen(rep), p)).value(q, x, t);
      },
      py::arg("params"), py::arg("rep"), py::arg("q"), py::arg("x"), py::arg("t"));
  m.def(
      "hj_residual",
      [](const SystemParams& p, const std::string& rep, double q, double x, double t) {
        return hj::hj_residual(hj::GeneratingFunction(parse_gen(rep), p), q, x, t);
      },
      py::arg("params"), py::arg("rep"), py::arg("q"), py::arg("x"), py::arg("t"));
  m.def(
      "se_residual",
      [](const SystemParams& p, const std::string& rep, double q, double x, double t, double h) {
        return hj::se_residual(hj::quantum_action(hj::GeneratingFunction(parse_gen(rep), p)), {q, x, t}, h);
      },
      py::arg("params"), py::arg("rep"), py::arg("q"), py::arg("x"), py::arg("t"), py::arg("h") = 1e-3);
  m.def("action_angle_bracket", &hj::action_angle_bracket, py::arg("params"), py::arg("q"), py::arg("p"),
        py::arg("h") = 1e-5);

  // Checks.
  m.def(
      "kernel_vs_evolution_check",
      [](const SystemParams& p, const Grid& g, double t, double sigma) {
        const WaveFunction packet = gaussian_packet(g, 0.5 * (g.q_min() + g.q_max()), 0.0, sigma, p.hbar);
        return kernels::kernel_vs_evolution_check({kernels::Representation::PositionQ, p}, g, t, packet);
      },
      py::arg("params"), py::arg("grid"), py::arg("t"), py::arg("sigma") = 1.0);
  m.def(
      "closed_form_operator_check",
      [](const SystemParams& p, double t, Index n) {
        return evolution::closed_form_operator_check(evolution::make_frame(balanced(p, n), t));
      },
      py::arg("params"), py::arg("t"), py::arg("n") = 256);
  m.def(
      "commutator_check",
      [](const SystemParams& p, double t, Index n) {
        const auto frame = evolution::make_frame(balanced(p, n), t);
        return evolution::commutator_residual(frame, evolution::interior_test_packets(frame.grid, p.hbar));
      },
      py::arg("params"), py::arg("t"), py::arg("n") = 256);
  m.def(
      "transformed_hamiltonian_residual",
      [](const SystemParams& p, double t, Index n, std::optional<double> dt) {
        const auto prop = balanced(p, n);
        if (dt) return evolution::transformed_hamiltonian_residual(*prop, t, evolution::FiniteDifference{*dt});
        return evolution::transformed_hamiltonian_residual(*prop, t, evolution::AnalyticDerivative{});
      },
      py::arg("params"), py::arg("t"), py::arg("n") = 128, py::arg("dt") = py::none(),
      "Analytic derivative by default; pass dt for the central-difference mode");
  m.def("fourier_duality_check",
        [](const SystemParams& p, double t, const std::vector<std::pair<double, double>>& pairs) {
          std::vector<kernels::PointPair> pts;
          for (auto [q, x] : pairs) pts.push_back({q, x});
          return kernels::fourier_duality_check(p, t, pts);
        },
        py::arg("params"), py::arg("t"), py::arg("pairs"));

  // Command line.
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"qmframe"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line front end; returns (exit_code, stdout, stderr)");
  m.def("list_checks", [](const std::string& module) {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto* c : cli::list_checks(module)) out.emplace_back(c->name, c->module, c->anchor);
    return out;
  }, py::arg("module") = "");
}
