#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "xsblab/counterexample.hpp"
#include "xsblab/dynamics.hpp"
#include "xsblab/harness.hpp"
#include "xsblab/lemmas.hpp"
#include "xsblab/resonance.hpp"
#include "xsblab/scaling.hpp"
#include "xsblab/spectral.hpp"
#include "xsblab/xsb.hpp"

namespace py = pybind11;
using namespace xsblab;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

SpatialSpectrum spectrum_from(const CArray& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-d complex array");
  return SpatialSpectrum{std::vector<cplx>(a.data(), a.data() + a.size())};
}

CArray to_array(const std::vector<cplx>& v) { return CArray(static_cast<py::ssize_t>(v.size()), v.data()); }

// Rows are time nodes (or temporal frequencies), columns spatial.
CArray to_array(const std::vector<cplx>& v, std::size_t rows, std::size_t cols) {
  CArray out({rows, cols});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

SpectralField spectral_from(const CArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-d complex array (nt, nx)");
  SpectralField f(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), f.values.begin());
  return f;
}

CArray stacked(const Trajectory& t) {
  std::vector<cplx> flat;
  for (const auto& s : t.states) flat.insert(flat.end(), s.values.begin(), s.values.end());
  return to_array(flat, t.states.size(), t.grid.nx());
}

py::dict lemma_dict(const LemmaCheck& c) {
  py::dict d;
  d["value"] = c.value;
  d["ratio"] = c.ratio;
  d["error"] = c.error;
  d["argmax"] = c.argmax;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "X^{s,b} numerical lab: spectral transforms, norms, estimates and solvers";

  py::register_exception<Error>(m, "XsbError", PyExc_RuntimeError);

  py::class_<PhaseParams>(m, "PhaseParams")
      .def(py::init([](double alpha, double beta, cplx gamma) {
             PhaseParams p{alpha, beta, gamma};
             p.validate();
             return p;
           }),
           py::arg("alpha") = 0.0, py::arg("beta") = 1.0, py::arg("gamma") = cplx{1.0, 0.0})
      .def_readwrite("alpha", &PhaseParams::alpha)
      .def_readwrite("beta", &PhaseParams::beta)
      .def_readwrite("gamma", &PhaseParams::gamma)
      .def("phase", [](const PhaseParams& p, double xi) { return phase_symbol(xi, p); });

  py::class_<SpaceTimeGrid>(m, "SpaceTimeGrid")
      .def(py::init<double, std::size_t, double, std::size_t>(), py::arg("length"), py::arg("nx"),
           py::arg("time_span"), py::arg("nt"))
      .def_property_readonly("length", &SpaceTimeGrid::length)
      .def_property_readonly("nx", &SpaceTimeGrid::nx)
      .def_property_readonly("time_span", &SpaceTimeGrid::time_span)
      .def_property_readonly("nt", &SpaceTimeGrid::nt)
      .def_property_readonly("dxi", &SpaceTimeGrid::dxi)
      .def_property_readonly("dtau", &SpaceTimeGrid::dtau)
      .def("xi", [](const SpaceTimeGrid& g) {
        std::vector<double> v(g.nx());
        for (std::size_t k = 0; k < g.nx(); ++k) v[k] = g.xi(k);
        return v;
      })
      .def("x", [](const SpaceTimeGrid& g) {
        std::vector<double> v(g.nx());
        for (std::size_t j = 0; j < g.nx(); ++j) v[j] = g.x(j);
        return v;
      });

  m.def("to_spectrum", [](const CArray& u, const SpaceTimeGrid& g) {
    return to_array(to_spectrum(SpatialField{spectrum_from(u).values}, g).values);
  });
  m.def("to_field", [](const CArray& u_hat, const SpaceTimeGrid& g) {
    return to_array(to_field(spectrum_from(u_hat), g).values);
  });
  m.def("l2_norm", [](const CArray& u_hat, const SpaceTimeGrid& g) { return l2_norm(spectrum_from(u_hat), g); });
  m.def("sobolev_norm", [](const CArray& u_hat, double s, const SpaceTimeGrid& g) {
    return sobolev_norm(spectrum_from(u_hat), s, g);
  });
  m.def("xsb_norm", [](const CArray& f_hat, double s, double b, const PhaseParams& p, const SpaceTimeGrid& g) {
    return xsb_norm(spectral_from(f_hat), s, b, p, g);
  }, py::arg("f_hat"), py::arg("s"), py::arg("b"), py::arg("params"), py::arg("grid"));
  m.def("windowed_free_solution", [](const CArray& u0_hat, double scale, const PhaseParams& p, const SpaceTimeGrid& g) {
    const auto sol = windowed_free_solution(spectrum_from(u0_hat), TimeWindow{TimeWindow::Kind::smooth_bump, scale}, p, g);
    return to_array(to_spectral_field(sol, g).values, g.nt(), g.nx());
  }, "Space-time spectrum of psi_T(t) U(t) u0, shape (nt, nx).");

  m.def("bump_xsb_norm", [](double n, double s, double b) {
    return bump_xsb_norm(build_bump(n, 64, 64, PhaseParams{}), s, b);
  });
  m.def("counterexample_ratio", [](double n, double s, double b) {
    const auto r = counterexample_ratio(n, s, b, CounterexampleResolution{}, PhaseParams{});
    py::dict d;
    d["n"] = r.n;
    d["num"] = r.num;
    d["den"] = r.den;
    d["ratio"] = r.ratio;
    d["total_mass"] = r.total_mass;
    d["expected_mass"] = r.expected_mass;
    return d;
  });
  m.def("fit_scaling_exponent", [](const std::vector<double>& n, const std::vector<double>& value) {
    if (n.size() != value.size()) throw py::value_error("n and value differ in length");
    std::vector<ScalingPoint> pts;
    for (std::size_t i = 0; i < n.size(); ++i) pts.push_back({n[i], value[i]});
    const auto r = fit_scaling_exponent(pts);
    return py::make_tuple(r.slope, r.intercept, r.stderr_slope);
  }, "Returns (slope, intercept, stderr_slope) of a log-log least-squares fit.");

  m.def("check_el1", [](double a1, double a2, double b) { return lemma_dict(check_el1(a1, a2, b)); });
  m.def("check_el2", [](double a1, double a2, double c1, double c2) { return lemma_dict(check_el2(a1, a2, c1, c2)); });
  m.def("check_el3", [](double a, double c1, double c2) { return lemma_dict(check_el3(a, c1, c2)); });
  m.def("check_el4", [](double a, double eta, double b) { return lemma_dict(check_el4(a, eta, b)); });

  m.def("eval_I", [](double xi, double y, double rho, double b, double truncation_radius, double tolerance) {
    QuadSpec q;
    q.truncation_radius = truncation_radius;
    q.tolerance = tolerance;
    return eval_I(xi, y, rho, b, q).value;
  }, py::arg("xi"), py::arg("y"), py::arg("rho"), py::arg("b"), py::arg("truncation_radius") = 1e4,
        py::arg("tolerance") = 1e-7);
  m.def("dichotomy_I00", [](double rho, double b, double r0, double r_max) {
    const auto v = dichotomy_I00(rho, b, geometric_radii(r0, r_max));
    return py::make_tuple(to_string(v.regime), v.tail_slope);
  }, py::arg("rho"), py::arg("b"), py::arg("r0") = 4.0, py::arg("r_max") = 1024.0,
        "Returns (regime, tail_slope).");

  py::class_<SolveConfig>(m, "SolveConfig")
      .def(py::init([](double dt, const std::string& dealias, const std::string& scheme) {
             SolveConfig c;
             c.dt = dt;
             if (dealias != "two_thirds" && dealias != "none") throw py::value_error("dealias: two_thirds or none");
             if (scheme != "strang" && scheme != "lie") throw py::value_error("scheme: strang or lie");
             c.dealias = dealias == "none" ? Dealias::none : Dealias::two_thirds;
             c.scheme = scheme == "lie" ? SplitScheme::lie : SplitScheme::strang;
             c.validate();
             return c;
           }),
           py::arg("dt") = 1e-3, py::arg("dealias") = "two_thirds", py::arg("scheme") = "strang")
      .def_readwrite("dt", &SolveConfig::dt)
      .def_readwrite("picard_max_iters", &SolveConfig::picard_max_iters)
      .def_readwrite("picard_tol", &SolveConfig::picard_tol);

  m.def("splitstep_evolve", [](const CArray& u0_hat, const SolveConfig& c, const PhaseParams& p,
                               const SpaceTimeGrid& g, double t_final) {
    const auto t = splitstep_evolve(spectrum_from(u0_hat), c, p, g, t_final);
    return py::make_tuple(t.times, stacked(t));
  }, "Returns (times, spectra) with spectra of shape (steps + 1, nx).");
  m.def("picard_iterate", [](const CArray& u0_hat, const SolveConfig& c, const PhaseParams& p,
                             const SpaceTimeGrid& g, double t_final) {
    const auto r = picard_iterate(spectrum_from(u0_hat), c, p, g, t_final);
    return py::make_tuple(r.trajectory.times, stacked(r.trajectory), r.residuals, r.converged);
  }, "Returns (times, spectra, residuals, converged).");

  m.def("catalog", [] {
    py::list out;
    for (const auto& e : harness::catalog()) {
      out.append(py::make_tuple(std::string(harness::to_string(e.kind)), std::string(e.subcommand),
                                std::string(e.summary)));
    }
    return out;
  });
  m.def("run_experiment", [](const std::string& config_text, bool is_json, const std::string& output_dir) {
    auto cfg = harness::parse_config(config_text, is_json);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    const auto bundle = harness::run_experiment(cfg);
    return py::make_tuple(bundle.summary.dump(), harness::exit_code(bundle));
  }, py::arg("config_text"), py::arg("is_json") = false, py::arg("output_dir") = "",
        "Runs one experiment; returns (summary JSON text, exit code).");
}
