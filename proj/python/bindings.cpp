// Python bindings. Configuration and results cross the boundary as JSON text;
// fields and fans as numpy arrays.
#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "rts/acceptance.hpp"
#include "rts/errors.hpp"
#include "rts/experiment.hpp"
#include "rts/io.hpp"

namespace py = pybind11;
using namespace rts;

namespace {

using CArray = py::array_t<std::complex<double>>;

// Mode grid as an (n, n) array indexed [row j (y), column i (x)].
CArray grid_array(const Grid& g, const ComplexGrid& f) {
  CArray a({g.n(), g.n()});
  auto* p = a.mutable_data();
  for (std::size_t k = 0; k < g.size(); ++k) p[k] = k < f.size() ? f[k] : cplx(0);
  return a;
}

py::dict field_dict(const FiberField& u) {
  py::dict d;
  for (int n = -u.degree(); n <= u.degree(); ++n) d[py::int_(n)] = grid_array(u.grid(), u.mode(n));
  return d;
}

py::dict fan_dict(const BoundaryFan& fan) {
  const py::ssize_t m = static_cast<py::ssize_t>(fan.size());
  py::array_t<double> s(m), th(m), mu(m), tau(m);
  CArray v(m);
  for (py::ssize_t k = 0; k < m; ++k) {
    const FanEntry& e = fan.entries[k];
    s.mutable_at(k) = e.s;
    th.mutable_at(k) = e.theta;
    mu.mutable_at(k) = e.mu;
    tau.mutable_at(k) = fan.tau.empty() ? 0.0 : fan.tau[k];
    v.mutable_at(k) = fan.values.empty() ? cplx(0) : fan.values[k];
  }
  py::dict d;
  d["s"] = s;
  d["theta_in"] = th;
  d["mu"] = mu;
  d["tau"] = tau;
  d["values"] = v;
  d["boundary_n"] = fan.boundary_n;
  d["dir_n"] = fan.dir_n;
  return d;
}

class Model {
 public:
  explicit Model(const std::string& config_json)
      : cfg_(parse_config(Json::parse(config_json.empty() ? "{}" : config_json))),
        grid_(make_grid(cfg_.domain)),
        speed_(std::make_shared<SpeedField>(grid_, cfg_.speed)) {}

  std::string config() const { return cfg_.to_json().dump(); }

  py::dict grid() const {
    const Grid& g = *grid_;
    py::array_t<double> x(g.n()), y(g.n());
    py::array_t<bool> mask({g.n(), g.n()});
    for (int i = 0; i < g.n(); ++i) {
      x.mutable_at(i) = g.x(i);
      y.mutable_at(i) = g.y(i);
    }
    for (std::size_t k = 0; k < g.size(); ++k) mask.mutable_data()[k] = g.in_mask(static_cast<int>(k));
    py::dict d;
    d["x"] = x;
    d["y"] = y;
    d["mask"] = mask;
    d["h"] = g.h();
    return d;
  }

  std::pair<double, double> exit_time(double x, double y, double theta) const {
    const ExitTimes t = rts::exit_time({x, y, theta}, *speed_, cfg_.transport.flow);
    return {t.forward, t.backward};
  }

  std::string geometry() const {
    Json r;
    {
      py::gil_scoped_release nogil;
      const FlowOptions& f = cfg_.transport.flow;
      const SimplicityReport s = simplicity_check(*speed_, cfg_.domain, f);
      const auto one = [](const PhasePoint&) { return 1.0; };
      r = {{"simple", s.simple()},
           {"non_trapping", s.non_trapping},
           {"strictly_convex", s.strictly_convex},
           {"conjugate_points", s.conjugate_points},
           {"convexity_constant", convexity_constant(*speed_, cfg_.domain, f)},
           {"santalo_volume", santalo_integrate(one, *speed_, cfg_.domain, f)},
           {"grid_volume", grid_phase_integral(one, *speed_, 64)}};
    }
    return r.dump();
  }

  py::dict source(const std::string& case_name) const { return field_dict(make_source(cfg_, *speed_, pick(case_name))); }

  py::tuple forward(const std::string& case_name) const {
    ForwardResult fr;
    {
      py::gil_scoped_release nogil;
      const OpticalParams P = params();
      fr = forward_solve(make_source(cfg_, *speed_, pick(case_name)), P, *speed_, cfg_.transport);
    }
    return py::make_tuple(field_dict(fr.u), fr.iterations, fr.residuals);
  }

  py::dict measure(const std::string& case_name) const {
    BoundaryFan fan;
    {
      py::gil_scoped_release nogil;
      const OpticalParams P = params();
      fan = rts::measure(make_source(cfg_, *speed_, pick(case_name)), P, *speed_, cfg_.domain, cfg_.transport);
    }
    return fan_dict(fan);
  }

  py::tuple reconstruct() const {
    ReconstructionRun run;
    {
      py::gil_scoped_release nogil;
      params();
      run = run_reconstruction(cfg_, *speed_);
    }
    py::dict fields;
    for (const NamedField& f : run.fields) fields[py::str(f.name)] = field_dict(f.field);
    return py::make_tuple(run.results.dump(), fields, fan_dict(run.data));
  }

 private:
  std::string pick(const std::string& c) const { return c.empty() ? cfg_.reconstruct.case_name : c; }
  OpticalParams params() const {
    OpticalParams P = make_params(cfg_, *grid_);
    check_admissible(*grid_, P);
    return P;
  }

  RunConfig cfg_;
  GridPtr grid_;
  std::shared_ptr<SpeedField> speed_;
};

py::list acceptance(const std::vector<int>& ids, bool quick) {
  AcceptanceOptions opt;
  opt.profile = quick ? Profile::Quick : Profile::Full;
  opt.only = ids;
  std::vector<CriterionResult> res;
  {
    py::gil_scoped_release nogil;
    res = run_acceptance(opt);
  }
  py::list out;
  for (const CriterionResult& c : res) {
    py::dict d;
    d["id"] = c.id;
    d["name"] = c.name;
    d["pass"] = c.pass;
    d["detail"] = c.detail;
    d["seconds"] = c.seconds;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Attenuated transport with anisotropic scattering: forward solver and source reconstruction";

  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  static py::exception<NumericalError> numerical_error(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const NumericalError& e) {
      numerical_error(e.what());
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    } catch (const nlohmann::json::exception& e) {
      config_error(e.what());
    }
  });

  py::class_<Model>(m, "Model")
      .def(py::init<const std::string&>(), py::arg("config_json") = "")
      .def("config", &Model::config)
      .def("grid", &Model::grid)
      .def("exit_time", &Model::exit_time, py::arg("x"), py::arg("y"), py::arg("theta"))
      .def("geometry", &Model::geometry)
      .def("source", &Model::source, py::arg("case") = "")
      .def("forward", &Model::forward, py::arg("case") = "")
      .def("measure", &Model::measure, py::arg("case") = "")
      .def("reconstruct", &Model::reconstruct);

  m.def("format_double", &format_double);
  m.def("run_acceptance", &acceptance, py::arg("ids") = std::vector<int>{}, py::arg("quick") = true);
}
