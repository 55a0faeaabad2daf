#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <json.hpp>
#include <string>
#include <vector>

#include "shg/config.hpp"
#include "shg/coupled.hpp"
#include "shg/phantom.hpp"
#include "shg/runner.hpp"
#include "shg/synth.hpp"

namespace py = pybind11;

namespace {

using shg::Complex;
using shg::GridSpec;

// Fields cross the boundary as (ny, nx) row-major arrays; node (i, j) sits at
// flat index j*nx + i on both sides, so the copies are straight memcpys.
template <class A>
void check_field_shape(const GridSpec& g, const A& a, const char* what) {
  if (a.ndim() != 2 || a.shape(0) != g.ny || a.shape(1) != g.nx)
    throw shg::ConfigError(std::string(what) + ": expected shape (ny, nx) = (" + std::to_string(g.ny) +
                           ", " + std::to_string(g.nx) + ")");
}

shg::RealField to_real(const GridSpec& g, py::array_t<double, py::array::c_style | py::array::forcecast> a,
                       const char* what) {
  check_field_shape(g, a, what);
  shg::RealField f(g);
  std::memcpy(f.values.data(), a.data(), sizeof(double) * f.values.size());
  return f;
}

shg::ComplexField to_cplx(const GridSpec& g,
                          py::array_t<Complex, py::array::c_style | py::array::forcecast> a,
                          const char* what) {
  check_field_shape(g, a, what);
  shg::ComplexField f(g);
  std::memcpy(f.values.data(), a.data(), sizeof(Complex) * f.values.size());
  return f;
}

shg::BoundaryTrace to_trace(const GridSpec& g,
                            py::array_t<Complex, py::array::c_style | py::array::forcecast> a,
                            const char* what) {
  if (a.ndim() != 1 || a.shape(0) != g.boundary_count())
    throw shg::ConfigError(std::string(what) + ": expected 1-d array of length " +
                           std::to_string(g.boundary_count()) + " (canonical boundary order)");
  shg::BoundaryTrace t(g);
  std::memcpy(t.values.data(), a.data(), sizeof(Complex) * t.values.size());
  return t;
}

py::array_t<double> from_real(const shg::RealField& f) {
  py::array_t<double> a({f.grid.ny, f.grid.nx});
  std::memcpy(a.mutable_data(), f.values.data(), sizeof(double) * f.values.size());
  return a;
}

py::array_t<Complex> from_cplx(const shg::ComplexField& f) {
  py::array_t<Complex> a({f.grid.ny, f.grid.nx});
  std::memcpy(a.mutable_data(), f.values.data(), sizeof(Complex) * f.values.size());
  return a;
}

py::array_t<Complex> from_trace(const shg::BoundaryTrace& t) {
  py::array_t<Complex> a(static_cast<py::ssize_t>(t.values.size()));
  std::memcpy(a.mutable_data(), t.values.data(), sizeof(Complex) * t.values.size());
  return a;
}

shg::InclusionKind kind_from_string(const std::string& s) {
  if (s == "disk") return shg::InclusionKind::Disk;
  if (s == "square") return shg::InclusionKind::Square;
  if (s == "gaussian") return shg::InclusionKind::Gaussian;
  throw shg::ConfigError("inclusion kind must be disk, square, or gaussian, got \"" + s + "\"");
}

shg::MediumSet build_media(const GridSpec& g, py::array_t<double> gamma_g, py::array_t<double> eta,
                           py::array_t<double> sigma, py::array_t<double> chi2) {
  shg::MediumSet m;
  m.gamma_g = to_real(g, gamma_g, "gamma_g");
  m.eta = to_real(g, eta, "eta");
  m.sigma = to_real(g, sigma, "sigma");
  m.chi2 = to_real(g, chi2, "chi2");
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Second-harmonic internal-data imaging: forward solvers, synthetic data, task runner";
  m.attr("__version__") = "0.1.0";

  py::register_exception<shg::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<shg::AdmissibilityError>(m, "AdmissibilityError", PyExc_ValueError);
  py::register_exception<shg::SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<shg::DataConditionError>(m, "DataConditionError", PyExc_RuntimeError);

  py::class_<GridSpec>(m, "Grid")
      .def(py::init([](int nx, int ny, double x0, double y0, double lx, double ly) {
             return GridSpec::make(nx, ny, x0, y0, lx, ly);
           }),
           py::arg("nx"), py::arg("ny"), py::arg("x0") = 0.0, py::arg("y0") = 0.0, py::arg("lx") = 1.0,
           py::arg("ly") = 1.0)
      .def_static("unit_square", &GridSpec::unit_square, py::arg("n"))
      .def_readonly("nx", &GridSpec::nx)
      .def_readonly("ny", &GridSpec::ny)
      .def_readonly("x0", &GridSpec::x0)
      .def_readonly("y0", &GridSpec::y0)
      .def_readonly("lx", &GridSpec::lx)
      .def_readonly("ly", &GridSpec::ly)
      .def_property_readonly("hx", &GridSpec::hx)
      .def_property_readonly("hy", &GridSpec::hy)
      .def_property_readonly("shape", [](const GridSpec& g) { return py::make_tuple(g.ny, g.nx); })
      .def_property_readonly("boundary_count", &GridSpec::boundary_count)
      .def("__eq__", [](const GridSpec& a, const GridSpec& b) { return a == b; })
      .def("__repr__", [](const GridSpec& g) {
        return "Grid(nx=" + std::to_string(g.nx) + ", ny=" + std::to_string(g.ny) + ")";
      });

  py::class_<shg::Inclusion>(m, "Inclusion")
      .def(py::init([](const std::string& kind, double cx, double cy, double size, double amplitude) {
             shg::Inclusion inc;
             inc.kind = kind_from_string(kind);
             inc.cx = cx;
             inc.cy = cy;
             inc.size = size;
             inc.amplitude = amplitude;
             return inc;
           }),
           py::arg("kind"), py::arg("cx"), py::arg("cy"), py::arg("size"), py::arg("amplitude"));

  m.def(
      "make_phantom",
      [](const GridSpec& g, double background, const std::vector<shg::Inclusion>& inclusions) {
        return from_real(shg::make_phantom(g, background, inclusions));
      },
      py::arg("grid"), py::arg("background"), py::arg("inclusions") = std::vector<shg::Inclusion>{});

  m.def(
      "plane_wave_trace",
      [](const GridSpec& g, double kappa, double angle, double amplitude) {
        return from_trace(shg::IlluminationPattern::plane_wave(angle, amplitude).evaluate(g, kappa));
      },
      py::arg("grid"), py::arg("kappa"), py::arg("angle") = 0.0, py::arg("amplitude") = 1.0,
      "Dirichlet trace of exp(i kappa x . d(angle)) in canonical boundary order.");

  m.def(
      "boundary_bump_trace",
      [](const GridSpec& g, double kappa, double center, double width, double amplitude) {
        return from_trace(shg::IlluminationPattern::boundary_bump(center, width, amplitude).evaluate(g, kappa));
      },
      py::arg("grid"), py::arg("kappa"), py::arg("center"), py::arg("width"), py::arg("amplitude") = 1.0);

  m.def(
      "solve_coupled",
      [](const GridSpec& g, double k, py::array_t<double> gamma_g, py::array_t<double> eta,
         py::array_t<double> sigma, py::array_t<double> chi2, py::array_t<Complex> gtr,
         py::array_t<Complex> htr, double fp_tol, int max_iter, bool enforce_small_data) {
        auto media = build_media(g, gamma_g, eta, sigma, chi2);
        shg::CoupledOptions opts;
        opts.fp_tol = fp_tol;
        opts.max_iter = max_iter;
        opts.enforce_small_data = enforce_small_data;
        auto s = shg::solve_coupled(media, k, to_trace(g, gtr, "g"), to_trace(g, htr, "h"), opts);
        return py::make_tuple(from_cplx(s.u), from_cplx(s.v), s.iterations, s.final_update);
      },
      py::arg("grid"), py::arg("k"), py::arg("gamma_g"), py::arg("eta"), py::arg("sigma"), py::arg("chi2"),
      py::arg("g"), py::arg("h"), py::arg("fp_tol") = 1e-12, py::arg("max_iter") = 200,
      py::arg("enforce_small_data") = true,
      "Fixed-point solve of the coupled system; returns (u, v, iterations, final_update).");

  m.def(
      "solve_one_way",
      [](const GridSpec& g, double k, py::array_t<double> gamma_g, py::array_t<double> eta,
         py::array_t<double> sigma, py::array_t<double> chi2, py::array_t<Complex> gtr) {
        auto media = build_media(g, gamma_g, eta, sigma, chi2);
        auto s = shg::solve_one_way(media, k, to_trace(g, gtr, "g"));
        return py::make_tuple(from_cplx(s.u), from_cplx(s.v));
      },
      py::arg("grid"), py::arg("k"), py::arg("gamma_g"), py::arg("eta"), py::arg("sigma"), py::arg("chi2"),
      py::arg("g"),
      "One-way model: linear fundamental, impedance-closed second harmonic; returns (u, v).");

  m.def(
      "internal_data",
      [](const GridSpec& g, py::array_t<Complex> u, py::array_t<Complex> v, py::array_t<double> gamma_g,
         py::array_t<double> sigma) {
        return from_real(shg::internal_data(to_cplx(g, u, "u"), to_cplx(g, v, "v"),
                                            to_real(g, gamma_g, "gamma_g"), to_real(g, sigma, "sigma")));
      },
      py::arg("grid"), py::arg("u"), py::arg("v"), py::arg("gamma_g"), py::arg("sigma"),
      "H = gamma_g * sigma * (|u|^2 + |v|^2).");

  m.def(
      "polarize",
      [](const GridSpec& g, py::array_t<double> h1, py::array_t<double> h2, py::array_t<double> h_sum,
         py::array_t<double> h_isum) {
        return from_cplx(shg::polarize(to_real(g, h1, "h1"), to_real(g, h2, "h2"),
                                       to_real(g, h_sum, "h_sum"), to_real(g, h_isum, "h_isum")));
      },
      py::arg("grid"), py::arg("h1"), py::arg("h2"), py::arg("h_sum"), py::arg("h_isum"),
      "Polarization identity recovering E = gamma_g sigma u1 conj(u2) from four power densities.");

  m.def(
      "add_noise",
      [](const GridSpec& g, py::array_t<double> h, double level, uint64_t seed, uint64_t stream) {
        return from_real(shg::add_noise(to_real(g, h, "h"), level, seed, stream));
      },
      py::arg("grid"), py::arg("h"), py::arg("level"), py::arg("seed"), py::arg("stream") = 0,
      "Multiplicative Gaussian noise with a deterministic (seed, stream) RNG.");

  m.def(
      "validate_config",
      [](const std::string& text) {
        auto j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded()) throw shg::ConfigError("config is not valid JSON");
        auto r = shg::validate_config_json(j);
        return py::make_tuple(r.ok, r.errors, r.materialized.dump(2));
      },
      py::arg("config_json"),
      "Validate a config document; returns (ok, errors, materialized_json).");

  m.def(
      "run_config",
      [](const std::string& text, const std::string& out_dir, py::object seed, int threads, bool png) {
        auto j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded()) throw shg::ConfigError("config is not valid JSON");
        auto cfg = shg::parse_config(j);
        shg::RunOptions opts;
        opts.out_dir = out_dir;
        if (!seed.is_none()) opts.seed_override = seed.cast<uint64_t>();
        opts.threads = threads;
        opts.png = png;
        auto rr = shg::run_task(cfg, opts);
        return py::make_tuple(rr.contract_ok, rr.report.dump(2));
      },
      py::arg("config_json"), py::arg("out_dir"), py::arg("seed") = py::none(), py::arg("threads") = 1,
      py::arg("png") = false,
      "Run a task from a JSON config string; returns (contract_ok, report_json). Artifacts land in out_dir.");
}
