#include <algorithm>
#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rcxr/cli.hpp"
#include "rcxr/extract.hpp"
#include "rcxr/io.hpp"

namespace py = pybind11;
using namespace rcxr;

namespace {

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw py::value_error("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

ReflectivityCurve make_curve(const py::array_t<double, py::array::c_style | py::array::forcecast>& q,
                             const py::array_t<double, py::array::c_style | py::array::forcecast>& r,
                             double energy_ev) {
  ReflectivityCurve c;
  c.q = to_vector(q);
  c.r = to_vector(r);
  c.energy_ev = energy_ev;
  c.validate();
  return c;
}

AnalysisOptions make_options(std::pair<double, double> window, std::optional<double> cutoff_nm) {
  AnalysisOptions o;
  o.window = QWindow{window.first, window.second};
  o.cutoff_nm = cutoff_nm;
  return o;
}

std::vector<std::string> needed_elements(const LayerStack& stack, const std::optional<DeltaLayerSpec>& delta) {
  auto e = stack.elements();
  if (delta) {
    e.push_back(delta->dopant());
    e.push_back(delta->host());
  }
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  return e;
}

}  // namespace

PYBIND11_MODULE(_rcxr, m) {
  m.doc() = "Resonant contrast X-ray reflectometry core";
  m.attr("__version__") = kVersion;

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object cls = py::module_::import("rcxr.errors").attr("RcxrError");
      PyErr_SetObject(cls.ptr(), py::make_tuple(to_string(e.kind()), e.what(), exit_code(e.kind())).ptr());
    }
  });

  m.def("resolve_tables_dir", [](const std::string& flag) { return resolve_tables_dir(flag).string(); },
        py::arg("flag") = "");

  m.def(
      "delta_f",
      [](const std::string& dopant, const std::string& host, double energy_ev, const std::string& tables_dir) {
        const auto t = TableSet::load(resolve_tables_dir(tables_dir), {dopant, host});
        return delta_f(t.at(dopant), t.at(host), energy_ev);
      },
      py::arg("dopant"), py::arg("host"), py::arg("energy_ev"), py::arg("tables_dir") = "");

  m.def(
      "simulate",
      [](const std::string& config_json, double energy_ev,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& q, const std::string& solver,
         const std::string& tables_dir) {
        const auto config = parse_json(config_json, "config");
        const auto stack = parse_stack(config);
        const auto delta = parse_delta(config);
        const auto tables = TableSet::load(resolve_tables_dir(tables_dir), needed_elements(stack, delta));
        const auto qv = to_vector(q);
        const DeltaLayerSpec* dptr = delta ? &*delta : nullptr;
        if (solver == "born") {
          const auto profile = discretize(stack, dptr, tables, energy_ev, default_depth_grid(stack, dptr), qv.back());
          return to_array(born_reflectivity(profile, qv).r);
        }
        if (solver != "dynamical") throw Error(ErrorKind::Schema, "solver must be born or dynamical");
        return to_array(dynamical_reflectivity(stack, dptr, tables, energy_ev, qv).r);
      },
      py::arg("config_json"), py::arg("energy_ev"), py::arg("q"), py::arg("solver") = "dynamical",
      py::arg("tables_dir") = "");

  m.def(
      "add_counting_noise",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& q,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& r, double incident_counts,
         std::uint64_t seed) {
        const auto noisy = add_counting_noise(make_curve(q, r, 1.0), incident_counts, seed);
        return py::make_tuple(to_array(noisy.r), to_array(*noisy.sigma_r));
      },
      py::arg("q"), py::arg("r"), py::arg("incident_counts"), py::arg("seed"));

  m.def(
      "analyze",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& q,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& r, double energy_ev,
         std::pair<double, double> window, std::optional<double> cutoff_nm) {
        const auto a = analyze_single_energy(make_curve(q, r, energy_ev), make_options(window, cutoff_nm));
        Json j;
        j["energy_ev"] = energy_ev;
        j["cutoff_nm"] = a.decomposition.cutoff_nm;
        j["fft"] = to_json(a.fft);
        j["result"] = to_json(a.result);
        j["profile"] = to_json(a.profile);
        return j.dump();
      },
      py::arg("q"), py::arg("r"), py::arg("energy_ev"), py::arg("window") = std::pair{1.5, 5.0},
      py::arg("cutoff_nm") = py::none());

  m.def(
      "diff_analyze",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& q,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& r_below,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& r_above, double below_ev,
         double above_ev, std::pair<double, double> window, std::optional<double> cutoff_nm) {
        const auto a = analyze_difference(make_curve(q, r_below, below_ev), make_curve(q, r_above, above_ev),
                                          make_options(window, cutoff_nm));
        Json j;
        j["energies_ev"] = {{"below", below_ev}, {"above", above_ev}};
        j["cutoff_nm"] = a.below_decomposition.cutoff_nm;
        j["fft"] = to_json(a.fft);
        j["result"] = to_json(a.result);
        j["profile"] = to_json(a.profile);
        j["measured_phase_shift_rad"] = a.measured_phase_shift_rad;
        j["resonant_ratio"] = a.resonant_ratio;
        return j.dump();
      },
      py::arg("q"), py::arg("r_below"), py::arg("r_above"), py::arg("below_ev"), py::arg("above_ev"),
      py::arg("window") = std::pair{1.5, 5.0}, py::arg("cutoff_nm") = py::none());

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
