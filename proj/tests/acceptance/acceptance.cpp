#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "rcxr/cli.hpp"
#include "rcxr/constants.hpp"
#include "rcxr/error.hpp"
#include "rcxr/extract.hpp"
#include "rcxr/io.hpp"

using namespace rcxr;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [FAILED]");
  }
};

int failures = 0;

void criterion(const std::string& id, double budget_s, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.require(false, std::string("exception: ") + e.what());
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream timing;
  timing.precision(3);
  timing << "runtime " << elapsed << " s < " << budget_s << " s";
  v.require(elapsed < budget_s, timing.str());
  std::cout << id << ' ' << (v.pass ? "PASS" : "FAIL") << "  " << v.detail.str() << std::endl;
  if (!v.pass) ++failures;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return code;
}

void write_curve_file(const std::filesystem::path& path, const ReflectivityCurve& c) {
  std::ostringstream text;
  write_curve(text, c, Abscissa::Q);
  write_text_file(path, text.str());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void ac1(Verdict& v) {
  const auto t = TableSet::load(RCXR_TEST_TABLES_DIR, {"As", "Si"});
  const cplx below = delta_f(t.at("As"), t.at("Si"), 1300.0);
  const cplx above = delta_f(t.at("As"), t.at("Si"), 1335.0);
  const double shift = (std::arg(above) - std::arg(below)) / kPi;
  v.require(std::abs(shift - 0.33) <= 0.10, "phase shift " + fmt(shift) + " pi in 0.33 +- 0.10 pi");
}

void ac2(Verdict& v) {
  const auto& t = test::tables();
  const auto stack = test::oxide_on_silicon();
  const auto q = linspace(3.0, 5.0, 401);
  for (const auto& delta : {test::sample_delta(16.8, 0.8, 2.77), test::sample_delta(18.1, 0.9, 2.77)}) {
    for (double e : {1300.0, 1335.0}) {
      const auto profile = discretize(stack, &delta, t, e, default_depth_grid(stack, &delta), q.back());
      const auto born = born_reflectivity(profile, q);
      const auto dyn = dynamical_reflectivity(stack, &delta, t, e, q);
      double worst = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) worst = std::max(worst, std::abs(born.r[i] - dyn.r[i]) / dyn.r[i]);
      v.require(worst < 0.05, "Born/dynamical d=" + fmt(delta.depth_nm()) + " " + fmt(e) + " eV max rel " +
                                  fmt(100.0 * worst, 3) + "% < 5%");
    }
  }
  const LayerStack bare({Layer{"substrate", test::silicon(), std::nullopt, 0.0}});
  const auto n = refractive_index(test::silicon(), t, 1300.0);
  const auto slabs = build_slabs(bare, nullptr, t, 1300.0);
  double worst = 0.0;
  for (double theta = 0.2; theta < 60.0; theta += 0.7) {
    const double r = recursive_reflectivity(slabs, 1300.0, q_from_theta(theta, 1300.0));
    const double f = fresnel_reflectance(cplx(1.0, 0.0), n, theta);
    worst = std::max(worst, std::abs(r - f) / f);
  }
  v.require(worst <= 1e-12, "Fresnel max rel " + fmt(worst, 3) + " <= 1e-12");
}

struct Corpus {
  std::filesystem::path dir;
  std::string below, above, host_below, host_above;
};

const Corpus& corpus() {
  static const Corpus c = [] {
    Corpus c;
    c.dir = test::scratch_dir("round_trip");
    const auto delta = test::sample_delta(18.1, 0.9, 2.77);
    c.below = (c.dir / "delta_1300eV.dat").string();
    c.above = (c.dir / "delta_1335eV.dat").string();
    c.host_below = (c.dir / "host_1300eV.dat").string();
    c.host_above = (c.dir / "host_1335eV.dat").string();
    write_curve_file(c.below, test::simulate(&delta, 1300.0));
    write_curve_file(c.above, test::simulate(&delta, 1335.0));
    write_curve_file(c.host_below, test::simulate(nullptr, 1300.0));
    write_curve_file(c.host_above, test::simulate(nullptr, 1335.0));
    return c;
  }();
  return c;
}

void ac3(Verdict& v) {
  const auto& c = corpus();
  const auto out = c.dir / "analyze.json";
  const int code = cli({"analyze", c.below, "--window", "1.5,5", "--output", out.string()});
  v.require(code == 0, "analyze exit " + std::to_string(code));
  if (code != 0) return;
  const auto j = read_json_file(out)["result"];
  const double d = j["depth_nm"]["value"].get<double>();
  const double w = j["fwhm_nm"]["value"].get<double>();
  v.require(std::abs(d - 18.1) <= 0.3, "d " + fmt(d) + " nm (18.1 +- 0.3)");
  v.require(std::abs(w - 0.9) <= 0.25 * 0.9, "FWHM " + fmt(w) + " nm (0.9 +- 25%)");
}

void ac4(Verdict& v) {
  const auto& c = corpus();
  const auto out = c.dir / "diff.json";
  const int code = cli({"diff-analyze", c.below, c.above, "--output", out.string()});
  v.require(code == 0, "diff-analyze exit " + std::to_string(code));
  if (code == 0) {
    const auto j = read_json_file(out);
    const double d = j["result"]["depth_nm"]["value"].get<double>();
    const double w = j["result"]["fwhm_nm"]["value"].get<double>();
    const auto ci = j["result"]["fwhm_nm"]["ci95"];
    v.require(std::abs(d - 18.1) <= 0.3, "d " + fmt(d) + " nm (18.1 +- 0.3)");
    v.require(std::abs(w - 0.9) <= 0.25 * 0.9, "FWHM " + fmt(w) + " nm (0.9 +- 25%)");
    v.require(!ci["lower"].is_null(), "FWHM CI [" + ci["lower"].dump() + ", " + ci["upper"].dump() + "]");
    v.require(true, "phase shift " + fmt(j["phase_shift"]["measured"]["pi"].get<double>()) + " pi (tabulated " +
                        fmt(j["phase_shift"]["tabulated"]["pi"].get<double>()) + " pi)");
  }
  const int host = cli({"diff-analyze", c.host_below, c.host_above});
  v.require(host == kExitNoLayer, "host-only control exit " + std::to_string(host) + " (no signal = 4)");

  const auto suite = test::scratch_dir("ac4_suite");
  v.require(cli({"synth-suite", "--output", suite.string(), "--seed", "7"}) == 0, "synth-suite written");
  const int control = cli({"diff-analyze", (suite / "control_1300eV.dat").string(),
                           (suite / "control_1335eV.dat").string()});
  v.require(control == kExitNoLayer, "buried-oxide control exit " + std::to_string(control) + " (no signal = 4)");
}

void ac5(Verdict& v) {
  const auto& t = test::tables();
  const auto stack = test::oxide_on_silicon();
  const ResonanceOptions opts;
  std::vector<double> energies;
  for (double e = opts.energy_lo_ev; e <= opts.energy_hi_ev + 1e-9; e += opts.energy_step_ev) energies.push_back(e);
  const auto delta = test::sample_delta(18.0, 1.6, 2.77);
  const auto scan = simulate_energy_scan(stack, &delta, t, 10.0, energies, opts.solver);
  const auto contrast = resonance_contrast(scan, opts.definition, opts.windows);
  v.require(std::abs(contrast.value - 0.09) <= 0.03, "dR/R " + fmt(contrast.value) + " in 0.09 +- 0.03 (" +
                                                         to_string(opts.definition) + ")");
  const auto inv = thickness_from_resonance(contrast.value, 0.01, 2.77, 18.0, stack, 10.0, "As", "Si", t, opts);
  v.require(std::abs(inv.delta_nm - 1.6) <= 0.02 * 1.6, "self-inversion delta " + fmt(inv.delta_nm, 5) +
                                                            " nm (1.6 +- 2%), " + std::to_string(inv.sweep_delta_nm.size()) +
                                                            "-point sweep");
}

void ac6(Verdict& v) {
  const auto& c = corpus();
  const auto single = analyze_single_energy(read_curve_file(c.below));
  const auto diff = analyze_difference(read_curve_file(c.below), read_curve_file(c.above));
  const double res = single.profile.resolution_nm;
  v.require(std::abs(single.profile.peak_depth_nm - 18.0) <= 1.5,
            "single-energy peak " + fmt(single.profile.peak_depth_nm) + " nm (18 +- 1.5)");
  v.require(std::abs(diff.profile.peak_depth_nm - 18.0) <= 1.5,
            "difference peak " + fmt(diff.profile.peak_depth_nm) + " nm (18 +- 1.5)");
  const double gap = std::abs(single.profile.peak_depth_nm - diff.profile.peak_depth_nm);
  v.require(gap <= res, "peak separation " + fmt(gap) + " nm <= resolution " + fmt(res) + " nm");
}

void ac7(Verdict& v) {
  const auto& t = test::tables();
  {
    const LayerStack bare({Layer{"substrate", test::silicon(), std::nullopt, 0.0}});
    const std::vector<double> q{3.0, 5.0};
    const auto r = dynamical_reflectivity(bare, nullptr, t, 1300.0, q);
    const double slope = std::log(r.r[1] / r.r[0]) / std::log(q[1] / q[0]);
    v.require(std::abs(slope + 4.0) <= 0.04, "Porod log-slope " + fmt(slope, 6));
  }
  {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    std::vector<cplx> x(1000);
    for (auto& s : x) s = {g(rng), g(rng)};
    const auto X = fft(x);
    const auto back = ifft(X);
    double et = 0.0, ef = 0.0, err = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      et += std::norm(x[i]);
      ef += std::norm(X[i]);
      err = std::max(err, std::abs(back[i] - x[i]));
      norm = std::max(norm, std::abs(x[i]));
    }
    const double parseval = std::abs(ef / static_cast<double>(x.size()) - et) / et;
    v.require(parseval <= 1e-10, "Parseval " + fmt(parseval, 2));
    v.require(err / norm <= 1e-12, "FFT round trip " + fmt(err / norm, 2));
  }
  {
    const auto q = uniform_grid(1.5, 5.0, 300);
    const Eigen::Vector4d p(0.03, 0.4, 18.1, 2.2);
    const auto exact = envelope_jacobian(q, p);
    const auto fd = finite_difference_jacobian([&](const Eigen::VectorXd& x) { return envelope_model(q, x); }, p);
    const double rel = (fd - exact).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff();
    v.require(rel <= 1e-5, "Jacobian vs FD " + fmt(rel, 2));
  }
  {
    const std::vector<double> q{5.0};
    const auto smooth = dynamical_reflectivity(LayerStack({Layer{"s", test::silicon(), std::nullopt, 0.0}}), nullptr,
                                               t, 1300.0, q);
    const auto rough = dynamical_reflectivity(LayerStack({Layer{"s", test::silicon(), std::nullopt, 0.1}}), nullptr,
                                              t, 1300.0, q);
    const double factor = rough.r[0] / smooth.r[0];
    v.require(std::abs(factor - std::exp(-0.25)) <= 1e-3, "Nevot-Croce factor " + fmt(factor, 6));
  }
  {
    const auto one = test::sample_delta(18.1, 0.9, 2.77);
    const auto two = one.with_n2d(2.0 * 2.77);
    const auto a = analyze_single_energy(test::simulate(&one, 1300.0));
    const auto b = analyze_single_energy(test::simulate(&two, 1300.0));
    const double d = a.result.depth_nm.value;
    const double dphi = std::abs(std::remainder(a.result.phase_rad.value - b.result.phase_rad.value, 2.0 * kPi));
    const double shift = dphi / d;
    const double limit = 0.01 * 2.0 * kPi / d;
    v.require(shift < limit, "extrema shift under N2D doubling " + fmt(shift, 3) + " < " + fmt(limit, 3) + " 1/nm");
  }
}

void ac8(Verdict& v) {
  const auto a = test::scratch_dir("determinism_a");
  const auto b = test::scratch_dir("determinism_b");
  v.require(cli({"synth-suite", "--output", a.string(), "--seed", "2024"}) == 0, "first run");
  v.require(cli({"synth-suite", "--output", b.string(), "--seed", "2024"}) == 0, "second run");
  std::size_t files = 0, identical = 0;
  for (const auto& entry : std::filesystem::directory_iterator(a)) {
    ++files;
    const auto other = b / entry.path().filename();
    if (std::filesystem::exists(other) && slurp(entry.path()) == slurp(other)) ++identical;
  }
  std::size_t files_b = 0;
  for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(b)) ++files_b;
  v.require(files > 0 && identical == files && files == files_b,
            std::to_string(identical) + "/" + std::to_string(files) + " files byte-identical");
}

}  // namespace

int main() {
  criterion("AC1", 1.0, ac1);
  criterion("AC2", 5.0, ac2);
  criterion("AC3", 10.0, [](Verdict& v) {
    corpus();
    ac3(v);
  });
  criterion("AC4", 10.0, ac4);
  criterion("AC5", 60.0, ac5);
  criterion("AC6", 10.0, ac6);
  criterion("AC7", 120.0, ac7);
  criterion("AC8", 60.0, ac8);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
