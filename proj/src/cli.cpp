#include "rcxr/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rcxr/digest.hpp"
#include "rcxr/extract.hpp"
#include "rcxr/io.hpp"

namespace rcxr {

namespace {

constexpr double kSynthQMin = 0.3;
constexpr double kSynthQMax = 5.2;
constexpr std::size_t kSynthQPoints = 981;
constexpr double kSynthCounts = 1e11;
constexpr double kSynthEnergies[2] = {1300.0, 1335.0};

struct Common {
  std::string config_path;
  std::string tables_dir;
  std::string output;
  std::vector<double> window;
  std::optional<double> cutoff_nm;
  std::optional<std::uint64_t> seed;
  std::string solver;
};

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  return read_json_file(path);
}

TableSet load_tables(const std::string& flag, const std::string& from_config, std::vector<std::string> elements) {
  const auto dir = resolve_tables_dir(flag.empty() ? from_config : flag);
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  return TableSet::load(dir, elements);
}

std::string manifest_name(const std::filesystem::path& output) {
  return output.filename().string() + ".manifest.json";
}

void emit(const Json& result, const std::string& output, std::ostream& out, RunManifest manifest) {
  const std::string text = result.dump(2) + "\n";
  if (output.empty()) {
    out << text;
    return;
  }
  const std::filesystem::path path(output);
  write_text_file(path, text);
  manifest.outputs.push_back(path.filename().string());
  write_text_file(path.parent_path() / manifest_name(path), manifest.to_json().dump(2) + "\n");
}

AnalysisOptions analysis_options(const AnalysisConfig& cfg, const Common& c) {
  AnalysisOptions o;
  o.window = cfg.window;
  if (!c.window.empty()) {
    if (c.window.size() != 2) throw Error(ErrorKind::Schema, "--window: expected lo,hi");
    o.window = QWindow{c.window[0], c.window[1]};
  }
  o.points = cfg.grid_points;
  o.cutoff_nm = c.cutoff_nm ? c.cutoff_nm : cfg.cutoff_nm;
  o.deflation_passes = cfg.deflation_passes;
  return o;
}

QWindow clip_window(QWindow w, const ReflectivityCurve& curve, std::vector<std::string>& warnings) {
  QWindow out = w;
  if (out.lo < curve.q.front()) out.lo = curve.q.front();
  if (out.hi > curve.q.back()) out.hi = curve.q.back();
  if (out.lo != w.lo || out.hi != w.hi) {
    std::ostringstream msg;
    msg << "window [" << w.lo << ", " << w.hi << "] clipped to data range [" << out.lo << ", " << out.hi << "]";
    warnings.push_back(msg.str());
  }
  return out;
}

Json input_json(const InputRecord& r) { return Json{{"path", r.path}, {"sha256", r.sha256}}; }

Json phase_json(double rad) { return Json{{"rad", rad}, {"pi", rad / kPi}}; }

double wrap_pi(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  return w == -kPi ? kPi : w;
}

int simulate_scan(const Common& c, const Json& config, const LayerStack& stack,
                  const std::optional<DeltaLayerSpec>& delta, const ConfigView& sim, std::ostream& out) {
  const double theta = sim.number("theta_deg");
  const double e_min = sim.number("energy_min_ev");
  const double e_max = sim.number("energy_max_ev");
  const double step = sim.number("energy_step_ev");
  if (!(step > 0.0) || !(e_max > e_min)) throw Error(ErrorKind::Schema, sim.path() + ": invalid energy range");
  const auto points = static_cast<std::size_t>(std::llround((e_max - e_min) / step)) + 1;
  auto elements = stack.elements();
  if (delta) {
    elements.push_back(delta->dopant());
    elements.push_back(delta->host());
  }
  const auto tables = load_tables(c.tables_dir, ConfigView(config, "").string("tables_dir", ""), elements);
  const auto energies = linspace(e_min, e_max, points);
  const auto scan = simulate_energy_scan(stack, delta ? &*delta : nullptr, tables, theta, energies);

  const std::filesystem::path path(c.output);
  CurveHeader header;
  header.manifest = manifest_name(path);
  std::ostringstream text;
  write_scan(text, scan, header);
  write_text_file(path, text.str());

  RunManifest m;
  m.command = "simulate";
  m.inputs.push_back(describe_input(c.config_path));
  m.config = config;
  m.tables = tables.file_digests();
  m.tables_dir = tables.directory().string();
  m.outputs.push_back(path.filename().string());
  write_text_file(path.parent_path() / manifest_name(path), m.to_json().dump(2) + "\n");
  out << "wrote " << path.string() << " (" << points << " energies, theta " << theta << " deg)\n";
  return kExitOk;
}

int cmd_simulate(const Common& c, std::ostream& out, std::ostream& err) {
  if (c.config_path.empty()) throw Error(ErrorKind::Schema, "simulate: --config is required");
  if (c.output.empty()) throw Error(ErrorKind::Schema, "simulate: --output is required");
  const Json config = load_config(c.config_path);
  const auto stack = parse_stack(config);
  const auto delta = parse_delta(config);
  const ConfigView root(config, "");
  const auto sim = root.at("simulate");
  if (sim.has("theta_deg")) return simulate_scan(c, config, stack, delta, sim, out);
  const double energy = sim.number("energy_ev");
  const double q_min = sim.number("q_min_per_nm");
  const double q_max = sim.number("q_max_per_nm");
  std::size_t points = 0;
  if (sim.has("q_points")) {
    points = static_cast<std::size_t>(sim.number("q_points"));
  } else {
    const double step = sim.number("q_step_per_nm");
    if (!(step > 0.0)) throw Error(ErrorKind::Schema, sim.child_path("q_step_per_nm") + ": must be positive");
    points = static_cast<std::size_t>(std::llround((q_max - q_min) / step)) + 1;
  }
  if (points < 2 || !(q_max > q_min)) throw Error(ErrorKind::Schema, sim.path() + ": invalid Q range");
  const std::string solver = c.solver.empty() ? sim.string("solver", "dynamical") : c.solver;
  if (solver != "born" && solver != "dynamical") {
    throw Error(ErrorKind::Schema, "solver must be born or dynamical, got \"" + solver + "\"");
  }
  const auto counts = sim.optional_number("incident_counts");
  const std::uint64_t seed = c.seed.value_or(static_cast<std::uint64_t>(sim.optional_number("seed").value_or(0.0)));
  const auto abscissa = sim.string("abscissa", "q_per_nm");
  if (abscissa != "q_per_nm" && abscissa != "theta_deg") {
    throw Error(ErrorKind::Schema, sim.child_path("abscissa") + ": expected q_per_nm or theta_deg");
  }

  auto elements = stack.elements();
  if (delta) {
    elements.push_back(delta->dopant());
    elements.push_back(delta->host());
  }
  const auto tables = load_tables(c.tables_dir, root.string("tables_dir", ""), elements);
  const auto q = linspace(q_min, q_max, points);
  const DeltaLayerSpec* dptr = delta ? &*delta : nullptr;

  ReflectivityCurve curve;
  if (solver == "born") {
    for (double v : q) {
      if (v == 0.0) throw Error(ErrorKind::Singularity, "Born reflectivity is singular at Q = 0; raise q_min_per_nm");
    }
    const auto profile = discretize(stack, dptr, tables, energy, default_depth_grid(stack, dptr), q.back());
    curve = born_reflectivity(profile, q);
  } else {
    curve = dynamical_reflectivity(stack, dptr, tables, energy, q);
  }
  if (counts) curve = add_counting_noise(curve, *counts, seed);

  const std::filesystem::path path(c.output);
  CurveHeader header;
  header.incident_counts = counts;
  if (counts) header.seed = seed;
  header.manifest = manifest_name(path);
  std::ostringstream text;
  write_curve(text, curve, abscissa == "theta_deg" ? Abscissa::Theta : Abscissa::Q, header);
  write_text_file(path, text.str());

  RunManifest m;
  m.command = "simulate";
  m.inputs.push_back(describe_input(c.config_path));
  m.config = config;
  m.config["effective"] = {{"solver", solver}, {"seed", seed}};
  m.tables = tables.file_digests();
  m.tables_dir = tables.directory().string();
  m.seed = seed;
  m.outputs.push_back(path.filename().string());
  write_text_file(path.parent_path() / manifest_name(path), m.to_json().dump(2) + "\n");
  out << "wrote " << path.string() << " (" << curve.size() << " points, " << solver << ", " << energy << " eV)\n";
  (void)err;
  return kExitOk;
}

int cmd_analyze(const Common& c, const std::string& curve_path, std::ostream& out, std::ostream& err) {
  const auto curve = read_curve_file(curve_path);
  const Json config = load_config(c.config_path);
  const auto cfg = parse_analysis(config);
  auto opts = analysis_options(cfg, c);
  std::vector<std::string> warnings;
  opts.window = clip_window(opts.window, curve, warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";

  const auto a = analyze_single_energy(curve, opts);
  const auto input = describe_input(curve_path);
  Json j;
  j["schema"] = "rcxr.result/1";
  j["command"] = "analyze";
  j["inputs"] = Json::array({input_json(input)});
  j["energy_ev"] = curve.energy_ev;
  j["cutoff_nm"] = a.decomposition.cutoff_nm;
  j["fft"] = to_json(a.fft);
  j["result"] = to_json(a.result);
  j["profile"] = to_json(a.profile);
  j["warnings"] = warnings;
  if (!c.output.empty()) j["manifest"] = manifest_name(c.output);

  RunManifest m;
  m.command = "analyze";
  m.inputs.push_back(input);
  if (!c.config_path.empty()) m.inputs.push_back(describe_input(c.config_path));
  m.config = {{"analysis", to_json(cfg)}};
  m.config["effective"] = {{"window_per_nm", {opts.window.lo, opts.window.hi}},
                           {"cutoff_nm", a.decomposition.cutoff_nm}};
  emit(j, c.output, out, m);
  err << "d = " << a.result.depth_nm.value << " nm, FWHM = " << a.result.fwhm_nm.value << " nm\n";
  return kExitOk;
}

int cmd_diff_analyze(const Common& c, const std::string& below_path, const std::string& above_path, std::ostream& out,
                     std::ostream& err) {
  const auto below = read_curve_file(below_path);
  const auto above = read_curve_file(above_path);
  const Json config = load_config(c.config_path);
  const auto cfg = parse_analysis(config);
  if (!(below.energy_ev < cfg.edge_ev && above.energy_ev > cfg.edge_ev)) {
    std::ostringstream msg;
    msg << "energies " << below.energy_ev << " and " << above.energy_ev << " eV do not straddle the edge at "
        << cfg.edge_ev << " eV (below first, above second)";
    throw Error(ErrorKind::EdgeStraddle, msg.str());
  }
  const auto tables = load_tables(c.tables_dir, cfg.tables_dir, {cfg.dopant, cfg.host});
  auto opts = analysis_options(cfg, c);
  std::vector<std::string> warnings;
  opts.window = clip_window(opts.window, below, warnings);
  opts.window = clip_window(opts.window, above, warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";

  const auto a = analyze_difference(below, above, opts);
  const auto& dop = tables.at(cfg.dopant);
  const auto& host = tables.at(cfg.host);
  const cplx df_below = delta_f(dop, host, below.energy_ev);
  const cplx df_above = delta_f(dop, host, above.energy_ev);
  const double predicted = wrap_pi(std::arg(df_above) - std::arg(df_below));

  Json j;
  j["schema"] = "rcxr.result/1";
  j["command"] = "diff-analyze";
  const auto in_below = describe_input(below_path);
  const auto in_above = describe_input(above_path);
  j["inputs"] = Json::array({input_json(in_below), input_json(in_above)});
  j["energies_ev"] = {{"below", below.energy_ev}, {"above", above.energy_ev}, {"edge", cfg.edge_ev}};
  j["cutoff_nm"] = a.below_decomposition.cutoff_nm;
  j["fft"] = to_json(a.fft);
  j["result"] = to_json(a.result);
  j["profile"] = to_json(a.profile);
  j["phase_shift"] = {{"measured", phase_json(a.measured_phase_shift_rad)},
                      {"tabulated", phase_json(predicted)},
                      {"deviation", phase_json(wrap_pi(a.measured_phase_shift_rad - predicted))},
                      {"arg_delta_f_difference", phase_json(std::arg(df_above - df_below))}};
  const double df_mag = std::abs(df_above - df_below);
  j["resonant_ratio"] = a.resonant_ratio;
  j["n2d_estimate_per_nm2"] = a.result.amplitude.value / (2.0 * PhysicalConstants::r0_nm * df_mag);
  j["warnings"] = warnings;
  if (!c.output.empty()) j["manifest"] = manifest_name(c.output);

  RunManifest m;
  m.command = "diff-analyze";
  m.inputs = {in_below, in_above};
  if (!c.config_path.empty()) m.inputs.push_back(describe_input(c.config_path));
  m.config = {{"analysis", to_json(cfg)}};
  m.config["effective"] = {{"window_per_nm", {opts.window.lo, opts.window.hi}},
                           {"cutoff_nm", a.below_decomposition.cutoff_nm}};
  m.tables = tables.file_digests();
  m.tables_dir = tables.directory().string();
  emit(j, c.output, out, m);
  err << "d = " << a.result.depth_nm.value << " nm, FWHM = " << a.result.fwhm_nm.value
      << " nm, phase shift = " << a.measured_phase_shift_rad / kPi << " pi (tabulated " << predicted / kPi << " pi)\n";
  return kExitOk;
}

int cmd_fit_resonance(const Common& c, const std::string& scan_path, std::ostream& out, std::ostream& err) {
  if (c.config_path.empty()) throw Error(ErrorKind::Schema, "fit-resonance: --config is required");
  const auto scan = read_scan_file(scan_path);
  const Json config = load_config(c.config_path);
  const auto cfg = parse_analysis(config);
  const ConfigView root(config, "");
  const auto res = root.at("resonance");
  const double n2d = res.number("n2d_per_nm2");
  if (!(n2d > 0.0)) throw Error(ErrorKind::Domain, res.child_path("n2d_per_nm2") + ": N2D must be positive");
  const double depth = res.number("depth_nm");
  const double theta = res.optional_number("theta_deg").value_or(scan.theta_deg);
  if (std::abs(theta - scan.theta_deg) > 1e-9) {
    err << "warning: configured theta " << theta << " deg differs from the scan header " << scan.theta_deg << "\n";
  }
  const auto stack = parse_stack(config);
  const auto dopant = res.string("dopant", cfg.dopant);
  const auto host = res.string("host", cfg.host);

  ResonanceOptions ro;
  ro.definition = cfg.contrast;
  ro.delta_min_nm = res.optional_number("delta_min_nm").value_or(ro.delta_min_nm);
  ro.delta_max_nm = res.optional_number("delta_max_nm").value_or(ro.delta_max_nm);
  if (auto p = res.optional_number("delta_points")) ro.delta_points = static_cast<std::size_t>(*p);

  const auto measured = resonance_contrast(scan, ro.definition, ro.windows);
  const double value = res.optional_number("measured_delta_r_over_r").value_or(measured.value);
  const double sigma = res.optional_number("measured_sigma").value_or(measured.sigma);

  auto elements = stack.elements();
  elements.push_back(dopant);
  elements.push_back(host);
  const auto tables = load_tables(c.tables_dir, cfg.tables_dir, elements);
  const auto t = thickness_from_resonance(value, sigma, n2d, depth, stack, theta, dopant, host, tables, ro);

  Json j;
  j["schema"] = "rcxr.result/1";
  j["command"] = "fit-resonance";
  const auto input = describe_input(scan_path);
  j["inputs"] = Json::array({input_json(input)});
  j["contrast_definition"] = to_string(ro.definition);
  j["measured"] = {{"delta_r_over_r", value}, {"sigma", sigma}, {"from_scan", measured.value}};
  j["theta_deg"] = theta;
  j["n2d_per_nm2"] = n2d;
  j["depth_nm"] = depth;
  j["result"] = to_json(t);
  if (!c.output.empty()) j["manifest"] = manifest_name(c.output);

  RunManifest m;
  m.command = "fit-resonance";
  m.inputs = {input, describe_input(c.config_path)};
  m.config = config;
  m.tables = tables.file_digests();
  m.tables_dir = tables.directory().string();
  emit(j, c.output, out, m);
  err << "delta = " << t.delta_nm << " nm (" << t.ci_lower_nm << " - " << t.ci_upper_nm << ")\n";
  return kExitOk;
}

LayerStack synth_stack(const SynthSample& s) {
  const Material oxide({{"Si", 22.05}, {"O", 44.1}});
  const Material silicon({{"Si", 49.94}});
  std::vector<Layer> layers{Layer{"surface oxide", oxide, 1.0, 0.1}};
  if (s.buried_oxide) {
    layers.push_back(Layer{"silicon cap", silicon, s.depth_nm - 1.5, 0.1});
    layers.push_back(Layer{"buried oxide", oxide, 1.0, 0.1});
  }
  layers.push_back(Layer{"substrate", silicon, std::nullopt, 0.1});
  return LayerStack(std::move(layers));
}

int cmd_synth_suite(const Common& c, std::ostream& out) {
  if (c.output.empty()) throw Error(ErrorKind::Schema, "synth-suite: --output directory is required");
  const auto files = write_synth_suite(c.output, c.seed.value_or(0), c.tables_dir);
  out << "wrote " << files.size() << " files to " << c.output << "\n";
  return kExitOk;
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::TableMissing:
    case ErrorKind::Io:
      return kExitIo;
    case ErrorKind::NoLayerDetected:
      return kExitNoLayer;
    case ErrorKind::EdgeStraddle:
      return kExitEdge;
    case ErrorKind::OutOfBand:
      return kExitOutOfBand;
    case ErrorKind::FitFailed:
      return kExitInternal;
    default:
      return kExitInput;
  }
}

std::vector<SynthSample> default_synth_samples() {
  return {
      {"sample1", 16.8, 0.8, 2.77, false},
      {"sample2", 17.9, 0.6, 1.6, false},
      {"sample3", 32.0, 1.4, 1.6, false},
      {"sample4", 77.0, 1.2, 1.6, false},
      {"control", 15.3, 0.0, 0.0, true},
  };
}

std::vector<std::string> write_synth_suite(const std::filesystem::path& dir, std::uint64_t seed,
                                           const std::string& tables_dir_flag) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::Io, "cannot create output directory " + dir.string());
  }
  const auto tables = load_tables(tables_dir_flag, "", {"Si", "O", "As"});
  const auto q = linspace(kSynthQMin, kSynthQMax, kSynthQPoints);

  std::vector<std::string> written;
  Json listing = Json::array();
  const auto samples = default_synth_samples();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const auto stack = synth_stack(s);
    std::optional<DeltaLayerSpec> delta;
    if (!s.buried_oxide) delta = gaussian_delta_from_fwhm(s.depth_nm, s.fwhm_nm, s.n2d_per_nm2, "As", "Si");
    Json truth;
    truth["name"] = s.name;
    truth["layers"] = to_json(stack);
    truth["delta"] = delta ? to_json(*delta) : Json(nullptr);
    truth["feature_depth_nm"] = s.depth_nm;
    truth["incident_counts"] = kSynthCounts;
    Json files = Json::object();
    for (std::size_t e = 0; e < 2; ++e) {
      const double energy = kSynthEnergies[e];
      const std::uint64_t member_seed = seed * 1000003ULL + 2 * i + e;
      auto curve = dynamical_reflectivity(stack, delta ? &*delta : nullptr, tables, energy, q);
      curve = add_counting_noise(curve, kSynthCounts, member_seed);
      CurveHeader header{kSynthCounts, member_seed, "manifest.json"};
      std::ostringstream text;
      write_curve(text, curve, Abscissa::Q, header);
      const std::string name = s.name + "_" + std::to_string(static_cast<int>(energy)) + "eV.dat";
      write_text_file(dir / name, text.str());
      written.push_back(name);
      files[std::to_string(static_cast<int>(energy))] = {{"path", name}, {"seed", member_seed}};
    }
    truth["files"] = files;
    const std::string truth_name = s.name + "_truth.json";
    write_text_file(dir / truth_name, truth.dump(2) + "\n");
    written.push_back(truth_name);
    listing.push_back(s.name);
  }

  RunManifest m;
  m.command = "synth-suite";
  m.config = {{"samples", listing},
              {"energies_ev", {kSynthEnergies[0], kSynthEnergies[1]}},
              {"q_per_nm", {{"min", kSynthQMin}, {"max", kSynthQMax}, {"points", kSynthQPoints}}},
              {"incident_counts", kSynthCounts}};
  m.tables = tables.file_digests();
  m.tables_dir = tables.directory().string();
  m.seed = seed;
  m.outputs = written;
  write_text_file(dir / "manifest.json", m.to_json().dump(2) + "\n");
  written.push_back("manifest.json");
  return written;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Resonant contrast X-ray reflectometry toolkit", "rcxr"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common c;
  std::uint64_t seed_value = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", c.config_path, "JSON configuration file");
    sub->add_option("--tables-dir", c.tables_dir, "scattering-factor table directory (overrides RCXR_TABLES_DIR)");
    sub->add_option("--output", c.output, "output file (directory for synth-suite)");
  };
  auto add_analysis = [&](CLI::App* sub) {
    sub->add_option("--window", c.window, "Q window lo,hi in 1/nm")->expected(2)->delimiter(',');
    sub->add_option("--cutoff-nm", c.cutoff_nm, "low-pass cutoff depth in nm");
  };

  auto* simulate = app.add_subcommand("simulate", "simulate a reflectivity curve");
  add_common(simulate);
  simulate->add_option("--solver", c.solver, "born | dynamical");
  auto* sim_seed = simulate->add_option("--seed", seed_value, "noise seed");

  std::string curve_path;
  auto* analyze = app.add_subcommand("analyze", "single-energy delta-layer extraction");
  analyze->add_option("curve", curve_path, "curve file")->required();
  add_common(analyze);
  add_analysis(analyze);

  std::string below_path, above_path;
  auto* diff = app.add_subcommand("diff-analyze", "resonant-difference extraction");
  diff->add_option("below", below_path, "curve below the edge")->required();
  diff->add_option("above", above_path, "curve above the edge")->required();
  add_common(diff);
  add_analysis(diff);

  std::string scan_path;
  auto* fit = app.add_subcommand("fit-resonance", "thickness from the edge contrast of an energy scan");
  fit->add_option("scan", scan_path, "energy-scan file")->required();
  add_common(fit);

  auto* synth = app.add_subcommand("synth-suite", "write the synthetic reference corpus");
  add_common(synth);
  auto* synth_seed = synth->add_option("--seed", seed_value, "corpus seed");

  std::vector<std::string> argv_store{"rcxr"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::Success&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitInput;
  }
  if (sim_seed->count() > 0 || synth_seed->count() > 0) c.seed = seed_value;

  try {
    if (simulate->parsed()) return cmd_simulate(c, out, err);
    if (analyze->parsed()) return cmd_analyze(c, curve_path, out, err);
    if (diff->parsed()) return cmd_diff_analyze(c, below_path, above_path, out, err);
    if (fit->parsed()) return cmd_fit_resonance(c, scan_path, out, err);
    if (synth->parsed()) return cmd_synth_suite(c, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error [internal]: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace rcxr
