#include "rcxr/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "rcxr/digest.hpp"
#include "rcxr/error.hpp"

namespace rcxr {

namespace {

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error(ErrorKind::Io, "number formatting failed");
  return std::string(buf, ptr);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

double parse_number(const std::string& token, const std::string& source, int line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorKind::Parse, source + ":" + std::to_string(line_no) + ": malformed number \"" + token + "\"");
  }
  return v;
}

struct ParsedTable {
  std::map<std::string, std::string> header;
  std::vector<std::vector<double>> rows;
};

ParsedTable parse_table(std::istream& in, const std::string& source) {
  ParsedTable t;
  std::string line;
  int line_no = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    if (body[0] == '#') {
      const auto eq = body.find('=');
      if (eq != std::string::npos) t.header[trim(body.substr(1, eq - 1))] = trim(body.substr(eq + 1));
      continue;
    }
    const auto toks = tokens(body);
    if (columns == 0) {
      if (toks.size() < 2 || toks.size() > 3) {
        throw Error(ErrorKind::Parse, source + ":" + std::to_string(line_no) + ": expected 2 or 3 columns, found " +
                                          std::to_string(toks.size()));
      }
      columns = toks.size();
    } else if (toks.size() != columns) {
      throw Error(ErrorKind::Parse, source + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                                        " columns, found " + std::to_string(toks.size()) + " (truncated row?)");
    }
    std::vector<double> row;
    for (const auto& tok : toks) row.push_back(parse_number(tok, source, line_no));
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw Error(ErrorKind::Parse, source + ": no data rows");
  return t;
}

const std::string& require_key(const ParsedTable& t, const std::string& key, const std::string& source) {
  auto it = t.header.find(key);
  if (it == t.header.end()) throw Error(ErrorKind::Parse, source + ": missing header \"# " + key + " = ...\"");
  return it->second;
}

double header_number(const ParsedTable& t, const std::string& key, const std::string& source) {
  const auto& v = require_key(t, key, source);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(ErrorKind::Parse, source + ": header " + key + " is not a number");
  }
  return out;
}

void write_common_header(std::ostream& out, const CurveHeader& header) {
  if (header.incident_counts) out << "# i0 = " << format_number(*header.incident_counts) << "\n";
  if (header.seed) out << "# seed = " << *header.seed << "\n";
  if (!header.manifest.empty()) out << "# manifest = " << header.manifest << "\n";
}

std::string kind_name(const Json& j) {
  return j.is_null() ? "null" : j.type_name();
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

void write_curve(std::ostream& out, const ReflectivityCurve& curve, Abscissa abscissa, const CurveHeader& header) {
  curve.validate();
  const bool theta = abscissa == Abscissa::Theta;
  const bool sigma = curve.sigma_r.has_value();
  out << "# rcxr reflectivity curve\n";
  out << "# energy_ev = " << format_number(curve.energy_ev) << "\n";
  out << "# abscissa = " << (theta ? "theta_deg" : "q_per_nm") << "\n";
  write_common_header(out, header);
  out << "# columns = " << (theta ? "theta_deg" : "q_per_nm") << " r" << (sigma ? " sigma_r" : "") << "\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double x = theta ? (curve.theta_deg ? (*curve.theta_deg)[i] : theta_from_q(curve.q[i], curve.energy_ev))
                           : curve.q[i];
    out << format_number(x) << ' ' << format_number(curve.r[i]);
    if (sigma) out << ' ' << format_number((*curve.sigma_r)[i]);
    out << '\n';
  }
}

ReflectivityCurve read_curve(std::istream& in, const std::string& source) {
  const auto t = parse_table(in, source);
  ReflectivityCurve c;
  c.energy_ev = header_number(t, "energy_ev", source);
  if (!(c.energy_ev > 0.0)) throw Error(ErrorKind::Parse, source + ": energy_ev must be positive");
  const auto& abscissa = require_key(t, "abscissa", source);
  if (abscissa != "q_per_nm" && abscissa != "theta_deg") {
    throw Error(ErrorKind::Parse, source + ": abscissa must be q_per_nm or theta_deg, got \"" + abscissa + "\"");
  }
  const bool theta = abscissa == "theta_deg";
  const bool sigma = t.rows.front().size() == 3;
  if (theta) c.theta_deg.emplace();
  if (sigma) c.sigma_r.emplace();
  for (const auto& row : t.rows) {
    c.q.push_back(theta ? q_from_theta(row[0], c.energy_ev) : row[0]);
    if (theta) c.theta_deg->push_back(row[0]);
    c.r.push_back(row[1]);
    if (sigma) c.sigma_r->push_back(row[2]);
  }
  c.validate();
  return c;
}

ReflectivityCurve read_curve_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open curve file " + path.string());
  return read_curve(in, path.string());
}

void write_scan(std::ostream& out, const EnergyScan& scan, const CurveHeader& header) {
  scan.validate();
  out << "# rcxr energy scan\n";
  out << "# abscissa = energy_ev\n";
  out << "# theta_deg = " << format_number(scan.theta_deg) << "\n";
  out << "# normalized = " << (scan.i0_normalized ? "true" : "false") << "\n";
  write_common_header(out, header);
  out << "# columns = energy_ev r\n";
  for (std::size_t i = 0; i < scan.energy_ev.size(); ++i) {
    out << format_number(scan.energy_ev[i]) << ' ' << format_number(scan.r[i]) << '\n';
  }
}

EnergyScan read_scan(std::istream& in, const std::string& source) {
  const auto t = parse_table(in, source);
  if (require_key(t, "abscissa", source) != "energy_ev") {
    throw Error(ErrorKind::Parse, source + ": energy scans must declare abscissa = energy_ev");
  }
  EnergyScan s;
  s.theta_deg = header_number(t, "theta_deg", source);
  if (auto it = t.header.find("normalized"); it != t.header.end()) s.i0_normalized = it->second != "false";
  for (const auto& row : t.rows) {
    s.energy_ev.push_back(row[0]);
    s.r.push_back(row[1]);
  }
  s.validate();
  return s;
}

EnergyScan read_scan_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open scan file " + path.string());
  return read_scan(in, path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

bool ConfigView::has(const std::string& key) const {
  return node_->is_object() && node_->contains(key) && !(*node_)[key].is_null();
}

ConfigView ConfigView::at(const std::string& key) const {
  if (!node_->is_object()) throw Error(ErrorKind::Schema, path_ + ": expected an object");
  if (!node_->contains(key)) throw Error(ErrorKind::Schema, child_path(key) + ": required key missing");
  return ConfigView((*node_)[key], child_path(key));
}

ConfigView ConfigView::at(std::size_t index) const {
  if (!node_->is_array() || index >= node_->size()) throw Error(ErrorKind::Schema, path_ + ": index out of range");
  return ConfigView((*node_)[index], path_ + "/" + std::to_string(index));
}

double ConfigView::number(const std::string& key) const {
  const auto v = at(key);
  if (!v.raw().is_number()) {
    throw Error(ErrorKind::Schema, v.path() + ": expected a number, found " + kind_name(v.raw()));
  }
  return v.raw().get<double>();
}

std::optional<double> ConfigView::optional_number(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return number(key);
}

std::string ConfigView::string(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  const auto v = at(key);
  if (!v.raw().is_string()) {
    throw Error(ErrorKind::Schema, v.path() + ": expected a string, found " + kind_name(v.raw()));
  }
  return v.raw().get<std::string>();
}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, source + ": " + e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path.string());
}

LayerStack parse_stack(const Json& config) {
  const ConfigView root(config, "");
  const auto layers = root.at("layers");
  if (!layers.raw().is_array() || layers.raw().empty()) {
    throw Error(ErrorKind::Schema, layers.path() + ": expected a non-empty array");
  }
  std::vector<Layer> out;
  for (std::size_t i = 0; i < layers.raw().size(); ++i) {
    const auto node = layers.at(i);
    Layer l;
    l.name = node.string("name", "layer" + std::to_string(i));
    const auto elements = node.at("elements");
    if (!elements.raw().is_object() || elements.raw().empty()) {
      throw Error(ErrorKind::Schema, elements.path() + ": expected a non-empty object of densities");
    }
    std::vector<MaterialComponent> comps;
    for (const auto& item : elements.raw().items()) comps.push_back({item.key(), elements.number(item.key())});
    l.material = Material(std::move(comps));
    l.thickness_nm = node.optional_number("thickness_nm");
    l.roughness_nm = node.optional_number("roughness_nm").value_or(0.0);
    out.push_back(std::move(l));
  }
  return LayerStack(std::move(out));
}

std::optional<DeltaLayerSpec> parse_delta(const Json& config) {
  const ConfigView root(config, "");
  if (!root.has("delta")) return std::nullopt;
  const auto d = root.at("delta");
  const double depth = d.number("depth_nm");
  const double n2d = d.number("n2d_per_nm2");
  const auto dopant = d.string("dopant", "As");
  const auto host = d.string("host", "Si");
  const auto shape = d.string("shape", "gaussian");
  if (shape == "gaussian") {
    if (d.has("fwhm_nm")) return gaussian_delta_from_fwhm(depth, d.number("fwhm_nm"), n2d, dopant, host);
    if (d.has("sigma_nm")) return DeltaLayerSpec(depth, GaussianShape{d.number("sigma_nm")}, n2d, dopant, host);
    throw Error(ErrorKind::Schema, d.path() + ": gaussian shape needs fwhm_nm or sigma_nm");
  }
  if (shape == "dirac") return DeltaLayerSpec(depth, DiracShape{}, n2d, dopant, host);
  if (shape == "tabulated") {
    auto read_array = [&](const std::string& key) {
      const auto a = d.at(key);
      if (!a.raw().is_array()) throw Error(ErrorKind::Schema, a.path() + ": expected an array of numbers");
      std::vector<double> v;
      for (std::size_t i = 0; i < a.raw().size(); ++i) {
        if (!a.raw()[i].is_number()) throw Error(ErrorKind::Schema, a.path() + "/" + std::to_string(i) + ": expected a number");
        v.push_back(a.raw()[i].get<double>());
      }
      return v;
    };
    return DeltaLayerSpec(depth, TabulatedShape{read_array("z_nm"), read_array("h_per_nm")}, n2d, dopant, host);
  }
  throw Error(ErrorKind::Schema, d.child_path("shape") + ": unknown shape \"" + shape + "\"");
}

AnalysisConfig parse_analysis(const Json& config) {
  AnalysisConfig a;
  const ConfigView root(config, "");
  if (root.has("tables_dir")) a.tables_dir = root.string("tables_dir", "");
  if (!root.has("analysis")) return a;
  const auto n = root.at("analysis");
  if (n.has("window_per_nm")) {
    const auto w = n.at("window_per_nm");
    if (!w.raw().is_array() || w.raw().size() != 2 || !w.raw()[0].is_number() || !w.raw()[1].is_number()) {
      throw Error(ErrorKind::Schema, w.path() + ": expected [lo, hi]");
    }
    a.window = QWindow{w.raw()[0].get<double>(), w.raw()[1].get<double>()};
  }
  a.cutoff_nm = n.optional_number("cutoff_nm");
  if (auto g = n.optional_number("grid_points")) {
    if (*g < 0.0 || *g != std::floor(*g)) throw Error(ErrorKind::Schema, n.child_path("grid_points") + ": expected a count");
    a.grid_points = static_cast<std::size_t>(*g);
  }
  if (n.has("energies_ev")) {
    const auto e = n.at("energies_ev");
    a.energy_below_ev = e.optional_number("below").value_or(a.energy_below_ev);
    a.energy_above_ev = e.optional_number("above").value_or(a.energy_above_ev);
  }
  a.edge_ev = n.optional_number("edge_ev").value_or(a.edge_ev);
  a.dopant = n.string("dopant", a.dopant);
  a.host = n.string("host", a.host);
  a.contrast = contrast_from_string(n.string("contrast_definition", to_string(a.contrast)));
  if (auto p = n.optional_number("deflation_passes")) a.deflation_passes = static_cast<int>(*p);
  if (n.has("tables_dir")) a.tables_dir = n.string("tables_dir", "");
  return a;
}

Json to_json(const AnalysisConfig& a) {
  Json j;
  j["window_per_nm"] = {a.window.lo, a.window.hi};
  j["cutoff_nm"] = a.cutoff_nm ? Json(*a.cutoff_nm) : Json(nullptr);
  j["grid_points"] = a.grid_points;
  j["energies_ev"] = {{"below", a.energy_below_ev}, {"above", a.energy_above_ev}};
  j["edge_ev"] = a.edge_ev;
  j["dopant"] = a.dopant;
  j["host"] = a.host;
  j["contrast_definition"] = to_string(a.contrast);
  j["deflation_passes"] = a.deflation_passes;
  return j;
}

Json to_json(const Interval& ci) {
  return Json{{"lower", number_or_null(ci.lower)},
              {"upper", number_or_null(ci.upper)},
              {"lower_at_bound", ci.lower_at_bound},
              {"upper_unbounded", ci.upper_unbounded},
              {"from_covariance", ci.from_covariance}};
}

Json to_json(const Estimate& e) { return Json{{"value", e.value}, {"ci95", to_json(e.ci)}}; }

Json to_json(const ExtractionResult& r) {
  Json j;
  j["method"] = to_string(r.method);
  j["window_per_nm"] = {r.window.lo, r.window.hi};
  j["grid_points"] = r.points;
  j["depth_nm"] = to_json(r.depth_nm);
  j["sigma_nm"] = to_json(r.sigma_nm);
  j["fwhm_nm"] = to_json(r.fwhm_nm);
  j["amplitude_per_nm"] = to_json(r.amplitude);
  j["phase_rad"] = to_json(r.phase_rad);
  j["thickness_upper_bound_only"] = r.thickness_upper_bound_only;
  j["fit"] = {{"converged", r.converged},
              {"iterations", r.iterations},
              {"rss", r.rss},
              {"relative_residual", r.relative_residual}};
  return j;
}

Json to_json(const ReconstructedProfile& p) {
  Json j;
  j["resolution_nm"] = p.resolution_nm;
  j["peak_depth_nm"] = p.peak_depth_nm;
  j["peak_value_per_nm2"] = p.peak_value;
  j["z_nm"] = p.z_nm;
  j["delta_rho_per_nm2"] = p.value;
  return j;
}

Json to_json(const DepthEstimate& d) {
  return Json{{"depth_nm", d.depth_nm},
              {"phase_rad", d.phase_rad},
              {"peak_to_median", number_or_null(d.peak_to_median)},
              {"relative_amplitude", d.relative_amplitude},
              {"detected", d.detected}};
}

Json to_json(const ThicknessResult& t) {
  Json j;
  j["method"] = to_string(ExtractionMethod::ResonanceSpectrum);
  j["delta_nm"] = t.delta_nm;
  j["ci95_nm"] = {{"lower", t.ci_lower_nm},
                  {"upper", t.ci_upper_nm},
                  {"lower_clipped", t.ci_lower_clipped},
                  {"upper_clipped", t.ci_upper_clipped}};
  j["n3d_per_nm3"] = t.n3d_per_nm3;
  j["band"] = {{"min", t.band_min}, {"max", t.band_max}};
  j["sweep"] = {{"delta_nm", t.sweep_delta_nm}, {"delta_r_over_r", t.sweep_contrast}, {"monotone_points", t.monotone_points}};
  return j;
}

Json to_json(const LayerStack& stack) {
  Json layers = Json::array();
  for (const auto& l : stack.layers()) {
    Json el = Json::object();
    for (const auto& c : l.material.components()) el[c.element] = c.density_per_nm3;
    layers.push_back({{"name", l.name},
                      {"elements", el},
                      {"thickness_nm", l.thickness_nm ? Json(*l.thickness_nm) : Json(nullptr)},
                      {"roughness_nm", l.roughness_nm}});
  }
  return layers;
}

Json to_json(const DeltaLayerSpec& d) {
  Json j;
  j["depth_nm"] = d.depth_nm();
  if (std::holds_alternative<DiracShape>(d.shape())) {
    j["shape"] = "dirac";
  } else if (auto* g = std::get_if<GaussianShape>(&d.shape())) {
    j["shape"] = "gaussian";
    j["sigma_nm"] = g->sigma_nm;
    j["fwhm_nm"] = d.fwhm_nm();
  } else {
    const auto& t = std::get<TabulatedShape>(d.shape());
    j["shape"] = "tabulated";
    j["z_nm"] = t.z_nm;
    j["h_per_nm"] = t.h_per_nm;
  }
  j["n2d_per_nm2"] = d.n2d_per_nm2();
  j["dopant"] = d.dopant();
  j["host"] = d.host();
  return j;
}

InputRecord describe_input(const std::filesystem::path& path) {
  return InputRecord{path.string(), sha256_file(path)};
}

Json RunManifest::to_json() const {
  Json j;
  j["schema"] = "rcxr.manifest/1";
  j["toolkit_version"] = kVersion;
  j["command"] = command;
  Json in = Json::array();
  for (const auto& r : inputs) in.push_back({{"path", r.path}, {"sha256", r.sha256}});
  j["inputs"] = in;
  j["config"] = config;
  Json tabs = Json::object();
  for (const auto& [el, digest] : tables) tabs[el] = digest;
  j["tables"] = {{"directory", tables_dir}, {"sha256", tabs}};
  j["seed"] = seed ? Json(*seed) : Json(nullptr);
  j["outputs"] = outputs;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    const std::time_t t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    j["created_utc"] = buf;
  }
  return j;
}

}  // namespace rcxr
