#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcxr/extract.hpp"

namespace rcxr {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

enum class Abscissa { Q, Theta };

/// Header values of a curve file. Unset optionals are not written.
struct CurveHeader {
  std::optional<double> incident_counts;
  std::optional<std::uint64_t> seed;
  std::string manifest;
};

/// "# key = value" header (energy_ev, abscissa, i0, seed, manifest, columns),
/// then whitespace-separated rows: Q-or-theta, R[, sigma_R].
void write_curve(std::ostream& out, const ReflectivityCurve& curve, Abscissa abscissa, const CurveHeader& header = {});
ReflectivityCurve read_curve(std::istream& in, const std::string& source = "<stream>");
ReflectivityCurve read_curve_file(const std::filesystem::path& path);

void write_scan(std::ostream& out, const EnergyScan& scan, const CurveHeader& header = {});
EnergyScan read_scan(std::istream& in, const std::string& source = "<stream>");
EnergyScan read_scan_file(const std::filesystem::path& path);

/// Writes text atomically enough for batch use; Io error when the path is not writable.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Typed access into a JSON configuration; errors name the offending key path.
class ConfigView {
 public:
  ConfigView(const Json& node, std::string path) : node_(&node), path_(std::move(path)) {}

  bool has(const std::string& key) const;
  ConfigView at(const std::string& key) const;
  ConfigView at(std::size_t index) const;
  double number(const std::string& key) const;
  std::optional<double> optional_number(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  const Json& raw() const { return *node_; }
  const std::string& path() const { return path_; }
  std::string child_path(const std::string& key) const { return path_ + "/" + key; }

 private:
  const Json* node_;
  std::string path_;
};

Json parse_json(const std::string& text, const std::string& source);
Json read_json_file(const std::filesystem::path& path);

/// "layers": [{name, elements {symbol: atoms/nm^3}, thickness_nm (null = substrate), roughness_nm}]
LayerStack parse_stack(const Json& config);
/// "delta": {depth_nm, shape (gaussian | dirac | tabulated), fwhm_nm or sigma_nm, n2d_per_nm2, dopant, host}
std::optional<DeltaLayerSpec> parse_delta(const Json& config);

struct AnalysisConfig {
  QWindow window;
  std::optional<double> cutoff_nm;
  std::size_t grid_points = 0;
  double energy_below_ev = 1300.0;
  double energy_above_ev = 1335.0;
  double edge_ev = 1323.5;
  std::string dopant = "As";
  std::string host = "Si";
  ContrastDefinition contrast = ContrastDefinition::EdgeSpan;
  int deflation_passes = 1;
  std::string tables_dir;
};

/// Reads the optional "analysis" object; missing keys keep the defaults.
AnalysisConfig parse_analysis(const Json& config);
Json to_json(const AnalysisConfig& config);

Json to_json(const Interval& ci);
Json to_json(const Estimate& e);
Json to_json(const ExtractionResult& r);
Json to_json(const ReconstructedProfile& p);
Json to_json(const DepthEstimate& d);
Json to_json(const ThicknessResult& t);
Json to_json(const LayerStack& stack);
Json to_json(const DeltaLayerSpec& delta);

struct InputRecord {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string command;
  std::vector<InputRecord> inputs;
  Json config = Json::object();
  std::map<std::string, std::string> tables;  // element -> sha256
  std::string tables_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> outputs;

  /// Timestamps appear only when SOURCE_DATE_EPOCH is set, keeping reruns byte-identical.
  Json to_json() const;
};

InputRecord describe_input(const std::filesystem::path& path);

}  // namespace rcxr
