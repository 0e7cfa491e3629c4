#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace rcxr {

using cplx = std::complex<double>;

/// One row of a Henke-style table. Rows whose f1 carried the -9999
/// sentinel keep their f2 but are flagged unusable for f1.
struct ScatteringFactorRow {
  double energy_ev;
  double f1;
  double f2;
  bool f1_valid;
};

/// Tabulated f1 + i f2 against photon energy for one element.
/// Energies are strictly increasing and there are at least two rows.
class ScatteringFactorTable {
 public:
  ScatteringFactorTable(std::string element, std::vector<ScatteringFactorRow> rows);

  const std::string& element() const { return element_; }
  const std::vector<ScatteringFactorRow>& rows() const { return rows_; }
  double min_energy() const { return rows_.front().energy_ev; }
  double max_energy() const { return rows_.back().energy_ev; }

 private:
  std::string element_;
  std::vector<ScatteringFactorRow> rows_;
};

/// Parse a ".nff" stream: one header line, then "E f1 f2" rows.
ScatteringFactorTable load_nff(std::istream& source, const std::string& element);
ScatteringFactorTable load_nff_file(const std::filesystem::path& path, const std::string& element);

/// Linear interpolation of f1 and f2 in energy.
cplx scattering_factor(const ScatteringFactorTable& table, double energy_ev);

/// f_dopant - f_host at one energy.
cplx delta_f(const ScatteringFactorTable& dopant, const ScatteringFactorTable& host, double energy_ev);

/// Immutable set of tables keyed by element symbol ("Si", "As", ...).
class TableSet {
 public:
  TableSet() = default;

  /// Loads `<dir>/<symbol lower-case>.nff` for each element.
  static TableSet load(const std::filesystem::path& dir, const std::vector<std::string>& elements);

  void add(ScatteringFactorTable table);
  const ScatteringFactorTable& at(const std::string& element) const;
  bool contains(const std::string& element) const { return tables_.count(element) != 0; }

  const std::filesystem::path& directory() const { return directory_; }
  /// SHA-256 of each loaded file, for provenance records.
  const std::map<std::string, std::string>& file_digests() const { return digests_; }

 private:
  std::filesystem::path directory_;
  std::map<std::string, ScatteringFactorTable> tables_;
  std::map<std::string, std::string> digests_;
};

/// Environment variable naming the table directory.
inline constexpr const char* kTablesDirEnv = "RCXR_TABLES_DIR";

/// Flag value if non-empty, else $RCXR_TABLES_DIR, else the bundled tables.
std::filesystem::path resolve_tables_dir(const std::string& flag_value);

struct MaterialComponent {
  std::string element;
  double density_per_nm3;
};

/// Mixture of elements with number densities; at least one component.
class Material {
 public:
  Material() = default;
  explicit Material(std::vector<MaterialComponent> components);

  static Material vacuum() { return Material({}, true); }

  const std::vector<MaterialComponent>& components() const { return components_; }
  bool is_vacuum() const { return components_.empty(); }

 private:
  Material(std::vector<MaterialComponent> components, bool) : components_(std::move(components)) {}
  std::vector<MaterialComponent> components_;
};

/// Scattering-length density r0 * sum_q N_q f_q(E), in 1/nm^2.
cplx sld(const Material& material, const TableSet& tables, double energy_ev);

/// n = 1 - lambda^2 rho / (2 pi).
cplx refractive_index(const Material& material, const TableSet& tables, double energy_ev);
cplx index_from_sld(cplx rho, double energy_ev);
cplx sld_from_index(cplx n, double energy_ev);

}  // namespace rcxr
