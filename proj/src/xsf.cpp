#include "rcxr/xsf.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include "rcxr/constants.hpp"
#include "rcxr/digest.hpp"
#include "rcxr/error.hpp"

#ifndef RCXR_DEFAULT_TABLES_DIR
#define RCXR_DEFAULT_TABLES_DIR "data/xsf/chantler"
#endif

namespace rcxr {

namespace {

// Henke tables mark missing f1 below absorption edges with -9999.
constexpr double kSentinelThreshold = -9000.0;

bool parse_double(std::string_view token, double& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

ScatteringFactorTable::ScatteringFactorTable(std::string element, std::vector<ScatteringFactorRow> rows)
    : element_(std::move(element)), rows_(std::move(rows)) {
  if (rows_.size() < 2) {
    throw Error(ErrorKind::Structure, element_ + " table: at least two rows required");
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].f2 < 0.0) {
      throw Error(ErrorKind::Structure, element_ + " table: negative f2 at row " + std::to_string(i));
    }
    if (i > 0 && !(rows_[i].energy_ev > rows_[i - 1].energy_ev)) {
      throw Error(ErrorKind::Structure, element_ + " table: energies not strictly increasing at row " +
                                            std::to_string(i));
    }
  }
}

ScatteringFactorTable load_nff(std::istream& source, const std::string& element) {
  std::string line;
  if (!std::getline(source, line)) {
    throw Error(ErrorKind::Parse, element + ": empty scattering-factor stream");
  }
  std::vector<ScatteringFactorRow> rows;
  int line_no = 1;
  while (std::getline(source, line)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    double e = 0, f1 = 0, f2 = 0;
    if (tokens.size() != 3 || !parse_double(tokens[0], e) || !parse_double(tokens[1], f1) ||
        !parse_double(tokens[2], f2)) {
      throw Error(ErrorKind::Parse, element + ": malformed row at line " + std::to_string(line_no) + ": \"" +
                                        line + "\"");
    }
    if (!rows.empty() && !(e > rows.back().energy_ev)) {
      throw Error(ErrorKind::Structure, element + ": energy not increasing at line " + std::to_string(line_no));
    }
    rows.push_back({e, f1, f2, f1 > kSentinelThreshold});
  }
  return ScatteringFactorTable(element, std::move(rows));
}

ScatteringFactorTable load_nff_file(const std::filesystem::path& path, const std::string& element) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::TableMissing, "scattering-factor table not found: " + path.string());
  return load_nff(in, element);
}

cplx scattering_factor(const ScatteringFactorTable& table, double energy_ev) {
  const auto& rows = table.rows();
  if (!(energy_ev >= table.min_energy() && energy_ev <= table.max_energy())) {
    std::ostringstream msg;
    msg << table.element() << ": energy " << energy_ev << " eV outside table range [" << table.min_energy()
        << ", " << table.max_energy() << "]";
    throw Error(ErrorKind::Range, msg.str());
  }
  auto upper = std::upper_bound(rows.begin(), rows.end(), energy_ev,
                                [](double e, const ScatteringFactorRow& r) { return e < r.energy_ev; });
  // upper points past the last row <= E; step back to the bracket [lo, hi].
  std::size_t hi = static_cast<std::size_t>(upper - rows.begin());
  std::size_t lo = hi - 1;
  const auto& a = rows[lo];
  if (a.energy_ev == energy_ev || hi == rows.size()) {
    if (!a.f1_valid) {
      throw Error(ErrorKind::DataGap, table.element() + ": no f1 tabulated at " + std::to_string(energy_ev) + " eV");
    }
    return {a.f1, a.f2};
  }
  const auto& b = rows[hi];
  if (!a.f1_valid || !b.f1_valid) {
    throw Error(ErrorKind::DataGap,
                table.element() + ": f1 bracket at " + std::to_string(energy_ev) + " eV touches a sentinel row");
  }
  const double t = (energy_ev - a.energy_ev) / (b.energy_ev - a.energy_ev);
  return {a.f1 + t * (b.f1 - a.f1), a.f2 + t * (b.f2 - a.f2)};
}

cplx delta_f(const ScatteringFactorTable& dopant, const ScatteringFactorTable& host, double energy_ev) {
  return scattering_factor(dopant, energy_ev) - scattering_factor(host, energy_ev);
}

TableSet TableSet::load(const std::filesystem::path& dir, const std::vector<std::string>& elements) {
  TableSet set;
  set.directory_ = dir;
  for (const auto& el : elements) {
    if (set.contains(el)) continue;
    const auto path = dir / (lower(el) + ".nff");
    set.add(load_nff_file(path, el));
    set.digests_[el] = sha256_file(path);
  }
  return set;
}

void TableSet::add(ScatteringFactorTable table) {
  auto key = table.element();
  tables_.insert_or_assign(key, std::move(table));
}

const ScatteringFactorTable& TableSet::at(const std::string& element) const {
  auto it = tables_.find(element);
  if (it == tables_.end()) {
    throw Error(ErrorKind::TableMissing, "no scattering-factor table loaded for element " + element);
  }
  return it->second;
}

std::filesystem::path resolve_tables_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv(kTablesDirEnv); env != nullptr && *env != '\0') return env;
  return RCXR_DEFAULT_TABLES_DIR;
}

Material::Material(std::vector<MaterialComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw Error(ErrorKind::Domain, "material needs at least one component");
  for (const auto& c : components_) {
    if (!(c.density_per_nm3 >= 0.0)) {
      throw Error(ErrorKind::Domain, "negative number density for " + c.element);
    }
  }
}

cplx sld(const Material& material, const TableSet& tables, double energy_ev) {
  cplx sum{0.0, 0.0};
  for (const auto& c : material.components()) {
    if (c.density_per_nm3 == 0.0) continue;
    sum += c.density_per_nm3 * scattering_factor(tables.at(c.element), energy_ev);
  }
  return PhysicalConstants::r0_nm * sum;
}

cplx index_from_sld(cplx rho, double energy_ev) {
  const double lambda = wavelength_nm(energy_ev);
  return 1.0 - lambda * lambda / (2.0 * kPi) * rho;
}

cplx sld_from_index(cplx n, double energy_ev) {
  const double lambda = wavelength_nm(energy_ev);
  return (1.0 - n) * (2.0 * kPi) / (lambda * lambda);
}

cplx refractive_index(const Material& material, const TableSet& tables, double energy_ev) {
  return index_from_sld(sld(material, tables, energy_ev), energy_ev);
}

}  // namespace rcxr
