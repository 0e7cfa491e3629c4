#pragma once

#include <filesystem>
#include <string>

#include "rcxr/model.hpp"

namespace rcxr::test {

inline const TableSet& tables() {
  static const TableSet t = TableSet::load(RCXR_TEST_TABLES_DIR, {"As", "O", "P", "Si"});
  return t;
}

inline Material oxide() { return Material({{"Si", 22.05}, {"O", 44.1}}); }
inline Material silicon() { return Material({{"Si", 49.94}}); }

/// 1 nm SiO2 on Si, 0.1 nm roughness at both interfaces.
inline LayerStack oxide_on_silicon() {
  return LayerStack({Layer{"oxide", oxide(), 1.0, 0.1}, Layer{"substrate", silicon(), std::nullopt, 0.1}});
}

inline DeltaLayerSpec sample_delta(double depth = 18.1, double fwhm = 0.9, double n2d = 2.77) {
  return gaussian_delta_from_fwhm(depth, fwhm, n2d, "As", "Si");
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(RCXR_TEST_TMP_DIR) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace rcxr::test

#include "rcxr/forward.hpp"

namespace rcxr::test {

inline std::vector<double> synth_q() { return linspace(0.3, 5.2, 981); }

inline ReflectivityCurve simulate(const DeltaLayerSpec* delta, double energy_ev) {
  const auto q = synth_q();
  return dynamical_reflectivity(oxide_on_silicon(), delta, tables(), energy_ev, q);
}

}  // namespace rcxr::test
