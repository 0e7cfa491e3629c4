#pragma once

#include <numbers>

namespace rcxr {

/// Unit conventions: lengths in nm, Q in 1/nm, energies in eV,
/// number densities in atoms/nm^3 (bulk) and atoms/nm^2 (sheet).
struct PhysicalConstants {
  static constexpr double r0_nm = 2.8179403262e-6;  // classical electron radius
  static constexpr double hc_ev_nm = 1239.841984;
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kFourPi = 4.0 * std::numbers::pi;

/// FWHM of a Gaussian over its standard deviation, 2*sqrt(2 ln 2).
inline constexpr double kFwhmPerSigma = 2.3548200450309493;

constexpr double wavelength_nm(double energy_ev) { return PhysicalConstants::hc_ev_nm / energy_ev; }

}  // namespace rcxr
