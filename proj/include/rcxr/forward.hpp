#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rcxr/model.hpp"

namespace rcxr {

/// Specular reflectivity against momentum transfer at one energy.
struct ReflectivityCurve {
  std::vector<double> q;  // 1/nm, strictly increasing
  std::vector<double> r;  // >= 0
  double energy_ev = 0.0;
  std::optional<std::vector<double>> sigma_r;
  std::optional<std::vector<double>> theta_deg;
  /// Below this Q the values carry no usable structure (Born breakdown,
  /// total reflection); 0 when the whole curve is usable.
  double reliable_from_q = 0.0;

  std::size_t size() const { return q.size(); }
  /// Throws Structure if the invariants do not hold.
  void validate() const;
};

/// Reflectivity against photon energy at a fixed incidence angle.
struct EnergyScan {
  double theta_deg = 0.0;
  std::vector<double> energy_ev;
  std::vector<double> r;
  bool i0_normalized = true;

  void validate() const;
};

/// Born results below this Q are flagged as unreliable.
inline constexpr double kBornReliableFromQ = 1.5;

double q_from_theta(double theta_deg, double energy_ev);
double theta_from_q(double q_per_nm, double energy_ev);

/// Kinematic reflectivity (4 pi)^2 / Q^2 * |int rho(z) exp(-iQz) dz|^2.
/// The integral is the lattice sum over the samples, spectrally accurate for
/// smooth profiles; the substrate beyond the grid continues the sum with rho_end.
ReflectivityCurve born_reflectivity(const DensityProfile& profile, std::span<const double> q);

/// Complex amplitude of the Born integral alone, int rho exp(-iQz) dz.
cplx born_amplitude(const DensityProfile& profile, double q);

/// Single-interface sigma-polarized reflectance; theta is the grazing angle in medium 1.
double fresnel_reflectance(cplx n1, cplx n2, double theta_deg);

/// Homogeneous slab for the recursive solver. Roughness belongs to the slab's top interface.
struct Slab {
  cplx rho;  // 1/nm^2
  double thickness_nm;
  double roughness_nm;
};

struct DynamicalOptions {
  double max_slab_nm = 0.1;  // delta-layer sub-discretization
  double halfwidth_sigmas = 4.0;
};

/// Slab list (excluding the vacuum ambient); the last entry is the substrate.
/// A delta layer is cut into slabs of <= max_slab_nm across +-4 sigma.
std::vector<Slab> build_slabs(const LayerStack& stack, const DeltaLayerSpec* delta, const TableSet& tables,
                              double energy_ev, const DynamicalOptions& opts = {});

/// Exact specular reflectivity via the interface recursion with Nevot-Croce factors.
double recursive_reflectivity(std::span<const Slab> slabs, double energy_ev, double q_per_nm);

ReflectivityCurve dynamical_reflectivity(const LayerStack& stack, const DeltaLayerSpec* delta, const TableSet& tables,
                                         double energy_ev, std::span<const double> q,
                                         const DynamicalOptions& opts = {});

/// Recursive solver evaluated at Q(theta, E) for each energy.
EnergyScan simulate_energy_scan(const LayerStack& stack, const DeltaLayerSpec* delta, const TableSet& tables,
                                double theta_deg, std::span<const double> energies_ev,
                                const DynamicalOptions& opts = {});

/// Replace R by Poisson(R I0) / I0 and attach sigma_R = sqrt(R I0) / I0.
ReflectivityCurve add_counting_noise(const ReflectivityCurve& curve, double incident_counts, std::uint64_t seed);

std::vector<double> linspace(double a, double b, std::size_t n);

}  // namespace rcxr
