#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rcxr/xsf.hpp"

namespace rcxr {

/// One slab. A missing thickness marks the semi-infinite substrate.
/// Roughness is the RMS width of the layer's top interface.
struct Layer {
  std::string name;
  Material material;
  std::optional<double> thickness_nm;
  double roughness_nm = 0.0;

  bool is_substrate() const { return !thickness_nm.has_value(); }
};

/// Slabs ordered from the surface down, ending in exactly one substrate.
/// The ambient above the first layer is vacuum.
class LayerStack {
 public:
  LayerStack() = default;
  explicit LayerStack(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const { return layers_; }
  /// Depth of each layer's top interface (first is 0).
  std::vector<double> interface_depths() const;
  /// Depth of the substrate's top interface.
  double total_thickness() const;
  std::vector<std::string> elements() const;

 private:
  std::vector<Layer> layers_;
};

struct DiracShape {};

struct GaussianShape {
  double sigma_nm;
};

/// Samples of an even shape h(z) on a grid symmetric about zero.
/// Renormalized to unit area on construction of the owning DeltaLayerSpec.
struct TabulatedShape {
  std::vector<double> z_nm;
  std::vector<double> h_per_nm;
};

using DeltaShape = std::variant<DiracShape, GaussianShape, TabulatedShape>;

/// Dilute sheet of dopant atoms replacing host atoms, centred at depth d.
class DeltaLayerSpec {
 public:
  DeltaLayerSpec(double depth_nm, DeltaShape shape, double n2d_per_nm2, std::string dopant, std::string host);

  double depth_nm() const { return depth_nm_; }
  const DeltaShape& shape() const { return shape_; }
  double n2d_per_nm2() const { return n2d_; }
  const std::string& dopant() const { return dopant_; }
  const std::string& host() const { return host_; }

  /// Unit-area shape h evaluated at offset z from the centre. Zero for Dirac.
  double h(double offset_nm) const;
  /// Integral of h over [a, b] (offsets from the centre).
  double h_integral(double a_nm, double b_nm) const;
  /// Half-width beyond which h is treated as zero (5 sigma for Gaussians).
  double support_halfwidth() const;
  /// Thickness as Gaussian FWHM; 0 for Dirac, NaN for tabulated shapes.
  double fwhm_nm() const;

  DeltaLayerSpec with_n2d(double n2d_per_nm2) const;
  DeltaLayerSpec with_depth(double depth_nm) const;

 private:
  double depth_nm_;
  DeltaShape shape_;
  double n2d_;
  std::string dopant_;
  std::string host_;
};

DeltaLayerSpec gaussian_delta_from_fwhm(double depth_nm, double fwhm_nm, double n2d_per_nm2, std::string dopant,
                                        std::string host);

/// Uniform depth grid bounds; z increases into the sample, 0 at the surface.
struct DepthGrid {
  double dz_nm = 0.02;
  double z_min_nm = -2.0;
  double z_max_nm = 0.0;
};

/// Default grid: 2 nm of vacuum, down to 5 nm below the deepest feature.
DepthGrid default_depth_grid(const LayerStack& stack, const DeltaLayerSpec* delta, double dz_nm = 0.02);

struct DensityProfile {
  double z0_nm = 0.0;
  double dz_nm = 0.0;
  std::vector<cplx> rho;  // 1/nm^2
  double energy_ev = 0.0;

  double z(std::size_t i) const { return z0_nm + dz_nm * static_cast<double>(i); }
  std::size_t size() const { return rho.size(); }
};

/// Complex SLD per layer at one energy (ambient vacuum not included).
std::vector<cplx> layer_slds(const LayerStack& stack, const TableSet& tables, double energy_ev);

/// Sample rho(z): error-function smeared slabs plus r0 * df(E) * N2D * h(z - d).
/// The delta-layer term already encodes substitution; no host atoms are removed.
/// When q_max is given the grid must satisfy dz <= pi / q_max.
DensityProfile discretize(const LayerStack& stack, const DeltaLayerSpec* delta, const TableSet& tables,
                          double energy_ev, const DepthGrid& grid, std::optional<double> q_max = std::nullopt);

/// Effective bulk dopant density N2D / thickness.
double three_d_density(const DeltaLayerSpec& delta, double thickness_nm);

}  // namespace rcxr
