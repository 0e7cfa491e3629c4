#include "rcxr/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "rcxr/constants.hpp"
#include "rcxr/error.hpp"

namespace rcxr {

namespace {

// Standard normal CDF.
double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double step_smeared(double z, double sigma) {
  if (sigma > 0.0) return phi(z / sigma);
  if (z > 0.0) return 1.0;
  if (z < 0.0) return 0.0;
  return 0.5;
}

double trapz(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return s;
}

TabulatedShape normalized(TabulatedShape t) {
  const auto n = t.z_nm.size();
  if (n < 3 || t.h_per_nm.size() != n) {
    throw Error(ErrorKind::Structure, "tabulated delta shape needs >= 3 matching (z, h) samples");
  }
  double zscale = 0.0, hscale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !(t.z_nm[i] > t.z_nm[i - 1])) {
      throw Error(ErrorKind::Structure, "tabulated delta shape: z must be strictly increasing");
    }
    if (t.h_per_nm[i] < 0.0) throw Error(ErrorKind::Domain, "tabulated delta shape: negative h");
    zscale = std::max(zscale, std::abs(t.z_nm[i]));
    hscale = std::max(hscale, std::abs(t.h_per_nm[i]));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    if (std::abs(t.z_nm[i] + t.z_nm[j]) > 1e-9 * zscale || std::abs(t.h_per_nm[i] - t.h_per_nm[j]) > 1e-9 * hscale) {
      throw Error(ErrorKind::Structure, "tabulated delta shape must be even about z = 0");
    }
  }
  const double area = trapz(t.z_nm, t.h_per_nm);
  if (!(area > 0.0)) throw Error(ErrorKind::Domain, "tabulated delta shape has zero area");
  for (auto& v : t.h_per_nm) v /= area;
  return t;
}

double tabulated_h(const TabulatedShape& t, double z) {
  if (z < t.z_nm.front() || z > t.z_nm.back()) return 0.0;
  auto it = std::upper_bound(t.z_nm.begin(), t.z_nm.end(), z);
  if (it == t.z_nm.end()) return t.h_per_nm.back();
  const std::size_t hi = static_cast<std::size_t>(it - t.z_nm.begin());
  const std::size_t lo = hi - 1;
  const double u = (z - t.z_nm[lo]) / (t.z_nm[hi] - t.z_nm[lo]);
  return t.h_per_nm[lo] + u * (t.h_per_nm[hi] - t.h_per_nm[lo]);
}

// Exact integral of the piecewise-linear table over [a, b].
double tabulated_integral(const TabulatedShape& t, double a, double b) {
  a = std::max(a, t.z_nm.front());
  b = std::min(b, t.z_nm.back());
  if (!(b > a)) return 0.0;
  double s = 0.0;
  for (std::size_t i = 1; i < t.z_nm.size(); ++i) {
    const double lo = std::max(a, t.z_nm[i - 1]);
    const double hi = std::min(b, t.z_nm[i]);
    if (hi <= lo) continue;
    s += 0.5 * (tabulated_h(t, lo) + tabulated_h(t, hi)) * (hi - lo);
  }
  return s;
}

}  // namespace

LayerStack::LayerStack(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw Error(ErrorKind::Structure, "layer stack is empty");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const bool last = i + 1 == layers_.size();
    if (l.is_substrate() != last) {
      throw Error(ErrorKind::Structure, "exactly one semi-infinite layer is allowed and it must be last");
    }
    if (!last && !(std::isfinite(*l.thickness_nm) && *l.thickness_nm > 0.0)) {
      throw Error(ErrorKind::Domain, "layer '" + l.name + "' thickness must be finite and > 0");
    }
    if (!(l.roughness_nm >= 0.0)) throw Error(ErrorKind::Domain, "layer '" + l.name + "' roughness must be >= 0");
  }
}

std::vector<double> LayerStack::interface_depths() const {
  std::vector<double> z;
  z.reserve(layers_.size());
  double depth = 0.0;
  for (const auto& l : layers_) {
    z.push_back(depth);
    if (l.thickness_nm) depth += *l.thickness_nm;
  }
  return z;
}

double LayerStack::total_thickness() const { return interface_depths().back(); }

std::vector<std::string> LayerStack::elements() const {
  std::set<std::string> s;
  for (const auto& l : layers_)
    for (const auto& c : l.material.components()) s.insert(c.element);
  return {s.begin(), s.end()};
}

DeltaLayerSpec::DeltaLayerSpec(double depth_nm, DeltaShape shape, double n2d_per_nm2, std::string dopant,
                               std::string host)
    : depth_nm_(depth_nm), shape_(std::move(shape)), n2d_(n2d_per_nm2), dopant_(std::move(dopant)),
      host_(std::move(host)) {
  if (!(depth_nm_ > 0.0)) throw Error(ErrorKind::Domain, "delta-layer depth must be > 0");
  if (!(n2d_ >= 0.0)) throw Error(ErrorKind::Domain, "delta-layer N2D must be >= 0");
  if (auto* g = std::get_if<GaussianShape>(&shape_); g && !(g->sigma_nm > 0.0)) {
    throw Error(ErrorKind::Domain, "gaussian delta-layer sigma must be > 0");
  }
  if (auto* t = std::get_if<TabulatedShape>(&shape_)) *t = normalized(std::move(*t));
}

double DeltaLayerSpec::h(double offset_nm) const {
  return std::visit(
      [offset_nm](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DiracShape>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, GaussianShape>) {
          const double u = offset_nm / s.sigma_nm;
          return std::exp(-0.5 * u * u) / (std::sqrt(2.0 * kPi) * s.sigma_nm);
        } else {
          return tabulated_h(s, offset_nm);
        }
      },
      shape_);
}

double DeltaLayerSpec::h_integral(double a_nm, double b_nm) const {
  return std::visit(
      [a_nm, b_nm](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DiracShape>) {
          return (a_nm <= 0.0 && 0.0 < b_nm) ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, GaussianShape>) {
          return phi(b_nm / s.sigma_nm) - phi(a_nm / s.sigma_nm);
        } else {
          return tabulated_integral(s, a_nm, b_nm);
        }
      },
      shape_);
}

double DeltaLayerSpec::support_halfwidth() const {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DiracShape>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, GaussianShape>) {
          return 5.0 * s.sigma_nm;
        } else {
          return s.z_nm.back();
        }
      },
      shape_);
}

double DeltaLayerSpec::fwhm_nm() const {
  if (std::holds_alternative<DiracShape>(shape_)) return 0.0;
  if (auto* g = std::get_if<GaussianShape>(&shape_)) return kFwhmPerSigma * g->sigma_nm;
  return std::numeric_limits<double>::quiet_NaN();
}

DeltaLayerSpec DeltaLayerSpec::with_n2d(double n2d_per_nm2) const {
  DeltaLayerSpec copy = *this;
  if (!(n2d_per_nm2 >= 0.0)) throw Error(ErrorKind::Domain, "delta-layer N2D must be >= 0");
  copy.n2d_ = n2d_per_nm2;
  return copy;
}

DeltaLayerSpec DeltaLayerSpec::with_depth(double depth_nm) const {
  return DeltaLayerSpec(depth_nm, shape_, n2d_, dopant_, host_);
}

DeltaLayerSpec gaussian_delta_from_fwhm(double depth_nm, double fwhm_nm, double n2d_per_nm2, std::string dopant,
                                        std::string host) {
  return DeltaLayerSpec(depth_nm, GaussianShape{fwhm_nm / kFwhmPerSigma}, n2d_per_nm2, std::move(dopant),
                        std::move(host));
}

DepthGrid default_depth_grid(const LayerStack& stack, const DeltaLayerSpec* delta, double dz_nm) {
  double deepest = stack.total_thickness();
  const auto& last = stack.layers().back();
  deepest += 4.0 * last.roughness_nm;
  if (delta) deepest = std::max(deepest, delta->depth_nm() + delta->support_halfwidth());
  DepthGrid g;
  g.dz_nm = dz_nm;
  g.z_min_nm = -2.0 - 4.0 * stack.layers().front().roughness_nm;
  g.z_max_nm = deepest + 5.0;
  return g;
}

std::vector<cplx> layer_slds(const LayerStack& stack, const TableSet& tables, double energy_ev) {
  std::vector<cplx> out;
  out.reserve(stack.layers().size());
  for (const auto& l : stack.layers()) out.push_back(sld(l.material, tables, energy_ev));
  return out;
}

DensityProfile discretize(const LayerStack& stack, const DeltaLayerSpec* delta, const TableSet& tables,
                          double energy_ev, const DepthGrid& grid, std::optional<double> q_max) {
  if (!(grid.dz_nm > 0.0)) throw Error(ErrorKind::Domain, "depth step must be > 0");
  if (q_max && grid.dz_nm > kPi / *q_max) {
    std::ostringstream msg;
    msg << "depth step " << grid.dz_nm << " nm exceeds pi/Q_max = " << kPi / *q_max << " nm";
    throw Error(ErrorKind::Sampling, msg.str());
  }
  const auto depths = stack.interface_depths();
  const auto& layers = stack.layers();

  // Coverage: vacuum margin above the surface, >= 3 nm of substrate below the
  // last interface, and the whole delta-layer support.
  const double top_sigma = layers.front().roughness_nm;
  if (!(grid.z_min_nm < 0.0) || grid.z_min_nm > -4.0 * top_sigma) {
    throw Error(ErrorKind::Coverage, "depth grid must start in vacuum at least 4 sigma above the surface");
  }
  const double need_bottom = std::max(depths.back() + 3.0, depths.back() + 4.0 * layers.back().roughness_nm);
  if (grid.z_max_nm < need_bottom) {
    throw Error(ErrorKind::Coverage, "depth grid must extend >= 3 nm into the substrate");
  }
  if (delta) {
    const double half = std::max(delta->support_halfwidth(), grid.dz_nm);
    if (grid.z_max_nm < delta->depth_nm() + half || grid.z_min_nm > delta->depth_nm() - half) {
      throw Error(ErrorKind::Coverage, "depth grid does not cover the delta layer (+-5 sigma)");
    }
  }

  const auto n = static_cast<std::size_t>(std::floor((grid.z_max_nm - grid.z_min_nm) / grid.dz_nm + 1e-9)) + 1;
  DensityProfile p;
  p.z0_nm = grid.z_min_nm;
  p.dz_nm = grid.dz_nm;
  p.energy_ev = energy_ev;
  p.rho.assign(n, cplx{0.0, 0.0});

  const auto rho = layer_slds(stack, tables, energy_ev);
  cplx above{0.0, 0.0};
  for (std::size_t j = 0; j < layers.size(); ++j) {
    const cplx jump = rho[j] - above;
    above = rho[j];
    if (jump == cplx{0.0, 0.0}) continue;
    const double zj = depths[j];
    const double sj = layers[j].roughness_nm;
    for (std::size_t i = 0; i < n; ++i) p.rho[i] += jump * step_smeared(p.z(i) - zj, sj);
  }

  if (delta && delta->n2d_per_nm2() > 0.0) {
    const cplx df = delta_f(tables.at(delta->dopant()), tables.at(delta->host()), energy_ev);
    const cplx scale = PhysicalConstants::r0_nm * df * delta->n2d_per_nm2();
    if (std::holds_alternative<DiracShape>(delta->shape())) {
      // Hat split onto the two bracketing nodes keeps unit area.
      const double pos = (delta->depth_nm() - p.z0_nm) / p.dz_nm;
      const auto i = static_cast<std::size_t>(std::floor(pos));
      const double frac = pos - static_cast<double>(i);
      p.rho[i] += scale * (1.0 - frac) / p.dz_nm;
      if (i + 1 < n) p.rho[i + 1] += scale * frac / p.dz_nm;
    } else {
      for (std::size_t i = 0; i < n; ++i) p.rho[i] += scale * delta->h(p.z(i) - delta->depth_nm());
    }
  }
  return p;
}

double three_d_density(const DeltaLayerSpec& delta, double thickness_nm) {
  if (!(thickness_nm > 0.0)) throw Error(ErrorKind::Domain, "thickness must be > 0");
  return delta.n2d_per_nm2() / thickness_nm;
}

}  // namespace rcxr
