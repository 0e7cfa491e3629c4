#include "rcxr/forward.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rcxr/constants.hpp"
#include "rcxr/error.hpp"

namespace rcxr {

namespace {

constexpr double kDegToRad = kPi / 180.0;

void require_increasing(const std::vector<double>& x, const char* what) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw Error(ErrorKind::Structure, std::string(what) + " must be strictly increasing");
  }
}

// Vertical wavevector sqrt(n^2 - cos^2 theta) (in units of k0), on the
// branch with Im <= 0 so that exp(-i kz z) decays into an absorbing medium.
cplx vertical_component(cplx n, double cos_theta) {
  cplx v = std::sqrt(n * n - cos_theta * cos_theta);
  if (v.imag() > 0.0 || (v.imag() == 0.0 && v.real() < 0.0)) v = -v;
  return v;
}

// int_0^dz exp(-iQt) dt and (1/dz) int_0^dz t exp(-iQt) dt.
}  // namespace

void ReflectivityCurve::validate() const {
  if (r.size() != q.size()) throw Error(ErrorKind::Structure, "curve: Q and R lengths differ");
  require_increasing(q, "curve Q grid");
  for (double v : r) {
    if (!(v >= 0.0)) throw Error(ErrorKind::Structure, "curve: reflectivity must be >= 0");
  }
  if (sigma_r && sigma_r->size() != q.size()) throw Error(ErrorKind::Structure, "curve: sigma_R length differs");
  if (theta_deg) {
    if (theta_deg->size() != q.size()) throw Error(ErrorKind::Structure, "curve: theta length differs");
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double expect = q_from_theta((*theta_deg)[k], energy_ev);
      if (std::abs(expect - q[k]) > 1e-9 * std::abs(q[k])) {
        throw Error(ErrorKind::Structure, "curve: Q inconsistent with theta at point " + std::to_string(k));
      }
    }
  }
}

void EnergyScan::validate() const {
  if (r.size() != energy_ev.size()) throw Error(ErrorKind::Structure, "scan: E and R lengths differ");
  require_increasing(energy_ev, "scan energy grid");
  for (double v : r) {
    if (!(v >= 0.0)) throw Error(ErrorKind::Structure, "scan: reflectivity must be >= 0");
  }
}

double q_from_theta(double theta_deg, double energy_ev) {
  if (!(theta_deg > 0.0 && theta_deg <= 90.0)) {
    throw Error(ErrorKind::Domain, "incidence angle must lie in (0, 90] degrees");
  }
  return kFourPi * std::sin(theta_deg * kDegToRad) / wavelength_nm(energy_ev);
}

double theta_from_q(double q_per_nm, double energy_ev) {
  const double s = q_per_nm * wavelength_nm(energy_ev) / kFourPi;
  if (!(s > 0.0 && s <= 1.0)) throw Error(ErrorKind::Domain, "Q not reachable at this energy");
  return std::asin(s) / kDegToRad;
}

cplx born_amplitude(const DensityProfile& profile, double q) {
  const std::size_t n = profile.size();
  const double dz = profile.dz_nm;
  cplx sum{0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k) sum += profile.rho[k] * std::polar(1.0, -q * profile.z(k));
  // Substrate continues beyond the grid as a constant, summed on the same lattice.
  const cplx step = std::polar(1.0, -q * dz);
  sum += profile.rho[n - 1] * std::polar(1.0, -q * profile.z(n - 1)) * step / (1.0 - step);
  return sum * dz;
}

ReflectivityCurve born_reflectivity(const DensityProfile& profile, std::span<const double> q) {
  if (profile.size() < 2) throw Error(ErrorKind::Coverage, "profile needs at least two samples");
  double qmax = 0.0;
  for (double v : q) {
    if (v == 0.0) throw Error(ErrorKind::Singularity, "Born reflectivity is singular at Q = 0");
    if (v < 0.0) throw Error(ErrorKind::Domain, "Q must be positive");
    qmax = std::max(qmax, v);
  }
  if (profile.dz_nm > kPi / qmax) {
    std::ostringstream msg;
    msg << "profile step " << profile.dz_nm << " nm violates Nyquist for Q_max = " << qmax;
    throw Error(ErrorKind::Sampling, msg.str());
  }
  ReflectivityCurve out;
  out.q.assign(q.begin(), q.end());
  out.energy_ev = profile.energy_ev;
  out.reliable_from_q = kBornReliableFromQ;
  out.r.resize(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double prefactor = kFourPi / q[k];
    out.r[k] = prefactor * prefactor * std::norm(born_amplitude(profile, q[k]));
  }
  out.validate();
  return out;
}

double fresnel_reflectance(cplx n1, cplx n2, double theta_deg) {
  if (!(theta_deg > 0.0 && theta_deg <= 90.0)) {
    throw Error(ErrorKind::Domain, "incidence angle must lie in (0, 90] degrees");
  }
  const double th = theta_deg * kDegToRad;
  // n1 sin(theta_i) and n2 sin(theta_t), with n1 cos(theta_i) = n2 cos(theta_t).
  const cplx a = n1 * std::sin(th);
  const cplx c = n1 * std::cos(th);
  cplx b = std::sqrt(n2 * n2 - c * c);
  if (b.imag() > 0.0 || (b.imag() == 0.0 && b.real() < 0.0)) b = -b;
  const cplx sum = a + b;
  return std::norm((n1 - n2) * (n1 + n2) / (sum * sum));
}

std::vector<Slab> build_slabs(const LayerStack& stack, const DeltaLayerSpec* delta, const TableSet& tables,
                              double energy_ev, const DynamicalOptions& opts) {
  const auto depths = stack.interface_depths();
  const auto& layers = stack.layers();
  const auto rho = layer_slds(stack, tables, energy_ev);

  std::vector<double> cuts(depths.begin(), depths.end());
  cplx delta_scale{0.0, 0.0};
  double lo = 0.0, hi = 0.0;
  const bool has_delta = delta != nullptr && delta->n2d_per_nm2() > 0.0;
  if (has_delta) {
    const cplx df = delta_f(tables.at(delta->dopant()), tables.at(delta->host()), energy_ev);
    delta_scale = PhysicalConstants::r0_nm * df * delta->n2d_per_nm2();
    double half = 0.0;
    if (std::holds_alternative<DiracShape>(delta->shape())) {
      half = 0.05 * opts.max_slab_nm;
    } else if (auto* g = std::get_if<GaussianShape>(&delta->shape())) {
      half = opts.halfwidth_sigmas * g->sigma_nm;
    } else {
      half = delta->support_halfwidth();
    }
    lo = delta->depth_nm() - half;
    hi = delta->depth_nm() + half;
    if (lo <= 0.0) throw Error(ErrorKind::Coverage, "delta layer reaches the surface");
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi - lo) / opts.max_slab_nm)));
    const double w = (hi - lo) / static_cast<double>(pieces);
    for (std::size_t k = 0; k <= pieces; ++k) cuts.push_back(lo + w * static_cast<double>(k));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             cuts.end());

  auto host_layer_at = [&](double z) {
    std::size_t j = 0;
    while (j + 1 < depths.size() && z >= depths[j + 1]) ++j;
    return j;
  };
  auto roughness_at = [&](double z) {
    for (std::size_t j = 0; j < depths.size(); ++j) {
      if (std::abs(depths[j] - z) < 1e-12) return layers[j].roughness_nm;
    }
    return 0.0;
  };

  std::vector<Slab> slabs;
  slabs.reserve(cuts.size());
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const double top = cuts[k];
    const bool last = k + 1 == cuts.size();
    const double bottom = last ? top : cuts[k + 1];
    const double mid = last ? top + 1.0 : 0.5 * (top + bottom);
    cplx value = rho[host_layer_at(mid)];
    if (has_delta && !last && top >= lo - 1e-12 && bottom <= hi + 1e-12) {
      const double d = delta->depth_nm();
      value += delta_scale * delta->h_integral(top - d, bottom - d) / (bottom - top);
    }
    slabs.push_back({value, last ? 0.0 : bottom - top, roughness_at(top)});
  }
  return slabs;
}

double recursive_reflectivity(std::span<const Slab> slabs, double energy_ev, double q_per_nm) {
  if (q_per_nm == 0.0) throw Error(ErrorKind::Singularity, "reflectivity requested at Q = 0");
  const double lambda = wavelength_nm(energy_ev);
  const double k0 = 2.0 * kPi / lambda;
  const double sin_t = q_per_nm / (2.0 * k0);
  if (!(sin_t > 0.0 && sin_t <= 1.0)) throw Error(ErrorKind::Domain, "Q not reachable at this energy");
  const double cos_t = std::sqrt(1.0 - sin_t * sin_t);

  const std::size_t m = slabs.size();
  // kz[0] is the vacuum ambient.
  std::vector<cplx> kz(m + 1), n(m + 1);
  kz[0] = k0 * sin_t;
  n[0] = 1.0;
  for (std::size_t j = 0; j < m; ++j) {
    n[j + 1] = index_from_sld(slabs[j].rho, energy_ev);
    kz[j + 1] = k0 * vertical_component(n[j + 1], cos_t);
  }

  const cplx i{0.0, 1.0};
  cplx x{0.0, 0.0};
  for (std::size_t j = m; j-- > 0;) {
    // Interface between medium j (above) and j+1 (below); slabs[j] holds medium j+1.
    const double sigma = slabs[j].roughness_nm;
    const cplx sum = kz[j] + kz[j + 1];
    cplx r = k0 * k0 * (n[j] - n[j + 1]) * (n[j] + n[j + 1]) / (sum * sum);
    if (sigma > 0.0) r *= std::exp(-2.0 * kz[j] * kz[j + 1] * sigma * sigma);
    if (j + 1 == m) {
      x = r;
    } else {
      const cplx ph = std::exp(-2.0 * i * kz[j + 1] * slabs[j].thickness_nm);
      x = (r + x * ph) / (1.0 + r * x * ph);
    }
  }
  return std::norm(x);
}

ReflectivityCurve dynamical_reflectivity(const LayerStack& stack, const DeltaLayerSpec* delta, const TableSet& tables,
                                         double energy_ev, std::span<const double> q,
                                         const DynamicalOptions& opts) {
  const auto slabs = build_slabs(stack, delta, tables, energy_ev, opts);
  ReflectivityCurve out;
  out.q.assign(q.begin(), q.end());
  out.energy_ev = energy_ev;
  out.r.resize(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) out.r[k] = recursive_reflectivity(slabs, energy_ev, q[k]);
  out.validate();
  return out;
}

EnergyScan simulate_energy_scan(const LayerStack& stack, const DeltaLayerSpec* delta, const TableSet& tables,
                                double theta_deg, std::span<const double> energies_ev,
                                const DynamicalOptions& opts) {
  EnergyScan scan;
  scan.theta_deg = theta_deg;
  scan.energy_ev.assign(energies_ev.begin(), energies_ev.end());
  scan.r.resize(energies_ev.size());
  for (std::size_t k = 0; k < energies_ev.size(); ++k) {
    const double e = energies_ev[k];
    const auto slabs = build_slabs(stack, delta, tables, e, opts);
    scan.r[k] = recursive_reflectivity(slabs, e, q_from_theta(theta_deg, e));
  }
  scan.validate();
  return scan;
}

ReflectivityCurve add_counting_noise(const ReflectivityCurve& curve, double incident_counts, std::uint64_t seed) {
  if (!(incident_counts > 0.0)) throw Error(ErrorKind::Domain, "incident counts must be > 0");
  std::mt19937_64 rng(seed);
  ReflectivityCurve out = curve;
  std::vector<double> sigma(curve.size());
  for (std::size_t k = 0; k < curve.size(); ++k) {
    const double mean = curve.r[k] * incident_counts;
    double counts = 0.0;
    if (mean > 0.0) {
      std::poisson_distribution<long long> dist(mean);
      counts = static_cast<double>(dist(rng));
    }
    out.r[k] = counts / incident_counts;
    sigma[k] = std::sqrt(mean) / incident_counts;
  }
  out.sigma_r = std::move(sigma);
  return out;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> x(n);
  if (n == 1) {
    x[0] = a;
    return x;
  }
  const double step = (b - a) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) x[k] = a + step * static_cast<double>(k);
  x[n - 1] = b;
  return x;
}

}  // namespace rcxr
