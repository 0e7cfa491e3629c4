#include "rcxr/extract.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "rcxr/error.hpp"

namespace rcxr {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double rms_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

double wrap_2pi(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

double wrap_pi(double a) {
  double w = wrap_2pi(a + kPi) - kPi;
  return w == -kPi ? kPi : w;
}

double hann(std::size_t n, std::size_t count) {
  return 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(n) / static_cast<double>(count - 1)));
}

// Least-squares polynomial trend of Q^2 y, returned divided by Q^2.
std::vector<double> detrended(const RescaledCurve& rc, int degree) {
  const std::size_t n = rc.q.size();
  const double mid = 0.5 * (rc.q.front() + rc.q.back());
  const double span = rc.q.back() - rc.q.front();
  Eigen::MatrixXd v(n, degree + 1);
  Eigen::VectorXd g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (rc.q[i] - mid) / span;
    double p = 1.0;
    for (int j = 0; j <= degree; ++j) {
      v(i, j) = p;
      p *= x;
    }
    g[i] = rc.q[i] * rc.q[i] * rc.y[i];
  }
  const Eigen::VectorXd c = v.colPivHouseholderQr().solve(g);
  const Eigen::VectorXd trend = v * c;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rc.y[i] - trend[i] / (rc.q[i] * rc.q[i]);
  return out;
}

double reference_of(const RescaledCurve& rc) {
  if (rc.reference_level > 0.0) return rc.reference_level;
  double s = 0.0;
  for (double v : rc.y) s += std::abs(v);
  return s / static_cast<double>(rc.y.size());
}

double magnitude_near(const Spectrum& s, double depth_nm) {
  const double bin = s.depth_nm[1] - s.depth_nm[0];
  double best = 0.0;
  for (std::size_t k = 0; k < s.value.size(); ++k) {
    if (std::abs(s.depth_nm[k] - depth_nm) <= bin) best = std::max(best, std::abs(s.value[k]));
  }
  return best;
}

void check_grid(const RescaledCurve& rc) {
  if (rc.q.size() != rc.y.size() || rc.q.size() < 8) throw Error(ErrorKind::Structure, "rescaled curve malformed");
}

}  // namespace

const char* to_string(ExtractionMethod m) {
  switch (m) {
    case ExtractionMethod::SingleEnergy: return "single-energy";
    case ExtractionMethod::ResonantDifference: return "resonant-difference";
    case ExtractionMethod::ResonanceSpectrum: return "resonance-spectrum";
  }
  return "unknown";
}

const char* to_string(ContrastDefinition c) {
  return c == ContrastDefinition::EdgeSpan ? "edge_span" : "window_means";
}

ContrastDefinition contrast_from_string(const std::string& s) {
  if (s == "edge_span") return ContrastDefinition::EdgeSpan;
  if (s == "window_means") return ContrastDefinition::WindowMeans;
  throw Error(ErrorKind::Schema, "unknown contrast definition \"" + s + "\" (edge_span | window_means)");
}

RescaledCurve rescale(const ReflectivityCurve& curve, QWindow window, std::size_t points) {
  curve.validate();
  if (!(window.hi > window.lo)) throw Error(ErrorKind::Range, "window upper edge must exceed the lower edge");
  if (curve.q.empty() || window.lo < curve.q.front() || window.hi > curve.q.back()) {
    std::ostringstream msg;
    msg << "window [" << window.lo << ", " << window.hi << "] outside data range";
    if (!curve.q.empty()) msg << " [" << curve.q.front() << ", " << curve.q.back() << "]";
    throw Error(ErrorKind::Range, msg.str());
  }
  if (points == 0) {
    const auto inside = std::count_if(curve.q.begin(), curve.q.end(),
                                      [&](double q) { return q >= window.lo && q <= window.hi; });
    points = std::max<std::size_t>(64, 2 * static_cast<std::size_t>(inside));
  }
  if (points < 64) throw Error(ErrorKind::Domain, "rescale needs at least 64 grid points");
  RescaledCurve rc;
  rc.q = uniform_grid(window.lo, window.hi, points);
  rc.y = resample_linear(curve.q, curve.r, rc.q);
  for (std::size_t i = 0; i < points; ++i) rc.y[i] *= rc.q[i] * rc.q[i] / (kFourPi * kFourPi);
  rc.energy_ev = curve.energy_ev;
  rc.window = window;
  rc.reference_level = mean_of(rc.y);
  return rc;
}

double phase_at_depth(const RescaledCurve& rc, double depth_nm, const DetectionOptions& opts) {
  check_grid(rc);
  const auto r = detrended(rc, opts.detrend_degree);
  const double mid = 0.5 * (rc.q.front() + rc.q.back());
  cplx sum{0.0, 0.0};
  for (std::size_t n = 0; n < r.size(); ++n) {
    sum += hann(n, r.size()) * r[n] * std::polar(1.0, -depth_nm * (rc.q[n] - mid));
  }
  return wrap_2pi(mid * depth_nm - std::arg(sum));
}

DepthEstimate depth_spectrum(const RescaledCurve& rc, const DetectionOptions& opts) {
  check_grid(rc);
  const auto r = detrended(rc, opts.detrend_degree);
  DepthEstimate est;
  est.spectrum = windowed_fft(rc.q, r, Taper::Hann, opts.pad_factor);
  const auto& s = est.spectrum;
  const double span = rc.q.back() - rc.q.front();
  const double zmin = opts.min_depth_resolutions * kTwoPi / span;

  std::vector<double> band;
  std::size_t best = 0;
  double best_mag = -1.0;
  for (std::size_t k = 1; k + 1 < s.value.size(); ++k) {
    if (s.depth_nm[k] < zmin) continue;
    const double m = std::abs(s.value[k]);
    band.push_back(m);
    if (m > best_mag && m >= std::abs(s.value[k - 1]) && m >= std::abs(s.value[k + 1])) {
      best_mag = m;
      best = k;
    }
  }
  if (band.empty() || best == 0) return est;
  auto mid = band.begin() + static_cast<std::ptrdiff_t>(band.size() / 2);
  std::nth_element(band.begin(), mid, band.end());
  const double median = *mid;

  const double offset =
      quadratic_peak_offset(std::abs(s.value[best - 1]), best_mag, std::abs(s.value[best + 1]));
  const double bin = s.depth_nm[1] - s.depth_nm[0];
  est.depth_nm = s.depth_nm[best] + offset * bin;
  est.peak_to_median = median > 0.0 ? best_mag / median : std::numeric_limits<double>::infinity();
  est.relative_amplitude = 2.0 * best_mag / s.window_sum / reference_of(rc);
  est.phase_rad = phase_at_depth(rc, est.depth_nm, opts);
  est.detected = est.peak_to_median >= opts.peak_to_median && est.relative_amplitude >= opts.min_relative_amplitude;
  return est;
}

DepthEstimate fft_depth_phase(const RescaledCurve& rc, const DetectionOptions& opts) {
  const double span = rc.q.back() - rc.q.front();
  auto est = depth_spectrum(rc, opts);
  if (!est.detected) {
    std::ostringstream msg;
    msg << "no layer detected: strongest peak at " << est.depth_nm << " nm, peak/median " << est.peak_to_median
        << " (floor " << opts.peak_to_median << "), relative amplitude " << est.relative_amplitude << " (floor "
        << opts.min_relative_amplitude << ")";
    throw Error(ErrorKind::NoLayerDetected, msg.str());
  }
  if (est.depth_nm * span < opts.min_depth_resolutions * kTwoPi) {
    throw Error(ErrorKind::NoLayerDetected, "window spans fewer than 3 oscillation periods");
  }
  return est;
}

std::vector<double> lowpass_q2(std::span<const double> q, std::span<const double> g, double cutoff_nm,
                               double taper_fraction) {
  const std::size_t n = q.size();
  if (g.size() != n) throw Error(ErrorKind::Alignment, "low-pass: signal and grid differ in length");
  const double dq = (q.back() - q.front()) / static_cast<double>(n - 1);
  const std::size_t m = 2 * n;
  std::vector<cplx> ext(m);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = q[i] * q[i] * g[i];
    ext[i] = v;
    ext[m - 1 - i] = v;
  }
  auto spec = fft(ext);
  const double z1 = cutoff_nm * (1.0 - 0.5 * taper_fraction);
  const double z2 = cutoff_nm * (1.0 + 0.5 * taper_fraction);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t kk = std::min(k, m - k);
    const double z = kTwoPi * static_cast<double>(kk) / (static_cast<double>(m) * dq);
    double w = 1.0;
    if (z >= z2) {
      w = 0.0;
    } else if (z > z1) {
      w = 0.5 * (1.0 + std::cos(kPi * (z - z1) / (z2 - z1)));
    }
    spec[k] *= w;
  }
  const auto back = ifft(spec);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = back[i].real() / (q[i] * q[i]);
  return out;
}

SpectralDecomposition split_frequencies(const RescaledCurve& rc, double cutoff_nm, std::optional<double> depth_hint,
                                        std::span<const double> high_estimate) {
  check_grid(rc);
  if (!(cutoff_nm > 0.0)) throw Error(ErrorKind::InvalidCutoff, "cutoff depth must be positive");
  if (depth_hint && cutoff_nm >= *depth_hint) {
    std::ostringstream msg;
    msg << "cutoff " << cutoff_nm << " nm must lie below the layer depth " << *depth_hint << " nm";
    throw Error(ErrorKind::InvalidCutoff, msg.str());
  }
  std::vector<double> g = rc.y;
  if (!high_estimate.empty()) {
    if (high_estimate.size() != g.size()) throw Error(ErrorKind::Alignment, "high-frequency estimate mis-sized");
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= high_estimate[i];
  }
  SpectralDecomposition d;
  d.q = rc.q;
  d.cutoff_nm = cutoff_nm;
  d.low = lowpass_q2(rc.q, g, cutoff_nm);
  d.interference.resize(rc.y.size());
  for (std::size_t i = 0; i < rc.y.size(); ++i) {
    if (!(d.low[i] > 0.0)) throw Error(ErrorKind::Domain, "low-frequency estimate is not positive on the window");
    d.interference[i] = rc.y[i] - d.low[i];
  }
  return d;
}

RescaledCurve resonant_difference(const RescaledCurve& above, const RescaledCurve& below) {
  check_grid(above);
  check_grid(below);
  const double span = above.q.back() - above.q.front();
  bool aligned = above.q.size() == below.q.size();
  for (std::size_t i = 0; aligned && i < above.q.size(); ++i) {
    aligned = std::abs(above.q[i] - below.q[i]) <= 1e-12 * span;
  }
  if (!aligned) throw Error(ErrorKind::Alignment, "difference requires both curves on the identical Q grid");
  RescaledCurve d = above;
  for (std::size_t i = 0; i < d.y.size(); ++i) d.y[i] = above.y[i] - below.y[i];
  d.reference_level = mean_of(below.y);
  return d;
}

RescaledCurve resonant_difference(const ReflectivityCurve& above, const ReflectivityCurve& below, QWindow window,
                                  std::size_t points) {
  if (points == 0) {
    const auto inside = std::count_if(below.q.begin(), below.q.end(),
                                      [&](double q) { return q >= window.lo && q <= window.hi; });
    points = std::max<std::size_t>(64, 2 * static_cast<std::size_t>(inside));
  }
  return resonant_difference(rescale(above, window, points), rescale(below, window, points));
}

Eigen::VectorXd envelope_model(std::span<const double> q, const Eigen::VectorXd& p) {
  Eigen::VectorXd m(static_cast<Eigen::Index>(q.size()));
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double qs = q[i] * p[1];
    m[static_cast<Eigen::Index>(i)] = p[0] * std::exp(-0.5 * qs * qs) * std::cos(q[i] * p[2] - p[3]);
  }
  return m;
}

Eigen::MatrixXd envelope_jacobian(std::span<const double> q, const Eigen::VectorXd& p) {
  Eigen::MatrixXd j(static_cast<Eigen::Index>(q.size()), 4);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double qs = q[i] * p[1];
    const double env = std::exp(-0.5 * qs * qs);
    const double c = std::cos(q[i] * p[2] - p[3]);
    const double s = std::sin(q[i] * p[2] - p[3]);
    j(r, 0) = env * c;
    j(r, 1) = -p[0] * q[i] * q[i] * p[1] * env * c;
    j(r, 2) = -p[0] * env * q[i] * s;
    j(r, 3) = p[0] * env * s;
  }
  return j;
}

ExtractionResult fit_envelope(std::span<const double> q, std::span<const double> signal,
                              std::span<const double> normalizer, ExtractionMethod mode, double initial_depth_nm,
                              const EnvelopeFitOptions& opts) {
  const std::size_t n = q.size();
  if (signal.size() != n || normalizer.size() != n) throw Error(ErrorKind::Alignment, "fit: inputs differ in length");
  if (n < 8) throw Error(ErrorKind::Domain, "fit: too few points");
  if (!(initial_depth_nm > 0.0)) throw Error(ErrorKind::Domain, "fit: initial depth must be positive");
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(normalizer[i] > 0.0)) throw Error(ErrorKind::Domain, "fit: normalizer must be positive");
    s[i] = signal[i] / normalizer[i];
    if (!std::isfinite(s[i])) throw Error(ErrorKind::Domain, "fit: signal not finite");
  }
  const double scale = rms_of(s);
  if (!(scale > 0.0)) throw Error(ErrorKind::FitFailed, "fit: signal is identically zero");
  Eigen::VectorXd target(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) target[static_cast<Eigen::Index>(i)] = s[i] / scale;

  std::vector<double> qv(q.begin(), q.end());
  const double resolution = kTwoPi / (q.back() - q.front());
  FitProblem problem;
  problem.residual = [qv, target](const Eigen::VectorXd& p) { return Eigen::VectorXd(envelope_model(qv, p) - target); };
  problem.jacobian = [qv](const Eigen::VectorXd& p) { return envelope_jacobian(qv, p); };
  problem.lower = Eigen::Vector4d(0.0, 0.0, std::max(1e-3, initial_depth_nm - resolution), -1e3);
  problem.upper = Eigen::Vector4d(1e6, opts.max_sigma_nm, initial_depth_nm + resolution, 1e3);

  std::optional<FitOutcome> best;
  std::ostringstream diag;
  for (double phi0 : {0.0, 0.5 * kPi, kPi, 1.5 * kPi}) {
    problem.initial = Eigen::Vector4d(2.0, opts.initial_sigma_nm, initial_depth_nm, phi0);
    FitOutcome out = levenberg_marquardt(problem);
    diag << " [phi0=" << phi0 << ": " << out.message << ", rss=" << out.rss << "]";
    if (out.converged && (!best || out.rss < best->rss)) best = std::move(out);
  }
  if (!best) throw Error(ErrorKind::FitFailed, "envelope fit did not converge from any start:" + diag.str());

  problem.initial = best->parameters;
  ExtractionResult res;
  res.method = mode;
  res.converged = best->converged;
  res.iterations = best->iterations;
  res.rss = best->rss * scale * scale;
  res.relative_residual = std::sqrt(best->rss / static_cast<double>(n));
  res.window = QWindow{q.front(), q.back()};
  res.points = n;

  const auto& p = best->parameters;
  res.amplitude.value = p[0] * scale;
  res.amplitude.ci = covariance_interval(problem, *best, 0, opts.level);
  res.amplitude.ci.lower *= scale;
  res.amplitude.ci.upper *= scale;

  res.sigma_nm.value = p[1];
  res.sigma_nm.ci = opts.profile_sigma ? profile_likelihood_ci(problem, *best, 1, opts.level)
                                       : covariance_interval(problem, *best, 1, opts.level);
  res.fwhm_nm.value = p[1] * kFwhmPerSigma;
  res.fwhm_nm.ci = res.sigma_nm.ci;
  res.fwhm_nm.ci.lower *= kFwhmPerSigma;
  res.fwhm_nm.ci.upper *= kFwhmPerSigma;
  res.thickness_upper_bound_only = res.sigma_nm.ci.lower_at_bound;

  res.depth_nm.value = p[2];
  res.depth_nm.ci = covariance_interval(problem, *best, 2, opts.level);

  const double phi = wrap_2pi(p[3]);
  const double shift = phi - p[3];
  res.phase_rad.value = phi;
  res.phase_rad.ci = covariance_interval(problem, *best, 3, opts.level);
  res.phase_rad.ci.lower += shift;
  res.phase_rad.ci.upper += shift;
  return res;
}

ReconstructedProfile reconstruct_profile(std::span<const double> q, std::span<const double> interference,
                                         std::span<const double> normalizer, const ReconstructionOptions& opts) {
  const std::size_t n = q.size();
  if (interference.size() != n || normalizer.size() != n) {
    throw Error(ErrorKind::Alignment, "reconstruction: inputs differ in length");
  }
  if (n < 2) throw Error(ErrorKind::Domain, "reconstruction: too few points");
  const double dq = (q.back() - q.front()) / static_cast<double>(n - 1);
  const std::size_t m = n * std::max<std::size_t>(opts.pad_factor, 1);
  std::vector<cplx> buf(m, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    if (!(normalizer[i] > 0.0)) throw Error(ErrorKind::Domain, "reconstruction: normalizer must be positive");
    buf[i] = interference[i] / (2.0 * normalizer[i]);
  }
  const auto inv = ifft(buf);

  ReconstructedProfile prof;
  prof.resolution_nm = kTwoPi / (q.back() - q.front());
  const double z_limit = opts.z_max_nm > 0.0 ? opts.z_max_nm : std::min(kPi / dq, 150.0);
  const double z_step = kTwoPi / (static_cast<double>(m) * dq);
  std::vector<cplx> c;
  for (std::size_t k = 0; k <= m / 2; ++k) {
    const double z = z_step * static_cast<double>(k);
    if (z > z_limit) break;
    prof.z_nm.push_back(z);
    c.push_back(dq / kPi * static_cast<double>(m) * inv[k] * std::polar(1.0, q.front() * z));
  }

  const double zmin = opts.min_depth_nm > 0.0 ? opts.min_depth_nm : 3.0 * prof.resolution_nm;
  std::size_t best = 0;
  double best_mag = -1.0;
  for (std::size_t k = 1; k + 1 < c.size(); ++k) {
    if (prof.z_nm[k] < zmin) continue;
    const double mag = std::abs(c[k]);
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  prof.value.assign(c.size(), 0.0);
  if (best == 0 || best_mag <= 0.0) {
    prof.peak_depth_nm = zmin;
    return prof;
  }
  const double offset = quadratic_peak_offset(std::abs(c[best - 1]), best_mag, std::abs(c[best + 1]));
  prof.peak_depth_nm = prof.z_nm[best] + offset * z_step;
  prof.peak_value = best_mag;
  const double q_mid = 0.5 * (q.front() + q.back());
  const cplx ref = std::polar(1.0, -std::arg(c[best]));
  for (std::size_t k = 0; k < c.size(); ++k) {
    prof.value[k] = (c[k] * ref * std::polar(1.0, -q_mid * (prof.z_nm[k] - prof.z_nm[best]))).real();
  }
  return prof;
}

SingleEnergyAnalysis analyze_single_energy(const ReflectivityCurve& curve, const AnalysisOptions& opts) {
  SingleEnergyAnalysis a;
  a.rescaled = rescale(curve, opts.window, opts.points);
  a.fft = fft_depth_phase(a.rescaled, opts.detection);
  const double cutoff = opts.cutoff_nm.value_or(0.5 * a.fft.depth_nm);
  a.decomposition = split_frequencies(a.rescaled, cutoff, a.fft.depth_nm);

  const auto& q = a.rescaled.q;
  auto normalizer = [](const std::vector<double>& low) {
    std::vector<double> s(low.size());
    for (std::size_t i = 0; i < low.size(); ++i) s[i] = std::sqrt(low[i]);
    return s;
  };
  auto norm = normalizer(a.decomposition.low);
  a.result = fit_envelope(q, a.decomposition.interference, norm, ExtractionMethod::SingleEnergy, a.fft.depth_nm,
                          opts.fit);
  for (int pass = 0; pass < opts.deflation_passes; ++pass) {
    const auto model = envelope_model(q, Eigen::Vector4d(a.result.amplitude.value, a.result.sigma_nm.value,
                                                         a.result.depth_nm.value, a.result.phase_rad.value));
    std::vector<double> high(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) high[i] = norm[i] * model[static_cast<Eigen::Index>(i)];
    a.decomposition = split_frequencies(a.rescaled, cutoff, a.fft.depth_nm, high);
    norm = normalizer(a.decomposition.low);
    a.result = fit_envelope(q, a.decomposition.interference, norm, ExtractionMethod::SingleEnergy,
                            a.result.depth_nm.value, opts.fit);
  }
  a.signal.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) a.signal[i] = a.decomposition.interference[i] / norm[i];
  const auto model = envelope_model(q, Eigen::Vector4d(a.result.amplitude.value, a.result.sigma_nm.value,
                                                       a.result.depth_nm.value, a.result.phase_rad.value));
  a.model.assign(model.data(), model.data() + model.size());
  ReconstructionOptions ro;
  ro.min_depth_nm = cutoff;
  a.profile = reconstruct_profile(q, a.decomposition.interference, norm, ro);
  return a;
}

DifferenceAnalysis analyze_difference(const ReflectivityCurve& below, const ReflectivityCurve& above,
                                      const AnalysisOptions& opts) {
  DifferenceAnalysis a;
  std::size_t points = opts.points;
  if (points == 0) {
    const auto inside = std::count_if(below.q.begin(), below.q.end(),
                                      [&](double q) { return q >= opts.window.lo && q <= opts.window.hi; });
    points = std::max<std::size_t>(64, 2 * static_cast<std::size_t>(inside));
  }
  a.below = rescale(below, opts.window, points);
  a.above = rescale(above, opts.window, points);
  a.difference = resonant_difference(a.above, a.below);
  a.fft = fft_depth_phase(a.difference, opts.detection);
  const auto own_spectrum = depth_spectrum(a.below, opts.detection).spectrum;
  const double own_mag = magnitude_near(own_spectrum, a.fft.depth_nm);
  a.resonant_ratio = own_mag > 0.0 ? magnitude_near(a.fft.spectrum, a.fft.depth_nm) / own_mag
                                   : std::numeric_limits<double>::infinity();
  if (a.resonant_ratio < opts.detection.min_resonant_ratio) {
    std::ostringstream msg;
    msg << "no resonant layer detected: difference oscillation at " << a.fft.depth_nm << " nm is "
        << a.resonant_ratio << " of the below-edge oscillation there (floor " << opts.detection.min_resonant_ratio
        << "), consistent with a non-resonant feature";
    throw Error(ErrorKind::NoLayerDetected, msg.str());
  }
  const double cutoff = opts.cutoff_nm.value_or(0.5 * a.fft.depth_nm);
  a.below_decomposition = split_frequencies(a.below, cutoff, a.fft.depth_nm);

  const auto& q = a.below.q;
  std::vector<double> norm(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) norm[i] = std::sqrt(a.below_decomposition.low[i]);
  // Remove the below-edge curve's own delta-layer oscillation from its low-pass estimate when it fits.
  for (int pass = 0; pass < opts.deflation_passes; ++pass) {
    try {
      const auto own = fit_envelope(q, a.below_decomposition.interference, norm, ExtractionMethod::SingleEnergy,
                                    a.fft.depth_nm, EnvelopeFitOptions{opts.fit.initial_sigma_nm,
                                                                       opts.fit.max_sigma_nm, opts.fit.level, false});
      const auto model = envelope_model(q, Eigen::Vector4d(own.amplitude.value, own.sigma_nm.value,
                                                           own.depth_nm.value, own.phase_rad.value));
      std::vector<double> high(q.size());
      for (std::size_t i = 0; i < q.size(); ++i) high[i] = norm[i] * model[static_cast<Eigen::Index>(i)];
      a.below_decomposition = split_frequencies(a.below, cutoff, a.fft.depth_nm, high);
      for (std::size_t i = 0; i < q.size(); ++i) norm[i] = std::sqrt(a.below_decomposition.low[i]);
    } catch (const Error&) {
      break;
    }
  }

  a.result = fit_envelope(q, a.difference.y, norm, ExtractionMethod::ResonantDifference, a.fft.depth_nm, opts.fit);
  a.signal.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) a.signal[i] = a.difference.y[i] / norm[i];
  const auto model = envelope_model(q, Eigen::Vector4d(a.result.amplitude.value, a.result.sigma_nm.value,
                                                       a.result.depth_nm.value, a.result.phase_rad.value));
  a.model.assign(model.data(), model.data() + model.size());
  ReconstructionOptions ro;
  ro.min_depth_nm = cutoff;
  a.profile = reconstruct_profile(q, a.difference.y, norm, ro);

  const double d = a.result.depth_nm.value;
  a.measured_phase_shift_rad =
      wrap_pi(phase_at_depth(a.above, d, opts.detection) - phase_at_depth(a.below, d, opts.detection));
  return a;
}

ContrastMeasurement resonance_contrast(const EnergyScan& scan, ContrastDefinition def, const ContrastWindows& w) {
  scan.validate();
  auto collect = [&](double lo, double hi) {
    std::vector<double> v;
    for (std::size_t i = 0; i < scan.energy_ev.size(); ++i) {
      if (scan.energy_ev[i] >= lo && scan.energy_ev[i] <= hi) v.push_back(scan.r[i]);
    }
    if (v.empty()) {
      std::ostringstream msg;
      msg << "energy scan does not cover " << lo << "-" << hi << " eV";
      throw Error(ErrorKind::Coverage, msg.str());
    }
    return v;
  };
  auto stats = [](const std::vector<double>& v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return std::pair{m, sd};
  };
  const auto pre = collect(w.pre_lo, w.pre_hi);
  const auto [m_pre, sd_pre] = stats(pre);
  if (!(m_pre > 0.0)) throw Error(ErrorKind::Domain, "below-edge reflectivity mean is not positive");
  const double se_pre = sd_pre / std::sqrt(static_cast<double>(pre.size()));

  ContrastMeasurement out;
  if (def == ContrastDefinition::EdgeSpan) {
    const auto span = collect(w.span_lo, w.span_hi);
    const auto [lo, hi] = std::minmax_element(span.begin(), span.end());
    out.value = (*hi - *lo) / m_pre;
    out.sigma = std::hypot(std::sqrt(2.0) * sd_pre / m_pre, out.value * se_pre / m_pre);
  } else {
    const auto post = collect(w.post_lo, w.post_hi);
    const auto [m_post, sd_post] = stats(post);
    const double se_post = sd_post / std::sqrt(static_cast<double>(post.size()));
    out.value = (m_post - m_pre) / m_pre;
    out.sigma = std::hypot(se_post, m_post / m_pre * se_pre) / m_pre;
  }
  return out;
}

double simulated_contrast(const LayerStack& stack, const TableSet& tables, double depth_nm, double delta_nm,
                          double n2d_per_nm2, const std::string& dopant, const std::string& host, double theta_deg,
                          const ResonanceOptions& opts) {
  const auto delta = gaussian_delta_from_fwhm(depth_nm, delta_nm, n2d_per_nm2, dopant, host);
  const auto steps = static_cast<std::size_t>(std::llround((opts.energy_hi_ev - opts.energy_lo_ev) / opts.energy_step_ev));
  const auto energies = linspace(opts.energy_lo_ev, opts.energy_hi_ev, steps + 1);
  const auto scan = simulate_energy_scan(stack, &delta, tables, theta_deg, energies, opts.solver);
  return resonance_contrast(scan, opts.definition, opts.windows).value;
}

ThicknessResult thickness_from_resonance(double measured, double measured_sigma, double n2d_per_nm2,
                                         double depth_nm, const LayerStack& stack, double theta_deg,
                                         const std::string& dopant, const std::string& host, const TableSet& tables,
                                         const ResonanceOptions& opts) {
  if (!(n2d_per_nm2 > 0.0)) throw Error(ErrorKind::Domain, "N2D must be positive");
  if (!(depth_nm > 0.0)) throw Error(ErrorKind::Domain, "layer depth must be positive");
  if (!(measured > 0.0)) throw Error(ErrorKind::Domain, "measured contrast must be positive");
  if (!(measured_sigma >= 0.0)) throw Error(ErrorKind::Domain, "measurement sigma must be >= 0");
  if (opts.delta_points < 2 || !(opts.delta_max_nm > opts.delta_min_nm && opts.delta_min_nm > 0.0)) {
    throw Error(ErrorKind::Domain, "invalid thickness sweep");
  }

  ThicknessResult res;
  const double l0 = std::log(opts.delta_min_nm);
  const double l1 = std::log(opts.delta_max_nm);
  for (std::size_t k = 0; k < opts.delta_points; ++k) {
    const double delta = std::exp(l0 + (l1 - l0) * static_cast<double>(k) / static_cast<double>(opts.delta_points - 1));
    res.sweep_delta_nm.push_back(delta);
    res.sweep_contrast.push_back(
        simulated_contrast(stack, tables, depth_nm, delta, n2d_per_nm2, dopant, host, theta_deg, opts));
  }

  std::size_t branch = 1;
  while (branch < res.sweep_contrast.size() && res.sweep_contrast[branch] < res.sweep_contrast[branch - 1]) ++branch;
  res.monotone_points = branch;
  if (branch < 2) throw Error(ErrorKind::OutOfBand, "simulated contrast does not decrease with thickness");

  std::vector<double> x(branch), y(branch);
  for (std::size_t k = 0; k < branch; ++k) {
    x[k] = std::log(res.sweep_delta_nm[k]);
    y[k] = res.sweep_contrast[k];
  }
  res.band_max = y.front();
  res.band_min = y.back();
  const Pchip interp(x, y);

  auto invert = [&](double v) -> std::optional<double> {
    if (v > res.band_max || v < res.band_min) return std::nullopt;
    double a = x.front(), b = x.back();
    for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
      const double mid = 0.5 * (a + b);
      (interp(mid) > v ? a : b) = mid;
    }
    return std::exp(0.5 * (a + b));
  };

  const auto centre = invert(measured);
  if (!centre) {
    std::ostringstream msg;
    msg << "measured contrast " << measured << " outside the achievable band [" << res.band_min << ", "
        << res.band_max << "] for thickness " << res.sweep_delta_nm.front() << "-" << res.sweep_delta_nm[branch - 1]
        << " nm";
    throw Error(ErrorKind::OutOfBand, msg.str());
  }
  res.delta_nm = *centre;
  res.n3d_per_nm3 = n2d_per_nm2 / res.delta_nm;

  const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * opts.level);
  const auto thin = invert(measured + z * measured_sigma);
  const auto thick = invert(measured - z * measured_sigma);
  res.ci_lower_nm = thin.value_or(res.sweep_delta_nm.front());
  res.ci_lower_clipped = !thin;
  res.ci_upper_nm = thick.value_or(res.sweep_delta_nm[branch - 1]);
  res.ci_upper_clipped = !thick;
  return res;
}

}  // namespace rcxr
