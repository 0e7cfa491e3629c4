#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcxr/constants.hpp"
#include "rcxr/forward.hpp"
#include "rcxr/numfit.hpp"

namespace rcxr {

struct QWindow {
  double lo = 1.5;
  double hi = 5.0;

  double span() const { return hi - lo; }
  /// Depth resolution 2 pi / (Q_hi - Q_lo).
  double resolution_nm() const { return 2.0 * kPi / span(); }
};

/// y = Q^2 R / (4 pi)^2 on a uniform grid; for a difference signal y holds
/// (R_above - R_below) Q^2 / (4 pi)^2 and reference_level the below-edge mean.
struct RescaledCurve {
  std::vector<double> q;
  std::vector<double> y;
  double energy_ev = 0.0;
  QWindow window;
  double reference_level = 0.0;  // mean of the single-energy y the signal is compared to

  double dq() const { return (q.back() - q.front()) / static_cast<double>(q.size() - 1); }
};

/// Linear resampling onto `points` uniform nodes spanning the window, then y = Q^2 R / (4 pi)^2.
/// points = 0 selects twice the number of raw samples inside the window (at least 64).
RescaledCurve rescale(const ReflectivityCurve& curve, QWindow window, std::size_t points = 0);

struct DetectionOptions {
  std::size_t pad_factor = 8;
  int detrend_degree = 3;
  double peak_to_median = 3.0;
  double min_relative_amplitude = 0.005;
  double min_depth_resolutions = 3.0;  // search starts at this many 2 pi / span
  /// Difference mode: oscillation at d relative to the below-edge curve's own oscillation at d.
  double min_resonant_ratio = 0.25;
};

struct DepthEstimate {
  double depth_nm = 0.0;
  double phase_rad = 0.0;  // phi in y ~ a cos(Q d - phi), in [0, 2 pi)
  double peak_to_median = 0.0;
  double relative_amplitude = 0.0;  // fitted cosine amplitude over the reference level
  bool detected = false;
  Spectrum spectrum;  // of the detrended, Hann-tapered signal
};

/// Spectrum analysis without the detection verdict enforced.
DepthEstimate depth_spectrum(const RescaledCurve& rc, const DetectionOptions& opts = {});

/// Throws NoLayerDetected (with spectrum diagnostics in the message) when the
/// peak fails the detection floor.
DepthEstimate fft_depth_phase(const RescaledCurve& rc, const DetectionOptions& opts = {});

/// phi of the component a cos(Q d - phi) at a prescribed depth, referenced to the window centre.
double phase_at_depth(const RescaledCurve& rc, double depth_nm, const DetectionOptions& opts = {});

struct SpectralDecomposition {
  std::vector<double> q;
  std::vector<double> low;           // |F|^2_LF estimate
  std::vector<double> interference;  // y - low
  double cutoff_nm = 0.0;
};

/// Low-pass y at the cutoff depth. When `high_estimate` is given it is removed
/// before filtering (deflation); `depth_hint` enables the cutoff < d check.
SpectralDecomposition split_frequencies(const RescaledCurve& rc, double cutoff_nm,
                                        std::optional<double> depth_hint = std::nullopt,
                                        std::span<const double> high_estimate = {});

/// Low-pass of Q^2 g (mirror-extended, raised-cosine taper of 10% width), divided by Q^2.
std::vector<double> lowpass_q2(std::span<const double> q, std::span<const double> g, double cutoff_nm,
                               double taper_fraction = 0.1);

/// (R_above - R_below) Q^2 / (4 pi)^2 on the shared grid; grids must coincide (Alignment otherwise).
RescaledCurve resonant_difference(const RescaledCurve& above, const RescaledCurve& below);
RescaledCurve resonant_difference(const ReflectivityCurve& above, const ReflectivityCurve& below, QWindow window,
                                  std::size_t points = 0);

enum class ExtractionMethod { SingleEnergy, ResonantDifference, ResonanceSpectrum };
const char* to_string(ExtractionMethod m);

struct Estimate {
  double value = 0.0;
  Interval ci;
};

struct ExtractionResult {
  ExtractionMethod method = ExtractionMethod::SingleEnergy;
  Estimate depth_nm;
  Estimate sigma_nm;
  Estimate fwhm_nm;
  Estimate amplitude;  // 2 r0 N2D |df|, 1/nm
  Estimate phase_rad;
  /// Thickness is only bounded from above (sigma interval reaches 0).
  bool thickness_upper_bound_only = false;
  bool converged = false;
  int iterations = 0;
  double rss = 0.0;
  double relative_residual = 0.0;  // rms(residual) / rms(signal)
  QWindow window;
  std::size_t points = 0;
};

struct EnvelopeFitOptions {
  double initial_sigma_nm = 0.3;
  double max_sigma_nm = 5.0;
  double level = 0.95;
  bool profile_sigma = true;
};

/// Fit A exp(-(Q sigma)^2 / 2) cos(Q d - phi) to signal / normalizer.
ExtractionResult fit_envelope(std::span<const double> q, std::span<const double> signal,
                              std::span<const double> normalizer, ExtractionMethod mode, double initial_depth_nm,
                              const EnvelopeFitOptions& opts = {});

/// Model and analytic Jacobian of the envelope, parameters (A, sigma, d, phi).
Eigen::VectorXd envelope_model(std::span<const double> q, const Eigen::VectorXd& p);
Eigen::MatrixXd envelope_jacobian(std::span<const double> q, const Eigen::VectorXd& p);

struct ReconstructedProfile {
  std::vector<double> z_nm;
  std::vector<double> value;  // real part, 1/nm^2
  double resolution_nm = 0.0;
  double peak_depth_nm = 0.0;
  double peak_value = 0.0;
};

struct ReconstructionOptions {
  double z_max_nm = 0.0;      // 0: min(pi / dQ, 150 nm)
  double min_depth_nm = 0.0;  // peak search floor; 0: 3 resolution elements
  std::size_t pad_factor = 8;
};

/// Inverse transform of interference / (2 sqrt(F_LF^2)) over the window.
ReconstructedProfile reconstruct_profile(std::span<const double> q, std::span<const double> interference,
                                         std::span<const double> normalizer, const ReconstructionOptions& opts = {});

struct AnalysisOptions {
  QWindow window;
  std::size_t points = 0;
  std::optional<double> cutoff_nm;  // default d / 2 from the FFT estimate
  int deflation_passes = 1;
  DetectionOptions detection;
  EnvelopeFitOptions fit;
};

struct SingleEnergyAnalysis {
  RescaledCurve rescaled;
  DepthEstimate fft;
  SpectralDecomposition decomposition;
  ExtractionResult result;
  ReconstructedProfile profile;
  std::vector<double> signal;  // I / sqrt(F_LF^2)
  std::vector<double> model;
};

SingleEnergyAnalysis analyze_single_energy(const ReflectivityCurve& curve, const AnalysisOptions& opts = {});

struct DifferenceAnalysis {
  RescaledCurve below;
  RescaledCurve above;
  RescaledCurve difference;
  DepthEstimate fft;
  SpectralDecomposition below_decomposition;
  ExtractionResult result;
  ReconstructedProfile profile;
  std::vector<double> signal;  // dR / r_F^2 / sqrt(F_LF^2 below)
  std::vector<double> model;
  /// phi(above) - phi(below) of the single-energy oscillations at the common depth, wrapped to (-pi, pi].
  double measured_phase_shift_rad = 0.0;
  /// Spectral magnitude of the difference at d over that of the below-edge curve.
  double resonant_ratio = 0.0;
};

DifferenceAnalysis analyze_difference(const ReflectivityCurve& below, const ReflectivityCurve& above,
                                      const AnalysisOptions& opts = {});

enum class ContrastDefinition { EdgeSpan, WindowMeans };
const char* to_string(ContrastDefinition c);
ContrastDefinition contrast_from_string(const std::string& s);

struct ContrastWindows {
  double pre_lo = 1312.0, pre_hi = 1322.0;     // below-edge reference
  double post_lo = 1330.0, post_hi = 1340.0;   // above-edge mean (window-means)
  double span_lo = 1320.0, span_hi = 1340.0;   // max - min range (edge-span)
};

struct ContrastMeasurement {
  double value = 0.0;
  double sigma = 0.0;  // from the window standard errors
};

/// Relative reflection change of an energy scan across the edge.
ContrastMeasurement resonance_contrast(const EnergyScan& scan, ContrastDefinition def,
                                       const ContrastWindows& w = {});

struct ResonanceOptions {
  double delta_min_nm = 0.2;
  double delta_max_nm = 5.0;
  std::size_t delta_points = 25;
  double energy_lo_ev = 1310.0;
  double energy_hi_ev = 1342.0;
  double energy_step_ev = 0.25;
  ContrastDefinition definition = ContrastDefinition::EdgeSpan;
  ContrastWindows windows;
  double level = 0.95;
  DynamicalOptions solver;
};

struct ThicknessResult {
  double delta_nm = 0.0;
  double ci_lower_nm = 0.0;
  double ci_upper_nm = 0.0;
  bool ci_lower_clipped = false;  // interval runs past the thin end of the sweep
  bool ci_upper_clipped = false;  // interval runs past the thick end of the monotone branch
  double n3d_per_nm3 = 0.0;
  double band_min = 0.0;  // achievable contrast on the monotone branch
  double band_max = 0.0;
  std::vector<double> sweep_delta_nm;
  std::vector<double> sweep_contrast;
  std::size_t monotone_points = 0;
};

/// Simulated contrast of a Gaussian delta layer of FWHM delta at fixed N2D.
double simulated_contrast(const LayerStack& stack, const TableSet& tables, double depth_nm, double delta_nm,
                          double n2d_per_nm2, const std::string& dopant, const std::string& host, double theta_deg,
                          const ResonanceOptions& opts);

ThicknessResult thickness_from_resonance(double measured, double measured_sigma, double n2d_per_nm2,
                                         double depth_nm, const LayerStack& stack, double theta_deg,
                                         const std::string& dopant, const std::string& host, const TableSet& tables,
                                         const ResonanceOptions& opts = {});

}  // namespace rcxr
