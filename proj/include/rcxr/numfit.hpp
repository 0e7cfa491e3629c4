#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rcxr {

using cplx = std::complex<double>;

std::vector<double> uniform_grid(double lo, double hi, std::size_t n);
bool is_uniform(std::span<const double> x, double rel_tol = 1e-9);

/// Piecewise-linear resampling of (x, y) onto x_new. x strictly increasing;
/// every x_new must lie inside [x.front(), x.back()] (Range error otherwise).
std::vector<double> resample_linear(std::span<const double> x, std::span<const double> y,
                                    std::span<const double> x_new);

/// Unnormalized forward DFT, sum_n x_n exp(-2 pi i k n / N).
std::vector<cplx> fft(std::span<const cplx> x);
/// Inverse of fft (includes the 1/N factor).
std::vector<cplx> ifft(std::span<const cplx> x);

enum class Taper { Rectangular, Hann };

/// One-sided spectrum of a real signal sampled at spacing dq (1/nm).
/// value[k] = sum_n w_n y_n exp(-i depth[k] n dq), depth[k] = 2 pi k / (N_pad dq).
struct Spectrum {
  std::vector<double> depth_nm;
  std::vector<cplx> value;
  std::size_t samples = 0;  // N before padding
  std::size_t pad_factor = 1;
  double dq = 0.0;
  double window_sum = 0.0;  // sum of taper weights, for amplitude normalization
};

/// Grid must be uniform (Sampling error otherwise); pad_factor >= 1.
Spectrum windowed_fft(std::span<const double> q, std::span<const double> y, Taper taper = Taper::Hann,
                      std::size_t pad_factor = 8);

/// Vertex of the parabola through (k-1, k, k+1); returns the fractional offset in [-0.5, 0.5].
double quadratic_peak_offset(double left, double centre, double right);

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct FitTolerances {
  double gradient = 1e-8;
  double step = 1e-10;
  int max_iterations = 500;
};

/// Minimize sum_i (w_i r_i(p))^2 subject to lower <= p <= upper.
/// Empty weights mean unit weights. Bounds may be +-infinity.
struct FitProblem {
  ResidualFn residual;
  JacobianFn jacobian;  // optional; central differences when empty
  Eigen::VectorXd initial;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd weights;
  FitTolerances tolerances;

  /// Fills missing bounds with +-infinity and validates shapes, weights and the start point.
  void normalize();
  Eigen::VectorXd weighted_residual(const Eigen::VectorXd& p) const;
  Eigen::MatrixXd weighted_jacobian(const Eigen::VectorXd& p) const;
};

struct FitOutcome {
  Eigen::VectorXd parameters;
  Eigen::MatrixXd covariance;  // s^2 (J^T J)^-1 with s^2 = RSS / (n - p)
  double rss = 0.0;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  int dof = 0;
  std::string message;
};

FitOutcome levenberg_marquardt(FitProblem problem);

/// Central differences with step rel_step * |p_j| (rel_step when p_j = 0).
Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& f, const Eigen::VectorXd& p,
                                           double rel_step = 1e-6);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_at_bound = false;   // one-sided: only an upper limit is informative
  bool upper_unbounded = false;  // profile never crossed the threshold above the estimate
  bool from_covariance = false;  // profiling failed; symmetric fallback

  bool contains(double v) const { return v >= lower && v <= upper; }
};

/// Symmetric Student-t interval from the covariance diagonal, clipped to the bounds.
Interval covariance_interval(const FitProblem& problem, const FitOutcome& outcome, std::size_t index,
                             double level = 0.95);

/// Profile-likelihood interval: the set of values where the re-minimized RSS
/// stays below RSS_min (1 + F(level; 1, n-p) / (n-p)).
Interval profile_likelihood_ci(FitProblem problem, const FitOutcome& outcome, std::size_t index,
                               double level = 0.95);

/// Two-sided Student-t quantile for the given level and degrees of freedom.
double t_quantile(double level, int dof);

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
class Pchip {
 public:
  Pchip(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }

 private:
  std::size_t segment(double x) const;
  std::vector<double> x_, y_, m_;
};

}  // namespace rcxr
