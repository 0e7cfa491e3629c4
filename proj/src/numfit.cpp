#include "rcxr/numfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <fftw3.h>

#include "rcxr/constants.hpp"
#include "rcxr/error.hpp"

namespace rcxr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<cplx> run_fftw(std::span<const cplx> x, int sign) {
  const int n = static_cast<int>(x.size());
  std::vector<cplx> in(x.begin(), x.end());
  std::vector<cplx> out(x.size());
  if (n == 0) return out;
  fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                                    reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  return out;
}

Eigen::VectorXd clamp_to(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  return cod.pseudoInverse();
}

}  // namespace

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw Error(ErrorKind::Domain, "uniform grid needs n >= 2 and hi > lo");
  std::vector<double> x(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) x[k] = lo + step * static_cast<double>(k);
  x.back() = hi;
  return x;
}

bool is_uniform(std::span<const double> x, double rel_tol) {
  if (x.size() < 2) return false;
  const double step = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  if (!(step > 0.0)) return false;
  const double tol = rel_tol * (x.back() - x.front());
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (std::abs(x[k] - (x.front() + step * static_cast<double>(k))) > tol) return false;
  }
  return true;
}

std::vector<double> resample_linear(std::span<const double> x, std::span<const double> y,
                                    std::span<const double> x_new) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::Structure, "resample: need matching x, y (n >= 2)");
  std::vector<double> out(x_new.size());
  for (std::size_t k = 0; k < x_new.size(); ++k) {
    const double v = x_new[k];
    if (v < x.front() || v > x.back()) throw Error(ErrorKind::Range, "resample: target outside data range");
    auto it = std::upper_bound(x.begin(), x.end(), v);
    std::size_t hi = static_cast<std::size_t>(it - x.begin());
    if (hi == x.size()) hi = x.size() - 1;
    const std::size_t lo = hi - 1;
    const double t = (v - x[lo]) / (x[hi] - x[lo]);
    out[k] = y[lo] + t * (y[hi] - y[lo]);
  }
  return out;
}

std::vector<cplx> fft(std::span<const cplx> x) { return run_fftw(x, FFTW_FORWARD); }

std::vector<cplx> ifft(std::span<const cplx> x) {
  auto out = run_fftw(x, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : out) v *= scale;
  return out;
}

Spectrum windowed_fft(std::span<const double> q, std::span<const double> y, Taper taper, std::size_t pad_factor) {
  if (q.size() != y.size()) throw Error(ErrorKind::Structure, "fft: grid and values differ in length");
  if (!is_uniform(q)) throw Error(ErrorKind::Sampling, "fft: grid is not uniform");
  if (pad_factor < 1) throw Error(ErrorKind::Domain, "fft: pad factor must be >= 1");
  const std::size_t n = y.size();
  const std::size_t m = n * pad_factor;
  std::vector<cplx> buf(m, cplx{0.0, 0.0});
  double wsum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double w = 1.0;
    if (taper == Taper::Hann) w = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(k) / static_cast<double>(n - 1)));
    wsum += w;
    buf[k] = w * y[k];
  }
  auto full = fft(buf);
  Spectrum s;
  s.samples = n;
  s.pad_factor = pad_factor;
  s.dq = (q.back() - q.front()) / static_cast<double>(n - 1);
  s.window_sum = wsum;
  const std::size_t half = m / 2 + 1;
  s.depth_nm.resize(half);
  s.value.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(half));
  for (std::size_t k = 0; k < half; ++k) {
    s.depth_nm[k] = 2.0 * kPi * static_cast<double>(k) / (static_cast<double>(m) * s.dq);
  }
  return s;
}

double quadratic_peak_offset(double left, double centre, double right) {
  const double denom = left - 2.0 * centre + right;
  if (denom == 0.0) return 0.0;
  return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

void FitProblem::normalize() {
  const auto p = initial.size();
  if (p == 0) throw Error(ErrorKind::Domain, "fit: no parameters");
  if (lower.size() == 0) lower = Eigen::VectorXd::Constant(p, -kInf);
  if (upper.size() == 0) upper = Eigen::VectorXd::Constant(p, kInf);
  if (lower.size() != p || upper.size() != p) throw Error(ErrorKind::Structure, "fit: bound vectors mis-sized");
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(lower[j] <= upper[j])) throw Error(ErrorKind::Domain, "fit: lower bound above upper bound");
  }
  if (weights.size() > 0 && (weights.array() < 0.0).any()) throw Error(ErrorKind::Domain, "fit: negative weight");
  initial = clamp_to(initial, lower, upper);
}

Eigen::VectorXd FitProblem::weighted_residual(const Eigen::VectorXd& p) const {
  Eigen::VectorXd r = residual(p);
  if (weights.size() > 0) {
    if (weights.size() != r.size()) throw Error(ErrorKind::Structure, "fit: weights and residual differ in length");
    r = r.cwiseProduct(weights);
  }
  return r;
}

Eigen::MatrixXd FitProblem::weighted_jacobian(const Eigen::VectorXd& p) const {
  Eigen::MatrixXd j = jacobian ? jacobian(p) : finite_difference_jacobian(residual, p);
  if (weights.size() > 0) j = weights.asDiagonal() * j;
  return j;
}

Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& f, const Eigen::VectorXd& p, double rel_step) {
  const Eigen::VectorXd r0 = f(p);
  Eigen::MatrixXd jac(r0.size(), p.size());
  Eigen::VectorXd x = p;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double h = rel_step * (p[j] != 0.0 ? std::abs(p[j]) : 1.0);
    x[j] = p[j] + h;
    const Eigen::VectorXd plus = f(x);
    x[j] = p[j] - h;
    const Eigen::VectorXd minus = f(x);
    x[j] = p[j];
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

FitOutcome levenberg_marquardt(FitProblem problem) {
  problem.normalize();
  const auto& tol = problem.tolerances;
  const Eigen::VectorXd& lo = problem.lower;
  const Eigen::VectorXd& hi = problem.upper;

  Eigen::VectorXd x = problem.initial;
  Eigen::VectorXd r = problem.weighted_residual(x);
  if (!r.allFinite()) throw Error(ErrorKind::Domain, "fit: residual not finite at the start point");
  const auto n = r.size();
  const auto p = x.size();

  Eigen::MatrixXd jac = problem.weighted_jacobian(x);
  Eigen::MatrixXd a = jac.transpose() * jac;
  Eigen::VectorXd g = jac.transpose() * r;
  double cost = 0.5 * r.squaredNorm();
  double mu = 1e-6;
  double nu = 2.0;

  FitOutcome out;
  int iter = 0;
  for (; iter < tol.max_iterations; ++iter) {
    Eigen::VectorXd pg = g;
    for (Eigen::Index j = 0; j < p; ++j) {
      if ((x[j] <= lo[j] && g[j] > 0.0) || (x[j] >= hi[j] && g[j] < 0.0)) pg[j] = 0.0;
    }
    if (pg.lpNorm<Eigen::Infinity>() <= tol.gradient) {
      out.converged = true;
      out.message = "gradient tolerance reached";
      break;
    }
    Eigen::VectorXd d = a.diagonal().cwiseMax(1e-12 * a.diagonal().maxCoeff()).cwiseMax(1e-300);
    Eigen::MatrixXd damped = a;
    damped.diagonal() += mu * d;
    Eigen::VectorXd h = damped.ldlt().solve(-g);
    Eigen::VectorXd x_new = clamp_to(x + h, lo, hi);
    h = x_new - x;
    if (h.norm() <= tol.step * (x.norm() + tol.step)) {
      out.converged = true;
      out.message = "step tolerance reached";
      break;
    }
    Eigen::VectorXd r_new = problem.weighted_residual(x_new);
    const double cost_new = r_new.allFinite() ? 0.5 * r_new.squaredNorm() : kInf;
    const double predicted = -h.dot(g) - 0.5 * h.dot(a * h);
    const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : -1.0;
    if (rho > 0.0) {
      x = x_new;
      r = r_new;
      cost = cost_new;
      jac = problem.weighted_jacobian(x);
      a = jac.transpose() * jac;
      g = jac.transpose() * r;
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
    } else {
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu) || nu > 1e30) {
        // No representable step reduces the cost: stationary to machine precision.
        out.converged = true;
        out.message = "cost cannot be reduced further";
        break;
      }
    }
  }
  if (iter == tol.max_iterations) out.message = "maximum iterations reached";

  out.parameters = x;
  out.iterations = iter;
  out.rss = r.squaredNorm();
  out.residual_norm = r.norm();
  out.dof = static_cast<int>(n - p);
  if (out.dof > 0) {
    const double s2 = out.rss / static_cast<double>(out.dof);
    out.covariance = s2 * pseudo_inverse(a);
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  } else {
    out.covariance = Eigen::MatrixXd::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

double t_quantile(double level, int dof) {
  if (dof <= 0) return std::numeric_limits<double>::quiet_NaN();
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.5 + 0.5 * level);
}

Interval covariance_interval(const FitProblem& problem, const FitOutcome& outcome, std::size_t index, double level) {
  const auto k = static_cast<Eigen::Index>(index);
  const double est = outcome.parameters[k];
  const double se = std::sqrt(std::max(outcome.covariance(k, k), 0.0));
  const double half = t_quantile(level, outcome.dof) * se;
  Interval iv;
  iv.from_covariance = true;
  iv.lower = est - half;
  iv.upper = est + half;
  const double lo = problem.lower.size() ? problem.lower[k] : -kInf;
  const double hi = problem.upper.size() ? problem.upper[k] : kInf;
  if (iv.lower <= lo) {
    iv.lower = lo;
    iv.lower_at_bound = true;
  }
  if (iv.upper >= hi) iv.upper = hi;
  if (!std::isfinite(iv.upper)) iv.upper_unbounded = true;
  return iv;
}

Interval profile_likelihood_ci(FitProblem problem, const FitOutcome& outcome, std::size_t index, double level) {
  problem.normalize();
  const auto p = outcome.parameters.size();
  const auto k = static_cast<Eigen::Index>(index);
  if (k >= p) throw Error(ErrorKind::Domain, "profile: parameter index out of range");
  if (outcome.dof <= 0) return covariance_interval(problem, outcome, index, level);

  boost::math::fisher_f fdist(1.0, static_cast<double>(outcome.dof));
  const double fq = boost::math::quantile(fdist, level);
  const double threshold = outcome.rss * (1.0 + fq / static_cast<double>(outcome.dof));
  const double est = outcome.parameters[k];

  auto expand = [&](const Eigen::VectorXd& free, double v) {
    Eigen::VectorXd full(p);
    for (Eigen::Index j = 0, m = 0; j < p; ++j) full[j] = j == k ? v : free[m++];
    return full;
  };
  auto reduce = [&](const Eigen::VectorXd& vec) {
    Eigen::VectorXd sub(p - 1);
    for (Eigen::Index j = 0, m = 0; j < p; ++j) {
      if (j != k) sub[m++] = vec[j];
    }
    return sub;
  };

  Eigen::VectorXd warm = reduce(outcome.parameters);
  auto profiled_rss = [&](double v) {
    if (p == 1) {
      Eigen::VectorXd single(1);
      single[0] = v;
      return problem.weighted_residual(single).squaredNorm();
    }
    FitProblem sub;
    sub.residual = [&, v](const Eigen::VectorXd& free) { return problem.residual(expand(free, v)); };
    sub.initial = warm;
    sub.lower = reduce(problem.lower);
    sub.upper = reduce(problem.upper);
    sub.weights = problem.weights;
    sub.tolerances = problem.tolerances;
    const FitOutcome fit = levenberg_marquardt(sub);
    warm = fit.parameters;
    return fit.rss;
  };

  const double se0 = std::sqrt(std::max(outcome.covariance(k, k), 0.0));
  const double base_step = std::isfinite(se0) && se0 > 0.0 ? se0 : 0.05 * std::max(std::abs(est), 1e-3);

  Interval iv;
  try {
    for (int dir : {-1, 1}) {
      const double bound = dir < 0 ? problem.lower[k] : problem.upper[k];
      warm = reduce(outcome.parameters);
      double inside = est;
      double step = base_step;
      double edge = std::numeric_limits<double>::quiet_NaN();
      bool crossed = false;
      for (int expansions = 0; expansions < 40; ++expansions) {
        double v = est + dir * step;
        bool at_bound = false;
        if ((dir < 0 && v <= bound) || (dir > 0 && v >= bound)) {
          v = bound;
          at_bound = true;
        }
        if (profiled_rss(v) > threshold) {
          double a = inside, b = v;
          for (int it = 0; it < 40 && std::abs(b - a) > 1e-6 * base_step; ++it) {
            const double mid = 0.5 * (a + b);
            (profiled_rss(mid) > threshold ? b : a) = mid;
          }
          edge = 0.5 * (a + b);
          crossed = true;
          break;
        }
        inside = v;
        if (at_bound) {
          edge = v;
          break;
        }
        step *= 1.6;
      }
      if (dir < 0) {
        iv.lower = crossed ? edge : (std::isnan(edge) ? -kInf : edge);
        iv.lower_at_bound = !crossed;
      } else {
        iv.upper = crossed ? edge : kInf;
        iv.upper_unbounded = !crossed;
        if (!crossed && !std::isnan(edge)) iv.upper = edge;
      }
    }
  } catch (const Error&) {
    return covariance_interval(problem, outcome, index, level);
  }
  iv.lower = std::min(iv.lower, est);
  iv.upper = std::max(iv.upper, est);
  return iv;
}

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw Error(ErrorKind::Structure, "pchip: need >= 2 matching points");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) throw Error(ErrorKind::Structure, "pchip: x must be strictly increasing");
  }
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  m_.assign(n, 0.0);
  if (n == 2) {
    m_[0] = m_[1] = delta[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) continue;
    const double w1 = 2.0 * h[i] + h[i - 1];
    const double w2 = h[i] + 2.0 * h[i - 1];
    m_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return m;
  };
  m_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  m_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

std::size_t Pchip::segment(double x) const {
  if (x < x_.front() || x > x_.back()) throw Error(ErrorKind::Range, "pchip: evaluation outside the data range");
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  if (i == 0) i = 1;
  if (i >= x_.size()) i = x_.size() - 1;
  return i - 1;
}

double Pchip::operator()(double x) const {
  const std::size_t i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * m_[i] + (-2 * t3 + 3 * t2) * y_[i + 1] +
         (t3 - t2) * h * m_[i + 1];
}

double Pchip::derivative(double x) const {
  const std::size_t i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * y_[i] + (-6 * t2 + 6 * t) * y_[i + 1]) / h + (3 * t2 - 4 * t + 1) * m_[i] +
         (3 * t2 - 2 * t) * m_[i + 1];
}

}  // namespace rcxr
