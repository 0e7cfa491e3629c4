#include <doctest.h>

#include <cmath>
#include <random>

#include "rcxr/constants.hpp"
#include "rcxr/error.hpp"
#include "rcxr/numfit.hpp"

using namespace rcxr;

TEST_CASE("FFT round trip and Parseval") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<cplx> x(257);
  for (auto& v : x) v = {g(rng), g(rng)};
  const auto X = fft(x);
  const auto back = ifft(X);
  double err = 0.0, norm = 0.0, energy_t = 0.0, energy_f = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    err = std::max(err, std::abs(back[i] - x[i]));
    norm = std::max(norm, std::abs(x[i]));
    energy_t += std::norm(x[i]);
    energy_f += std::norm(X[i]);
  }
  CHECK(err / norm < 1e-12);
  CHECK(std::abs(energy_f / static_cast<double>(x.size()) - energy_t) / energy_t < 1e-10);
}

TEST_CASE("FFT of a unit impulse is flat") {
  std::vector<cplx> x(8, 0.0);
  x[0] = 1.0;
  for (const auto& v : fft(x)) CHECK(std::abs(v - cplx(1.0, 0.0)) < 1e-15);
}

TEST_CASE("windowed spectrum locates a cosine") {
  const auto q = uniform_grid(1.5, 5.0, 400);
  std::vector<double> y(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) y[i] = std::cos(q[i] * 18.0);
  const auto s = windowed_fft(q, y, Taper::Hann, 8);
  std::size_t best = 1;
  for (std::size_t k = 1; k < s.value.size(); ++k) {
    if (std::abs(s.value[k]) > std::abs(s.value[best])) best = k;
  }
  const double frac = quadratic_peak_offset(std::abs(s.value[best - 1]), std::abs(s.value[best]),
                                            std::abs(s.value[best + 1]));
  const double depth = s.depth_nm[best] + frac * (s.depth_nm[1] - s.depth_nm[0]);
  CHECK(depth == doctest::Approx(18.0).epsilon(0.01));

  std::vector<double> uneven = q;
  uneven[10] += 1e-3;
  CHECK_THROWS_AS(windowed_fft(uneven, y), Error);
}

TEST_CASE("linear resampling") {
  const std::vector<double> x{0.0, 1.0, 2.0};
  const std::vector<double> y{0.0, 2.0, 0.0};
  const std::vector<double> xn{0.5, 1.5, 2.0};
  const auto r = resample_linear(x, y, xn);
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[1] == doctest::Approx(1.0));
  CHECK(r[2] == doctest::Approx(0.0));
  const std::vector<double> out{2.5};
  CHECK_THROWS_AS(resample_linear(x, y, out), Error);
  CHECK(is_uniform(uniform_grid(0.0, 1.0, 11)));
}

namespace {

const std::vector<double> kX = [] {
  std::vector<double> x(60);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.1 * static_cast<double>(i);
  return x;
}();

Eigen::VectorXd exp_model(const Eigen::VectorXd& p) {
  Eigen::VectorXd m(kX.size());
  for (std::size_t i = 0; i < kX.size(); ++i) m[i] = p[0] * std::exp(-p[1] * kX[i]) + p[2];
  return m;
}

FitProblem exp_problem(const Eigen::VectorXd& data) {
  FitProblem p;
  p.residual = [data](const Eigen::VectorXd& x) -> Eigen::VectorXd { return exp_model(x) - data; };
  p.initial = Eigen::Vector3d(1.0, 1.0, 0.0);
  return p;
}

}  // namespace

TEST_CASE("Levenberg-Marquardt recovers an exponential") {
  const Eigen::Vector3d truth(2.5, 0.7, 0.3);
  Eigen::VectorXd data = exp_model(truth);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 0.01);
  for (auto& v : data) v += g(rng);
  auto problem = exp_problem(data);
  const auto out = levenberg_marquardt(problem);
  CHECK(out.converged);
  CHECK(out.dof == 57);
  for (int k = 0; k < 3; ++k) CHECK(out.parameters[k] == doctest::Approx(truth[k]).epsilon(0.05));
  problem.normalize();
  const auto ci = covariance_interval(problem, out, 1);
  CHECK(ci.contains(out.parameters[1]));
  const auto prof = profile_likelihood_ci(problem, out, 1);
  CHECK(prof.contains(out.parameters[1]));
  CHECK(prof.upper - prof.lower == doctest::Approx(ci.upper - ci.lower).epsilon(0.2));
}

TEST_CASE("bounds are respected and reported") {
  const Eigen::Vector3d truth(2.5, 0.7, 0.3);
  auto problem = exp_problem(exp_model(truth));
  problem.lower = Eigen::Vector3d(0.0, 0.0, 0.5);
  problem.upper = Eigen::Vector3d(10.0, 10.0, 10.0);
  problem.initial = Eigen::Vector3d(1.0, 1.0, 0.6);
  const auto out = levenberg_marquardt(problem);
  CHECK(out.parameters[2] == doctest::Approx(0.5));
  auto bad = exp_problem(exp_model(truth));
  bad.lower = Eigen::Vector3d(2.0, 0.0, 0.0);
  bad.upper = Eigen::Vector3d(1.0, 10.0, 10.0);
  CHECK_THROWS_AS(levenberg_marquardt(bad), Error);
}

TEST_CASE("finite-difference Jacobian matches the analytic one") {
  const Eigen::Vector3d p(1.7, 0.4, -0.2);
  const auto fd = finite_difference_jacobian([](const Eigen::VectorXd& x) { return exp_model(x); }, p);
  Eigen::MatrixXd exact(kX.size(), 3);
  for (std::size_t i = 0; i < kX.size(); ++i) {
    const double e = std::exp(-p[1] * kX[i]);
    exact(i, 0) = e;
    exact(i, 1) = -p[0] * kX[i] * e;
    exact(i, 2) = 1.0;
  }
  CHECK((fd - exact).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("t quantile") {
  CHECK(t_quantile(0.95, 10) == doctest::Approx(2.228).epsilon(1e-3));
  CHECK(t_quantile(0.95, 100000) == doctest::Approx(1.96).epsilon(1e-3));
}

TEST_CASE("PCHIP is monotone and interpolating") {
  const Pchip p({0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 1.0, 4.0});
  CHECK(p(1.0) == doctest::Approx(1.0));
  for (double x = 1.0; x <= 2.0; x += 0.05) CHECK(p(x) == doctest::Approx(1.0));
  double prev = -1.0;
  for (double x = 0.0; x <= 3.0; x += 0.01) {
    CHECK(p(x) >= prev - 1e-12);
    prev = p(x);
  }
  CHECK(p.derivative(1.5) == doctest::Approx(0.0));
  CHECK_THROWS_AS(p(3.5), Error);
}
