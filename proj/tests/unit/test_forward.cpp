#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "rcxr/constants.hpp"
#include "rcxr/error.hpp"
#include "rcxr/forward.hpp"

using namespace rcxr;

namespace {

LayerStack bare_silicon(double roughness) {
  return LayerStack({Layer{"substrate", test::silicon(), std::nullopt, roughness}});
}

double max_relative_difference(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / std::abs(b[i]));
  return worst;
}

}  // namespace

TEST_CASE("Q and theta conversions are inverse") {
  const double q = q_from_theta(10.0, 1300.0);
  CHECK(q == doctest::Approx(4.0 * kPi * std::sin(10.0 * kPi / 180.0) / wavelength_nm(1300.0)));
  CHECK(theta_from_q(q, 1300.0) == doctest::Approx(10.0));
}

TEST_CASE("single interface matches the Fresnel formula") {
  const auto& t = test::tables();
  const double e = 1300.0;
  const auto stack = bare_silicon(0.0);
  const auto n = refractive_index(test::silicon(), t, e);
  for (double theta : {0.5, 1.0, 3.0, 10.0, 30.0}) {
    const double q = q_from_theta(theta, e);
    const auto slabs = build_slabs(stack, nullptr, t, e);
    const double r = recursive_reflectivity(slabs, e, q);
    const double f = fresnel_reflectance(cplx(1.0, 0.0), n, theta);
    CHECK(std::abs(r - f) <= 1e-12 * f);
  }
}

TEST_CASE("Nevot-Croce damping at Q = 5 with 0.1 nm roughness") {
  const auto& t = test::tables();
  const std::vector<double> q{5.0};
  const double smooth = dynamical_reflectivity(bare_silicon(0.0), nullptr, t, 1300.0, q).r[0];
  const double rough = dynamical_reflectivity(bare_silicon(0.1), nullptr, t, 1300.0, q).r[0];
  CHECK(std::abs(rough / smooth - std::exp(-0.25)) < 1e-3);
}

TEST_CASE("sharp interface decays as Q^-4") {
  const auto& t = test::tables();
  const std::vector<double> q{3.0, 5.0};
  const auto curve = dynamical_reflectivity(bare_silicon(0.0), nullptr, t, 1300.0, q);
  const double slope = std::log(curve.r[1] / curve.r[0]) / std::log(q[1] / q[0]);
  CHECK(std::abs(slope + 4.0) < 0.04);
}

TEST_CASE("Born agrees with the recursion away from total reflection") {
  const auto& t = test::tables();
  const auto stack = test::oxide_on_silicon();
  const auto delta = test::sample_delta();
  const auto q = linspace(3.0, 5.0, 201);
  for (double e : {1300.0, 1335.0}) {
    const auto profile = discretize(stack, &delta, t, e, default_depth_grid(stack, &delta), q.back());
    const auto born = born_reflectivity(profile, q);
    const auto dyn = dynamical_reflectivity(stack, &delta, t, e, q);
    CHECK(max_relative_difference(born.r, dyn.r) < 0.05);
    CHECK(born.reliable_from_q == doctest::Approx(kBornReliableFromQ));
  }
}

TEST_CASE("Born quadrature converges under grid refinement") {
  const auto& t = test::tables();
  const auto stack = test::oxide_on_silicon();
  const auto delta = test::sample_delta();
  const auto q = linspace(1.5, 5.0, 71);
  const auto coarse = born_reflectivity(
      discretize(stack, &delta, t, 1300.0, default_depth_grid(stack, &delta, 0.02), q.back()), q);
  const auto fine = born_reflectivity(
      discretize(stack, &delta, t, 1300.0, default_depth_grid(stack, &delta, 0.01), q.back()), q);
  CHECK(max_relative_difference(coarse.r, fine.r) < 1e-3);
}

TEST_CASE("Born preconditions") {
  const auto& t = test::tables();
  const auto stack = test::oxide_on_silicon();
  const auto profile = discretize(stack, nullptr, t, 1300.0, default_depth_grid(stack, nullptr));
  const std::vector<double> zero{0.0};
  try {
    born_reflectivity(profile, zero);
    FAIL("expected a singularity");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Singularity);
  }
  const std::vector<double> huge{1000.0};
  try {
    born_reflectivity(profile, huge);
    FAIL("expected a sampling error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Sampling);
  }
}

TEST_CASE("delta layer is cut into thin slabs") {
  const auto& t = test::tables();
  const auto stack = test::oxide_on_silicon();
  const auto delta = test::sample_delta();
  const auto slabs = build_slabs(stack, &delta, t, 1300.0);
  const double top = 18.1 - 4.0 * 0.9 / kFwhmPerSigma;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < slabs.size(); ++i) {
    if (total >= top - 1e-9) CHECK(slabs[i].thickness_nm <= 0.1 + 1e-12);
    total += slabs[i].thickness_nm;
  }
  CHECK(total == doctest::Approx(18.1 + 4.0 * 0.9 / kFwhmPerSigma));
  CHECK(slabs.back().thickness_nm == 0.0);
}

TEST_CASE("counting noise is reproducible and attaches uncertainties") {
  const auto& t = test::tables();
  const auto q = linspace(1.0, 5.0, 50);
  const auto curve = dynamical_reflectivity(test::oxide_on_silicon(), nullptr, t, 1300.0, q);
  const auto a = add_counting_noise(curve, 1e9, 7);
  const auto b = add_counting_noise(curve, 1e9, 7);
  const auto c = add_counting_noise(curve, 1e9, 8);
  CHECK(a.r == b.r);
  CHECK(a.r != c.r);
  REQUIRE(a.sigma_r.has_value());
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK((*a.sigma_r)[i] == doctest::Approx(std::sqrt(a.r[i] * 1e9) / 1e9));
  }
}

TEST_CASE("energy scan evaluates Q at fixed angle") {
  const auto& t = test::tables();
  const auto delta = test::sample_delta(18.0, 1.6, 2.77);
  const std::vector<double> e{1310.0, 1323.0, 1340.0};
  const auto scan = simulate_energy_scan(test::oxide_on_silicon(), &delta, t, 10.0, e);
  REQUIRE(scan.r.size() == 3);
  const auto slabs = build_slabs(test::oxide_on_silicon(), &delta, t, 1340.0);
  CHECK(scan.r[2] == doctest::Approx(recursive_reflectivity(slabs, 1340.0, q_from_theta(10.0, 1340.0))));
}
