#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "rcxr/constants.hpp"
#include "rcxr/error.hpp"
#include "rcxr/extract.hpp"

using namespace rcxr;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an rcxr::Error");
  return ErrorKind::Parse;
}

RescaledCurve cosine_curve(double depth, double phase, double rel_amp) {
  RescaledCurve rc;
  rc.q = uniform_grid(1.5, 5.0, 512);
  rc.y.resize(rc.q.size());
  for (std::size_t i = 0; i < rc.q.size(); ++i) rc.y[i] = 1.0 + rel_amp * std::cos(rc.q[i] * depth - phase);
  rc.window = QWindow{1.5, 5.0};
  return rc;
}

}  // namespace

TEST_CASE("rescale multiplies by Q^2 / (4 pi)^2 on a uniform grid") {
  ReflectivityCurve c;
  c.q = linspace(1.0, 6.0, 101);
  for (double q : c.q) c.r.push_back(1.0 / (q * q));
  c.energy_ev = 1300.0;
  const auto rc = rescale(c, QWindow{1.5, 5.0});
  CHECK(rc.q.size() == 2 * 71);
  CHECK(is_uniform(rc.q));
  for (double y : rc.y) CHECK(y == doctest::Approx(1.0 / (kFourPi * kFourPi)).epsilon(1e-3));
  CHECK(kind_of([&] { rescale(c, QWindow{0.5, 5.0}); }) == ErrorKind::Range);
  CHECK(kind_of([&] { rescale(c, QWindow{5.0, 1.5}); }) == ErrorKind::Range);
}

TEST_CASE("FFT depth and phase of a pure cosine") {
  const auto rc = cosine_curve(18.0, 1.0, 0.05);
  const auto est = fft_depth_phase(rc);
  CHECK(est.detected);
  CHECK(est.depth_nm == doctest::Approx(18.0).epsilon(0.01));
  CHECK(est.relative_amplitude == doctest::Approx(0.05).epsilon(0.1));
  const double expected = std::fmod(1.0, 2.0 * kPi);
  const double got = phase_at_depth(rc, 18.0);
  CHECK(std::abs(std::remainder(got - expected, 2.0 * kPi)) < 0.05);
}

TEST_CASE("flat signal is not detected") {
  const auto rc = cosine_curve(18.0, 0.0, 1e-6);
  CHECK(!depth_spectrum(rc).detected);
  CHECK(kind_of([&] { fft_depth_phase(rc); }) == ErrorKind::NoLayerDetected);
}

TEST_CASE("cutoff must sit below the layer depth") {
  auto rc = cosine_curve(18.0, 0.0, 0.05);
  for (std::size_t i = 0; i < rc.q.size(); ++i) rc.y[i] /= rc.q[i] * rc.q[i];
  CHECK(kind_of([&] { split_frequencies(rc, 20.0, 18.0); }) == ErrorKind::InvalidCutoff);
  CHECK(kind_of([&] { split_frequencies(rc, -1.0); }) == ErrorKind::InvalidCutoff);
  const auto d = split_frequencies(rc, 9.0, 18.0);
  double worst = 0.0;
  for (std::size_t i = d.q.size() / 4; i < 3 * d.q.size() / 4; ++i) worst = std::max(worst, std::abs(d.low[i] * d.q[i] * d.q[i] - 1.0));
  CHECK(worst < 0.01);
}

TEST_CASE("envelope Jacobian matches finite differences") {
  const auto q = uniform_grid(1.5, 5.0, 200);
  Eigen::Vector4d p(0.3, 0.4, 18.1, 1.2);
  const auto exact = envelope_jacobian(q, p);
  const auto fd = finite_difference_jacobian([&](const Eigen::VectorXd& x) { return envelope_model(q, x); }, p);
  CHECK((fd - exact).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("envelope fit recovers synthetic parameters") {
  const auto q = uniform_grid(1.5, 5.0, 300);
  Eigen::Vector4d p(0.02, 0.38, 18.1, 2.0);
  const auto m = envelope_model(q, p);
  std::vector<double> signal(m.data(), m.data() + m.size());
  const std::vector<double> ones(q.size(), 1.0);
  const auto r = fit_envelope(q, signal, ones, ExtractionMethod::SingleEnergy, 18.0);
  CHECK(r.converged);
  CHECK(r.depth_nm.value == doctest::Approx(18.1).epsilon(1e-4));
  CHECK(r.sigma_nm.value == doctest::Approx(0.38).epsilon(1e-3));
  CHECK(r.fwhm_nm.value == doctest::Approx(0.38 * kFwhmPerSigma).epsilon(1e-3));
  CHECK(r.amplitude.value == doctest::Approx(0.02).epsilon(1e-3));
  CHECK(r.fwhm_nm.ci.contains(r.fwhm_nm.value));
  const std::vector<double> zeros(q.size(), 0.0);
  CHECK(kind_of([&] { fit_envelope(q, zeros, ones, ExtractionMethod::SingleEnergy, 18.0); }) ==
        ErrorKind::FitFailed);
}

TEST_CASE("single-energy analysis of the sample stack") {
  const auto delta = test::sample_delta();
  const auto a = analyze_single_energy(test::simulate(&delta, 1300.0));
  CHECK(a.result.depth_nm.value == doctest::Approx(18.1).epsilon(0.3 / 18.1));
  CHECK(a.result.fwhm_nm.value == doctest::Approx(0.9).epsilon(0.25));
  CHECK(std::abs(a.profile.peak_depth_nm - 18.1) < 1.5);
  CHECK(a.decomposition.cutoff_nm == doctest::Approx(a.fft.depth_nm / 2.0));
  CHECK(to_string(a.result.method) == std::string("single-energy"));
}

TEST_CASE("host-only curve raises no-layer-detected") {
  const auto curve = test::simulate(nullptr, 1300.0);
  CHECK(kind_of([&] { analyze_single_energy(curve); }) == ErrorKind::NoLayerDetected);
}

TEST_CASE("difference requires a shared grid") {
  const auto a = cosine_curve(18.0, 0.0, 0.05);
  auto b = a;
  b.q.pop_back();
  b.y.pop_back();
  CHECK(kind_of([&] { resonant_difference(a, b); }) == ErrorKind::Alignment);
}

TEST_CASE("contrast definitions") {
  CHECK(contrast_from_string("edge_span") == ContrastDefinition::EdgeSpan);
  CHECK(contrast_from_string("window_means") == ContrastDefinition::WindowMeans);
  CHECK(kind_of([] { contrast_from_string("peak"); }) == ErrorKind::Schema);

  EnergyScan scan;
  scan.theta_deg = 10.0;
  for (double e = 1310.0; e <= 1342.0; e += 0.5) {
    scan.energy_ev.push_back(e);
    scan.r.push_back(e < 1325.0 ? 1.0 : 1.2);
  }
  const auto span = resonance_contrast(scan, ContrastDefinition::EdgeSpan);
  CHECK(span.value == doctest::Approx(0.2));
  const auto means = resonance_contrast(scan, ContrastDefinition::WindowMeans);
  CHECK(means.value == doctest::Approx(0.2));

  EnergyScan narrow = scan;
  narrow.energy_ev = {1325.0, 1326.0, 1327.0};
  narrow.r = {1.0, 1.0, 1.0};
  CHECK(kind_of([&] { resonance_contrast(narrow, ContrastDefinition::EdgeSpan); }) == ErrorKind::Coverage);
}

TEST_CASE("thickness inversion preconditions") {
  const auto stack = test::oxide_on_silicon();
  const auto& t = test::tables();
  CHECK(kind_of([&] { thickness_from_resonance(0.09, 0.01, 0.0, 18.0, stack, 10.0, "As", "Si", t); }) ==
        ErrorKind::Domain);
  CHECK(kind_of([&] { thickness_from_resonance(-0.09, 0.01, 2.77, 18.0, stack, 10.0, "As", "Si", t); }) ==
        ErrorKind::Domain);
  CHECK(kind_of([&] { thickness_from_resonance(5.0, 0.01, 2.77, 18.0, stack, 10.0, "As", "Si", t); }) ==
        ErrorKind::OutOfBand);
}
