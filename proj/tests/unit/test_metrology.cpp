#include <cmath>
#include <numbers>

#include "doctest.h"
#include "aiqm/errors.hpp"
#include "aiqm/metrology.hpp"
#include "aiqm/protocol.hpp"

using namespace aiqm;
using std::numbers::pi;

namespace {

PrecisionRequest plain_ramsey(const SpinSystem& s, double delta, double t_s) {
  const StateVector px = coherent_state(s, pi / 2, 0.0);
  const Matrix rx = s.rotation(Axis::X, pi / 2);
  PrecisionRequest req;
  req.pipeline = [&s, px, rx, t_s](double d) { return aiqm::apply(rx, accumulate_bare(s, px, 0.0, d, t_s)); };
  req.operating_delta = delta;
  req.t_s = t_s;
  return req;
}

}  // namespace

TEST_CASE("reference limits") {
  const ReferenceLimits r = reference_limits(100, 0.01);
  CHECK(r.sql == doctest::Approx(10.0));
  CHECK(r.hl == doctest::Approx(1.0));
  for (int n : {1, 2, 17, 400}) CHECK(reference_limits(n, 0.3).hl <= reference_limits(n, 0.3).sql);
}

TEST_CASE("coherent Ramsey saturates the standard quantum limit") {
  for (int n : {10, 100}) {
    const SpinSystem s(n);
    for (double d : {0.0, 3.0, 40.0}) {
      const PrecisionResult r = estimate_precision(plain_ramsey(s, d, 0.01), s);
      CAPTURE(n);
      CAPTURE(d);
      CHECK(std::abs(r.delta_omega0 * std::sqrt(n) * 0.01 - 1.0) < 1e-6);
      CHECK(r.delta_omega0 == doctest::Approx(r.jz_std / std::abs(r.slope)).epsilon(1e-12));
      CHECK(r.fd_step == doctest::Approx(1e-2));
      CHECK(r.richardson_ok());
    }
  }
}

TEST_CASE("degenerate operating point") {
  const SpinSystem s(10);
  PrecisionRequest req;
  const StateVector fixed = s.dicke(3);
  req.pipeline = [fixed](double) { return fixed; };
  req.operating_delta = 1.0;
  req.t_s = 0.01;
  CHECK_THROWS_AS(estimate_precision(req, s), DegenerateOperatingPoint);
}

TEST_CASE("detection noise in closed form") {
  const SpinSystem s(100);
  const PrecisionResult base = estimate_precision(plain_ramsey(s, 5.0, 0.01), s);
  const PrecisionResult same = apply_detection_noise(base, {0.0});
  CHECK(same.delta_omega0 == base.delta_omega0);
  CHECK(same.jz_std == base.jz_std);
  double last = base.delta_omega0;
  for (double sigma : {0.5, 1.0, 3.0, 10.0, 30.0}) {
    const PrecisionResult r = apply_detection_noise(base, {sigma});
    CHECK(r.slope == base.slope);
    CHECK(r.jz_std == doctest::Approx(std::hypot(base.jz_std, sigma)).epsilon(1e-14));
    CHECK(r.delta_omega0 > last);
    last = r.delta_omega0;
  }
  const PrecisionResult huge = apply_detection_noise(base, {1e8});
  CHECK(huge.delta_omega0 == doctest::Approx(1e8 / std::abs(base.slope)).epsilon(1e-9));
  CHECK_THROWS_AS(apply_detection_noise(base, {-1.0}), DomainError);
}

TEST_CASE("histogram convolution agrees with variance addition") {
  const SpinSystem s(100);
  const StateVector psi = oat_squeezed_input(s, 0.03);
  const OutcomeHistogram h = jz_histogram(s, aiqm::apply(s.rotation(Axis::X, 0.4), psi));
  double total = 0.0;
  for (double w : h.weights) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(h.origin == -50.0);
  const double v0 = h.variance();
  for (double sigma : {0.3, 1.0, 2.5, 7.0, 10.0, 20.0}) {
    const OutcomeHistogram c = convolve_gaussian(h, sigma);
    CAPTURE(sigma);
    CHECK(std::abs(c.mean() - h.mean()) < 1e-10);
    CHECK(std::abs(c.variance() - (v0 + sigma * sigma)) < 1e-10);
  }
}

TEST_CASE("power-law fit") {
  std::vector<ScalingSample> samples;
  for (double n : {20.0, 40.0, 60.0, 80.0, 100.0}) samples.push_back({n, 270.0 * std::pow(n, -0.95)});
  const ScalingFit f = fit_scaling(samples);
  CHECK(f.prefactor == doctest::Approx(270.0).epsilon(1e-10));
  CHECK(f.exponent == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.predict(100.0) == doctest::Approx(270.0 * std::pow(100.0, -0.95)).epsilon(1e-10));

  samples.resize(2);
  CHECK_THROWS_AS(fit_scaling(samples), DomainError);
  CHECK_THROWS_AS(fit_scaling({{10, 1.0}, {20, -1.0}, {30, 0.5}}), DomainError);
  CHECK_THROWS_AS(fit_scaling({{0, 1.0}, {20, 1.0}, {30, 0.5}}), DomainError);
}
