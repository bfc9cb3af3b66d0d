#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "aiqm/spin.hpp"

namespace aiqm {

struct ReferenceLimits {
  double sql = 0.0;  ///< 1 / (sqrt(N) t_s)
  double hl = 0.0;   ///< 1 / (N t_s)
};

/// Proportionality constants are fixed to 1 (single Ramsey cycle, unit contrast).
ReferenceLimits reference_limits(int n_particles, double t_s);

/// Method-of-moments precision at one operating point.
struct PrecisionResult {
  double jz_mean = 0.0;
  double jz_std = 0.0;
  double slope = 0.0;  ///< d<Jz>/d omega_0 (= d/d delta)
  double delta_omega0 = 0.0;
  double sql = 0.0;
  double hl = 0.0;

  int n_particles = 0;
  double t_s = 0.0;
  double operating_delta = 0.0;
  double fd_step = 0.0;
  double slope_half_step = 0.0;        ///< central difference with step fd_step / 2
  double richardson_rel_change = 0.0;  ///< |slope_half_step / slope - 1|

  std::map<std::string, std::string> metadata;

  bool beats_sql() const { return delta_omega0 < sql; }
  /// Half-step check passes when the slope changes by less than 0.5 %.
  bool richardson_ok() const { return richardson_rel_change < 5e-3; }
};

/// Final state as a function of the detuning delta (omega_0 enters only through delta).
using DetuningPipeline = std::function<StateVector(double delta)>;

struct PrecisionRequest {
  DetuningPipeline pipeline;
  double operating_delta = 0.0;
  double t_s = 0.0;
  double fd_step = 0.0;  ///< <= 0 selects 1e-4 / t_s
};

/// Runs the pipeline at delta, delta +- h and delta +- h/2; slope from the +-h central difference.
/// The measured observable defaults to Jz. Throws DegenerateOperatingPoint when
/// |slope| < 1e-12 N / t_s.
PrecisionResult estimate_precision(const PrecisionRequest& req, const SpinSystem& sys,
                                   const SpinOperator* observable = nullptr);

/// Gaussian detection noise on the Jz readout, sigma in units of Jz quanta.
struct NoiseModel {
  double sigma = 0.0;
};

/// jz_std -> sqrt(jz_std^2 + sigma^2); slope unchanged.
PrecisionResult apply_detection_noise(const PrecisionResult& result, const NoiseModel& noise);

/// Outcome histogram of Jz, optionally convolved with a lattice-sampled Gaussian.
struct OutcomeHistogram {
  double origin = 0.0;   ///< outcome value of bin 0
  double spacing = 1.0;  ///< bin width in Jz quanta
  std::vector<double> weights;

  double mean() const;
  double variance() const;
};

OutcomeHistogram jz_histogram(const SpinSystem& sys, const StateVector& state);
/// Discrete convolution with exp(-x^2 / 2 sigma^2) sampled on a sub-lattice fine enough
/// that its lattice variance equals sigma^2 to double precision.
OutcomeHistogram convolve_gaussian(const OutcomeHistogram& hist, double sigma);

struct ScalingSample {
  double n = 0.0;
  double delta_omega0 = 0.0;
};

/// delta_omega0 = prefactor * N^(-exponent)
struct ScalingFit {
  double prefactor = 0.0;
  double exponent = 0.0;
  double r_squared = 0.0;
  std::vector<ScalingSample> samples;

  double predict(double n) const;
};

/// Least squares of log(delta_omega0) = log(a) - b log(N). Needs >= 3 positive samples.
ScalingFit fit_scaling(const std::vector<ScalingSample>& samples);

}  // namespace aiqm
