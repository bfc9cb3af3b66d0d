#include "aiqm/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aiqm/errors.hpp"

namespace aiqm {

ReferenceLimits reference_limits(int n_particles, double t_s) {
  if (n_particles < 1) throw InvalidSystemError("reference_limits: N must be >= 1");
  if (!(t_s > 0.0)) throw DomainError("reference_limits: t_s must be positive");
  return {1.0 / (std::sqrt(static_cast<double>(n_particles)) * t_s), 1.0 / (n_particles * t_s)};
}

PrecisionResult estimate_precision(const PrecisionRequest& req, const SpinSystem& sys,
                                   const SpinOperator* observable) {
  if (!req.pipeline) throw ContractViolation("estimate_precision: empty pipeline");
  if (!(req.t_s > 0.0)) throw DomainError("estimate_precision: t_s must be positive");
  const SpinOperator& obs = observable ? *observable : sys.jz();
  const double h = req.fd_step > 0.0 ? req.fd_step : 1e-4 / req.t_s;
  const double d0 = req.operating_delta;

  auto mean_at = [&](double d) { return expectation(req.pipeline(d), obs); };

  const StateVector center = req.pipeline(d0);
  PrecisionResult r;
  r.jz_mean = expectation(center, obs);
  r.jz_std = std::sqrt(std::max(0.0, variance(center, obs)));
  r.slope = (mean_at(d0 + h) - mean_at(d0 - h)) / (2.0 * h);
  r.slope_half_step = (mean_at(d0 + 0.5 * h) - mean_at(d0 - 0.5 * h)) / h;

  const int n = sys.n_particles();
  if (std::abs(r.slope) < 1e-12 * n / req.t_s) {
    throw DegenerateOperatingPoint("signal slope " + std::to_string(r.slope) + " vanishes at delta = " +
                                   std::to_string(d0));
  }
  r.richardson_rel_change = std::abs(r.slope_half_step / r.slope - 1.0);
  r.delta_omega0 = r.jz_std / std::abs(r.slope);
  const ReferenceLimits lim = reference_limits(n, req.t_s);
  r.sql = lim.sql;
  r.hl = lim.hl;
  r.n_particles = n;
  r.t_s = req.t_s;
  r.operating_delta = d0;
  r.fd_step = h;
  r.metadata["sql_convention"] = "1/(sqrt(N) t_s)";
  r.metadata["hl_convention"] = "1/(N t_s)";
  return r;
}

PrecisionResult apply_detection_noise(const PrecisionResult& result, const NoiseModel& noise) {
  if (!(noise.sigma >= 0.0)) throw DomainError("detection noise sigma must be >= 0");
  PrecisionResult out = result;
  out.jz_std = std::sqrt(result.jz_std * result.jz_std + noise.sigma * noise.sigma);
  out.delta_omega0 = out.jz_std / std::abs(out.slope);
  out.metadata["detection_sigma"] = std::to_string(noise.sigma);
  return out;
}

double OutcomeHistogram::mean() const {
  double total = 0.0;
  double first = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    total += weights[i];
    first += weights[i] * (origin + spacing * static_cast<double>(i));
  }
  return first / total;
}

double OutcomeHistogram::variance() const {
  const double mu = mean();
  double total = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double x = origin + spacing * static_cast<double>(i) - mu;
    total += weights[i];
    second += weights[i] * x * x;
  }
  return second / total;
}

OutcomeHistogram jz_histogram(const SpinSystem& sys, const StateVector& state) {
  if (state.dim() != sys.dim()) throw ContractViolation("jz_histogram: dimension mismatch");
  // Ascending outcome order: bin i holds m = -J + i.
  OutcomeHistogram h;
  h.origin = -sys.total_spin();
  h.spacing = 1.0;
  h.weights.resize(static_cast<std::size_t>(sys.dim()));
  for (Eigen::Index i = 0; i < sys.dim(); ++i) {
    h.weights[static_cast<std::size_t>(sys.dim() - 1 - i)] = std::norm(state.amplitudes()(i));
  }
  return h;
}

OutcomeHistogram convolve_gaussian(const OutcomeHistogram& hist, double sigma) {
  if (!(sigma >= 0.0)) throw DomainError("convolve_gaussian: sigma must be >= 0");
  if (sigma == 0.0) return hist;
  // Sub-lattice spacing <= sigma / 4 keeps the aliasing error of the sampled
  // Gaussian's second moment below exp(-2 pi^2 16) ~ 1e-137.
  // Capped for sigma < 4e-5 quanta, where the sampled kernel under-resolves sigma.
  const int sub = static_cast<int>(std::clamp(std::ceil(4.0 * hist.spacing / sigma), 1.0, 1e5));
  const double step = hist.spacing / sub;
  const int half_width = static_cast<int>(std::ceil(12.0 * sigma / step));
  std::vector<double> kernel(static_cast<std::size_t>(2 * half_width + 1));
  double norm = 0.0;
  for (int j = -half_width; j <= half_width; ++j) {
    const double x = j * step;
    const double w = std::exp(-0.5 * x * x / (sigma * sigma));
    kernel[static_cast<std::size_t>(j + half_width)] = w;
    norm += w;
  }
  for (double& w : kernel) w /= norm;

  OutcomeHistogram out;
  out.spacing = step;
  out.origin = hist.origin - half_width * step;
  const std::size_t fine_bins = (hist.weights.size() - 1) * static_cast<std::size_t>(sub) + 1;
  out.weights.assign(fine_bins + kernel.size() - 1, 0.0);
  for (std::size_t i = 0; i < hist.weights.size(); ++i) {
    if (hist.weights[i] == 0.0) continue;
    const std::size_t base = i * static_cast<std::size_t>(sub);
    for (std::size_t j = 0; j < kernel.size(); ++j) out.weights[base + j] += hist.weights[i] * kernel[j];
  }
  return out;
}

double ScalingFit::predict(double n) const { return prefactor * std::pow(n, -exponent); }

ScalingFit fit_scaling(const std::vector<ScalingSample>& samples) {
  if (samples.size() < 3) throw DomainError("fit_scaling needs at least 3 samples");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& s : samples) {
    if (!(s.n > 0.0) || !(s.delta_omega0 > 0.0)) throw DomainError("fit_scaling: samples must be positive");
    const double x = std::log(s.n);
    const double y = std::log(s.delta_omega0);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(samples.size());
  const double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) throw DomainError("fit_scaling: all samples share the same N");
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;

  double ss_res = 0.0, ss_tot = 0.0;
  const double ybar = sy / m;
  for (const auto& s : samples) {
    const double y = std::log(s.delta_omega0);
    const double fit = intercept + slope * std::log(s.n);
    ss_res += (y - fit) * (y - fit);
    ss_tot += (y - ybar) * (y - ybar);
  }
  ScalingFit f;
  f.prefactor = std::exp(intercept);
  f.exponent = -slope;
  f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  f.samples = samples;
  return f;
}

}  // namespace aiqm
