// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "aiqm/bessel.hpp"
#include "aiqm/errors.hpp"
#include "aiqm/experiment.hpp"
#include "aiqm/protocol.hpp"
#include "oracles.hpp"

using namespace aiqm;
using std::numbers::pi;

namespace {

int failures = 0;

std::string fmt(const char* f, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void report(const char* name, bool ok, const std::string& detail, double seconds) {
  std::printf("%s  %-28s %s  (%.1f s)\n", ok ? "PASS" : "FAIL", name, detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

void criterion(const char* name, const std::function<bool(std::string&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail += std::string(" exception: ") + e.what();
    ok = false;
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(name, ok, detail, dt);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

RamseyConfig ramsey(SimulationMode mode, double chi = 1.0, double t_s = 0.01) {
  RamseyConfig c;
  c.n_particles = 100;
  c.chi = chi;
  c.delta = 1.0;
  c.t_s = t_s;
  c.chi_t_en = 0.03;
  c.mode = mode;
  c.drive.omega_m_factor = 20.0;
  return c;
}

FullStageConfig full_stage(SimulationMode mode, int n = 100) {
  FullStageConfig c;
  c.n_particles = n;
  c.chi = 1.0;
  c.delta = 1.0;
  c.t_s = 0.01;
  c.mode = mode;
  c.drive.omega_m_factor = 100.0;
  return c;
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo - 1.0;
}

// Sub-SQL interval containing x0, edges refined by bisection to 1e-7.
struct Window {
  double lo, hi;
};

Window sub_sql_window(const std::function<double(double)>& margin, double x0, double lo_bound, double hi_bound,
                      double step) {
  auto edge = [&](double inside, double dir, double bound) {
    double x = inside;
    while (true) {
      const double next = x + dir * step;
      if ((dir > 0 && next > bound) || (dir < 0 && next < bound)) return bound;
      if (margin(next) >= 0.0) {
        double a = x, b = next;
        while (std::abs(b - a) > 1e-7) {
          const double m = 0.5 * (a + b);
          (margin(m) < 0.0 ? a : b) = m;
        }
        return 0.5 * (a + b);
      }
      x = next;
    }
  };
  return {edge(x0, -1.0, lo_bound), edge(x0, 1.0, hi_bound)};
}

}  // namespace

int main() {
  std::printf("aiqm %s acceptance\n", version().c_str());

  criterion("cancellation-ratio", [](std::string& d) {
    const double r = solve_drive_ratio(-1.0 / 3.0);
    const double k0 = bessel_j0(2.0 * r);
    d = fmt("ratio=%.12f (|d|=%.2e <= 5e-3), K0=%.12f (|d|=%.2e <= 5e-4)", r, std::abs(r - 0.8131), k0,
            std::abs(k0 - 0.4404));
    return std::abs(r - 0.8131) <= 5e-3 && std::abs(k0 - 0.4404) <= 5e-4;
  });

  criterion("driven-vs-effective-ramsey", [](std::string& d) {
    const PrecisionResult full = run_fig2_protocol(ramsey(SimulationMode::FullDrive));
    const PrecisionResult eff = run_fig2_protocol(ramsey(SimulationMode::Ideal));
    const double dm = rel(full.jz_mean, eff.jz_mean), ds = rel(full.jz_std, eff.jz_std),
                 dw = rel(full.delta_omega0, eff.delta_omega0);
    d = fmt("<Jz> %.5f/%.5f (%.2f%%), dJz %.5f/%.5f (%.2f%%), dw0 %.4f/%.4f (%.2f%%), SQL %.1f", full.jz_mean,
            eff.jz_mean, 100 * dm, full.jz_std, eff.jz_std, 100 * ds, full.delta_omega0, eff.delta_omega0, 100 * dw,
            full.sql);
    return dm < 0.02 && ds < 0.02 && dw < 0.02 && full.delta_omega0 < full.sql && full.richardson_ok();
  });

  criterion("time-resource-scaling", [](std::string& d) {
    std::vector<double> ideal, alt;
    bool bare_above = false;
    double bare_max_ratio = 0.0;
    for (int i = 1; i <= 10; ++i) {
      const double t_s = 0.01 * i;
      const PrecisionResult r = run_fig2_protocol(ramsey(SimulationMode::Ideal, 1.0, t_s));
      const PrecisionResult e = run_fig2_protocol(ramsey(SimulationMode::Effective, 1.0, t_s));
      const PrecisionResult b = run_fig2_protocol(ramsey(SimulationMode::Bare, 1.0, t_s));
      ideal.push_back(r.delta_omega0 * r.t_s);
      alt.push_back(e.delta_omega0 * e.t_s);
      bare_above |= b.delta_omega0 > b.sql;
      bare_max_ratio = std::max(bare_max_ratio, b.delta_omega0 / b.sql);
    }
    auto dev = [](const std::vector<double>& v) {
      double mean = 0.0;
      for (double x : v) mean += x / v.size();
      double m = 0.0;
      for (double x : v) m = std::max(m, std::abs(x / mean - 1.0));
      return m;
    };
    d = fmt("dw0*t_s in [%.5f, %.5f], max dev %.2f%% (alternating %.2f%%); bare max dw0/SQL %.2f",
            *std::min_element(ideal.begin(), ideal.end()), *std::max_element(ideal.begin(), ideal.end()),
            100 * dev(ideal), 100 * dev(alt), bare_max_ratio);
    return dev(ideal) < 0.05 && dev(alt) < 0.05 && bare_above;
  });

  criterion("chi-robustness", [](std::string& d) {
    const std::vector<double> chis{0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
    std::vector<double> ideal, alt, bare;
    for (double chi : chis) {
      ideal.push_back(run_fig2_protocol(ramsey(SimulationMode::Ideal, chi)).delta_omega0);
      alt.push_back(run_fig2_protocol(ramsey(SimulationMode::Effective, chi)).delta_omega0);
      bare.push_back(run_fig2_protocol(ramsey(SimulationMode::Bare, chi)).delta_omega0);
    }
    double worst_full = 0.0;
    for (double chi : {0.1, 1.0, 10.0}) {
      const double f = run_fig2_protocol(ramsey(SimulationMode::FullDrive, chi)).delta_omega0;
      const double e = run_fig2_protocol(ramsey(SimulationMode::Ideal, chi)).delta_omega0;
      worst_full = std::max(worst_full, rel(f, e));
    }
    bool bare_increasing = true;
    for (std::size_t i = 1; i < bare.size(); ++i) bare_increasing &= bare[i] > bare[i - 1];
    d = fmt("spread %.3f%% (alternating %.3f%%), driven spot-check max %.2f%%, bare %.2f -> %.2f %s", 100 * spread(ideal),
            100 * spread(alt), 100 * worst_full, bare.front(), bare.back(),
            bare_increasing ? "increasing" : "NOT increasing");
    return spread(ideal) < 0.03 && spread(alt) < 0.03 && worst_full < 0.03 && bare_increasing;
  });

  criterion("drive-frequency-convergence", [](std::string& d) {
    std::vector<double> dev;
    std::string list;
    for (double factor : {2.0, 5.0, 10.0, 20.0, 40.0}) {
      RamseyConfig c = ramsey(SimulationMode::FullDrive);
      c.drive.omega_m_factor = factor;
      c.snap_signal_time = true;
      const PrecisionResult full = run_fig2_protocol(c);
      c.mode = SimulationMode::Ideal;
      const PrecisionResult eff = run_fig2_protocol(c);
      dev.push_back(rel(full.delta_omega0, eff.delta_omega0));
      list += fmt("%g:%.2f%% ", factor, 100 * dev.back());
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < dev.size(); ++i) decreasing &= dev[i] <= dev[i - 1];
    d = "deviation " + list + (decreasing ? "(monotone)" : "(NOT monotone)");
    return dev[3] < 0.02 && dev[4] <= dev[3] && decreasing;
  });

  criterion("robustness-windows", [](std::string& d) {
    auto ratio_margin = [](double r) {
      RamseyConfig c = ramsey(SimulationMode::Ideal);
      c.drive.drive_ratio = r;
      const PrecisionResult p = run_fig2_protocol(c);
      return p.delta_omega0 - p.sql;
    };
    auto alpha_margin = [](double a) {
      RamseyConfig c = ramsey(SimulationMode::Ideal);
      c.alpha2 = a * pi;
      const PrecisionResult p = run_fig2_protocol(c);
      return p.delta_omega0 - p.sql;
    };
    const Window wr = sub_sql_window(ratio_margin, cancellation_ratio(), 0.3, 1.2, 0.002);
    const Window wa = sub_sql_window(alpha_margin, 0.5, 0.0, 1.0, 0.002);
    const bool ratio_ok = wr.lo <= 0.65 && wr.hi >= 0.84 && wr.lo >= 0.59 && wr.hi <= 0.90;
    const bool alpha_ok = wa.lo <= 0.31 && wa.hi >= 0.69 && wa.lo >= 0.25 && wa.hi <= 0.75;
    d = fmt("ratio [%.4f, %.4f] %s; alpha/pi [%.4f, %.4f] %s (dw0 at alpha/pi=0.31: %.3f vs SQL 10)", wr.lo, wr.hi,
            ratio_ok ? "ok" : "out of bounds", wa.lo, wa.hi, alpha_ok ? "ok" : "out of bounds",
            alpha_margin(0.31) + 10.0);
    return ratio_ok && alpha_ok;
  });

  criterion("averaging-identities", [](std::string& d) {
    const int n = 100;
    const SpinSystem s(n);
    const auto j = oracle::ladder(n);
    auto hsf = [&](const DriveParams& p, double alpha) {
      const double l0 = std::cyl_bessel_j(0.0, 4.0 * p.ratio()), k0 = std::cyl_bessel_j(0.0, 2.0 * p.ratio());
      const oracle::Mat ja = std::cos(alpha) * j.x + std::sin(alpha) * j.y;
      const oracle::Mat jb = -std::sin(alpha) * j.x + std::cos(alpha) * j.y;
      return oracle::Mat(-0.5 * p.chi * ((1.0 + l0) * ja * ja + 2.0 * l0 * jb * jb) + k0 * p.delta * j.z);
    };
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst1 = 0.0, worst2 = 0.0;
    for (int k = 0; k < 20; ++k) {
      DriveParams p;
      p.chi = 0.1 + 2.0 * u(rng);
      p.delta = -2.0 + 4.0 * u(rng);
      p.omega_m = 2 * pi * 20 * n * p.chi;
      p.omega = (0.55 + 0.4 * u(rng)) * p.omega_m;
      const oracle::Mat avg1 = 0.5 * (hsf(p, 0.0) + hsf(p, pi / 2));
      worst1 = std::max(worst1, oracle::max_abs(h_eff_ratio(p, s).hamiltonian.matrix() - avg1));
      p.omega = cancellation_ratio() * p.omega_m;
      const double a2 = 2 * pi * u(rng);
      const oracle::Mat avg2 = 0.5 * (hsf(p, 0.0) + hsf(p, a2));
      worst2 = std::max(worst2, oracle::max_abs(h_eff_phase(p, s, a2).hamiltonian.matrix() - avg2));
    }
    d = fmt("20 draws at N=100: ratio model %.2e, phase model %.2e (<= 1e-10)", worst1, worst2);
    return worst1 < 1e-10 && worst2 < 1e-10;
  });

  criterion("full-stage-protocol", [](std::string& d) {
    const PrecisionResult full = run_full_stage_protocol(full_stage(SimulationMode::FullDrive));
    const PrecisionResult eff = run_full_stage_protocol(full_stage(SimulationMode::Ideal));
    std::vector<ScalingSample> samples;
    for (int n : {20, 40, 60, 80, 100}) {
      samples.push_back({double(n), run_full_stage_protocol(full_stage(SimulationMode::Ideal, n)).delta_omega0});
    }
    const ScalingFit fit = fit_scaling(samples);
    const double target = 270.0 * std::pow(100.0, -0.95);
    const double dev = rel(full.delta_omega0, eff.delta_omega0);
    const double at100 = samples.back().delta_omega0;
    d = fmt("driven %.4f vs effective %.4f (%.2f%%); fit %.1f N^-%.4f (R2 %.6f); N=100: %.4f vs %.4f (%+.1f%%)",
            full.delta_omega0, eff.delta_omega0, 100 * dev, fit.prefactor, fit.exponent, fit.r_squared, at100, target,
            100 * (at100 / target - 1));
    return dev < 0.05 && fit.exponent >= 0.85 && fit.exponent <= 1.05 && std::abs(at100 / target - 1) <= 0.2;
  });

  criterion("detection-noise", [](std::string& d) {
    const FullStagePipeline pipe(full_stage(SimulationMode::Ideal));
    const PrecisionResult base = run_full_stage_protocol(full_stage(SimulationMode::Ideal));
    const OutcomeHistogram h = jz_histogram(pipe.system(), pipe.final_state(1.0));
    bool below = true, monotone = true;
    double last = 0.0, worst_conv = 0.0, margin = 1e300;
    for (int i = 0; i <= 200; ++i) {
      const double sigma = 0.1 * i;
      const PrecisionResult r = apply_detection_noise(base, {sigma});
      if (sigma <= 0.9 * std::sqrt(100.0) + 1e-12) {
        below &= r.delta_omega0 < r.sql;
        margin = std::min(margin, r.sql - r.delta_omega0);
      }
      if (i > 0) monotone &= r.delta_omega0 > last;
      last = r.delta_omega0;
      const OutcomeHistogram c = convolve_gaussian(h, sigma);
      worst_conv = std::max(worst_conv, std::abs(c.variance() - r.jz_std * r.jz_std));
    }
    d = fmt("dw0(0)=%.4f, dw0(9)=%.4f, min SQL margin %.3f, %s, closed form vs convolution %.2e", base.delta_omega0,
            apply_detection_noise(base, {9.0}).delta_omega0, margin, monotone ? "monotone" : "NOT monotone", worst_conv);
    return below && monotone && worst_conv <= 1e-10;
  });

  criterion("property-suite", [](std::string& d) {
    bool ok = true;
    std::string notes;
    const Complex i(0.0, 1.0);
    double alg = 0.0;
    for (int n : {1, 2, 5, 20, 50, 100}) {
      const SpinSystem s(n);
      const Matrix &x = s.jx().matrix(), &y = s.jy().matrix(), &z = s.jz().matrix();
      alg = std::max({alg, max_norm(commutator(x, y) - i * z), max_norm(commutator(y, z) - i * x),
                      max_norm(commutator(z, x) - i * y)});
      const double jj = s.total_spin();
      alg = std::max(alg, max_norm(s.jx2() + s.jy2() + s.jz2() - jj * (jj + 1) * s.identity()) / std::max(1.0, jj));
    }
    ok &= alg < 1e-12;
    notes += fmt("algebra %.1e; ", alg);

    const SpinSystem s100(100);
    DriveParams p;
    p.chi = 1.0;
    p.delta = 1.0;
    p.omega_m = 2 * pi * 20 * 100;
    p.omega = cancellation_ratio() * p.omega_m;
    double unit = 0.0;
    for (double alpha : {0.0, pi / 2}) {
      const Matrix u = period_propagator(p.with_alpha(alpha), s100, {});
      unit = std::max(unit, max_norm(u.adjoint() * u - s100.identity()));
    }
    const FullStagePipeline fs(full_stage(SimulationMode::FullDrive));
    for (const auto& st : fs.checkpoints(1.0).states) unit = std::max(unit, std::abs(st.norm() - 1.0));
    const Matrix st = static_unitary(h_s1_eff(p, s100).hamiltonian, 0.01);
    unit = std::max(unit, max_norm(st.adjoint() * st - s100.identity()));
    ok &= unit < 1e-8;
    notes += fmt("unitarity %.1e; ", unit);

    const SpinSystem s20(20);
    DriveParams q = p;
    q.omega_m = 2 * pi * 20 * 20;
    q.omega = cancellation_ratio() * q.omega_m;
    PropagationConfig fine;
    fine.steps_per_drive_period = 8192;
    const Matrix exact = period_propagator(q, s20, fine);
    std::vector<double> err;
    for (int steps : {64, 128, 256}) {
      PropagationConfig c;
      c.steps_per_drive_period = steps;
      err.push_back((period_propagator(q, s20, c) - exact).norm());
    }
    const double order = std::log2(err[0] / err[2]) / 2.0;
    ok &= order >= 1.8 && order <= 2.2;
    notes += fmt("integrator order %.3f; ", order);

    const StateVector psi = oat_squeezed_input(s20, 0.03);
    auto trotter = [&](double factor) {
      DriveParams t = q;
      t.omega_m = 2 * pi * factor * 20;
      t.omega = cancellation_ratio() * t.omega_m;
      const AiqmSchedule sched = AiqmSchedule::from_signal_time(0.02, t.period(), 1);
      const StateVector a = accumulate_aiqm(s20, psi, t, sched, SimulationMode::Effective);
      return 1.0 - fidelity(a, evolve_static(h_signal_eff(t, s20).hamiltonian, 0.02, psi));
    };
    const double tr = trotter(10.0) / trotter(20.0);
    ok &= tr > 3.6 && tr < 4.4;
    notes += fmt("Trotter ratio %.3f; ", tr);

    const double enc = encode_axis_check(0.05 / bessel_j0(2 * cancellation_ratio()), q, s20).max_difference;
    ok &= enc < 1e-10;
    notes += fmt("encode axis %.1e; ", enc);

    const StateVector px = coherent_state(s100, pi / 2, 0.0);
    const Matrix rx = s100.rotation(Axis::X, pi / 2);
    PrecisionRequest req;
    req.pipeline = [&](double dd) { return aiqm::apply(rx, accumulate_bare(s100, px, 0.0, dd, 0.01)); };
    req.operating_delta = 1.0;
    req.t_s = 0.01;
    const PrecisionResult r = estimate_precision(req, s100);
    const double sql_dev = std::abs(r.delta_omega0 * std::sqrt(100.0) * 0.01 - 1.0);
    ok &= sql_dev < 1e-6;
    notes += fmt("coherent Ramsey vs SQL %.1e", sql_dev);
    d = notes;
    return ok;
  });

  std::printf("%d criteria failed\n", failures);
  return failures;
}
