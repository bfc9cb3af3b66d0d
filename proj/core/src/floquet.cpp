#include "aiqm/floquet.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "aiqm/bessel.hpp"
#include "aiqm/errors.hpp"

namespace aiqm {

namespace {
constexpr double kHalfPi = 0.5 * std::numbers::pi;
}

double DriveParams::omega_i() const { return omega * std::cos(alpha); }
double DriveParams::omega_q() const { return omega * std::sin(alpha); }
double DriveParams::period() const { return 2.0 * std::numbers::pi / omega_m; }
double DriveParams::l0() const { return bessel_j0(4.0 * omega / omega_m); }
double DriveParams::k0() const { return bessel_j0(2.0 * omega / omega_m); }

DriveParams DriveParams::with_alpha(double a) const {
  DriveParams p = *this;
  p.alpha = a;
  return p;
}

DriveParams DriveParams::with_delta(double d) const {
  DriveParams p = *this;
  p.delta = d;
  return p;
}

void DriveParams::validate() const {
  if (!(omega_m > 0.0)) throw ContractViolation("omega_m must be positive");
  if (!(omega >= 0.0)) throw ContractViolation("Rabi amplitude Omega must be non-negative");
}

bool condition_holds(const DriveParams& p, double tol) { return std::abs(p.l0() + 1.0 / 3.0) <= tol; }

std::string_view to_string(ModelTag tag) {
  switch (tag) {
    case ModelTag::FloquetGeneral: return "floquet-general";
    case ModelTag::S1: return "s1";
    case ModelTag::S2: return "s2";
    case ModelTag::Signal: return "signal";
    case ModelTag::RatioRobust: return "ratio-robust";
    case ModelTag::PhaseRobust: return "phase-robust";
    case ModelTag::Entangle: return "entangle";
    case ModelTag::Readout: return "readout";
  }
  return "unknown";
}

Matrix in_plane_component(const SpinSystem& sys, double angle) {
  return std::cos(angle) * sys.jx().matrix() + std::sin(angle) * sys.jy().matrix();
}

SpinOperator h_rotating(const DriveParams& p, double t, const SpinSystem& sys) {
  Matrix h = p.chi * sys.jz2() + p.delta * sys.jz().matrix();
  const double drive = 2.0 * p.omega * std::cos(p.omega_m * t);
  if (drive != 0.0) h += drive * in_plane_component(sys, p.alpha);
  return SpinOperator::observable(std::move(h));
}

HamiltonianFn rotating_frame_hamiltonian(const DriveParams& p, const SpinSystem& sys) {
  p.validate();
  Matrix static_part = p.chi * sys.jz2() + p.delta * sys.jz().matrix();
  Matrix drive_axis = 2.0 * p.omega * in_plane_component(sys, p.alpha);
  const double wm = p.omega_m;
  HamiltonianFn fn;
  fn.omega_max = wm;
  fn.at = [static_part = std::move(static_part), drive_axis = std::move(drive_axis), wm](double t) {
    return Matrix(static_part + std::cos(wm * t) * drive_axis);
  };
  return fn;
}

double solve_drive_ratio(double target_l0) {
  auto f = [target_l0](double x) { return bessel_j0(4.0 * x) - target_l0; };
  if (f(0.0) == 0.0) return 0.0;
  constexpr double kUpper = 1.2;
  constexpr int kScan = 1200;
  double lo = 0.0;
  double flo = f(lo);
  for (int i = 1; i <= kScan; ++i) {
    double hi = kUpper * i / kScan;
    const double fhi = f(hi);
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) != (fhi < 0.0)) {
      for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
        if (hi - lo <= 4e-16 * hi) break;
      }
      return 0.5 * (lo + hi);
    }
    lo = hi;
    flo = fhi;
  }
  throw DomainError("no drive ratio in [0, 1.2] gives J0(4x) = " + std::to_string(target_l0));
}

double cancellation_ratio() {
  static const double ratio = solve_drive_ratio(-1.0 / 3.0);
  return ratio;
}

namespace {

void require_condition(const DriveParams& p, std::string_view who) {
  if (!condition_holds(p)) {
    throw ConditionViolated(std::string(who) + " requires L0 = -1/3 within 1e-6; L0 = " + std::to_string(p.l0()),
                            p.l0());
  }
}

void require_zero_detuning(const DriveParams& p, std::string_view who) {
  if (p.delta != 0.0) {
    throw ConditionViolated(std::string(who) + " requires delta = 0, got " + std::to_string(p.delta), p.l0());
  }
}

EffectiveModel make_model(ModelTag tag, Matrix h, const DriveParams& p) {
  EffectiveModel m;
  m.tag = tag;
  m.hamiltonian = SpinOperator::observable(std::move(h));
  m.params = p;
  m.chi_eff = 0.25 * p.chi * (1.0 - p.l0());
  m.delta_eff = p.k0() * p.delta;
  return m;
}

// chi_eff (Jy^2 - Jx^2)
Matrix tat(const SpinSystem& sys, double chi_eff) { return chi_eff * (sys.jy2() - sys.jx2()); }

}  // namespace

EffectiveModel h_floquet_general(const DriveParams& p, const SpinSystem& sys) {
  p.validate();
  const double l0 = p.l0();
  const Matrix ja = in_plane_component(sys, p.alpha);
  const Matrix jb = in_plane_component(sys, p.alpha + kHalfPi);
  Matrix h = -0.5 * p.chi * ((1.0 + l0) * (ja * ja) + 2.0 * l0 * (jb * jb)) + p.k0() * p.delta * sys.jz().matrix();
  return make_model(ModelTag::FloquetGeneral, std::move(h), p);
}

EffectiveModel h_s1_eff(const DriveParams& p, const SpinSystem& sys) {
  require_condition(p, "h_s1_eff");
  const double chi_eff = p.chi / 3.0;
  Matrix h = tat(sys, chi_eff) + p.k0() * p.delta * sys.jz().matrix();
  return make_model(ModelTag::S1, std::move(h), p.with_alpha(0.0));
}

EffectiveModel h_s2_eff(const DriveParams& p, const SpinSystem& sys) {
  require_condition(p, "h_s2_eff");
  const double chi_eff = p.chi / 3.0;
  Matrix h = -tat(sys, chi_eff) + p.k0() * p.delta * sys.jz().matrix();
  return make_model(ModelTag::S2, std::move(h), p.with_alpha(kHalfPi));
}

EffectiveModel h_signal_eff(const DriveParams& p, const SpinSystem& sys) {
  require_condition(p, "h_signal_eff");
  Matrix h = p.k0() * p.delta * sys.jz().matrix();
  return make_model(ModelTag::Signal, std::move(h), p);
}

EffectiveModel h_eff_ratio(const DriveParams& p, const SpinSystem& sys) {
  p.validate();
  const double l0 = p.l0();
  Matrix h = -0.25 * p.chi * (1.0 + 3.0 * l0) * (sys.jx2() + sys.jy2()) + p.k0() * p.delta * sys.jz().matrix();
  return make_model(ModelTag::RatioRobust, std::move(h), p);
}

EffectiveModel h_eff_phase(const DriveParams& p, const SpinSystem& sys, double alpha2) {
  require_condition(p, "h_eff_phase");
  const double chi_eff = p.chi / 3.0;
  const double c = std::cos(alpha2);
  const Matrix anti = sys.jx().matrix() * sys.jy().matrix() + sys.jy().matrix() * sys.jx().matrix();
  Matrix h = chi_eff * (c * c * (sys.jy2() - sys.jx2()) - 0.5 * std::sin(2.0 * alpha2) * anti) +
             p.k0() * p.delta * sys.jz().matrix();
  return make_model(ModelTag::PhaseRobust, std::move(h), p.with_alpha(alpha2));
}

EffectiveModel h_entangle_eff(const DriveParams& p, const SpinSystem& sys, PrepConvention conv) {
  require_condition(p, "h_entangle_eff");
  require_zero_detuning(p, "h_entangle_eff");
  const double sign = conv == PrepConvention::InPhase ? 1.0 : -1.0;
  return make_model(ModelTag::Entangle, tat(sys, sign * p.chi / 3.0),
                    p.with_alpha(conv == PrepConvention::InPhase ? 0.0 : kHalfPi));
}

EffectiveModel h_readout_eff(const DriveParams& p, const SpinSystem& sys, PrepConvention conv) {
  EffectiveModel en = h_entangle_eff(p, sys, conv);
  Matrix h = -en.hamiltonian.matrix();
  return make_model(ModelTag::Readout, std::move(h),
                    p.with_alpha(conv == PrepConvention::InPhase ? kHalfPi : 0.0));
}

EffectiveModel averaged_alternation_model(const DriveParams& p, const SpinSystem& sys, double alpha2) {
  const bool quadrature = std::abs(alpha2 - kHalfPi) < 1e-15;
  const bool condition = condition_holds(p);
  if (quadrature && condition) return h_signal_eff(p, sys);
  if (quadrature) return h_eff_ratio(p, sys);
  if (condition) return h_eff_phase(p, sys, alpha2);
  const EffectiveModel first = h_floquet_general(p.with_alpha(0.0), sys);
  const EffectiveModel second = h_floquet_general(p.with_alpha(alpha2), sys);
  Matrix h = 0.5 * (first.hamiltonian.matrix() + second.hamiltonian.matrix());
  return make_model(ModelTag::FloquetGeneral, std::move(h), p);
}

}  // namespace aiqm
