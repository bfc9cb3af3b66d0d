#pragma once

#include <string_view>

#include "aiqm/dynamics.hpp"
#include "aiqm/spin.hpp"

namespace aiqm {

/// Rotating-frame drive: H_R(t) = chi Jz^2 + delta Jz + 2 Omega cos(omega_m t) (cos a Jx + sin a Jy).
struct DriveParams {
  double chi = 1.0;
  double delta = 0.0;
  double omega_m = 1.0;
  double omega = 0.0;  ///< Rabi amplitude Omega
  double alpha = 0.0;

  double omega_i() const;
  double omega_q() const;
  double period() const;
  double ratio() const { return omega / omega_m; }
  /// L0 = J0(4 Omega / omega_m)
  double l0() const;
  /// K0 = J0(2 Omega / omega_m)
  double k0() const;

  DriveParams with_alpha(double a) const;
  DriveParams with_delta(double d) const;
  /// Throws ContractViolation unless omega_m > 0 and Omega >= 0.
  void validate() const;
};

/// Tolerance on |L0 + 1/3| for constructors that assume the cancellation condition.
inline constexpr double kConditionTolerance = 1e-6;

bool condition_holds(const DriveParams& p, double tol = kConditionTolerance);

enum class ModelTag { FloquetGeneral, S1, S2, Signal, RatioRobust, PhaseRobust, Entangle, Readout };

std::string_view to_string(ModelTag tag);

struct EffectiveModel {
  ModelTag tag = ModelTag::FloquetGeneral;
  SpinOperator hamiltonian;
  DriveParams params;
  double chi_eff = 0.0;    ///< two-axis-twisting strength chi (1 - L0) / 4
  double delta_eff = 0.0;  ///< K0 delta
};

/// Which drive phase realises the effective preparation Hamiltonian.
enum class PrepConvention {
  InPhase,     ///< preparation at alpha = 0 gives +chi_eff (Jy^2 - Jx^2); readout at alpha = pi/2
  Quadrature,  ///< preparation at alpha = pi/2, readout at alpha = 0 (signs swap)
};

/// J_alpha = cos a Jx + sin a Jy
Matrix in_plane_component(const SpinSystem& sys, double angle);

SpinOperator h_rotating(const DriveParams& p, double t, const SpinSystem& sys);
HamiltonianFn rotating_frame_hamiltonian(const DriveParams& p, const SpinSystem& sys);

/// Smallest x >= 0 with J0(4x) = target_l0, by sign-change scan and bisection on [0, 1.2].
/// Throws DomainError if no root exists in that bracket.
double solve_drive_ratio(double target_l0);
/// Ratio realising L0 = -1/3 (~0.8131).
double cancellation_ratio();

/// H_sF = -(chi/2) [(1 + L0) J_a^2 + 2 L0 J_b^2] + K0 delta Jz, b = a + pi/2.
EffectiveModel h_floquet_general(const DriveParams& p, const SpinSystem& sys);
/// The in-phase (alpha = 0) and quadrature (alpha = pi/2) block Hamiltonians; require L0 = -1/3.
EffectiveModel h_s1_eff(const DriveParams& p, const SpinSystem& sys);
EffectiveModel h_s2_eff(const DriveParams& p, const SpinSystem& sys);
/// delta_eff Jz; throws ConditionViolated unless L0 = -1/3.
EffectiveModel h_signal_eff(const DriveParams& p, const SpinSystem& sys);
/// -(chi/4)(1 + 3 L0)(Jx^2 + Jy^2) + K0 delta Jz, valid for any drive ratio.
EffectiveModel h_eff_ratio(const DriveParams& p, const SpinSystem& sys);
/// chi_eff [cos^2 a (Jy^2 - Jx^2) - sin(2a)/2 {Jx, Jy}] + delta_eff Jz for second-block phase a.
EffectiveModel h_eff_phase(const DriveParams& p, const SpinSystem& sys, double alpha2);
/// Preparation / time-reversed readout twisting; both require delta = 0 and L0 = -1/3.
EffectiveModel h_entangle_eff(const DriveParams& p, const SpinSystem& sys,
                              PrepConvention conv = PrepConvention::InPhase);
EffectiveModel h_readout_eff(const DriveParams& p, const SpinSystem& sys,
                             PrepConvention conv = PrepConvention::InPhase);

/// Time-averaged generator of alternating blocks at phases 0 and alpha2, picking the
/// named closed form when one applies (signal, ratio-robust, phase-robust).
EffectiveModel averaged_alternation_model(const DriveParams& p, const SpinSystem& sys, double alpha2);

}  // namespace aiqm
