#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>

#include "aiqm/dynamics.hpp"
#include "aiqm/floquet.hpp"
#include "aiqm/metrology.hpp"
#include "aiqm/spin.hpp"

namespace aiqm {

/// How a stage is simulated.
enum class SimulationMode {
  FullDrive,  ///< time-ordered propagation of the rotating-frame Hamiltonian
  Effective,  ///< exponentiate the per-block effective models and alternate them
  Ideal,      ///< exponentiate the block-averaged generator (delta_eff Jz at the condition point)
  Bare,       ///< chi Jz^2 + delta Jz with the drive switched off
};

std::string_view to_string(SimulationMode mode);
SimulationMode parse_mode(std::string_view name);

/// Alternating blocks of n drive periods; t_s = 2 k n T.
class AiqmSchedule {
 public:
  /// Throws ScheduleError unless n >= 1, k >= 1 and period > 0.
  AiqmSchedule(int n, long k, double period);

  /// Requires t_s to be a multiple of 2 n T (relative tolerance 1e-9).
  static AiqmSchedule from_signal_time(double t_s, double period, int n);
  /// Nearest multiple of 2 n T, at least one cycle.
  static AiqmSchedule snapped(double t_s, double period, int n);

  int n() const noexcept { return n_; }
  long k() const noexcept { return k_; }
  double period() const noexcept { return period_; }
  double block_time() const noexcept { return n_ * period_; }
  double t_s() const noexcept { return 2.0 * static_cast<double>(k_) * n_ * period_; }

 private:
  int n_;
  long k_;
  double period_;
};

/// One drive period of the rotating-frame Hamiltonian, starting at a period boundary.
Matrix period_propagator(const DriveParams& p, const SpinSystem& sys, const PropagationConfig& cfg);

/// U^count by binary powering.
Matrix matrix_power(const Matrix& u, long count);

/// k cycles of [phase 0 for nT, phase alpha2 for nT]. No cancellation condition is assumed.
StateVector accumulate_alternating(const SpinSystem& sys, const StateVector& state, const DriveParams& p,
                                   const AiqmSchedule& sched, SimulationMode mode, double alpha2,
                                   const PropagationConfig& cfg = {});

/// AIQM signal accumulation (alpha2 = pi/2); requires L0 = -1/3.
StateVector accumulate_aiqm(const SpinSystem& sys, const StateVector& state, const DriveParams& p,
                            const AiqmSchedule& sched, SimulationMode mode, const PropagationConfig& cfg = {});

/// exp(-i (chi Jz^2 + delta Jz) t_s) |psi>, without drive.
StateVector accumulate_bare(const SpinSystem& sys, const StateVector& state, double chi, double delta, double t_s);

/// Shared drive settings: omega_m = 2 pi * omega_m_factor * N * chi, Omega = ratio * omega_m.
struct DriveSettings {
  double omega_m_factor = 20.0;
  std::optional<double> drive_ratio;  ///< defaults to the L0 = -1/3 ratio
  int block_periods = 1;
  PropagationConfig propagation;

  double omega_m(int n_particles, double chi) const;
  double ratio() const;
};

/// Squeezed input -> signal accumulation -> R_x(pi/2) -> measure Jz.
struct RamseyConfig {
  int n_particles = 100;
  double chi = 1.0;
  double delta = 1.0;
  double t_s = 0.01;
  double chi_t_en = 0.03;
  double alpha2 = 1.5707963267948966;  ///< drive phase of the second block
  bool snap_signal_time = false;
  SimulationMode mode = SimulationMode::FullDrive;
  DriveSettings drive;
  double fd_scale = 1e-4;  ///< finite-difference step h = fd_scale / t_s
};

class RamseyPipeline {
 public:
  explicit RamseyPipeline(RamseyConfig cfg);

  StateVector final_state(double delta) const;
  /// State after accumulation, before the readout rotation.
  StateVector accumulated_state(double delta) const;

  const SpinSystem& system() const noexcept { return sys_; }
  const StateVector& input_state() const noexcept { return input_; }
  double signal_time() const noexcept { return t_s_; }
  DriveParams drive(double delta) const;
  const RamseyConfig& config() const noexcept { return cfg_; }
  std::map<std::string, std::string> metadata() const;

 private:
  RamseyConfig cfg_;
  SpinSystem sys_;
  StateVector input_;
  Matrix readout_;
  std::optional<AiqmSchedule> schedule_;
  double t_s_;
};

PrecisionResult run_fig2_protocol(const RamseyConfig& cfg);

/// |psi_z> -> prep twisting -> U_R -> signal -> U_R^H -> reversed twisting -> U_R' -> Jz.
struct FullStageConfig {
  int n_particles = 100;
  double chi = 1.0;
  double delta = 1.0;
  double t_s = 0.01;
  std::optional<double> t_en;  ///< defaults to 3 ln(2N) / (2 N chi)
  std::optional<double> t_re;
  PrepConvention prep = PrepConvention::InPhase;
  bool snap_signal_time = false;
  SimulationMode mode = SimulationMode::Ideal;
  DriveSettings drive{100.0, std::nullopt, 1, {}};
  double fd_scale = 1e-4;
};

double default_twisting_time(int n_particles, double chi);

/// The four stage checkpoints: initial, entangled, after signal + U_R^H, after readout twisting.
struct StageCheckpoints {
  std::array<StateVector, 4> states;
  static constexpr std::array<const char*, 4> names{"initial", "entangled", "encoded", "readout"};
};

class FullStagePipeline {
 public:
  explicit FullStagePipeline(FullStageConfig cfg);

  StateVector final_state(double delta) const;
  StageCheckpoints checkpoints(double delta) const;

  const SpinSystem& system() const noexcept { return sys_; }
  double signal_time() const noexcept { return t_s_; }
  double prep_time() const noexcept { return t_en_; }
  double readout_time() const noexcept { return t_re_; }
  const FullStageConfig& config() const noexcept { return cfg_; }
  std::map<std::string, std::string> metadata() const;

 private:
  StateVector signal_stage(const StateVector& prepared, double delta) const;

  FullStageConfig cfg_;
  SpinSystem sys_;
  DriveParams base_;
  std::optional<AiqmSchedule> schedule_;
  double t_s_;
  double t_en_;
  double t_re_;
  double t_en_target_;
  double t_re_target_;
  StateVector entangled_;     // after preparation
  StateVector prepared_;      // after U_R
  Matrix rotate_back_;        // U_R^H
  Matrix readout_evolution_;  // readout twisting
  Matrix final_rotation_;     // U_R'
};

PrecisionResult run_full_stage_protocol(const FullStageConfig& cfg);

/// U_R^H exp(-i delta_eff Jz t_s) U_R and exp(-i delta_eff J_gamma t_s), J_gamma = (Jx + Jy)/sqrt(2).
struct EncodeAxisCheck {
  SpinOperator lhs;
  SpinOperator rhs;
  double max_difference = 0.0;
};

EncodeAxisCheck encode_axis_check(double t_s, const DriveParams& p, const SpinSystem& sys);

/// U_R = exp(-i Jx pi/4) exp(i Jy pi/2), U_R' = exp(i Jx 3pi/4) exp(-i Jy pi/2).
Matrix pre_signal_rotation(const SpinSystem& sys);
Matrix final_readout_rotation(const SpinSystem& sys);

}  // namespace aiqm
