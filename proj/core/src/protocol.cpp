#include "aiqm/protocol.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "aiqm/errors.hpp"

namespace aiqm {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

bool uses_schedule(SimulationMode m) { return m == SimulationMode::FullDrive || m == SimulationMode::Effective; }

}  // namespace

std::string_view to_string(SimulationMode mode) {
  switch (mode) {
    case SimulationMode::FullDrive: return "full";
    case SimulationMode::Effective: return "effective";
    case SimulationMode::Ideal: return "ideal";
    case SimulationMode::Bare: return "bare";
  }
  return "unknown";
}

SimulationMode parse_mode(std::string_view name) {
  if (name == "full" || name == "full-drive" || name == "FullDrive") return SimulationMode::FullDrive;
  if (name == "effective" || name == "Effective") return SimulationMode::Effective;
  if (name == "ideal" || name == "Ideal") return SimulationMode::Ideal;
  if (name == "bare" || name == "Bare") return SimulationMode::Bare;
  throw DomainError("unknown simulation mode '" + std::string(name) + "' (expected full|effective|ideal|bare)");
}

AiqmSchedule::AiqmSchedule(int n, long k, double period) : n_(n), k_(k), period_(period) {
  if (n < 1) throw ScheduleError("block length n must be >= 1, got " + std::to_string(n));
  if (k < 1) throw ScheduleError("cycle count k must be >= 1, got " + std::to_string(k));
  if (!(period > 0.0)) throw ScheduleError("drive period must be positive");
}

AiqmSchedule AiqmSchedule::from_signal_time(double t_s, double period, int n) {
  if (!(period > 0.0) || n < 1) throw ScheduleError("invalid drive period or block length");
  const double cycles = t_s / (2.0 * n * period);
  const long k = std::lround(cycles);
  if (std::abs(cycles - static_cast<double>(k)) > 1e-7 * std::max(1.0, cycles)) {
    throw ScheduleError("t_s = " + fmt(t_s) + " is not a multiple of 2nT = " + fmt(2.0 * n * period) + " (" +
                        fmt(cycles) + " cycles)");
  }
  return AiqmSchedule(n, k, period);
}

AiqmSchedule AiqmSchedule::snapped(double t_s, double period, int n) {
  if (!(period > 0.0) || n < 1) throw ScheduleError("invalid drive period or block length");
  const long k = std::max(1L, std::lround(t_s / (2.0 * n * period)));
  return AiqmSchedule(n, k, period);
}

Matrix period_propagator(const DriveParams& p, const SpinSystem& sys, const PropagationConfig& cfg) {
  return propagator_timedep(rotating_frame_hamiltonian(p, sys), 0.0, p.period(), cfg).matrix();
}

Matrix matrix_power(const Matrix& u, long count) {
  if (count < 0) throw ContractViolation("matrix_power: negative exponent");
  Matrix result = Matrix::Identity(u.rows(), u.cols());
  Matrix base = u;
  while (count > 0) {
    if (count & 1L) result = base * result;
    count >>= 1;
    if (count > 0) base = base * base;
  }
  return result;
}

StateVector accumulate_bare(const SpinSystem& sys, const StateVector& state, double chi, double delta, double t_s) {
  if (state.dim() != sys.dim()) throw ContractViolation("accumulate_bare: dimension mismatch");
  if (t_s == 0.0) return state;
  Vector out(sys.dim());
  for (Eigen::Index i = 0; i < sys.dim(); ++i) {
    const double m = sys.m_of(i);
    out(i) = std::polar(1.0, -(chi * m * m + delta * m) * t_s) * state.amplitudes()(i);
  }
  return StateVector(std::move(out), 1e-10);
}

namespace {

StateVector run_cycles(const Matrix& first_block, const Matrix& second_block, long k, const StateVector& state) {
  const Matrix cycle = second_block * first_block;
  return apply_power(cycle, k, state);
}

}  // namespace

StateVector accumulate_alternating(const SpinSystem& sys, const StateVector& state, const DriveParams& p,
                                   const AiqmSchedule& sched, SimulationMode mode, double alpha2,
                                   const PropagationConfig& cfg) {
  p.validate();
  if (std::abs(sched.period() - p.period()) > 1e-12 * p.period()) {
    throw ScheduleError("schedule period does not match 2 pi / omega_m");
  }
  const double block = sched.block_time();
  switch (mode) {
    case SimulationMode::FullDrive: {
      const Matrix first = matrix_power(period_propagator(p.with_alpha(0.0), sys, cfg), sched.n());
      const Matrix second = matrix_power(period_propagator(p.with_alpha(alpha2), sys, cfg), sched.n());
      return run_cycles(first, second, sched.k(), state);
    }
    case SimulationMode::Effective: {
      const Matrix first = static_unitary(h_floquet_general(p.with_alpha(0.0), sys).hamiltonian, block);
      const Matrix second = static_unitary(h_floquet_general(p.with_alpha(alpha2), sys).hamiltonian, block);
      return run_cycles(first, second, sched.k(), state);
    }
    case SimulationMode::Ideal:
      return evolve_static(averaged_alternation_model(p, sys, alpha2).hamiltonian, sched.t_s(), state);
    case SimulationMode::Bare:
      return accumulate_bare(sys, state, p.chi, p.delta, sched.t_s());
  }
  throw ContractViolation("unknown simulation mode");
}

StateVector accumulate_aiqm(const SpinSystem& sys, const StateVector& state, const DriveParams& p,
                            const AiqmSchedule& sched, SimulationMode mode, const PropagationConfig& cfg) {
  if (!condition_holds(p)) {
    throw ConditionViolated("AIQM accumulation requires L0 = -1/3; L0 = " + fmt(p.l0()), p.l0());
  }
  if (mode == SimulationMode::Effective) {
    if (std::abs(sched.period() - p.period()) > 1e-12 * p.period()) {
      throw ScheduleError("schedule period does not match 2 pi / omega_m");
    }
    const Matrix first = static_unitary(h_s1_eff(p, sys).hamiltonian, sched.block_time());
    const Matrix second = static_unitary(h_s2_eff(p, sys).hamiltonian, sched.block_time());
    return run_cycles(first, second, sched.k(), state);
  }
  return accumulate_alternating(sys, state, p, sched, mode, 0.5 * kPi, cfg);
}

double DriveSettings::omega_m(int n_particles, double chi) const {
  return 2.0 * kPi * omega_m_factor * n_particles * chi;
}

double DriveSettings::ratio() const { return drive_ratio ? *drive_ratio : cancellation_ratio(); }

// ---------------------------------------------------------------------------
// Ramsey pipeline with squeezed input
// ---------------------------------------------------------------------------

RamseyPipeline::RamseyPipeline(RamseyConfig cfg)
    : cfg_(std::move(cfg)),
      sys_(cfg_.n_particles),
      input_(oat_squeezed_input(sys_, cfg_.chi_t_en)),
      readout_(sys_.rotation(Axis::X, 0.5 * kPi)),
      t_s_(cfg_.t_s) {
  if (!(cfg_.t_s > 0.0)) throw DomainError("signal time t_s must be positive");
  if (!(cfg_.chi >= 0.0)) throw DomainError("chi must be >= 0");
  const bool drive_needed = cfg_.mode != SimulationMode::Bare;
  if (drive_needed && !(cfg_.chi > 0.0)) throw DomainError("driven modes need chi > 0 (omega_m scales with chi)");
  if (drive_needed || cfg_.snap_signal_time) {
    cfg_.drive.propagation.validate();
    if (cfg_.chi > 0.0) {
      const double period = 2.0 * kPi / cfg_.drive.omega_m(cfg_.n_particles, cfg_.chi);
      if (uses_schedule(cfg_.mode) || cfg_.snap_signal_time) {
        schedule_ = cfg_.snap_signal_time
                        ? AiqmSchedule::snapped(cfg_.t_s, period, cfg_.drive.block_periods)
                        : AiqmSchedule::from_signal_time(cfg_.t_s, period, cfg_.drive.block_periods);
        t_s_ = schedule_->t_s();
      }
    }
  }
}

DriveParams RamseyPipeline::drive(double delta) const {
  DriveParams p;
  p.chi = cfg_.chi;
  p.delta = delta;
  p.omega_m = cfg_.chi > 0.0 ? cfg_.drive.omega_m(cfg_.n_particles, cfg_.chi) : 1.0;
  p.omega = cfg_.drive.ratio() * p.omega_m;
  p.alpha = 0.0;
  return p;
}

StateVector RamseyPipeline::accumulated_state(double delta) const {
  const DriveParams p = drive(delta);
  switch (cfg_.mode) {
    case SimulationMode::Bare:
      return accumulate_bare(sys_, input_, cfg_.chi, delta, t_s_);
    case SimulationMode::Ideal:
      return evolve_static(averaged_alternation_model(p, sys_, cfg_.alpha2).hamiltonian, t_s_, input_);
    case SimulationMode::FullDrive:
    case SimulationMode::Effective:
      return accumulate_alternating(sys_, input_, p, *schedule_, cfg_.mode, cfg_.alpha2, cfg_.drive.propagation);
  }
  throw ContractViolation("unknown simulation mode");
}

StateVector RamseyPipeline::final_state(double delta) const { return aiqm::apply(readout_, accumulated_state(delta)); }

std::map<std::string, std::string> RamseyPipeline::metadata() const {
  std::map<std::string, std::string> md;
  const DriveParams p = drive(cfg_.delta);
  md["pipeline"] = "ramsey";
  md["mode"] = std::string(to_string(cfg_.mode));
  md["t_s_target"] = fmt(cfg_.t_s);
  md["t_s_actual"] = fmt(t_s_);
  md["drive_ratio"] = fmt(p.ratio());
  md["L0"] = fmt(p.l0());
  md["K0"] = fmt(p.k0());
  md["omega_m"] = fmt(p.omega_m);
  md["alpha2"] = fmt(cfg_.alpha2);
  md["squeezing_gamma"] = fmt(squeezed_input_params(cfg_.n_particles, cfg_.chi_t_en).gamma);
  if (schedule_) {
    md["block_periods"] = std::to_string(schedule_->n());
    md["cycles"] = std::to_string(schedule_->k());
  }
  return md;
}

PrecisionResult run_fig2_protocol(const RamseyConfig& cfg) {
  const RamseyPipeline pipe(cfg);
  PrecisionRequest req;
  req.pipeline = [&pipe](double d) { return pipe.final_state(d); };
  req.operating_delta = cfg.delta;
  req.t_s = pipe.signal_time();
  req.fd_step = cfg.fd_scale / pipe.signal_time();
  PrecisionResult r = estimate_precision(req, pipe.system());
  for (auto& [k, v] : pipe.metadata()) r.metadata[k] = v;
  return r;
}

// ---------------------------------------------------------------------------
// Full-stage protocol
// ---------------------------------------------------------------------------

double default_twisting_time(int n_particles, double chi) {
  if (n_particles < 1 || !(chi > 0.0)) throw DomainError("default twisting time needs N >= 1 and chi > 0");
  return 3.0 * std::log(2.0 * n_particles) / (2.0 * n_particles * chi);
}

Matrix pre_signal_rotation(const SpinSystem& sys) {
  return sys.rotation(Axis::X, 0.25 * kPi) * sys.rotation(Axis::Y, -0.5 * kPi);
}

Matrix final_readout_rotation(const SpinSystem& sys) {
  return sys.rotation(Axis::X, -0.75 * kPi) * sys.rotation(Axis::Y, 0.5 * kPi);
}

FullStagePipeline::FullStagePipeline(FullStageConfig cfg)
    : cfg_(std::move(cfg)), sys_(cfg_.n_particles), t_s_(cfg_.t_s) {
  if (!(cfg_.chi > 0.0)) throw DomainError("full-stage protocol needs chi > 0");
  if (!(cfg_.t_s >= 0.0)) throw DomainError("signal time t_s must be >= 0");
  cfg_.drive.propagation.validate();

  base_.chi = cfg_.chi;
  base_.delta = 0.0;
  base_.omega_m = cfg_.drive.omega_m(cfg_.n_particles, cfg_.chi);
  base_.omega = cfg_.drive.ratio() * base_.omega_m;
  base_.alpha = 0.0;
  const double period = base_.period();

  t_en_target_ = cfg_.t_en.value_or(default_twisting_time(cfg_.n_particles, cfg_.chi));
  t_re_target_ = cfg_.t_re.value_or(default_twisting_time(cfg_.n_particles, cfg_.chi));
  if (t_en_target_ < 0.0 || t_re_target_ < 0.0) throw DomainError("twisting times must be >= 0");
  t_en_ = t_en_target_;
  t_re_ = t_re_target_;

  if (t_s_ > 0.0 && (uses_schedule(cfg_.mode) || cfg_.snap_signal_time)) {
    schedule_ = cfg_.snap_signal_time ? AiqmSchedule::snapped(cfg_.t_s, period, cfg_.drive.block_periods)
                                      : AiqmSchedule::from_signal_time(cfg_.t_s, period, cfg_.drive.block_periods);
    t_s_ = schedule_->t_s();
  }

  const StateVector psi_z = sys_.dicke(0);
  const double prep_alpha = cfg_.prep == PrepConvention::InPhase ? 0.0 : 0.5 * kPi;
  const double readout_alpha = cfg_.prep == PrepConvention::InPhase ? 0.5 * kPi : 0.0;

  switch (cfg_.mode) {
    case SimulationMode::FullDrive: {
      // Stage boundaries snap to drive-period boundaries.
      const long n_en = std::lround(t_en_target_ / period);
      const long n_re = std::lround(t_re_target_ / period);
      t_en_ = n_en * period;
      t_re_ = n_re * period;
      const Matrix prep_period = period_propagator(base_.with_alpha(prep_alpha), sys_, cfg_.drive.propagation);
      const Matrix read_period = period_propagator(base_.with_alpha(readout_alpha), sys_, cfg_.drive.propagation);
      entangled_ = apply_power(prep_period, n_en, psi_z);
      readout_evolution_ = matrix_power(read_period, n_re);
      break;
    }
    case SimulationMode::Effective:
    case SimulationMode::Ideal: {
      entangled_ = evolve_static(h_entangle_eff(base_, sys_, cfg_.prep).hamiltonian, t_en_, psi_z);
      readout_evolution_ = static_unitary(h_readout_eff(base_, sys_, cfg_.prep).hamiltonian, t_re_);
      break;
    }
    case SimulationMode::Bare: {
      const SpinOperator oat = SpinOperator::observable(cfg_.chi * sys_.jz2());
      entangled_ = evolve_static(oat, t_en_, psi_z);
      readout_evolution_ = static_unitary(oat, t_re_);
      break;
    }
  }
  prepared_ = aiqm::apply(pre_signal_rotation(sys_), entangled_);
  rotate_back_ = pre_signal_rotation(sys_).adjoint();
  final_rotation_ = final_readout_rotation(sys_);
}

StateVector FullStagePipeline::signal_stage(const StateVector& prepared, double delta) const {
  if (t_s_ == 0.0) return prepared;
  const DriveParams p = base_.with_delta(delta);
  switch (cfg_.mode) {
    case SimulationMode::FullDrive:
    case SimulationMode::Effective:
      return accumulate_aiqm(sys_, prepared, p, *schedule_, cfg_.mode, cfg_.drive.propagation);
    case SimulationMode::Ideal:
      return evolve_static(h_signal_eff(p, sys_).hamiltonian, t_s_, prepared);
    case SimulationMode::Bare:
      return accumulate_bare(sys_, prepared, cfg_.chi, delta, t_s_);
  }
  throw ContractViolation("unknown simulation mode");
}

StateVector FullStagePipeline::final_state(double delta) const {
  const StateVector encoded = aiqm::apply(rotate_back_, signal_stage(prepared_, delta));
  return aiqm::apply(final_rotation_, aiqm::apply(readout_evolution_, encoded));
}

StageCheckpoints FullStagePipeline::checkpoints(double delta) const {
  const StateVector encoded = aiqm::apply(rotate_back_, signal_stage(prepared_, delta));
  StageCheckpoints cp;
  cp.states = {sys_.dicke(0), entangled_, encoded, aiqm::apply(readout_evolution_, encoded)};
  return cp;
}

std::map<std::string, std::string> FullStagePipeline::metadata() const {
  std::map<std::string, std::string> md;
  md["pipeline"] = "full-stage";
  md["mode"] = std::string(to_string(cfg_.mode));
  md["prep_convention"] = cfg_.prep == PrepConvention::InPhase ? "in-phase" : "quadrature";
  md["t_s_target"] = fmt(cfg_.t_s);
  md["t_s_actual"] = fmt(t_s_);
  md["t_en_target"] = fmt(t_en_target_);
  md["t_en_actual"] = fmt(t_en_);
  md["t_re_target"] = fmt(t_re_target_);
  md["t_re_actual"] = fmt(t_re_);
  md["drive_ratio"] = fmt(base_.ratio());
  md["L0"] = fmt(base_.l0());
  md["K0"] = fmt(base_.k0());
  md["omega_m"] = fmt(base_.omega_m);
  if (schedule_) {
    md["block_periods"] = std::to_string(schedule_->n());
    md["cycles"] = std::to_string(schedule_->k());
  }
  return md;
}

PrecisionResult run_full_stage_protocol(const FullStageConfig& cfg) {
  const FullStagePipeline pipe(cfg);
  if (!(pipe.signal_time() > 0.0)) throw DomainError("precision needs t_s > 0");
  PrecisionRequest req;
  req.pipeline = [&pipe](double d) { return pipe.final_state(d); };
  req.operating_delta = cfg.delta;
  req.t_s = pipe.signal_time();
  req.fd_step = cfg.fd_scale / pipe.signal_time();
  PrecisionResult r = estimate_precision(req, pipe.system());
  for (auto& [k, v] : pipe.metadata()) r.metadata[k] = v;
  return r;
}

EncodeAxisCheck encode_axis_check(double t_s, const DriveParams& p, const SpinSystem& sys) {
  const EffectiveModel signal = h_signal_eff(p, sys);
  const Matrix ur = pre_signal_rotation(sys);
  Matrix lhs = ur.adjoint() * static_unitary(signal.hamiltonian, t_s) * ur;
  const SpinOperator j_gamma =
      SpinOperator::observable(std::sqrt(0.5) * (sys.jx().matrix() + sys.jy().matrix()));
  Matrix rhs = static_unitary(j_gamma, signal.delta_eff * t_s);
  EncodeAxisCheck out;
  out.max_difference = max_norm(lhs - rhs);
  out.lhs = SpinOperator::unitary(std::move(lhs));
  out.rhs = SpinOperator::unitary(std::move(rhs));
  return out;
}

}  // namespace aiqm
