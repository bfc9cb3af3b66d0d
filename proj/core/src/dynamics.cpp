#include "aiqm/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "aiqm/errors.hpp"

namespace aiqm {

StaticPropagator::StaticPropagator(const SpinOperator& hamiltonian) {
  const Matrix& h = hamiltonian.matrix();
  if (hamiltonian.kind() != OperatorKind::Observable &&
      !is_hermitian(h, SpinOperator::kHermitianTolerance * std::max(1.0, max_norm(h)))) {
    throw ContractViolation("static evolution requires a Hermitian Hamiltonian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigendecomposition failed (dim " + std::to_string(h.rows()) +
                         ", max|H| = " + std::to_string(max_norm(h)) + ")");
  }
  vectors_ = es.eigenvectors();
  energies_ = es.eigenvalues();
}

Matrix StaticPropagator::unitary(double t) const {
  Vector ph(energies_.size());
  for (Eigen::Index i = 0; i < energies_.size(); ++i) ph(i) = std::polar(1.0, -energies_(i) * t);
  return vectors_ * ph.asDiagonal() * vectors_.adjoint();
}

StateVector StaticPropagator::evolve(double t, const StateVector& state) const {
  if (state.dim() != energies_.size()) throw ContractViolation("evolve: dimension mismatch");
  Vector coeffs = vectors_.adjoint() * state.amplitudes();
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) coeffs(i) *= std::polar(1.0, -energies_(i) * t);
  return StateVector(vectors_ * coeffs, 1e-10);
}

StateVector evolve_static(const SpinOperator& hamiltonian, double t, const StateVector& state) {
  return StaticPropagator(hamiltonian).evolve(t, state);
}

Matrix static_unitary(const SpinOperator& hamiltonian, double t) {
  return StaticPropagator(hamiltonian).unitary(t);
}

void PropagationConfig::validate() const {
  if (steps_per_drive_period < 16) {
    throw ContractViolation("steps_per_drive_period must be >= 16, got " + std::to_string(steps_per_drive_period));
  }
  if (!(unitarity_tolerance > 0.0)) throw ContractViolation("unitarity_tolerance must be positive");
  if (renormalize_every < 0) throw ContractViolation("renormalize_every must be >= 0");
}

long step_count(const HamiltonianFn& h, double t0, double t1, const PropagationConfig& cfg) {
  if (!(h.omega_max > 0.0)) throw ContractViolation("HamiltonianFn::omega_max must be positive");
  const double dt_max = (2.0 * std::numbers::pi / h.omega_max) / cfg.steps_per_drive_period;
  // Absorb rounding so that an exact multiple of the period maps to an exact step count.
  return std::max(1L, static_cast<long>(std::ceil((t1 - t0) / dt_max - 1e-9)));
}

namespace {

void check_interval(double t0, double t1) {
  if (!(t1 > t0)) throw ContractViolation("propagation requires t1 > t0");
}

Matrix midpoint_step(const HamiltonianFn& h, double t_mid, double dt) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.at(t_mid));
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed at t = " + std::to_string(t_mid));
  Vector ph(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < ph.size(); ++i) ph(i) = std::polar(1.0, -es.eigenvalues()(i) * dt);
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// d/dt y = -i H(t) y for a vector or a matrix of columns.
template <class M>
M rk4_step(const HamiltonianFn& h, double t, double dt, const M& y) {
  const Complex mi(0.0, -1.0);
  const Matrix h0 = h.at(t);
  const Matrix hm = h.at(t + 0.5 * dt);
  const Matrix h1 = h.at(t + dt);
  const M k1 = mi * (h0 * y);
  const M k2 = mi * (hm * (y + 0.5 * dt * k1));
  const M k3 = mi * (hm * (y + 0.5 * dt * k2));
  const M k4 = mi * (h1 * (y + dt * k3));
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

StateVector evolve_timedep(const HamiltonianFn& h, double t0, double t1, const PropagationConfig& cfg,
                           const StateVector& state) {
  cfg.validate();
  check_interval(t0, t1);
  const long steps = step_count(h, t0, t1, cfg);
  const double dt = (t1 - t0) / static_cast<double>(steps);
  Vector psi = state.amplitudes();
  double worst_drift = 0.0;
  for (long s = 0; s < steps; ++s) {
    const double t = t0 + dt * static_cast<double>(s);
    if (cfg.method == Integrator::PiecewiseExponentialMidpoint) {
      psi = midpoint_step(h, t + 0.5 * dt, dt) * psi;
    } else {
      psi = rk4_step(h, t, dt, psi);
    }
    if (cfg.renormalize_every > 0 && (s + 1) % cfg.renormalize_every == 0) {
      worst_drift = std::max(worst_drift, std::abs(psi.norm() - 1.0));
      psi.normalize();
    }
  }
  const double drift = std::max(worst_drift, std::abs(psi.norm() - 1.0));
  if (drift > cfg.unitarity_tolerance) {
    throw PropagationDiverged("norm drift " + std::to_string(drift) + " exceeds tolerance " +
                                  std::to_string(cfg.unitarity_tolerance) +
                                  "; increase steps_per_drive_period",
                              drift);
  }
  psi.normalize();
  return StateVector(std::move(psi), 1e-10);
}

SpinOperator propagator_timedep(const HamiltonianFn& h, double t0, double t1, const PropagationConfig& cfg) {
  cfg.validate();
  check_interval(t0, t1);
  const long steps = step_count(h, t0, t1, cfg);
  const double dt = (t1 - t0) / static_cast<double>(steps);
  const Eigen::Index dim = h.at(t0).rows();
  Matrix u = Matrix::Identity(dim, dim);
  for (long s = 0; s < steps; ++s) {
    const double t = t0 + dt * static_cast<double>(s);
    if (cfg.method == Integrator::PiecewiseExponentialMidpoint) {
      u = midpoint_step(h, t + 0.5 * dt, dt) * u;
    } else {
      u = rk4_step(h, t, dt, u);
    }
  }
  const double drift = max_norm(u.adjoint() * u - Matrix::Identity(dim, dim));
  if (drift > cfg.unitarity_tolerance) {
    throw PropagationDiverged("propagator unitarity defect " + std::to_string(drift) +
                                  " exceeds tolerance; increase steps_per_drive_period",
                              drift);
  }
  return SpinOperator::general(std::move(u));
}

StateVector apply_power(const Matrix& u, long count, const StateVector& state) {
  if (count < 0) throw ContractViolation("apply_power: negative count");
  if (u.cols() != state.dim()) throw ContractViolation("apply_power: dimension mismatch");
  Vector psi = state.amplitudes();
  for (long i = 0; i < count; ++i) psi = u * psi;
  return StateVector::normalized(std::move(psi));
}

}  // namespace aiqm
