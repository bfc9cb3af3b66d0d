#pragma once

#include <functional>

#include "aiqm/spin.hpp"

namespace aiqm {

/// Eigendecomposition of a Hermitian generator, reusable for any evolution time.
class StaticPropagator {
 public:
  explicit StaticPropagator(const SpinOperator& hamiltonian);

  /// exp(-i H t) as a dense matrix.
  Matrix unitary(double t) const;
  StateVector evolve(double t, const StateVector& state) const;

  const Eigen::VectorXd& energies() const noexcept { return energies_; }

 private:
  Matrix vectors_;
  Eigen::VectorXd energies_;
};

/// exp(-i H t) |psi> via Hermitian eigendecomposition.
StateVector evolve_static(const SpinOperator& hamiltonian, double t, const StateVector& state);
Matrix static_unitary(const SpinOperator& hamiltonian, double t);

/// t -> H(t); omega_max is the fastest drive frequency and sets the step size.
struct HamiltonianFn {
  std::function<Matrix(double)> at;
  double omega_max = 0.0;
};

enum class Integrator { PiecewiseExponentialMidpoint, FixedStepRk4 };

struct PropagationConfig {
  int steps_per_drive_period = 64;
  Integrator method = Integrator::PiecewiseExponentialMidpoint;
  double unitarity_tolerance = 1e-8;
  int renormalize_every = 0;  // 0 = never

  /// Throws ContractViolation on steps < 16 or non-positive tolerance.
  void validate() const;
};

/// Number of equal steps covering [t0, t1] with dt <= (2 pi / omega_max) / steps_per_period.
long step_count(const HamiltonianFn& h, double t0, double t1, const PropagationConfig& cfg);

/// Time-ordered propagation of a state. Throws PropagationDiverged if the final
/// norm leaves [1 - tol, 1 + tol] (before any renormalisation step).
StateVector evolve_timedep(const HamiltonianFn& h, double t0, double t1, const PropagationConfig& cfg,
                           const StateVector& state);

/// Time-ordered propagator U(t1, t0) as a unitary operator.
SpinOperator propagator_timedep(const HamiltonianFn& h, double t0, double t1, const PropagationConfig& cfg);

/// (U)^count applied to a state by repeated matrix-vector products.
StateVector apply_power(const Matrix& u, long count, const StateVector& state);

}  // namespace aiqm
