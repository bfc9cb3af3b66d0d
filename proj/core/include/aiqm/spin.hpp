#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace aiqm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class OperatorKind { Observable, Unitary, General };

/// Dense operator on the Dicke basis. Construction through the named factories
/// checks the Hermitian / unitary contract of the requested kind.
class SpinOperator {
 public:
  static constexpr double kHermitianTolerance = 1e-12;
  static constexpr double kUnitaryTolerance = 1e-10;

  SpinOperator() = default;

  static SpinOperator observable(Matrix m);
  static SpinOperator unitary(Matrix m);
  static SpinOperator general(Matrix m);

  const Matrix& matrix() const noexcept { return m_; }
  OperatorKind kind() const noexcept { return kind_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }

  SpinOperator adjoint() const;

 private:
  SpinOperator(Matrix m, OperatorKind kind) : m_(std::move(m)), kind_(kind) {}

  Matrix m_;
  OperatorKind kind_ = OperatorKind::General;
};

/// Largest absolute entry.
double max_norm(const Matrix& m);
bool is_hermitian(const Matrix& m, double tol = SpinOperator::kHermitianTolerance);
bool is_unitary(const Matrix& m, double tol = SpinOperator::kUnitaryTolerance);
Matrix commutator(const Matrix& a, const Matrix& b);

/// Normalised amplitude vector over |J,m>, ordered m = +J down to -J.
class StateVector {
 public:
  static constexpr double kNormTolerance = 1e-12;

  StateVector() = default;
  /// Throws ContractViolation unless |norm - 1| <= tol.
  explicit StateVector(Vector amplitudes, double tol = kNormTolerance);
  /// Rescales to unit norm; throws on a zero vector.
  static StateVector normalized(Vector amplitudes);

  const Vector& amplitudes() const noexcept { return c_; }
  Eigen::Index dim() const noexcept { return c_.size(); }
  double norm() const { return c_.norm(); }

 private:
  Vector c_;
};

/// |<a|b>|^2. Global phases are never removed anywhere else.
double fidelity(const StateVector& a, const StateVector& b);

enum class Axis { X, Y, Z };

/// N two-level particles in the symmetric subspace: J = N/2, dim = N + 1.
class SpinSystem {
 public:
  explicit SpinSystem(int n_particles);

  int n_particles() const noexcept { return n_; }
  double total_spin() const noexcept { return 0.5 * n_; }
  Eigen::Index dim() const noexcept { return n_ + 1; }
  /// Magnetic quantum number of basis index i (m = J - i).
  double m_of(Eigen::Index i) const noexcept { return total_spin() - static_cast<double>(i); }

  const SpinOperator& jx() const noexcept { return jx_; }
  const SpinOperator& jy() const noexcept { return jy_; }
  const SpinOperator& jz() const noexcept { return jz_; }
  const SpinOperator& j(Axis a) const noexcept;

  /// J^2 operators (exact products of the cached matrices).
  const Matrix& jx2() const noexcept { return jx2_; }
  const Matrix& jy2() const noexcept { return jy2_; }
  const Matrix& jz2() const noexcept { return jz2_; }
  Matrix identity() const { return Matrix::Identity(dim(), dim()); }

  /// |J, m> for basis index i.
  StateVector dicke(Eigen::Index i) const;

  /// exp(-i angle J_axis) as a dense unitary.
  Matrix rotation(Axis axis, double angle) const;

 private:
  int n_;
  SpinOperator jx_, jy_, jz_;
  Matrix jx2_, jy2_, jz2_;
  // Real orthogonal eigenbasis of Jx; rotations about y reuse it via Rz(pi/2).
  Eigen::MatrixXd jx_vectors_;
  Eigen::VectorXd jx_values_;
};

struct SpinOperators {
  SpinOperator jx, jy, jz;
};

/// Collective spin matrices from the ladder elements sqrt(J(J+1) - m(m+1)).
SpinOperators build_spin_operators(int n_particles);

/// exp(-i phi Jz) exp(-i theta Jy) |J,+J>.
StateVector coherent_state(const SpinSystem& sys, double theta, double phi);

/// Closed-form angle of the one-axis-twisted input state.
struct SqueezedInputParams {
  double chi_t_en = 0.0;
  double a = 0.0;
  double b = 0.0;
  double gamma = 0.0;
};

SqueezedInputParams squeezed_input_params(int n_particles, double chi_t_en);

/// exp(-i Jx (pi - 2 gamma)/2) exp(-i chi t_en Jz^2) |psi_x>, squeezed along Jy.
StateVector oat_squeezed_input(const SpinSystem& sys, double chi_t_en);

/// Same preparation with an explicit rotation angle about x (used by the angle scan).
StateVector oat_twisted_and_rotated(const SpinSystem& sys, double chi_t_en, double x_angle);

StateVector rotate(const SpinSystem& sys, const StateVector& state, Axis axis, double angle);
StateVector apply(const Matrix& op, const StateVector& state);

/// <psi|O|psi>; O must be Hermitian when its kind is Observable.
double expectation(const StateVector& state, const SpinOperator& op);
double variance(const StateVector& state, const SpinOperator& op);

/// Minimal variance of the spin components perpendicular to the mean spin direction.
double min_perpendicular_variance(const SpinSystem& sys, const StateVector& state);
/// xi^2 = N * min_var_perp / J^2 (equals 1 for coherent states).
double squeezing_parameter(const SpinSystem& sys, const StateVector& state);

struct HusimiSample {
  double theta;
  double phi;
  double q;
};

/// Q(theta, phi) = |<theta,phi|psi>|^2 on a regular polar grid.
struct HusimiMap {
  int n_theta = 0;
  int n_phi = 0;
  std::vector<HusimiSample> samples;  // theta-major

  const HusimiSample& at(int it, int ip) const { return samples[static_cast<std::size_t>(it) * n_phi + ip]; }
  /// (2J+1)/(4 pi) * integral Q dOmega (trapezoid in theta, uniform in phi).
  double normalization(int n_particles) const;
  void write_csv(std::ostream& os) const;
};

/// theta_i = pi i/(n_theta-1) including both poles, phi_j = 2 pi j/n_phi.
HusimiMap husimi_q(const SpinSystem& sys, const StateVector& state, int n_theta, int n_phi);

}  // namespace aiqm
