#include "aiqm/spin.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "aiqm/errors.hpp"

namespace aiqm {

double max_norm(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_hermitian(const Matrix& m, double tol) {
  return m.rows() == m.cols() && max_norm(m - m.adjoint()) <= tol;
}

bool is_unitary(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_norm(m.adjoint() * m - Matrix::Identity(m.rows(), m.cols())) <= tol;
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

SpinOperator SpinOperator::observable(Matrix m) {
  // Tolerance scales with the entry size so that chi*J^2 terms at large N
  // are not rejected for rounding in the last place.
  const double scale = std::max(1.0, max_norm(m));
  if (!is_hermitian(m, kHermitianTolerance * scale)) {
    throw ContractViolation("observable operator is not Hermitian (max |A - A^H| = " +
                            std::to_string(m.rows() == m.cols() ? max_norm(m - m.adjoint()) : -1.0) + ")");
  }
  return SpinOperator(std::move(m), OperatorKind::Observable);
}

SpinOperator SpinOperator::unitary(Matrix m) {
  if (!is_unitary(m, kUnitaryTolerance)) {
    throw ContractViolation("operator is not unitary within " + std::to_string(kUnitaryTolerance));
  }
  return SpinOperator(std::move(m), OperatorKind::Unitary);
}

SpinOperator SpinOperator::general(Matrix m) {
  if (m.rows() != m.cols()) throw ContractViolation("operator must be square");
  return SpinOperator(std::move(m), OperatorKind::General);
}

SpinOperator SpinOperator::adjoint() const { return SpinOperator(m_.adjoint(), kind_); }

StateVector::StateVector(Vector amplitudes, double tol) : c_(std::move(amplitudes)) {
  const double n = c_.norm();
  if (std::abs(n - 1.0) > tol) {
    throw ContractViolation("state vector is not normalised (norm = " + std::to_string(n) + ")");
  }
}

StateVector StateVector::normalized(Vector amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0)) throw ContractViolation("cannot normalise a zero vector");
  amplitudes /= n;
  return StateVector(std::move(amplitudes), 1e-10);
}

double fidelity(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw ContractViolation("fidelity: dimension mismatch");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

SpinOperators build_spin_operators(int n_particles) {
  if (n_particles < 1) {
    throw InvalidSystemError("particle number must be >= 1, got " + std::to_string(n_particles));
  }
  const Eigen::Index dim = n_particles + 1;
  const double j = 0.5 * n_particles;
  Matrix jz = Matrix::Zero(dim, dim);
  Matrix jplus = Matrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double m = j - static_cast<double>(i);
    jz(i, i) = m;
    // <J, m+1 | J+ | J, m> sits one row above (descending m ordering).
    if (i > 0) jplus(i - 1, i) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  const Matrix jminus = jplus.adjoint();
  Matrix jx = 0.5 * (jplus + jminus);
  Matrix jy = Complex(0.0, -0.5) * (jplus - jminus);
  return {SpinOperator::observable(std::move(jx)), SpinOperator::observable(std::move(jy)),
          SpinOperator::observable(std::move(jz))};
}

SpinSystem::SpinSystem(int n_particles) : n_(n_particles) {
  auto ops = build_spin_operators(n_particles);
  jx_ = std::move(ops.jx);
  jy_ = std::move(ops.jy);
  jz_ = std::move(ops.jz);
  jx2_ = jx_.matrix() * jx_.matrix();
  jy2_ = jy_.matrix() * jy_.matrix();
  jz2_ = jz_.matrix() * jz_.matrix();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jx_.matrix().real());
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of Jx failed");
  jx_vectors_ = es.eigenvectors();
  jx_values_ = es.eigenvalues();
}

const SpinOperator& SpinSystem::j(Axis a) const noexcept {
  switch (a) {
    case Axis::X: return jx_;
    case Axis::Y: return jy_;
    case Axis::Z: break;
  }
  return jz_;
}

StateVector SpinSystem::dicke(Eigen::Index i) const {
  if (i < 0 || i >= dim()) throw ContractViolation("Dicke index out of range");
  Vector v = Vector::Zero(dim());
  v(i) = 1.0;
  return StateVector(std::move(v));
}

namespace {

Vector z_phases(const SpinSystem& sys, double angle) {
  Vector ph(sys.dim());
  for (Eigen::Index i = 0; i < sys.dim(); ++i) ph(i) = std::polar(1.0, -angle * sys.m_of(i));
  return ph;
}

}  // namespace

Matrix SpinSystem::rotation(Axis axis, double angle) const {
  if (axis == Axis::Z) return z_phases(*this, angle).asDiagonal();
  Vector ph(dim());
  for (Eigen::Index i = 0; i < dim(); ++i) ph(i) = std::polar(1.0, -angle * jx_values_(i));
  const Matrix v = jx_vectors_.cast<Complex>();
  Matrix rx = v * ph.asDiagonal() * v.transpose();
  if (axis == Axis::X) return rx;
  // exp(-i t Jy) = Rz(pi/2) exp(-i t Jx) Rz(pi/2)^H
  const Vector rz = z_phases(*this, 0.5 * std::numbers::pi);
  return rz.asDiagonal() * rx * rz.conjugate().asDiagonal();
}

StateVector apply(const Matrix& op, const StateVector& state) {
  if (op.cols() != state.dim()) throw ContractViolation("apply: dimension mismatch");
  return StateVector::normalized(op * state.amplitudes());
}

StateVector rotate(const SpinSystem& sys, const StateVector& state, Axis axis, double angle) {
  if (state.dim() != sys.dim()) throw ContractViolation("rotate: dimension mismatch");
  if (angle == 0.0) return state;
  if (axis == Axis::Z) {
    Vector out = z_phases(sys, angle).cwiseProduct(state.amplitudes());
    return StateVector(std::move(out), 1e-10);
  }
  return aiqm::apply(sys.rotation(axis, angle), state);
}

StateVector coherent_state(const SpinSystem& sys, double theta, double phi) {
  // Wigner d^J_{m,J}(theta) = sqrt(C(2J, J-m)) cos^{J+m}(theta/2) sin^{J-m}(theta/2)
  const int n = sys.n_particles();
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  Vector v(sys.dim());
  for (Eigen::Index i = 0; i < sys.dim(); ++i) {
    const int down = static_cast<int>(i);  // J - m
    const int up = n - down;               // J + m
    double mag;
    if ((up > 0 && c == 0.0) || (down > 0 && s == 0.0)) {
      mag = 0.0;
    } else {
      const double log_binom = std::lgamma(n + 1.0) - std::lgamma(up + 1.0) - std::lgamma(down + 1.0);
      const double sign = ((up > 0 && c < 0.0 && up % 2 == 1) ? -1.0 : 1.0) *
                          ((down > 0 && s < 0.0 && down % 2 == 1) ? -1.0 : 1.0);
      const double log_mag = 0.5 * log_binom + (up > 0 ? up * std::log(std::abs(c)) : 0.0) +
                             (down > 0 ? down * std::log(std::abs(s)) : 0.0);
      mag = sign * std::exp(log_mag);
    }
    v(i) = mag * std::polar(1.0, -phi * sys.m_of(i));
  }
  return StateVector::normalized(std::move(v));
}

SqueezedInputParams squeezed_input_params(int n_particles, double chi_t_en) {
  if (n_particles < 3) {
    throw InvalidSystemError("squeezed input requires N >= 3, got " + std::to_string(n_particles));
  }
  if (!(chi_t_en > 0.0)) throw DomainError("chi*t_en must be positive");
  const double p = n_particles - 2.0;
  // cos^p(x) = exp(p log cos x), with log cos x = log1p(-2 sin^2(x/2)) for small x.
  auto log_cos = [](double x) {
    const double h = std::sin(0.5 * x);
    return std::log1p(-2.0 * h * h);
  };
  SqueezedInputParams out;
  out.chi_t_en = chi_t_en;
  out.a = -std::expm1(p * log_cos(2.0 * chi_t_en));
  out.b = 4.0 * std::exp(p * log_cos(chi_t_en)) * std::sin(chi_t_en);
  // atan2 with A >= 0 selects the [0, pi/2) branch of arctan(B/A).
  out.gamma = 0.5 * std::atan2(out.b, out.a);
  return out;
}

StateVector oat_twisted_and_rotated(const SpinSystem& sys, double chi_t_en, double x_angle) {
  const StateVector psi_x = coherent_state(sys, 0.5 * std::numbers::pi, 0.0);
  Vector v(sys.dim());
  for (Eigen::Index i = 0; i < sys.dim(); ++i) {
    const double m = sys.m_of(i);
    v(i) = std::polar(1.0, -chi_t_en * m * m) * psi_x.amplitudes()(i);
  }
  return rotate(sys, StateVector(std::move(v), 1e-10), Axis::X, x_angle);
}

StateVector oat_squeezed_input(const SpinSystem& sys, double chi_t_en) {
  const SqueezedInputParams p = squeezed_input_params(sys.n_particles(), chi_t_en);
  return oat_twisted_and_rotated(sys, chi_t_en, 0.5 * (std::numbers::pi - 2.0 * p.gamma));
}

namespace {

Complex raw_expectation(const StateVector& state, const Matrix& op) {
  if (op.rows() != state.dim()) throw ContractViolation("expectation: dimension mismatch");
  return state.amplitudes().dot(op * state.amplitudes());
}

void require_hermitian(const SpinOperator& op) {
  if (op.kind() == OperatorKind::Observable) return;
  const double scale = std::max(1.0, max_norm(op.matrix()));
  if (!is_hermitian(op.matrix(), SpinOperator::kHermitianTolerance * scale)) {
    throw ContractViolation("expectation requires a Hermitian operator");
  }
}

}  // namespace

double expectation(const StateVector& state, const SpinOperator& op) {
  require_hermitian(op);
  const Complex e = raw_expectation(state, op.matrix());
  const double scale = std::max(1.0, std::abs(e));
  if (std::abs(e.imag()) > 1e-10 * scale) {
    throw NumericalError("expectation has imaginary residue " + std::to_string(e.imag()));
  }
  return e.real();
}

double variance(const StateVector& state, const SpinOperator& op) {
  require_hermitian(op);
  const Vector o_psi = op.matrix() * state.amplitudes();
  const double mean = state.amplitudes().dot(o_psi).real();
  const double second = o_psi.squaredNorm();
  return second - mean * mean;
}

double min_perpendicular_variance(const SpinSystem& sys, const StateVector& state) {
  const Eigen::Vector3d mean(expectation(state, sys.jx()), expectation(state, sys.jy()),
                             expectation(state, sys.jz()));
  if (mean.norm() < 1e-12) throw DomainError("mean spin vanishes; perpendicular plane undefined");
  const Eigen::Vector3d n = mean.normalized();
  Eigen::Vector3d trial = std::abs(n.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
  const Eigen::Vector3d e1 = (trial - trial.dot(n) * n).normalized();
  const Eigen::Vector3d e2 = n.cross(e1);

  auto component = [&](const Eigen::Vector3d& e) {
    return Matrix(e.x() * sys.jx().matrix() + e.y() * sys.jy().matrix() + e.z() * sys.jz().matrix());
  };
  const Matrix a = component(e1);
  const Matrix b = component(e2);
  const Vector& c = state.amplitudes();
  const Vector ac = a * c;
  const Vector bc = b * c;
  const double ma = c.dot(ac).real();
  const double mb = c.dot(bc).real();
  const double vaa = ac.squaredNorm() - ma * ma;
  const double vbb = bc.squaredNorm() - mb * mb;
  const double vab = ac.dot(bc).real() - ma * mb;  // Re<A B> = <{A,B}>/2
  const double tr = 0.5 * (vaa + vbb);
  const double disc = std::sqrt(0.25 * (vaa - vbb) * (vaa - vbb) + vab * vab);
  return tr - disc;
}

double squeezing_parameter(const SpinSystem& sys, const StateVector& state) {
  const double j = sys.total_spin();
  return sys.n_particles() * min_perpendicular_variance(sys, state) / (j * j);
}

HusimiMap husimi_q(const SpinSystem& sys, const StateVector& state, int n_theta, int n_phi) {
  if (n_theta < 2 || n_phi < 2) throw DomainError("Husimi grid needs at least 2 points per angle");
  if (state.dim() != sys.dim()) throw ContractViolation("husimi_q: dimension mismatch");
  HusimiMap map;
  map.n_theta = n_theta;
  map.n_phi = n_phi;
  map.samples.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  for (int it = 0; it < n_theta; ++it) {
    const double theta = std::numbers::pi * it / (n_theta - 1);
    for (int ip = 0; ip < n_phi; ++ip) {
      const double phi = 2.0 * std::numbers::pi * ip / n_phi;
      const StateVector coh = coherent_state(sys, theta, phi);
      const double q = std::min(1.0, fidelity(coh, state));
      map.samples.push_back({theta, phi, q});
    }
  }
  return map;
}

double HusimiMap::normalization(int n_particles) const {
  const double dtheta = std::numbers::pi / (n_theta - 1);
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  double integral = 0.0;
  for (int it = 0; it < n_theta; ++it) {
    const double w = (it == 0 || it == n_theta - 1) ? 0.5 : 1.0;
    double ring = 0.0;
    for (int ip = 0; ip < n_phi; ++ip) ring += at(it, ip).q;
    integral += w * std::sin(at(it, 0).theta) * ring;
  }
  integral *= dtheta * dphi;
  return (n_particles + 1.0) / (4.0 * std::numbers::pi) * integral;
}

void HusimiMap::write_csv(std::ostream& os) const {
  const auto old_precision = os.precision(17);
  os << "theta,phi,q\n";
  for (const auto& s : samples) os << s.theta << ',' << s.phi << ',' << s.q << '\n';
  os.precision(old_precision);
}

}  // namespace aiqm
