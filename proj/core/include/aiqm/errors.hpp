#pragma once

#include <stdexcept>
#include <string>

namespace aiqm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Particle number or Hilbert-space size unusable (N < 1, or N < 3 where cos^{N-2} appears).
class InvalidSystemError : public Error {
 public:
  using Error::Error;
};

/// An input violated a documented contract (non-Hermitian observable, size mismatch, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A dense linear-algebra kernel failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Time-dependent propagation lost unitarity beyond the configured tolerance.
class PropagationDiverged : public Error {
 public:
  PropagationDiverged(const std::string& what, double norm_drift)
      : Error(what), norm_drift_(norm_drift) {}
  double norm_drift() const noexcept { return norm_drift_; }

 private:
  double norm_drift_;
};

/// A Floquet constructor was called away from its operating condition (L0 = -1/3, delta = 0).
class ConditionViolated : public Error {
 public:
  ConditionViolated(const std::string& what, double actual_l0)
      : Error(what), actual_l0_(actual_l0) {}
  double actual_l0() const noexcept { return actual_l0_; }

 private:
  double actual_l0_;
};

/// Block schedule inconsistent with the drive period.
class ScheduleError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Signal slope vanishes at the operating point, so the precision is undefined.
class DegenerateOperatingPoint : public Error {
 public:
  using Error::Error;
};

/// Structured configuration error carrying the offending field path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& reason)
      : Error(field + ": " + reason), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace aiqm
