#pragma once

#include <stdexcept>
#include <string>

namespace poroscat {

/// Base class of every error raised by the library. `kind()` maps onto the
/// CLI exit-code families (validation, numerical, I/O).
class Error : public std::runtime_error {
 public:
  enum class Kind { validation, numerical, io };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Out-of-domain argument (non-positive modulus, non-unit normal, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(Kind::validation, what) {}
};

/// Kernel evaluated at a coincident or on-surface point.
class SingularityError : public Error {
 public:
  explicit SingularityError(const std::string& what) : Error(Kind::numerical, what) {}
};

class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& what) : Error(Kind::validation, what) {}
};

class ConfigurationError : public Error {
 public:
  explicit ConfigurationError(const std::string& what) : Error(Kind::validation, what) {}
};

/// omega = 0 or kappa = 0 in the coupling coefficient.
class SingularParameterError : public Error {
 public:
  explicit SingularParameterError(const std::string& what) : Error(Kind::numerical, what) {}
};

/// Coincident dilatational roots; the Green's coefficients A1, A2 are undefined.
class DispersionDegeneracyError : public Error {
 public:
  explicit DispersionDegeneracyError(const std::string& what) : Error(Kind::numerical, what) {}
};

/// Singular interface stiffness or a vanishing k_n / beta_f / kappa_f.
class DegenerateContactError : public Error {
 public:
  explicit DegenerateContactError(const std::string& what) : Error(Kind::numerical, what) {}
};

/// Singular or numerically rank-deficient linear system.
class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, double condition_estimate)
      : Error(Kind::numerical, what), condition_(condition_estimate) {}
  double condition_estimate() const noexcept { return condition_; }

 private:
  double condition_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(Kind::numerical, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(Kind::io, what) {}
};

/// Scenario parse/validation failure; `path()` is the JSON pointer of the field.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& path, const std::string& message)
      : Error(Kind::validation, path + ": " + message), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Mismatched matrix and scenario dimensions.
class CompatibilityError : public Error {
 public:
  explicit CompatibilityError(const std::string& what) : Error(Kind::validation, what) {}
};

/// Process exit code for an error kind: 2 validation, 3 numerical, 4 I/O.
int exit_code_for(const Error& error) noexcept;

}  // namespace poroscat
