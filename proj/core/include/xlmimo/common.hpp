#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace xlmimo {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using UserId = std::size_t;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kJ{0.0, 1.0};

// Malformed or inconsistent configuration (bad ranges, unknown keys, parse errors).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Numerical failure: non-convergent quadrature, indefinite covariance, ...
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Zero-forcing Gram matrix is rank deficient or too ill-conditioned.
class SingularityError : public NumericalError {
 public:
  SingularityError(const std::string& what, std::vector<UserId> users)
      : NumericalError(what), users_(std::move(users)) {}
  const std::vector<UserId>& users() const noexcept { return users_; }

 private:
  std::vector<UserId> users_;
};

}  // namespace xlmimo
