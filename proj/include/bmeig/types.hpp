#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <Eigen/Dense>

namespace bmeig {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RealVector = Vector<double>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

template <typename Scalar>
inline constexpr bool is_complex_v = is_complex<Scalar>::value;

enum class ScalarField { real, complex };

template <typename Scalar>
constexpr ScalarField scalar_field_of() {
  return is_complex_v<Scalar> ? ScalarField::complex : ScalarField::real;
}

inline const char* to_string(ScalarField f) {
  return f == ScalarField::real ? "real" : "complex";
}

// Error hierarchy. Every library failure derives from bmeig::Error.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or scalar-field mismatch between an operator and a block.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Operation not supported by this operator (e.g. row-block access).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Malformed construction arguments.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// A Gram factor or iterate lost rank.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

/// An inner iterative solve did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

class NotDescentError : public Error {
 public:
  using Error::Error;
};

class LineSearchError : public Error {
 public:
  using Error::Error;
};

class NonHermitianError : public Error {
 public:
  using Error::Error;
};

}  // namespace bmeig
