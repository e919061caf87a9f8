#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "bmeig/types.hpp"

namespace bmeig {

// Seeded normal generator with a platform-independent output sequence.
//
// The engine is std::mt19937_64, whose output is fixed by the standard. The
// std::normal_distribution algorithm is implementation-defined, so normals
// are produced here with the Box-Muller transform from 53-bit uniforms:
//   u1, u2 in (0, 1];  z0 = sqrt(-2 ln u1) cos(2 pi u2),  z1 = ... sin(...)
// Both values of a pair are used, z0 first.
class NormalGenerator {
 public:
  explicit NormalGenerator(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open_closed();
    const double u2 = uniform_open_closed();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Uniform in (0, 1] with 53 random bits.
  double uniform_open_closed() {
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Standard normal draw of the requested scalar type. Complex draws have
/// independent real and imaginary parts, each with variance 1/2, so that
/// E|z|^2 = 1 in both fields.
template <typename Scalar>
Scalar draw_normal(NormalGenerator& gen) {
  if constexpr (is_complex_v<Scalar>) {
    const double re = gen() * std::numbers::sqrt2 / 2.0;
    const double im = gen() * std::numbers::sqrt2 / 2.0;
    return Scalar(re, im);
  } else {
    return gen();
  }
}

/// rows x cols block of i.i.d. normals scaled by stddev (column-major fill).
template <typename Scalar>
Matrix<Scalar> random_normal_block(Index rows, Index cols, std::uint64_t seed,
                                   double stddev = 1.0) {
  NormalGenerator gen(seed);
  Matrix<Scalar> out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      out(i, j) = draw_normal<Scalar>(gen) * stddev;
    }
  }
  return out;
}

/// Default CG/CRGD starting factor: entries N(0, 1/n).
template <typename Scalar>
Matrix<Scalar> default_initial_factor(Index n, Index p, std::uint64_t seed) {
  return random_normal_block<Scalar>(n, p, seed,
                                     1.0 / std::sqrt(static_cast<double>(n)));
}

/// Unitary (orthogonal) p x p matrix from the QR factor of a seeded normal
/// block, with the R diagonal phase folded in so the draw is Haar-distributed.
template <typename Scalar>
Matrix<Scalar> random_unitary(Index p, std::uint64_t seed) {
  const Matrix<Scalar> g = random_normal_block<Scalar>(p, p, seed);
  Eigen::HouseholderQR<Matrix<Scalar>> qr(g);
  Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(p, p);
  const Matrix<Scalar> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Index j = 0; j < p; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

}  // namespace bmeig
