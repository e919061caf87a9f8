#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bmeig/types.hpp"

namespace bmeig {

/// Eigendecomposition M = V diag(values) V* of a Hermitian matrix, values
/// sorted non-increasing.
template <typename Scalar>
struct HermitianEigen {
  RealVector values;
  Matrix<Scalar> vectors;
  int sweeps = 0;
  double off_norm = 0.0;
};

namespace detail {

inline double conj_if_complex(double v) { return v; }
inline std::complex<double> conj_if_complex(std::complex<double> v) {
  return std::conj(v);
}

inline double unit_phase(double v) { return v < 0.0 ? -1.0 : 1.0; }
inline std::complex<double> unit_phase(std::complex<double> v) {
  return v / std::abs(v);
}

template <typename Scalar>
double off_diagonal_norm(const Matrix<Scalar>& m) {
  double sum = 0.0;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (i != j) sum += std::norm(m(i, j));
    }
  }
  return std::sqrt(sum);
}

}  // namespace detail

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot a_pq with the diagonal
/// unitary diag(1, conj(a_pq/|a_pq|)), then annihilates the now-real pivot
/// with a plane rotation. The combined 2x2 block is
///   G = [[c, s], [-s conj(ph), c conj(ph)]],
/// applied as M <- G* M G on rows/columns (p, q) and V <- V G.
///
/// Iteration stops once the off-diagonal Frobenius norm falls to
/// rel_tol * ||M||_F or after max_sweeps sweeps.
template <typename Scalar>
HermitianEigen<Scalar> jacobi_eigen(Matrix<Scalar> m, double rel_tol,
                                    int max_sweeps) {
  const Index n = m.rows();
  if (m.cols() != n) throw DimensionError("jacobi_eigen: matrix is not square");

  HermitianEigen<Scalar> out;
  out.vectors = Matrix<Scalar>::Identity(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = std::real(m(i, i));

  const double scale = m.norm();
  const double target = rel_tol * scale;
  double off = detail::off_diagonal_norm(m);

  int sweep = 0;
  while (off > target && sweep < max_sweeps) {
    ++sweep;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar apq = m(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        const double app = std::real(m(p, p));
        const double aqq = std::real(m(q, q));
        // Skip pivots already negligible against both diagonal entries.
        if (sweep > 3 && std::abs(app) + 1e2 * mag == std::abs(app) &&
            std::abs(aqq) + 1e2 * mag == std::abs(aqq)) {
          m(p, q) = Scalar(0);
          m(q, p) = Scalar(0);
          continue;
        }
        const double theta = (aqq - app) / (2.0 * mag);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const Scalar ph = detail::unit_phase(apq);
        const Scalar phc = detail::conj_if_complex(ph);

        // Columns: M <- M G.
        for (Index k = 0; k < n; ++k) {
          const Scalar mkp = m(k, p);
          const Scalar mkq = m(k, q);
          m(k, p) = c * mkp - s * phc * mkq;
          m(k, q) = s * mkp + c * phc * mkq;
        }
        // Rows: M <- G* M.
        for (Index k = 0; k < n; ++k) {
          const Scalar mpk = m(p, k);
          const Scalar mqk = m(q, k);
          m(p, k) = c * mpk - s * ph * mqk;
          m(q, k) = s * mpk + c * ph * mqk;
        }
        m(p, q) = Scalar(0);
        m(q, p) = Scalar(0);
        m(p, p) = app - t * mag;
        m(q, q) = aqq + t * mag;
        for (Index k = 0; k < n; ++k) {
          const Scalar vkp = out.vectors(k, p);
          const Scalar vkq = out.vectors(k, q);
          out.vectors(k, p) = c * vkp - s * phc * vkq;
          out.vectors(k, q) = s * vkp + c * phc * vkq;
        }
      }
    }
    off = detail::off_diagonal_norm(m);
  }
  out.sweeps = sweep;
  out.off_norm = off;

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::real(m(a, a)) > std::real(m(b, b));
  });
  out.values.resize(n);
  Matrix<Scalar> sorted(n, n);
  for (Index j = 0; j < n; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    out.values(j) = std::real(m(src, src));
    sorted.col(j) = out.vectors.col(src);
  }
  out.vectors = std::move(sorted);
  return out;
}

}  // namespace bmeig
