#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "bmeig/geometry.hpp"
#include "bmeig/jacobi.hpp"
#include "bmeig/linop.hpp"

namespace bmeig {

template <typename Scalar>
struct EigenPairs {
  RealVector values;        ///< non-increasing
  Matrix<Scalar> vectors;   ///< n x p, orthonormal columns
};

/// Rotate each column so its largest-modulus entry is real and positive.
template <typename Scalar>
void normalize_phases(Matrix<Scalar>& v) {
  for (Index j = 0; j < v.cols(); ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < v.rows(); ++i) {
      const double mag = std::abs(v(i, j));
      // Ties go to the first index; tolerance keeps gauge-rotated inputs
      // choosing the same entry.
      if (mag > best * (1.0 + 1e-9)) {
        best = mag;
        arg = i;
      }
    }
    if (best > 0.0) v.col(j) *= std::abs(v(arg, j)) / v(arg, j);
  }
}

/// Eigenpairs from a factor: with x* x = W diag(theta) W*, the values are
/// theta and the vectors x w_i / sqrt(theta_i). Exact for a stationary
/// factor of the objective.
template <typename Scalar>
EigenPairs<Scalar> extract_eigenpairs(const Matrix<Scalar>& x) {
  const auto e = GramFactor<Scalar>::of(x);
  const RealVector& theta = e.eigenvalues();
  const double top = theta.maxCoeff();
  for (Index i = 0; i < theta.size(); ++i) {
    if (!(theta(i) > 1e-14 * top)) {
      throw RankDeficiencyError("extract_eigenpairs: Gram factor is nearly rank deficient");
    }
  }
  EigenPairs<Scalar> out;
  out.values = theta;
  out.vectors = x * e.eigenvectors();
  for (Index i = 0; i < theta.size(); ++i) out.vectors.col(i) /= std::sqrt(theta(i));
  normalize_phases(out.vectors);
  return out;
}

template <typename Scalar>
EigenPairs<Scalar> extract_eigenpairs(const HermitianOperator<Scalar>& op,
                                      const Matrix<Scalar>& x) {
  if (x.rows() != op.dim()) throw DimensionError("extract_eigenpairs: dimension mismatch");
  return extract_eigenpairs(x);
}

/// Dense Hermitian eigendecomposition by cyclic Jacobi (test oracle).
template <typename Scalar>
HermitianEigen<Scalar> dense_eig(const Matrix<Scalar>& m) {
  if (m.rows() != m.cols()) throw DimensionError("dense_eig: matrix is not square");
  if (m.rows() > 2000) throw DimensionError("dense_eig: limited to n <= 2000");
  const double scale = m.norm();
  if ((m - m.adjoint()).norm() > 1e-12 * std::max(scale, 1e-300)) {
    throw NonHermitianError("dense_eig: matrix is not Hermitian");
  }
  return jacobi_eigen<Scalar>(hermitian_part<Scalar>(m), 1e-13, 100);
}

struct ErrorReport {
  std::vector<double> residuals;  ///< ||A v - lambda v|| / max(lambda, 1)
  std::optional<std::vector<double>> relative_errors;  ///< vs reference
  std::optional<double> max_relative_error;
  double objective = 0.0;   ///< f(x) (reduced form if ||A||_F is unknown)
  bool objective_is_reduced = false;
  std::optional<double> subspace_residual;  ///< ||x x* - A_p||_F / ||A_p||_F
};

/// Residuals of the pairs with one operator application, plus the relative
/// eigenvalue errors against a reference list (first p entries, sorted
/// non-increasing) when one is given.
template <typename Scalar>
ErrorReport error_report(const HermitianOperator<Scalar>& op, const EigenPairs<Scalar>& pairs,
                         const std::optional<RealVector>& reference = std::nullopt) {
  ErrorReport rep;
  const Matrix<Scalar> av = bmeig::apply(op, pairs.vectors);
  for (Index i = 0; i < pairs.values.size(); ++i) {
    const double lam = pairs.values(i);
    const double res = (av.col(i) - lam * pairs.vectors.col(i)).norm();
    rep.residuals.push_back(res / std::max(lam, 1.0));
  }
  if (reference) {
    std::vector<double> rel;
    double worst = 0.0;
    for (Index i = 0; i < pairs.values.size() && i < reference->size(); ++i) {
      const double ref = (*reference)(i);
      const double err = std::abs(pairs.values(i) - ref) / std::abs(ref);
      rel.push_back(err);
      worst = std::max(worst, err);
    }
    rep.relative_errors = std::move(rel);
    rep.max_relative_error = worst;
  }
  // x = V diag(sqrt(lambda)) reproduces f for the pairs.
  Matrix<Scalar> x = pairs.vectors;
  for (Index i = 0; i < x.cols(); ++i) x.col(i) *= std::sqrt(std::max(pairs.values(i), 0.0));
  Matrix<Scalar> ax = av;
  for (Index i = 0; i < ax.cols(); ++i) ax.col(i) *= std::sqrt(std::max(pairs.values(i), 0.0));
  const auto obj = objective_from(op, x, ax);
  rep.objective = obj.value();
  rep.objective_is_reduced = !obj.constant.has_value();
  return rep;
}

/// ||x x* - A_p||_F / ||A_p||_F with A_p the best rank-p approximation from
/// a dense eigendecomposition. Small n only.
template <typename Scalar>
double subspace_residual(const Matrix<Scalar>& dense_a, const Matrix<Scalar>& x) {
  const auto eig = dense_eig(dense_a);
  const Index p = x.cols();
  Matrix<Scalar> ap = Matrix<Scalar>::Zero(dense_a.rows(), dense_a.cols());
  for (Index i = 0; i < p; ++i) {
    ap += std::max(eig.values(i), 0.0) * eig.vectors.col(i) * eig.vectors.col(i).adjoint();
  }
  return (x * x.adjoint() - ap).norm() / ap.norm();
}

}  // namespace bmeig
