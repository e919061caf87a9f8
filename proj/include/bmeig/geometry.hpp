#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "bmeig/jacobi.hpp"
#include "bmeig/linop.hpp"

namespace bmeig {

// Geometry of the quotient C^{n x p}_* / O_p with the metric induced by the
// Euclidean real inner product. Points are represented by full-rank factors
// x (n x p); tangent vectors by their horizontal lifts at x, which are
// n x p blocks z with x* z Hermitian. The vertical space at x is
// { x Omega : Omega skew-Hermitian }.

template <typename Scalar>
using FactorMatrix = Matrix<Scalar>;

template <typename Scalar>
using TangentBlock = Matrix<Scalar>;

/// Re tr(A* B).
template <typename DerivedA, typename DerivedB>
double real_inner(const Eigen::MatrixBase<DerivedA>& a,
                  const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("real_inner: shape mismatch");
  }
  return std::real(a.cwiseProduct(b.conjugate()).sum());
}

/// Hermitian part of x* y.
template <typename Scalar>
Matrix<Scalar> hermitian_part(const Matrix<Scalar>& m) {
  return (0.5 * (m + m.adjoint())).eval();
}

/// x* x, symmetrized.
template <typename Scalar>
Matrix<Scalar> gram(const Matrix<Scalar>& x) {
  return hermitian_part<Scalar>(x.adjoint() * x);
}

/// ||x* z - z* x||_F, zero exactly when z is horizontal at x.
template <typename Scalar>
double horizontality_defect(const Matrix<Scalar>& x, const Matrix<Scalar>& z) {
  const Matrix<Scalar> xz = x.adjoint() * z;
  return (xz - xz.adjoint()).norm();
}

/// E = x* x with its cached eigendecomposition E = U diag(lambda) U*.
template <typename Scalar>
class GramFactor {
 public:
  static constexpr double kJacobiTolerance = 1e-14;
  static constexpr int kJacobiSweeps = 30;

  explicit GramFactor(Matrix<Scalar> e) : e_(hermitian_part<Scalar>(e)) {
    eig_ = jacobi_eigen<Scalar>(e_, kJacobiTolerance, kJacobiSweeps);
  }

  static GramFactor of(const Matrix<Scalar>& x) { return GramFactor(gram(x)); }

  const Matrix<Scalar>& matrix() const { return e_; }
  const RealVector& eigenvalues() const { return eig_.values; }
  const Matrix<Scalar>& eigenvectors() const { return eig_.vectors; }
  Index size() const { return e_.rows(); }

  double min_eigenvalue() const { return eig_.values.minCoeff(); }
  double max_eigenvalue() const { return eig_.values.maxCoeff(); }

  /// lambda_min / lambda_max; zero or negative means rank loss.
  double rank_ratio() const {
    const double hi = max_eigenvalue();
    return hi > 0.0 ? min_eigenvalue() / hi : 0.0;
  }

 private:
  Matrix<Scalar> e_;
  HermitianEigen<Scalar> eig_;
};

/// Unique Omega with Omega E + E Omega = Z, solved in the eigenbasis of E:
///   (U* Omega U)_ij = (U* Z U)_ij / (lambda_i + lambda_j).
template <typename Scalar>
Matrix<Scalar> solve_lyapunov(const GramFactor<Scalar>& e,
                              const Matrix<Scalar>& z) {
  const Index p = e.size();
  if (z.rows() != p || z.cols() != p) {
    throw DimensionError("solve_lyapunov: right-hand side must be p x p");
  }
  if (!(e.min_eigenvalue() > 0.0)) {
    throw RankDeficiencyError(
        "solve_lyapunov: Gram factor is not positive definite (lambda_min = " +
        std::to_string(e.min_eigenvalue()) + ")");
  }
  const auto& u = e.eigenvectors();
  const auto& lam = e.eigenvalues();
  Matrix<Scalar> w = u.adjoint() * z * u;
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < p; ++i) w(i, j) /= (lam(i) + lam(j));
  }
  Matrix<Scalar> omega = u * w * u.adjoint();
  // Skew-Hermitian part; removes rounding asymmetry.
  return (0.5 * (omega - omega.adjoint())).eval();
}

template <typename Scalar>
struct Projection {
  Matrix<Scalar> block;  ///< projected n x p block
  Matrix<Scalar> omega;  ///< p x p skew-Hermitian Lyapunov solution
};

/// z = P^H(z) + x Omega with Omega E + E Omega = x* z - z* x, E = x* x.
template <typename Scalar>
Projection<Scalar> project_horizontal_with(const Matrix<Scalar>& x,
                                           const GramFactor<Scalar>& e,
                                           const Matrix<Scalar>& z) {
  if (x.rows() != z.rows() || x.cols() != z.cols()) {
    throw DimensionError("project_horizontal: shape mismatch");
  }
  const Matrix<Scalar> xz = x.adjoint() * z;
  const Matrix<Scalar> rhs = xz - xz.adjoint();
  Projection<Scalar> out;
  out.omega = solve_lyapunov(e, rhs);
  out.block = z - x * out.omega;
  return out;
}

template <typename Scalar>
Matrix<Scalar> project_horizontal(const Matrix<Scalar>& x,
                                  const Matrix<Scalar>& z) {
  return project_horizontal_with(x, GramFactor<Scalar>::of(x), z).block;
}

template <typename Scalar>
Matrix<Scalar> project_vertical(const Matrix<Scalar>& x,
                                const Matrix<Scalar>& z) {
  const auto proj = project_horizontal_with(x, GramFactor<Scalar>::of(x), z);
  return x * proj.omega;
}

/// Differentiated-retraction transport: the horizontal projection of xi at
/// the new base point.
template <typename Scalar>
Matrix<Scalar> transport(const Matrix<Scalar>& x_new, const Matrix<Scalar>& xi) {
  return project_horizontal(x_new, xi);
}

struct RankDiagnostic {
  double rank_ratio = 1.0;  ///< lambda_min / lambda_max of the new Gram factor
  bool warning = false;     ///< rank_ratio < kRankWarning
};

inline constexpr double kRankWarning = 1e-12;

/// x + tau eta. With a diagnostic sink, the new Gram factor's conditioning
/// is checked and flagged below kRankWarning.
template <typename Scalar>
Matrix<Scalar> retract(const Matrix<Scalar>& x, const Matrix<Scalar>& eta,
                       double tau, RankDiagnostic* diag = nullptr) {
  if (x.rows() != eta.rows() || x.cols() != eta.cols()) {
    throw DimensionError("retract: shape mismatch");
  }
  Matrix<Scalar> out = x + tau * eta;
  if (diag != nullptr) {
    const auto e = GramFactor<Scalar>::of(out);
    diag->rank_ratio = e.rank_ratio();
    diag->warning = diag->rank_ratio < kRankWarning;
  }
  return out;
}

/// Euclidean gradient of f(x) = 1/2 ||x x* - A||_F^2 given A x:
/// 2 (x (x* x) - A x). Never forms x x*.
template <typename Scalar>
Matrix<Scalar> egrad_from(const Matrix<Scalar>& x, const Matrix<Scalar>& ax) {
  const Matrix<Scalar> e = x.adjoint() * x;
  Matrix<Scalar> g = x * e;
  g -= ax;
  g *= 2.0;
  return g;
}

template <typename Scalar>
Matrix<Scalar> egrad(const HermitianOperator<Scalar>& op, const Matrix<Scalar>& x) {
  return egrad_from(x, bmeig::apply(op, x));
}

/// f(x) split as constant + reduced, where
///   reduced  = 1/2 ||x* x||_F^2 - Re tr(x* A x)
///   constant = 1/2 ||A||_F^2   (absent when the operator cannot report it)
struct ObjectiveValue {
  double reduced = 0.0;
  std::optional<double> constant;

  /// f when the constant is known, otherwise the reduced value.
  double value() const { return reduced + constant.value_or(0.0); }
};

template <typename Scalar>
ObjectiveValue objective_from(const HermitianOperator<Scalar>& op,
                              const Matrix<Scalar>& x, const Matrix<Scalar>& ax) {
  ObjectiveValue out;
  out.reduced = 0.5 * (x.adjoint() * x).squaredNorm() - real_inner(x, ax);
  if (const auto fro = op.frobenius_norm_sq()) out.constant = 0.5 * *fro;
  return out;
}

template <typename Scalar>
ObjectiveValue objective(const HermitianOperator<Scalar>& op, const Matrix<Scalar>& x) {
  return objective_from(op, x, bmeig::apply(op, x));
}

/// t x with t^2 = <x, A x> / ||x* x||_F^2, the minimizer of f(t x) over t.
/// Keeps the direction of a random start and fixes its scale to the problem.
template <typename Scalar>
Matrix<Scalar> scale_to_ray_minimizer(const HermitianOperator<Scalar>& op,
                                      const Matrix<Scalar>& x) {
  const double num = real_inner(x, bmeig::apply(op, x));
  const double den = gram(x).squaredNorm();
  if (!(num > 0.0) || !(den > 0.0)) {
    throw RankDeficiencyError("scale_to_ray_minimizer: <x, A x> is not positive");
  }
  return std::sqrt(num / den) * x;
}

}  // namespace bmeig
