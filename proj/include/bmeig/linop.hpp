#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "bmeig/random.hpp"
#include "bmeig/types.hpp"

namespace bmeig {

/// Matrix-free Hermitian operator acting on n x p blocks.
///
/// Implementations are immutable after construction and may be shared
/// between concurrent solver runs. apply() must be deterministic: the same
/// input block always produces a bit-identical output.
///
/// Operators with local coupling (banded, sparse) additionally expose
/// apply_rows(), which returns selected rows of A X while reading only the
/// rows of X that those rows of A couple to.
template <typename Scalar_>
class HermitianOperator {
 public:
  using Scalar = Scalar_;
  using Block = Matrix<Scalar>;

  virtual ~HermitianOperator() = default;

  virtual Index dim() const = 0;
  virtual std::string describe() const = 0;

  /// y = A x. y is resized by the implementation.
  virtual void apply_into(const Block& x, Block& y) const = 0;

  virtual bool has_row_access() const { return false; }

  /// y = (A x)[rows, :]. Only valid when has_row_access().
  virtual void apply_rows_into(const Block& /*x*/,
                               std::span<const Index> /*rows*/,
                               Block& /*y*/) const {
    throw CapabilityError("apply_rows: operator '" + describe() +
                          "' has no row-block access");
  }

  /// Largest |i - j| over nonzero A_ij, when the operator is banded.
  virtual std::optional<Index> bandwidth() const { return std::nullopt; }

  /// ||A||_F^2 when known in closed form.
  virtual std::optional<double> frobenius_norm_sq() const {
    return std::nullopt;
  }
  virtual std::optional<double> trace() const { return std::nullopt; }
  /// Known bounds on the spectrum; nullopt when not available cheaply.
  virtual std::optional<double> max_eigenvalue() const { return std::nullopt; }
  virtual std::optional<double> min_eigenvalue() const { return std::nullopt; }
};

template <typename Scalar>
using OperatorPtr = std::shared_ptr<const HermitianOperator<Scalar>>;

namespace detail {

template <typename Scalar>
void require_rows(const HermitianOperator<Scalar>& op, const Matrix<Scalar>& x,
                  const char* what) {
  if (x.rows() != op.dim()) {
    throw DimensionError(std::string(what) + ": block has " +
                         std::to_string(x.rows()) + " rows, operator dim is " +
                         std::to_string(op.dim()));
  }
}

template <typename Scalar>
void require_row_indices(const HermitianOperator<Scalar>& op,
                         std::span<const Index> rows) {
  for (Index r : rows) {
    if (r < 0 || r >= op.dim()) {
      throw DimensionError("apply_rows: row index " + std::to_string(r) +
                           " out of range");
    }
  }
}

}  // namespace detail

/// A X.
template <typename Scalar>
Matrix<Scalar> apply(const HermitianOperator<Scalar>& op,
                     const Matrix<Scalar>& x) {
  detail::require_rows(op, x, "apply");
  Matrix<Scalar> y;
  op.apply_into(x, y);
  return y;
}

/// Rows `rows` of A X, as a |rows| x p block.
template <typename Scalar>
Matrix<Scalar> apply_rows(const HermitianOperator<Scalar>& op,
                          const Matrix<Scalar>& x,
                          std::span<const Index> rows) {
  if (!op.has_row_access()) {
    throw CapabilityError("apply_rows: operator '" + op.describe() +
                          "' has no row-block access");
  }
  detail::require_rows(op, x, "apply_rows");
  detail::require_row_indices(op, rows);
  Matrix<Scalar> y;
  op.apply_rows_into(x, rows, y);
  return y;
}

/// Dense n x n matrix of the operator (column j = A e_j). Test/oracle use.
template <typename Scalar>
Matrix<Scalar> materialize(const HermitianOperator<Scalar>& op) {
  const Index n = op.dim();
  return bmeig::apply(op, Matrix<Scalar>(Matrix<Scalar>::Identity(n, n)));
}

// ---------------------------------------------------------------------------

template <typename Scalar>
class IdentityOperator final : public HermitianOperator<Scalar> {
 public:
  using Block = Matrix<Scalar>;
  explicit IdentityOperator(Index n) : n_(n) {
    if (n < 1) throw ConstructionError("identity: dimension must be >= 1");
  }
  Index dim() const override { return n_; }
  std::string describe() const override {
    return "identity(n=" + std::to_string(n_) + ")";
  }
  void apply_into(const Block& x, Block& y) const override { y = x; }
  bool has_row_access() const override { return true; }
  void apply_rows_into(const Block& x, std::span<const Index> rows,
                       Block& y) const override {
    y.resize(static_cast<Index>(rows.size()), x.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      y.row(static_cast<Index>(k)) = x.row(rows[k]);
    }
  }
  std::optional<Index> bandwidth() const override { return 0; }
  std::optional<double> frobenius_norm_sq() const override {
    return static_cast<double>(n_);
  }
  std::optional<double> trace() const override {
    return static_cast<double>(n_);
  }
  std::optional<double> max_eigenvalue() const override { return 1.0; }
  std::optional<double> min_eigenvalue() const override { return 1.0; }

 private:
  Index n_;
};

/// Explicit dense Hermitian matrix. Desk-scale only; used for random PSD
/// test instances and as the oracle-side representation. No row access:
/// every row couples to all of x.
template <typename Scalar>
class DenseOperator final : public HermitianOperator<Scalar> {
 public:
  using Block = Matrix<Scalar>;

  explicit DenseOperator(Block m, std::string label = "dense")
      : m_(std::move(m)), label_(std::move(label)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1) {
      throw ConstructionError("dense operator: matrix must be square");
    }
    const double asym = (m_ - m_.adjoint()).norm();
    if (asym > 1e-12 * std::max(1.0, m_.norm())) {
      throw NonHermitianError("dense operator: matrix is not Hermitian");
    }
    m_ = (0.5 * (m_ + m_.adjoint())).eval();
  }

  Index dim() const override { return m_.rows(); }
  std::string describe() const override {
    return label_ + "(n=" + std::to_string(m_.rows()) + ")";
  }
  void apply_into(const Block& x, Block& y) const override {
    y.noalias() = m_ * x;
  }
  std::optional<double> frobenius_norm_sq() const override {
    return m_.squaredNorm();
  }
  std::optional<double> trace() const override {
    return std::real(m_.trace());
  }
  const Block& matrix() const { return m_; }

 private:
  Block m_;
  std::string label_;
};

/// Random PSD test matrix G G* / n with G an n x n seeded normal block.
template <typename Scalar>
Matrix<Scalar> random_psd_matrix(Index n, std::uint64_t seed) {
  const Matrix<Scalar> g = random_normal_block<Scalar>(n, n, seed);
  Matrix<Scalar> a = g * g.adjoint() / static_cast<double>(n);
  return (0.5 * (a + a.adjoint())).eval();
}

/// Sparse Hermitian operator stored row-major; row access reads only the
/// columns present in each selected row.
template <typename Scalar>
class SparseOperator final : public HermitianOperator<Scalar> {
 public:
  using Block = Matrix<Scalar>;
  using Storage = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

  explicit SparseOperator(Storage m, std::string label = "sparse")
      : m_(std::move(m)), label_(std::move(label)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1) {
      throw ConstructionError("sparse operator: matrix must be square");
    }
    m_.makeCompressed();
    Storage adj = m_.adjoint();
    if ((m_ - adj).norm() > 1e-12 * std::max(1.0, m_.norm())) {
      throw NonHermitianError("sparse operator: matrix is not Hermitian");
    }
    Index band = 0;
    for (Index r = 0; r < m_.outerSize(); ++r) {
      for (typename Storage::InnerIterator it(m_, r); it; ++it) {
        band = std::max(band, std::abs(it.col() - r));
      }
    }
    band_ = band;
  }

  Index dim() const override { return m_.rows(); }
  std::string describe() const override {
    return label_ + "(n=" + std::to_string(m_.rows()) +
           ",nnz=" + std::to_string(m_.nonZeros()) + ")";
  }
  void apply_into(const Block& x, Block& y) const override {
    y.setZero(m_.rows(), x.cols());
    for (Index r = 0; r < m_.outerSize(); ++r) row_product(x, r, y, r);
  }
  bool has_row_access() const override { return true; }
  void apply_rows_into(const Block& x, std::span<const Index> rows,
                       Block& y) const override {
    y.setZero(static_cast<Index>(rows.size()), x.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      row_product(x, rows[k], y, static_cast<Index>(k));
    }
  }
  std::optional<Index> bandwidth() const override { return band_; }
  std::optional<double> frobenius_norm_sq() const override {
    return m_.squaredNorm();
  }
  std::optional<double> trace() const override {
    double t = 0.0;
    for (Index r = 0; r < m_.rows(); ++r) t += std::real(m_.coeff(r, r));
    return t;
  }

 private:
  void row_product(const Block& x, Index r, Block& y, Index out_row) const {
    for (typename Storage::InnerIterator it(m_, r); it; ++it) {
      y.row(out_row) += it.value() * x.row(it.col());
    }
  }

  Storage m_;
  std::string label_;
  Index band_ = 0;
};

/// Self-adjointness probe under the real inner product: returns the largest
/// |<A U, V> - <U, A V>| / max(||AU|| ||V||, ||U|| ||AV||) over `trials`
/// random block pairs.
template <typename Scalar>
double self_adjoint_defect(const HermitianOperator<Scalar>& op, Index p,
                           int trials, std::uint64_t seed) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto u = random_normal_block<Scalar>(op.dim(), p, seed + 2 * t);
    const auto v = random_normal_block<Scalar>(op.dim(), p, seed + 2 * t + 1);
    const Matrix<Scalar> au = bmeig::apply(op, u);
    const Matrix<Scalar> av = bmeig::apply(op, v);
    const double lhs = std::real(au.cwiseProduct(v.conjugate()).sum());
    const double rhs = std::real(u.cwiseProduct(av.conjugate()).sum());
    const double scale = std::max(au.norm() * v.norm(), u.norm() * av.norm());
    if (scale == 0.0) continue;
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

/// Power-iteration estimate of the largest eigenvalue of a PSD operator.
/// Returns the last Rayleigh quotient, which never exceeds lambda_max.
template <typename Scalar>
double estimate_max_eigenvalue(const HermitianOperator<Scalar>& op,
                               int max_iters = 50, double rel_tol = 1e-6,
                               std::uint64_t seed = 0x5eed) {
  Matrix<Scalar> v = random_normal_block<Scalar>(op.dim(), 1, seed);
  v /= v.norm();
  double estimate = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Matrix<Scalar> w = bmeig::apply(op, v);
    const double rq = std::real((v.adjoint() * w)(0, 0));
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    if (it > 0 && std::abs(rq - estimate) <= rel_tol * std::abs(rq)) {
      return rq;
    }
    estimate = rq;
  }
  return estimate;
}

}  // namespace bmeig
