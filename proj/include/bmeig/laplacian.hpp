#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "bmeig/linop.hpp"

namespace bmeig {

struct LaplacianSpec {
  Index m = 1;    ///< interior grid points per axis
  int dims = 2;   ///< 1 or 2
};

/// Dirichlet finite-difference Laplacian on the unit interval or square with
/// spacing h = 1/(m+1): the scaled tridiagonal K (diag 2, off-diagonal -1)
/// in 1D, the Kronecker sum h^-2 (K (x) I + I (x) K) in 2D.
///
/// The 2D grid is flattened column-major: index i = ix + m * iy. Nothing
/// m^2 x m^2 is ever stored; each output row is a fixed-order stencil sum,
/// shared by apply() and apply_rows() so both produce identical bits.
template <typename Scalar>
class LaplacianOperator final : public HermitianOperator<Scalar> {
 public:
  using Block = Matrix<Scalar>;

  explicit LaplacianOperator(LaplacianSpec spec) : spec_(spec) {
    if (spec.m < 1) throw ConstructionError("laplacian: m must be >= 1");
    if (spec.dims != 1 && spec.dims != 2) {
      throw ConstructionError("laplacian: dims must be 1 or 2");
    }
    const double h = 1.0 / static_cast<double>(spec.m + 1);
    scale_ = 1.0 / (h * h);
    n_ = spec.dims == 1 ? spec.m : spec.m * spec.m;
  }

  Index dim() const override { return n_; }
  std::string describe() const override {
    return "laplacian" + std::to_string(spec_.dims) +
           "d(m=" + std::to_string(spec_.m) + ")";
  }
  const LaplacianSpec& spec() const { return spec_; }
  double scale() const { return scale_; }

  void apply_into(const Block& x, Block& y) const override {
    y.resize(n_, x.cols());
    for (Index j = 0; j < x.cols(); ++j) {
      for (Index i = 0; i < n_; ++i) y(i, j) = stencil(x, i, j);
    }
  }

  bool has_row_access() const override { return true; }

  void apply_rows_into(const Block& x, std::span<const Index> rows,
                       Block& y) const override {
    y.resize(static_cast<Index>(rows.size()), x.cols());
    for (Index j = 0; j < x.cols(); ++j) {
      for (std::size_t k = 0; k < rows.size(); ++k) {
        y(static_cast<Index>(k), j) = stencil(x, rows[k], j);
      }
    }
  }

  std::optional<Index> bandwidth() const override {
    return spec_.dims == 1 ? Index{1} : spec_.m;
  }

  std::optional<double> frobenius_norm_sq() const override {
    const double m = static_cast<double>(spec_.m);
    if (spec_.dims == 1) {
      return scale_ * scale_ * (4.0 * m + 2.0 * (m - 1.0));
    }
    return scale_ * scale_ * (16.0 * m * m + 4.0 * m * (m - 1.0));
  }
  std::optional<double> trace() const override {
    return scale_ * (spec_.dims == 1 ? 2.0 : 4.0) * static_cast<double>(n_);
  }
  std::optional<double> max_eigenvalue() const override {
    return spec_.dims * scale_ * axis_eigenvalue(spec_.m, spec_.m);
  }
  std::optional<double> min_eigenvalue() const override {
    return spec_.dims * scale_ * axis_eigenvalue(1, spec_.m);
  }

  /// Eigenvalue j (1-based) of the unscaled K: 2 - 2 cos(j pi / (m+1)).
  static double axis_eigenvalue(Index j, Index m) {
    return 2.0 - 2.0 * std::cos(static_cast<double>(j) * std::numbers::pi /
                                static_cast<double>(m + 1));
  }

 private:
  Scalar stencil(const Block& x, Index i, Index j) const {
    if (spec_.dims == 1) {
      Scalar acc = 2.0 * x(i, j);
      if (i > 0) acc -= x(i - 1, j);
      if (i + 1 < n_) acc -= x(i + 1, j);
      return scale_ * acc;
    }
    const Index m = spec_.m;
    const Index ix = i % m;
    const Index iy = i / m;
    Scalar acc = 4.0 * x(i, j);
    if (ix > 0) acc -= x(i - 1, j);
    if (ix + 1 < m) acc -= x(i + 1, j);
    if (iy > 0) acc -= x(i - m, j);
    if (iy + 1 < m) acc -= x(i + m, j);
    return scale_ * acc;
  }

  LaplacianSpec spec_;
  double scale_ = 1.0;
  Index n_ = 1;
};

template <typename Scalar = double>
OperatorPtr<Scalar> build_laplacian(LaplacianSpec spec) {
  return std::make_shared<LaplacianOperator<Scalar>>(spec);
}

/// Closed-form spectrum of the Laplacian, sorted non-increasing.
inline RealVector laplacian_eigenvalues(LaplacianSpec spec) {
  if (spec.m < 1 || (spec.dims != 1 && spec.dims != 2)) {
    throw ConstructionError("laplacian_eigenvalues: invalid spec");
  }
  const double h = 1.0 / static_cast<double>(spec.m + 1);
  const double scale = 1.0 / (h * h);
  std::vector<double> values;
  if (spec.dims == 1) {
    for (Index j = 1; j <= spec.m; ++j) {
      values.push_back(scale *
                       LaplacianOperator<double>::axis_eigenvalue(j, spec.m));
    }
  } else {
    for (Index j = 1; j <= spec.m; ++j) {
      for (Index k = 1; k <= spec.m; ++k) {
        values.push_back(
            scale * (LaplacianOperator<double>::axis_eigenvalue(j, spec.m) +
                     LaplacianOperator<double>::axis_eigenvalue(k, spec.m)));
      }
    }
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  return Eigen::Map<RealVector>(values.data(),
                                static_cast<Index>(values.size()));
}

}  // namespace bmeig
