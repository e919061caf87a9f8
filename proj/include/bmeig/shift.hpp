#pragma once

#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "bmeig/linop.hpp"
#include "bmeig/spectral.hpp"

namespace bmeig {

enum class ShiftMode { shift_invert, negative_shift };

inline const char* to_string(ShiftMode m) {
  return m == ShiftMode::shift_invert ? "shift_invert" : "negative_shift";
}

struct ShiftSpec {
  ShiftMode mode = ShiftMode::shift_invert;
  double mu = 0.0;
  double inner_tolerance = 1e-12;  ///< relative residual of the inner CG
  int inner_max_iters = 10000;
  /// Start each column's inner solve from the previous call's solution.
  /// Off by default: a warm start makes apply() depend on call history.
  bool warm_start = false;
};

/// mu I - A. Keeps row-block access of the wrapped operator.
template <typename Scalar>
class NegativeShiftOperator final : public HermitianOperator<Scalar> {
 public:
  using Block = Matrix<Scalar>;

  NegativeShiftOperator(OperatorPtr<Scalar> base, double mu)
      : base_(std::move(base)), mu_(mu) {}

  Index dim() const override { return base_->dim(); }
  std::string describe() const override {
    return "negative_shift(" + base_->describe() + ")";
  }
  void apply_into(const Block& x, Block& y) const override {
    base_->apply_into(x, y);
    y = mu_ * x - y;
  }
  bool has_row_access() const override { return base_->has_row_access(); }
  void apply_rows_into(const Block& x, std::span<const Index> rows,
                       Block& y) const override {
    base_->apply_rows_into(x, rows, y);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      y.row(static_cast<Index>(k)) = mu_ * x.row(rows[k]) - y.row(static_cast<Index>(k));
    }
  }
  std::optional<Index> bandwidth() const override { return base_->bandwidth(); }
  std::optional<double> frobenius_norm_sq() const override {
    const auto fro = base_->frobenius_norm_sq();
    const auto tr = base_->trace();
    if (!fro || !tr) return std::nullopt;
    return static_cast<double>(dim()) * mu_ * mu_ - 2.0 * mu_ * *tr + *fro;
  }
  std::optional<double> trace() const override {
    const auto tr = base_->trace();
    if (!tr) return std::nullopt;
    return static_cast<double>(dim()) * mu_ - *tr;
  }
  std::optional<double> max_eigenvalue() const override {
    const auto lo = base_->min_eigenvalue();
    if (!lo) return std::nullopt;
    return mu_ - *lo;
  }
  std::optional<double> min_eigenvalue() const override {
    const auto hi = base_->max_eigenvalue();
    if (!hi) return std::nullopt;
    return mu_ - *hi;
  }
  double mu() const { return mu_; }

 private:
  OperatorPtr<Scalar> base_;
  double mu_;
};

/// (A + mu I)^-1 applied column by column with linear conjugate gradient.
template <typename Scalar>
class ShiftInvertOperator final : public HermitianOperator<Scalar> {
 public:
  using Block = Matrix<Scalar>;

  ShiftInvertOperator(OperatorPtr<Scalar> base, const ShiftSpec& spec)
      : base_(std::move(base)), spec_(spec) {}

  Index dim() const override { return base_->dim(); }
  std::string describe() const override {
    return "shift_invert(" + base_->describe() + ")";
  }

  void apply_into(const Block& x, Block& y) const override {
    y.resize(x.rows(), x.cols());
    Block guess;
    if (spec_.warm_start) {
      std::lock_guard<std::mutex> lock(warm_mutex_);
      guess = previous_;
    }
    for (Index j = 0; j < x.cols(); ++j) {
      Block col0 = (guess.rows() == x.rows() && j < guess.cols())
                       ? Block(guess.col(j))
                       : Block::Zero(x.rows(), 1);
      y.col(j) = solve_column(x.col(j), std::move(col0));
    }
    if (spec_.warm_start) {
      std::lock_guard<std::mutex> lock(warm_mutex_);
      previous_ = y;
    }
  }

  std::optional<double> max_eigenvalue() const override {
    const auto lo = base_->min_eigenvalue();
    if (!lo) return std::nullopt;
    return 1.0 / (*lo + spec_.mu);
  }
  std::optional<double> min_eigenvalue() const override {
    const auto hi = base_->max_eigenvalue();
    if (!hi) return std::nullopt;
    return 1.0 / (*hi + spec_.mu);
  }
  const ShiftSpec& spec() const { return spec_; }

 private:
  Block solve_column(const Block& b, Block sol) const {
    const double bnorm = b.norm();
    if (bnorm == 0.0) return Block::Zero(b.rows(), 1);
    Block ax;
    base_->apply_into(sol, ax);
    Block r = b - ax - spec_.mu * sol;
    Block d = r;
    double rr = r.squaredNorm();
    const double target = spec_.inner_tolerance * bnorm;
    int it = 0;
    while (std::sqrt(rr) > target) {
      if (it == spec_.inner_max_iters) {
        throw ConvergenceError(
            "shift_invert: inner CG did not reach tolerance in " +
                std::to_string(spec_.inner_max_iters) + " iterations",
            std::sqrt(rr) / bnorm);
      }
      Block q;
      base_->apply_into(d, q);
      q += spec_.mu * d;
      const double dq = std::real((d.adjoint() * q)(0, 0));
      const double step = rr / dq;
      sol += step * d;
      r -= step * q;
      const double rr_new = r.squaredNorm();
      d = r + (rr_new / rr) * d;
      rr = rr_new;
      ++it;
    }
    return sol;
  }

  OperatorPtr<Scalar> base_;
  ShiftSpec spec_;
  mutable std::mutex warm_mutex_;
  mutable Block previous_;
};

/// Wraps op for smallest-eigenvalue computations.
///
/// negative_shift: mu I - A; mu must dominate lambda_max(A) (checked when
/// the operator knows its spectrum bound).
/// shift_invert: (A + mu I)^-1. Spectral-synthesis operators are inverted
/// exactly on their eigenvalues; everything else goes through inner CG.
template <typename Scalar>
OperatorPtr<Scalar> shift_operator(OperatorPtr<Scalar> op, const ShiftSpec& spec) {
  if (!(spec.mu >= 0.0)) throw ConstructionError("shift: mu must be >= 0");
  if (spec.mode == ShiftMode::negative_shift) {
    if (const auto hi = op->max_eigenvalue();
        hi && spec.mu < *hi * (1.0 - 1e-12)) {
      throw ConstructionError("negative_shift: mu = " + std::to_string(spec.mu) +
                              " is below lambda_max = " + std::to_string(*hi));
    }
    return std::make_shared<NegativeShiftOperator<Scalar>>(std::move(op), spec.mu);
  }
  if (spec.mu == 0.0) {
    const auto lo = op->min_eigenvalue();
    if (!lo || *lo <= 0.0) {
      throw ConstructionError(
          "shift_invert: A + mu I must be positive definite; use mu > 0");
    }
  }
  if (!(spec.inner_tolerance > 0.0) || spec.inner_max_iters < 1) {
    throw ConstructionError("shift_invert: invalid inner solver settings");
  }
  if (const auto* spectral = dynamic_cast<const SpectralOperator<Scalar>*>(op.get())) {
    RealVector inv = (spectral->eigenvalues().array() + spec.mu).inverse().matrix();
    return std::make_shared<SpectralOperator<Scalar>>(spectral->basis(), std::move(inv));
  }
  return std::make_shared<ShiftInvertOperator<Scalar>>(std::move(op), spec);
}

/// Back-transform an eigenvalue of the shifted operator to one of A.
inline double unshift_eigenvalue(ShiftMode mode, double mu, double shifted) {
  return mode == ShiftMode::shift_invert ? 1.0 / shifted - mu : mu - shifted;
}

}  // namespace bmeig
