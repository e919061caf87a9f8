#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "bmeig/cg.hpp"
#include "bmeig/geometry.hpp"
#include "bmeig/linop.hpp"

namespace bmeig {

/// Cyclic row-block selector: block k holds the N rows starting at
/// (k N mod n), wrapping past row n-1 back to row 0.
struct BlockMask {
  Index n = 1;
  Index block = 1;  ///< N

  BlockMask(Index n_, Index block_) : n(n_), block(block_) {
    if (block_ < 1 || block_ > n_) {
      throw ConstructionError("block mask: require 1 <= N <= n");
    }
  }

  Index start(std::int64_t k) const {
    const std::int64_t kk = k % static_cast<std::int64_t>(n);
    return static_cast<Index>((kk * block) % n);
  }

  std::vector<Index> rows(std::int64_t k) const {
    std::vector<Index> out(static_cast<std::size_t>(block));
    const Index s = start(k);
    for (Index i = 0; i < block; ++i) {
      out[static_cast<std::size_t>(i)] = (s + i) % n;
    }
    return out;
  }

  /// Position of row r inside block k, or -1 when r is not selected.
  Index position(std::int64_t k, Index r) const {
    const Index offset = (r - start(k) + n) % n;
    return offset < block ? offset : Index{-1};
  }

  /// Blocks per full pass over the rows: ceil(n / N).
  Index sweep_length() const { return (n + block - 1) / block; }
};

template <typename Scalar>
struct MaskedBlock {
  Matrix<Scalar> block;      ///< N x p
  std::vector<Index> rows;   ///< row index of each block row
};

/// M_k(Z): the cyclically selected N rows of Z.
template <typename Scalar>
MaskedBlock<Scalar> mask(const Matrix<Scalar>& z, std::int64_t k, Index block) {
  const BlockMask m(z.rows(), block);
  MaskedBlock<Scalar> out;
  out.rows = m.rows(k);
  out.block.resize(block, z.cols());
  for (Index i = 0; i < block; ++i) {
    out.block.row(i) = z.row(out.rows[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// Compact CRGD state. delta is held as an N x p block over its support
/// rows; a, b, c, s are the p x p products
///   a = x* x,  b = delta* x,  c = delta* delta,  s = a + alpha (b + b*) + alpha^2 c,
/// so s is the Gram factor of x + alpha delta.
template <typename Scalar>
struct CompactState {
  Matrix<Scalar> x;
  Matrix<Scalar> delta;
  std::vector<Index> rows;
  std::int64_t k = 0;  ///< mask index of delta
  Matrix<Scalar> a, b, c, s;
  double alpha = 0.0;
  BlockMask mask{1, 1};

  /// Steps between full recomputes of a = x* x; 0 disables the refresh.
  Index gram_refresh_interval = 0;
  Index steps_since_refresh = 0;
  double last_drift = 0.0;  ///< ||a - x* x||_F / ||x* x||_F at the last refresh

  /// n x p zero block; rows of delta are scattered in for apply_rows and
  /// cleared again, so each step touches O(N) of it.
  Matrix<Scalar> scratch;
};

inline constexpr double kGramDriftTolerance = 1e-8;

namespace detail {

template <typename Scalar>
void refresh_s(CompactState<Scalar>& st) {
  st.s = st.a + st.alpha * (st.b + st.b.adjoint()) + st.alpha * st.alpha * st.c;
}

template <typename Scalar>
Matrix<Scalar> gather_rows(const Matrix<Scalar>& z, const std::vector<Index>& rows) {
  Matrix<Scalar> out(static_cast<Index>(rows.size()), z.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = z.row(rows[i]);
  return out;
}

}  // namespace detail

/// Initial state: delta_0 = M_0(-grad f(x0)), computed from the selected rows
/// only (after one O(n p^2) Gram product).
template <typename Scalar>
CompactState<Scalar> make_compact_state(const HermitianOperator<Scalar>& op,
                                        const Matrix<Scalar>& x0, Index block,
                                        double alpha) {
  if (!op.has_row_access()) {
    throw CapabilityError("crgd: operator '" + op.describe() + "' has no row-block access");
  }
  if (x0.rows() != op.dim()) throw DimensionError("crgd: x0 has wrong row count");
  if (!(alpha > 0.0)) throw ConstructionError("crgd: step size must be positive");
  CompactState<Scalar> st;
  st.mask = BlockMask(op.dim(), block);
  st.x = x0;
  st.alpha = alpha;
  st.k = 0;
  st.rows = st.mask.rows(0);
  st.a = gram(x0);
  const Matrix<Scalar> x_rows = detail::gather_rows(st.x, st.rows);
  st.delta = -2.0 * (x_rows * st.a) + 2.0 * apply_rows(op, st.x, st.rows);
  st.b = st.delta.adjoint() * x_rows;
  st.c = st.delta.adjoint() * st.delta;
  detail::refresh_s(st);
  st.gram_refresh_interval = st.mask.sweep_length();
  st.scratch = Matrix<Scalar>::Zero(x0.rows(), x0.cols());
  return st;
}

/// One compact CRGD iteration:
///   x_{k+1} = x_k + alpha delta_k                              (rows of delta_k)
///   delta_{k+1} = -2 M(x_k s_k) - 2 alpha M(delta_k s_k)
///                 + 2 M(A x_k) + 2 alpha M(A delta_k)          (M = M_{k+1})
///   a_{k+1} = a_k + alpha (b_k + b_k*) + alpha^2 c_k
///   b_{k+1} = delta_{k+1}* x_{k+1},  c_{k+1} = delta_{k+1}* delta_{k+1}
/// Every row-indexed access is confined to the two masked blocks and the
/// rows A couples them to.
template <typename Scalar>
void crgd_step(const HermitianOperator<Scalar>& op, CompactState<Scalar>& st) {
  const std::int64_t next = st.k + 1;
  const std::vector<Index> next_rows = st.mask.rows(next);
  const Index nb = st.mask.block;
  const Index p = st.x.cols();

  const Matrix<Scalar> x_next = detail::gather_rows(st.x, next_rows);
  Matrix<Scalar> delta_next_rows = Matrix<Scalar>::Zero(nb, p);
  for (Index i = 0; i < nb; ++i) {
    const Index pos = st.mask.position(st.k, next_rows[static_cast<std::size_t>(i)]);
    if (pos >= 0) delta_next_rows.row(i) = st.delta.row(pos);
  }
  const Matrix<Scalar> ax_rows = apply_rows(op, st.x, next_rows);
  for (Index i = 0; i < nb; ++i) st.scratch.row(st.rows[static_cast<std::size_t>(i)]) = st.delta.row(i);
  const Matrix<Scalar> adelta_rows = apply_rows(op, st.scratch, next_rows);
  for (Index i = 0; i < nb; ++i) st.scratch.row(st.rows[static_cast<std::size_t>(i)]).setZero();

  Matrix<Scalar> delta_new = -2.0 * (x_next * st.s) -
                             2.0 * st.alpha * (delta_next_rows * st.s) +
                             2.0 * ax_rows + 2.0 * st.alpha * adelta_rows;

  for (Index i = 0; i < nb; ++i) {
    st.x.row(st.rows[static_cast<std::size_t>(i)]) += st.alpha * st.delta.row(i);
  }
  st.a = st.a + st.alpha * (st.b + st.b.adjoint()) + st.alpha * st.alpha * st.c;
  st.a = hermitian_part<Scalar>(st.a);

  st.delta = std::move(delta_new);
  st.rows = next_rows;
  st.k = next;
  const Matrix<Scalar> x_new_rows = detail::gather_rows(st.x, st.rows);
  st.b = st.delta.adjoint() * x_new_rows;
  st.c = st.delta.adjoint() * st.delta;

  if (st.gram_refresh_interval > 0 && ++st.steps_since_refresh >= st.gram_refresh_interval) {
    const Matrix<Scalar> exact = gram(st.x);
    const double scale = exact.norm();
    st.last_drift = scale > 0.0 ? (st.a - exact).norm() / scale : 0.0;
    st.a = exact;
    st.steps_since_refresh = 0;
  }
  detail::refresh_s(st);
}

struct CrgdConfig {
  Index block = 1;        ///< N
  double alpha = 1e-4;    ///< constant step size
  double tolerance = 1e-8;
  int max_iters = 100000;
  bool record_wall_time = true;
};

/// Cyclic coordinate Riemannian gradient descent, compact form.
///
/// Converges when every masked direction over one full sweep (ceil(n/N)
/// consecutive blocks) has norm below the tolerance. The objective is
/// sampled once per sweep; three consecutive increases abort with
/// step_too_large, as does a non-finite sample.
template <typename Scalar>
SolveResult<Scalar> crgd_solve(const HermitianOperator<Scalar>& op,
                               const Matrix<Scalar>& x0, const CrgdConfig& cfg) {
  if (!(cfg.tolerance > 0.0) || cfg.max_iters < 0) {
    throw ConstructionError("crgd: tolerance must be positive");
  }
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  CompactState<Scalar> st = make_compact_state(op, x0, cfg.block, cfg.alpha);
  const Index sweep = st.mask.sweep_length();
  SolveResult<Scalar> out;
  Index small_run = 0;
  int rises = 0;
  double last_f = kBlank;

  for (int k = 0;; ++k) {
    TraceRecord rec;
    rec.k = k;
    rec.alpha = cfg.alpha;
    rec.grad_norm = st.delta.norm();
    if (k % sweep == 0) {
      rec.f = objective(op, st.x).value();
    }
    if (cfg.record_wall_time) {
      rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
    }
    out.trace.push_back(rec);

    if (!std::isnan(rec.f)) {
      if (!std::isfinite(rec.f)) {
        out.status = SolveStatus::step_too_large;
        out.message = "objective is not finite";
        break;
      }
      if (!std::isnan(last_f) && rec.f > last_f) {
        if (++rises >= 3) {
          out.status = SolveStatus::step_too_large;
          out.message = "objective increased over three consecutive sweeps";
          break;
        }
      } else {
        rises = 0;
      }
      last_f = rec.f;
    }
    if (!std::isfinite(rec.grad_norm)) {
      out.status = SolveStatus::step_too_large;
      out.message = "masked direction is not finite";
      break;
    }

    small_run = rec.grad_norm < cfg.tolerance ? small_run + 1 : 0;
    if (small_run >= sweep) {
      out.status = SolveStatus::converged;
      break;
    }
    if (k == cfg.max_iters) {
      out.status = SolveStatus::iteration_cap;
      break;
    }
    crgd_step(op, st);
  }
  out.x = std::move(st.x);
  return out;
}

}  // namespace bmeig
