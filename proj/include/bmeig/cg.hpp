#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bmeig/geometry.hpp"
#include "bmeig/linesearch.hpp"
#include "bmeig/linop.hpp"

namespace bmeig {

enum class BetaRule { fletcher_reeves, polak_ribiere_plus };

inline const char* to_string(BetaRule b) {
  return b == BetaRule::fletcher_reeves ? "fr" : "pr_plus";
}

enum class SolveStatus {
  converged,
  iteration_cap,
  line_search_failure,
  rank_collapse,
  step_too_large,
  stopped,  ///< an observer asked to stop
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::iteration_cap: return "iteration_cap";
    case SolveStatus::line_search_failure: return "line_search_failure";
    case SolveStatus::rank_collapse: return "rank_collapse";
    case SolveStatus::step_too_large: return "step_too_large";
    case SolveStatus::stopped: return "stopped";
  }
  return "?";
}

struct CgConfig {
  BetaRule beta_rule = BetaRule::polak_ribiere_plus;
  double grad_tolerance = 1e-8;
  int max_iters = 2000;
  LineSearchConfig line_search;
  /// Transport the previous direction (and gradient) by explicit horizontal
  /// projection every iteration, recording the Lyapunov solution norm.
  bool explicit_projection = false;
  bool record_wall_time = true;
  /// Step k is taken as replay_steps[k] instead of searching (flags are still
  /// evaluated). Used to compare two runs along identical steps; iterations
  /// past the end of the list search as usual.
  std::vector<double> replay_steps;
};

inline constexpr double kBlank = std::numeric_limits<double>::quiet_NaN();

/// One row of a solver trace. NaN marks a field the solver did not
/// populate for that iteration.
struct TraceRecord {
  int k = 0;
  double f = kBlank;
  double grad_norm = kBlank;
  double alpha = kBlank;
  double beta = kBlank;
  double cos_theta = kBlank;
  double descent_ratio = kBlank;
  bool armijo_ok = false;
  bool curvature_ok = false;
  double omega_norm = kBlank;
  std::int64_t wall_ns = -1;  ///< -1: not recorded

  // Not exported to CSV; kept for property checks.
  double slope = kBlank;       ///< g(xi_k, eta_k)
  double eta_norm = kBlank;    ///< ||eta_k||
  double decrease = kBlank;    ///< f(x_k + alpha eta_k) - f(x_k)
  bool has_step = false;
  bool restarted = false;
  int line_evals = 0;
};

template <typename Scalar>
struct SolveResult {
  Matrix<Scalar> x;
  std::vector<TraceRecord> trace;
  SolveStatus status = SolveStatus::iteration_cap;
  std::string message;
};

/// Called with (x_k, record k) after each trace record; returning true
/// stops the run at x_k.
template <typename Scalar>
using CgObserver =
    std::function<bool(const Matrix<Scalar>& x, const TraceRecord& record)>;

/// ||xi_new||^2 / ||xi_old||^2.
template <typename Scalar>
double beta_fr(const Matrix<Scalar>& xi_new, const Matrix<Scalar>& xi_old) {
  const double denom = real_inner(xi_old, xi_old);
  if (!(denom > 0.0)) throw Error("beta_fr: previous gradient is zero");
  return real_inner(xi_new, xi_new) / denom;
}

/// max(0, <xi_new, xi_new - T(xi_old)> / ||xi_old||^2).
template <typename Scalar>
double beta_pr_plus(const Matrix<Scalar>& xi_new,
                    const Matrix<Scalar>& xi_old_transported,
                    const Matrix<Scalar>& xi_old) {
  const double denom = real_inner(xi_old, xi_old);
  if (!(denom > 0.0)) throw Error("beta_pr_plus: previous gradient is zero");
  const double num = real_inner(xi_new, xi_new) - real_inner(xi_new, xi_old_transported);
  return std::max(0.0, num / denom);
}

/// The objective along x + a eta is a quartic in a. Its coefficients, built
/// from p x p products and one application of A to eta, give
/// phi(a) = f(x + a eta) - f(x) without cancellation against f(x).
template <typename Scalar>
class QuarticLine {
 public:
  QuarticLine(const HermitianOperator<Scalar>& op, const Matrix<Scalar>& x,
              const Matrix<Scalar>& xi, const Matrix<Scalar>& eta) {
    const Matrix<Scalar> e = x.adjoint() * x;
    const Matrix<Scalar> b = eta.adjoint() * x;
    const Matrix<Scalar> s = b + b.adjoint();
    const Matrix<Scalar> c = eta.adjoint() * eta;
    const Matrix<Scalar> aeta = bmeig::apply(op, eta);
    coef_[0] = real_inner(xi, eta);
    coef_[1] = 0.5 * s.squaredNorm() + real_inner(e, c) - real_inner(eta, aeta);
    coef_[2] = real_inner(s, c);
    coef_[3] = 0.5 * c.squaredNorm();
  }

  double value(double a) const {
    return a * (coef_[0] + a * (coef_[1] + a * (coef_[2] + a * coef_[3])));
  }
  double derivative(double a) const {
    return coef_[0] + a * (2.0 * coef_[1] + a * (3.0 * coef_[2] + a * 4.0 * coef_[3]));
  }
  /// Coefficients of a, a^2, a^3, a^4.
  const std::array<double, 4>& coefficients() const { return coef_; }

 private:
  std::array<double, 4> coef_{};
};

/// Nonlinear conjugate gradient on f(x) = 1/2 ||x x* - A||_F^2:
///   x_{k+1} = x_k + alpha_k eta_k,  eta_{k+1} = -xi_{k+1} + beta_{k+1} eta_k
/// with strong-Wolfe steps and FR or PR+ beta. With explicit_projection,
/// eta_k and xi_k are horizontally projected at x_{k+1} before use, which is
/// the quotient-manifold form of the same iteration.
template <typename Scalar>
SolveResult<Scalar> cg_solve(const HermitianOperator<Scalar>& op,
                             const Matrix<Scalar>& x0, const CgConfig& cfg,
                             const CgObserver<Scalar>& observer = {}) {
  if (x0.rows() != op.dim()) throw DimensionError("cg_solve: x0 has wrong row count");
  if (x0.cols() < 1 || x0.cols() > x0.rows()) {
    throw DimensionError("cg_solve: need 1 <= p <= n");
  }
  if (!(cfg.grad_tolerance > 0.0) || cfg.max_iters < 1) {
    throw ConstructionError("cg_solve: need grad_tolerance > 0 and max_iters >= 1");
  }
  validate(cfg.line_search);
  if (GramFactor<Scalar>::of(x0).rank_ratio() < kRankWarning) {
    throw RankDeficiencyError("cg_solve: initial factor is rank deficient");
  }

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&]() -> std::int64_t {
    if (!cfg.record_wall_time) return -1;
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start)
        .count();
  };

  SolveResult<Scalar> out;
  Matrix<Scalar> x = x0;
  Matrix<Scalar> ax = bmeig::apply(op, x);
  Matrix<Scalar> xi = egrad_from(x, ax);
  double f = objective_from(op, x, ax).value();
  Matrix<Scalar> eta = -xi;
  double beta = 0.0;
  double prev_alpha = 0.0;
  double prev_slope = 0.0;

  for (int k = 0;; ++k) {
    TraceRecord rec;
    rec.k = k;
    rec.f = f;
    const double gnorm = xi.norm();
    rec.grad_norm = gnorm;
    rec.beta = beta;

    auto finish = [&](SolveStatus status, std::string msg = {}) {
      rec.wall_ns = elapsed();
      out.trace.push_back(rec);
      if (observer) observer(x, rec);
      out.status = status;
      out.message = std::move(msg);
    };

    if (gnorm < cfg.grad_tolerance) {
      finish(SolveStatus::converged);
      break;
    }
    if (k == cfg.max_iters) {
      finish(SolveStatus::iteration_cap);
      break;
    }

    double slope = real_inner(xi, eta);
    if (!(slope < 0.0)) {
      // Not a descent direction (PR+ or after a relaxed step): restart.
      eta = -xi;
      slope = -gnorm * gnorm;
      rec.beta = 0.0;
      rec.restarted = true;
    }
    const double eta_norm = eta.norm();
    rec.slope = slope;
    rec.eta_norm = eta_norm;
    rec.descent_ratio = slope / (gnorm * gnorm);
    rec.cos_theta = std::clamp(-slope / (gnorm * eta_norm), -1.0, 1.0);

    LineSearchConfig ls_cfg = cfg.line_search;
    if (k == 0) {
      ls_cfg.alpha_init = 1.0 / gnorm;
    } else {
      ls_cfg.alpha_init = std::clamp(prev_alpha * (prev_slope / slope),
                                     1e-3 * prev_alpha, 1e3 * prev_alpha);
    }

    const QuarticLine<Scalar> line(op, x, xi, eta);
    LineSearchResult ls;
    if (static_cast<std::size_t>(k) < cfg.replay_steps.size()) {
      const double a = cfg.replay_steps[static_cast<std::size_t>(k)];
      ls.phi0 = 0.0;
      ls.dphi0 = line.derivative(0.0);
      ls.accepted = {a, line.value(a), line.derivative(a), false, false};
      ls.accepted.armijo_ok = ls.accepted.phi <= ls_cfg.c1 * a * ls.dphi0;
      ls.accepted.curvature_ok = std::abs(ls.accepted.dphi) <= ls_cfg.c2 * std::abs(ls.dphi0);
      ls.probes = {ls.accepted};
    } else {
      try {
        ls = strong_wolfe([&](double a) { return line.value(a); },
                          [&](double a) { return line.derivative(a); }, ls_cfg);
      } catch (const LineSearchError& e) {
        finish(SolveStatus::line_search_failure, e.what());
        break;
      }
    }
    rec.has_step = true;
    rec.alpha = ls.accepted.alpha;
    rec.armijo_ok = ls.accepted.armijo_ok;
    rec.curvature_ok = ls.accepted.curvature_ok;
    rec.decrease = ls.accepted.phi;
    rec.line_evals = static_cast<int>(ls.probes.size());

    RankDiagnostic diag;
    Matrix<Scalar> x_new = retract(x, eta, rec.alpha, &diag);
    if (diag.rank_ratio < kRankWarning) {
      finish(SolveStatus::rank_collapse,
             "accepted iterate lost rank (ratio " + std::to_string(diag.rank_ratio) + ")");
      break;
    }
    Matrix<Scalar> ax_new = bmeig::apply(op, x_new);
    Matrix<Scalar> xi_new = egrad_from(x_new, ax_new);
    const double f_new = objective_from(op, x_new, ax_new).value();

    Matrix<Scalar> eta_t = eta;
    Matrix<Scalar> xi_t = xi;
    if (cfg.explicit_projection) {
      const auto e_new = GramFactor<Scalar>::of(x_new);
      auto proj_eta = project_horizontal_with(x_new, e_new, eta);
      rec.omega_norm = proj_eta.omega.norm();
      eta_t = std::move(proj_eta.block);
      xi_t = project_horizontal_with(x_new, e_new, xi).block;
    }
    const double xi_new_norm = xi_new.norm();
    double beta_new = 0.0;
    if (xi_new_norm >= cfg.grad_tolerance) {
      beta_new = cfg.beta_rule == BetaRule::fletcher_reeves
                     ? beta_fr(xi_new, xi)
                     : beta_pr_plus(xi_new, xi_t, xi);
    }

    rec.wall_ns = elapsed();
    out.trace.push_back(rec);
    if (observer && observer(x, rec)) {
      out.status = SolveStatus::stopped;
      break;
    }

    prev_alpha = rec.alpha;
    prev_slope = slope;
    eta = -xi_new + beta_new * eta_t;
    beta = beta_new;
    x = std::move(x_new);
    ax = std::move(ax_new);
    xi = std::move(xi_new);
    f = f_new;
  }
  out.x = std::move(x);
  return out;
}

}  // namespace bmeig
