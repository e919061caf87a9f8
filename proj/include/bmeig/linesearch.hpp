#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bmeig/types.hpp"

namespace bmeig {

struct LineSearchConfig {
  double c1 = 1e-4;
  double c2 = 0.4;
  double alpha_init = 1.0;
  int max_evals = 60;
  int zoom_max = 40;
};

/// Throws ConstructionError unless 0 < c1 < c2 < 1/2 and the budgets are
/// positive. c2 < 1/2 is what keeps Fletcher-Reeves directions descending.
inline void validate(const LineSearchConfig& cfg) {
  if (!(cfg.c1 > 0.0 && cfg.c1 < cfg.c2 && cfg.c2 < 0.5)) {
    throw ConstructionError("line search: require 0 < c1 < c2 < 1/2");
  }
  if (!(cfg.alpha_init > 0.0) || cfg.max_evals < 1 || cfg.zoom_max < 1) {
    throw ConstructionError("line search: alpha_init and budgets must be positive");
  }
}

struct LineProbe {
  double alpha = 0.0;
  double phi = 0.0;   ///< phi(alpha)
  double dphi = 0.0;  ///< phi'(alpha)
  bool armijo_ok = false;
  bool curvature_ok = false;
};

struct LineSearchResult {
  LineProbe accepted;             ///< curvature_ok is false on the fallback path
  std::vector<LineProbe> probes;  ///< every evaluation, in order
  double phi0 = 0.0;
  double dphi0 = 0.0;
};

namespace detail {

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db), or NaN
// when the cubic has no interior minimizer.
inline double cubic_minimizer(double a, double fa, double da, double b,
                              double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = (b > a ? 1.0 : -1.0) * std::sqrt(disc);
  const double denom = db - da + 2.0 * d2;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return b - (b - a) * (db + d2 - d1) / denom;
}

}  // namespace detail

/// Step length satisfying the strong Wolfe conditions
///   phi(a) <= phi(0) + c1 a phi'(0),   |phi'(a)| <= c2 |phi'(0)|
/// by expansion (a <- 2a) until a bracket is found, then zoom with
/// safeguarded cubic interpolation (bisection fallback).
///
/// phi and dphi are callables double -> double. If the zoom budget runs out
/// the lowest Armijo-satisfying probe is returned with curvature_ok = false.
template <typename Phi, typename DPhi>
LineSearchResult strong_wolfe(Phi&& phi, DPhi&& dphi, const LineSearchConfig& cfg) {
  validate(cfg);
  LineSearchResult res;
  res.phi0 = phi(0.0);
  res.dphi0 = dphi(0.0);
  if (!(res.dphi0 < 0.0)) {
    throw NotDescentError("strong_wolfe: phi'(0) = " + std::to_string(res.dphi0) +
                          " is not negative");
  }
  const double phi0 = res.phi0;
  const double d0 = res.dphi0;

  auto probe = [&](double a) {
    LineProbe pr;
    pr.alpha = a;
    pr.phi = phi(a);
    pr.dphi = dphi(a);
    pr.armijo_ok = pr.phi <= phi0 + cfg.c1 * a * d0;
    pr.curvature_ok = std::abs(pr.dphi) <= cfg.c2 * std::abs(d0);
    res.probes.push_back(pr);
    return pr;
  };
  auto budget_left = [&] {
    return static_cast<int>(res.probes.size()) < cfg.max_evals;
  };
  auto fallback = [&]() -> LineSearchResult {
    const LineProbe* best = nullptr;
    for (const auto& pr : res.probes) {
      if (pr.armijo_ok && pr.alpha > 0.0 && (best == nullptr || pr.phi < best->phi)) {
        best = &pr;
      }
    }
    if (best == nullptr) {
      throw LineSearchError("strong_wolfe: no step satisfying the Armijo condition in " +
                            std::to_string(res.probes.size()) + " evaluations");
    }
    res.accepted = *best;
    res.accepted.curvature_ok = false;
    return res;
  };

  auto zoom = [&](LineProbe lo, LineProbe hi) -> LineSearchResult {
    for (int j = 0; j < cfg.zoom_max && budget_left(); ++j) {
      const double left = std::min(lo.alpha, hi.alpha);
      const double right = std::max(lo.alpha, hi.alpha);
      const double width = right - left;
      if (!(width > 0.0)) break;
      double a = detail::cubic_minimizer(lo.alpha, lo.phi, lo.dphi, hi.alpha,
                                         hi.phi, hi.dphi);
      if (!std::isfinite(a) || a < left + 0.1 * width || a > right - 0.1 * width) {
        a = 0.5 * (lo.alpha + hi.alpha);
      }
      const LineProbe pr = probe(a);
      if (!pr.armijo_ok || pr.phi >= lo.phi) {
        hi = pr;
      } else {
        if (pr.curvature_ok) {
          res.accepted = pr;
          return res;
        }
        if (pr.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = pr;
      }
    }
    return fallback();
  };

  LineProbe prev{0.0, phi0, d0, true, false};
  double a = cfg.alpha_init;
  while (budget_left()) {
    const LineProbe pr = probe(a);
    if (!pr.armijo_ok || (prev.alpha > 0.0 && pr.phi >= prev.phi)) {
      return zoom(prev, pr);
    }
    if (pr.curvature_ok) {
      res.accepted = pr;
      return res;
    }
    if (pr.dphi >= 0.0) return zoom(pr, prev);
    prev = pr;
    a *= 2.0;
  }
  return fallback();
}

}  // namespace bmeig
