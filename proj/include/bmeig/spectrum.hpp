#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bmeig/random.hpp"
#include "bmeig/types.hpp"

namespace bmeig {

enum class SpectrumKind { random, uniform, ushape, logarithm, explicit_values };

inline const char* to_string(SpectrumKind k) {
  switch (k) {
    case SpectrumKind::random: return "random";
    case SpectrumKind::uniform: return "uniform";
    case SpectrumKind::ushape: return "ushape";
    case SpectrumKind::logarithm: return "logarithm";
    case SpectrumKind::explicit_values: return "explicit";
  }
  return "?";
}

inline std::optional<SpectrumKind> parse_spectrum_kind(const std::string& s) {
  if (s == "random") return SpectrumKind::random;
  if (s == "uniform") return SpectrumKind::uniform;
  if (s == "ushape" || s == "u-shape") return SpectrumKind::ushape;
  if (s == "logarithm" || s == "log") return SpectrumKind::logarithm;
  if (s == "explicit") return SpectrumKind::explicit_values;
  return std::nullopt;
}

struct SpectrumSpec {
  SpectrumKind kind = SpectrumKind::uniform;
  Index n = 1;
  Index r = 1;
  std::uint64_t seed = 0;
  std::vector<double> values;  ///< explicit kind only
  /// Number of leading eigenvalues raised by lambda_1 (0 = no shift). Widens
  /// the gap between lambda_t and lambda_{t+1}.
  Index top_shift = 0;
};

/// Eigenvalue list of length n, sorted non-increasing, zero beyond rank r.
///
///   random     |N(0,1)| draws (NormalGenerator, given seed), sorted
///   uniform    1 - (i-1)/n
///   ushape     14/16, 10/16, 8/16, 7/16, 5/16, then 1/16
///   logarithm  2^(1 + floor(log2 n)) / n * 2^-i
///   explicit   the supplied values (r is their count)
inline RealVector generate_spectrum(const SpectrumSpec& spec) {
  Index r = spec.r;
  if (spec.kind == SpectrumKind::explicit_values) {
    r = static_cast<Index>(spec.values.size());
  }
  if (spec.n < 1 || r < 1 || r > spec.n) {
    throw ConstructionError("generate_spectrum: require n >= r >= 1");
  }
  std::vector<double> lam(static_cast<std::size_t>(r));
  switch (spec.kind) {
    case SpectrumKind::random: {
      NormalGenerator gen(spec.seed);
      for (auto& v : lam) v = std::abs(gen());
      break;
    }
    case SpectrumKind::uniform:
      for (Index i = 1; i <= r; ++i) {
        lam[static_cast<std::size_t>(i - 1)] =
            1.0 - static_cast<double>(i - 1) / static_cast<double>(spec.n);
      }
      break;
    case SpectrumKind::ushape: {
      static constexpr double lead[] = {14.0, 10.0, 8.0, 7.0, 5.0};
      for (Index i = 0; i < r; ++i) {
        lam[static_cast<std::size_t>(i)] = (i < 5 ? lead[i] : 1.0) / 16.0;
      }
      break;
    }
    case SpectrumKind::logarithm: {
      const auto n = static_cast<std::uint64_t>(spec.n);
      const int floor_log2 = std::bit_width(n) - 1;
      const double lead =
          std::ldexp(1.0, 1 + floor_log2) / static_cast<double>(spec.n);
      for (Index i = 1; i <= r; ++i) {
        lam[static_cast<std::size_t>(i - 1)] =
            lead * std::ldexp(1.0, -static_cast<int>(i));
      }
      break;
    }
    case SpectrumKind::explicit_values:
      for (std::size_t i = 0; i < lam.size(); ++i) {
        if (!(spec.values[i] >= 0.0)) {
          throw ConstructionError(
              "generate_spectrum: explicit eigenvalues must be >= 0");
        }
        lam[i] = spec.values[i];
      }
      break;
  }
  std::sort(lam.begin(), lam.end(), std::greater<>());
  if (spec.top_shift < 0 || spec.top_shift > r) {
    throw ConstructionError("generate_spectrum: top_shift must be in [0, r]");
  }
  const double lift = lam.front();
  for (Index i = 0; i < spec.top_shift; ++i) {
    lam[static_cast<std::size_t>(i)] += lift;
  }
  RealVector out = RealVector::Zero(spec.n);
  for (Index i = 0; i < r; ++i) out(i) = lam[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace bmeig
