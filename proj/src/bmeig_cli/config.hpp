#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bmeig/bmeig.hpp"

namespace bmeig::cli {

/// Invalid or incomplete run configuration. key() is the dotted field path.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config error: " + (key.empty() ? std::string() : key + ": ") + what),
        key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class OperatorKind { laplacian, spectral, file };
enum class SolverKind { cg, crgd };

struct OperatorConfig {
  OperatorKind kind = OperatorKind::laplacian;
  // laplacian
  Index m = 0;
  int dims = 2;
  // spectral
  SpectrumKind spectrum = SpectrumKind::uniform;
  Index n = 0;
  Index r = 0;
  std::uint64_t seed = 0;
  BasisKind basis = BasisKind::qr;
  Index top_shift = 0;
  // file
  std::string path;
  bool lower_triangle = false;  ///< mirror off-diagonal entries
};

struct ShiftConfig {
  ShiftMode mode = ShiftMode::shift_invert;
  std::optional<double> mu;  ///< nullopt: "auto" (negative_shift only)
  double inner_tolerance = 1e-12;
  int inner_max_iters = 10000;
};

struct SolverConfig {
  SolverKind kind = SolverKind::cg;
  BetaRule beta_rule = BetaRule::polak_ribiere_plus;
  double tolerance = 1e-8;
  int max_iters = 2000;
  double c1 = 1e-4;
  double c2 = 0.4;
  bool explicit_projection = false;
  Index block = 0;     ///< crgd N
  double alpha = 0.0;  ///< crgd step
};

struct RunConfig {
  ScalarField field = ScalarField::real;
  Index p = 0;
  std::uint64_t x0_seed = 0;
  bool x0_ray_scale = true;
  std::string output;  ///< empty: no trace file
  bool record_wall_time = true;
  OperatorConfig op;
  std::optional<ShiftConfig> shift;
  SolverConfig solver;

  /// Every field as (dotted key, value) in a fixed order, defaults included.
  /// Parsing the result gives back an identical configuration.
  std::vector<std::pair<std::string, std::string>> resolved() const;
};

/// Reads the key/value format:
///
///   # comment
///   p = 3
///   [operator]          (prefixes following keys with "operator.")
///   kind = laplacian
///
/// Dotted keys may also be written in full. Unknown or duplicate keys are
/// errors, as are keys that do not apply to the selected kinds.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Formats a double so it parses back to the same value.
std::string format_double(double v);

}  // namespace bmeig::cli
