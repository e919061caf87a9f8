#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bmeig/bmeig.hpp"
#include "bmeig_cli/config.hpp"

namespace bmeig::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNotConverged = 3,
  kExitNumerical = 4,
};

/// Operator before any shift, and the shifted operator the solver sees.
template <typename Scalar>
struct Problem {
  OperatorPtr<Scalar> base;
  OperatorPtr<Scalar> solved;
  std::optional<double> mu;  ///< resolved shift, if any
};

template <typename Scalar>
Problem<Scalar> build_problem(const RunConfig& cfg);

/// Known eigenvalues of the base operator, sorted non-increasing (all n).
std::optional<RealVector> known_spectrum(const RunConfig& cfg);

/// The p eigenvalues of the base operator a run targets, in the order the
/// extracted pairs come out: largest first without a shift, smallest first
/// with one.
std::optional<RealVector> target_eigenvalues(const RunConfig& cfg);

struct RunOutcome {
  SolveStatus status = SolveStatus::iteration_cap;
  std::string message;
  std::vector<TraceRecord> trace;
  RealVector eigenvalues;  ///< of the base operator
  std::optional<RealVector> reference;
  ErrorReport report;      ///< residuals against the base operator
  std::optional<double> mu;
  std::string operator_description;
  std::int64_t wall_ns = 0;
  bool extracted = false;  ///< false when the final factor was rank deficient

  int iterations() const { return trace.empty() ? 0 : trace.back().k; }
  int exit_code() const;
};

struct RunOptions {
  std::optional<std::uint64_t> x0_seed;  ///< overrides cfg.x0_seed
};

/// Builds the problem, runs the configured solver from the seeded start and
/// extracts eigenpairs. Library errors propagate as exceptions.
RunOutcome run(const RunConfig& cfg, const RunOptions& opts = {});

/// Maps an exception from run() to an exit code.
int exit_code_for(const std::exception& e);

}  // namespace bmeig::cli
