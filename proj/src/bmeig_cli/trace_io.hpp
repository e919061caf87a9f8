#pragma once

#include <iosfwd>
#include <string>

#include "bmeig_cli/config.hpp"
#include "bmeig_cli/run.hpp"

namespace bmeig::cli {

inline constexpr const char* kTraceColumns =
    "iter,f,grad_norm,alpha,beta,cos_theta,descent_ratio,armijo_ok,curvature_ok,omega_norm,"
    "wall_ns";

/// Header of '# key=value' lines (the resolved config plus 'meta.' keys),
/// then the column line and one row per trace record. Unpopulated fields
/// are blank.
void write_trace(std::ostream& os, const RunConfig& cfg, const RunOutcome& out);
void write_trace_file(const std::string& path, const RunConfig& cfg, const RunOutcome& out);

/// Rebuilds the run configuration from a trace header. 'meta.' keys are
/// skipped.
RunConfig config_from_trace(std::istream& in, const std::string& source = "<trace>");
RunConfig config_from_trace_file(const std::string& path);

}  // namespace bmeig::cli
