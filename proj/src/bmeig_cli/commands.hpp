#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bmeig::cli {

struct RunArgs {
  std::string path;
  bool from_trace = false;  ///< path is a trace file; rerun from its header
  std::optional<std::string> output;
};

struct CompareArgs {
  std::vector<std::string> paths;
  std::optional<std::string> out_dir;
};

struct SpectrumArgs {
  std::string kind;
  std::int64_t n = 0;
  std::int64_t r = 0;
  std::uint64_t seed = 0;
  std::int64_t top_shift = 0;
};

struct OracleArgs {
  std::string path;
};

// Each returns the process exit code; diagnostics go to err.
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err);
int cmd_spectrum(const SpectrumArgs& args, std::ostream& out, std::ostream& err);
int cmd_oracle(const OracleArgs& args, std::ostream& out, std::ostream& err);

}  // namespace bmeig::cli
