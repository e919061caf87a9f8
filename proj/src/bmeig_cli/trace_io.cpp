#include "bmeig_cli/trace_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace bmeig::cli {

namespace {

std::string num(double v) { return std::isnan(v) ? std::string() : format_double(v); }

}  // namespace

void write_trace(std::ostream& os, const RunConfig& cfg, const RunOutcome& out) {
  os << "# bmeig trace\n";
  os << "# meta.version=" << kVersion << "\n";
  os << "# meta.operator=" << out.operator_description << "\n";
  for (const auto& [k, v] : cfg.resolved()) os << "# " << k << "=" << v << "\n";
  if (out.mu) os << "# meta.shift_mu=" << format_double(*out.mu) << "\n";
  os << "# meta.status=" << to_string(out.status) << "\n";
  os << kTraceColumns << "\n";
  const bool cg = cfg.solver.kind == SolverKind::cg;
  for (const auto& r : out.trace) {
    const bool step = cg && r.has_step;
    os << r.k << ',' << num(r.f) << ',' << num(r.grad_norm) << ',' << num(r.alpha) << ','
       << num(r.beta) << ',' << num(r.cos_theta) << ',' << num(r.descent_ratio) << ','
       << (step ? (r.armijo_ok ? "1" : "0") : "") << ','
       << (step ? (r.curvature_ok ? "1" : "0") : "") << ',' << num(r.omega_norm) << ',';
    if (r.wall_ns >= 0) os << r.wall_ns;
    os << '\n';
  }
}

void write_trace_file(const std::string& path, const RunConfig& cfg, const RunOutcome& out) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write trace file '" + path + "'");
  write_trace(os, cfg, out);
  if (!os) throw Error("error writing trace file '" + path + "'");
}

RunConfig config_from_trace(std::istream& in, const std::string& source) {
  std::ostringstream cfg_text;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0) break;
    const std::string body = line.substr(2);
    const auto eq = body.find('=');
    if (eq == std::string::npos || body.rfind("meta.", 0) == 0) continue;
    cfg_text << body << "\n";
  }
  std::istringstream is(cfg_text.str());
  return parse_config(is, source + " (header)");
}

RunConfig config_from_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open '" + path + "'");
  return config_from_trace(in, path);
}

}  // namespace bmeig::cli
