#include "bmeig_cli/commands.hpp"

#include <complex>
#include <cstdio>
#include <filesystem>
#include <ostream>

#include "bmeig_cli/config.hpp"
#include "bmeig_cli/run.hpp"
#include "bmeig_cli/trace_io.hpp"

namespace bmeig::cli {

namespace {

std::string fixed(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

void print_outcome(std::ostream& out, const RunOutcome& o) {
  out << "operator: " << o.operator_description << "\n";
  if (o.mu) out << "shift mu: " << format_double(*o.mu) << "\n";
  out << "status: " << to_string(o.status) << " after " << o.iterations() << " iterations ("
      << fixed("%.3f", static_cast<double>(o.wall_ns) * 1e-9) << " s)";
  if (!o.message.empty()) out << ": " << o.message;
  out << "\n";
  if (!o.extracted) return;
  out << "  i  eigenvalue               reference                rel_error  residual\n";
  for (Index i = 0; i < o.eigenvalues.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const bool has_ref = o.reference && i < o.reference->size();
    char line[160];
    std::snprintf(line, sizeof line, "%3d  %-23.16e  %-23s  %-9s  %.3e\n", static_cast<int>(i + 1),
                  o.eigenvalues(i), has_ref ? fixed("%.16e", (*o.reference)(i)).c_str() : "-",
                  has_ref ? fixed("%.3e", (*o.report.relative_errors)[k]).c_str() : "-",
                  o.report.residuals[k]);
    out << line;
  }
  if (o.report.max_relative_error) {
    out << "max relative error: " << fixed("%.3e", *o.report.max_relative_error) << "\n";
  }
  out << "objective" << (o.report.objective_is_reduced ? " (reduced)" : "") << ": "
      << format_double(o.report.objective) << "\n";
}

std::string label_of(const RunConfig& cfg) {
  if (cfg.solver.kind == SolverKind::crgd) {
    return "crgd(N=" + std::to_string(cfg.solver.block) + ")";
  }
  std::string s = std::string("cg-") + to_string(cfg.solver.beta_rule);
  if (cfg.shift) s += "+" + std::string(to_string(cfg.shift->mode));
  if (cfg.op.kind == OperatorKind::spectral && cfg.op.top_shift > 0) {
    s += "+top" + std::to_string(cfg.op.top_shift);
  }
  return s;
}

Index dimension_of(const RunConfig& cfg) {
  switch (cfg.op.kind) {
    case OperatorKind::laplacian: return cfg.op.dims == 1 ? cfg.op.m : cfg.op.m * cfg.op.m;
    case OperatorKind::spectral: return cfg.op.n;
    case OperatorKind::file: return -1;
  }
  return -1;
}

template <typename Scalar>
int oracle_typed(const RunConfig& cfg, std::ostream& out) {
  const auto prob = build_problem<Scalar>(cfg);
  const Index n = prob.base->dim();
  if (n > 2000) throw ConfigError("", "oracle is limited to n <= 2000");
  const auto eig = dense_eig(materialize(*prob.base));
  const auto known = known_spectrum(cfg);
  out << "operator: " << prob.base->describe() << "\n";
  out << "  i  dense_eig                closed_form              rel_diff\n";
  for (Index j = 0; j < cfg.p; ++j) {
    const Index i = cfg.shift ? n - 1 - j : j;
    out << fixed("%3.0f", static_cast<double>(j + 1)) << "  " << fixed("%-23.16e", eig.values(i));
    if (known) {
      const double ref = (*known)(i);
      out << "  " << fixed("%-23.16e", ref) << "  "
          << fixed("%.3e", std::abs(eig.values(i) - ref) / std::max(std::abs(ref), 1e-300));
    }
    out << "\n";
  }
  return kExitOk;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = args.from_trace ? config_from_trace_file(args.path) : load_config(args.path);
    if (args.output) cfg.output = *args.output;
    const RunOutcome o = run(cfg);
    if (!cfg.output.empty()) write_trace_file(cfg.output, cfg, o);
    print_outcome(out, o);
    if (!o.extracted && o.status == SolveStatus::converged) return int(kExitNumerical);
    return o.exit_code();
  });
}

int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.paths.empty()) throw ConfigError("", "compare needs at least one config");
    std::vector<RunConfig> cfgs;
    for (const auto& p : args.paths) cfgs.push_back(load_config(p));
    const RunConfig& first = cfgs.front();
    for (std::size_t i = 1; i < cfgs.size(); ++i) {
      const RunConfig& c = cfgs[i];
      if (c.op.kind != first.op.kind || dimension_of(c) != dimension_of(first) ||
          (c.op.kind == OperatorKind::file && c.op.path != first.op.path)) {
        throw ConfigError("operator", args.paths[i] + " uses a different operator than " +
                                          args.paths[0]);
      }
      if (c.p != first.p) throw ConfigError("p", args.paths[i] + " uses a different p");
      if (c.field != first.field) {
        throw ConfigError("scalar", args.paths[i] + " uses a different scalar field");
      }
    }
    if (args.out_dir) std::filesystem::create_directories(*args.out_dir);

    int worst = kExitOk;
    out << "run  label                         status              iterations  wall_ms     "
           "max_rel_error\n";
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
      RunConfig cfg = cfgs[i];
      cfg.x0_seed = first.x0_seed;
      if (args.out_dir) {
        cfg.output = (std::filesystem::path(*args.out_dir) / ("run" + std::to_string(i) + ".csv"))
                         .string();
      }
      const RunOutcome o = run(cfg);
      if (!cfg.output.empty()) write_trace_file(cfg.output, cfg, o);
      char line[256];
      std::snprintf(line, sizeof line, "%-4zu %-29s %-19s %-11d %-11.1f ", i,
                    label_of(cfg).c_str(), to_string(o.status), o.iterations(),
                    static_cast<double>(o.wall_ns) * 1e-6);
      out << line;
      if (o.report.max_relative_error) {
        out << fixed("%.3e", *o.report.max_relative_error);
      } else {
        out << "-";
      }
      out << "\n";
      worst = std::max(worst, o.exit_code());
    }
    return worst;
  });
}

int cmd_spectrum(const SpectrumArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto kind = parse_spectrum_kind(args.kind);
    if (!kind || *kind == SpectrumKind::explicit_values) {
      throw ConfigError("kind", "expected random, uniform, ushape or logarithm, got '" +
                                    args.kind + "'");
    }
    SpectrumSpec spec;
    spec.kind = *kind;
    spec.n = args.n;
    spec.r = args.r;
    spec.seed = args.seed;
    spec.top_shift = args.top_shift;
    const RealVector v = generate_spectrum(spec);
    for (Index i = 0; i < v.size(); ++i) out << format_double(v(i)) << "\n";
    return int(kExitOk);
  });
}

int cmd_oracle(const OracleArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_config(args.path);
    if (cfg.field == ScalarField::complex) return oracle_typed<std::complex<double>>(cfg, out);
    return oracle_typed<double>(cfg, out);
  });
}

}  // namespace bmeig::cli
