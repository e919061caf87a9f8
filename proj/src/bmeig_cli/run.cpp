#include "bmeig_cli/run.hpp"

#include <chrono>
#include <complex>

#include "bmeig_cli/coo.hpp"

namespace bmeig::cli {

namespace {

// Auto mu for negative_shift: the power estimate is a Rayleigh quotient and
// sits below lambda_max, so it is raised by a relative margin.
constexpr double kAutoMuMargin = 5e-2;

template <typename Scalar>
OperatorPtr<Scalar> build_base(const RunConfig& cfg) {
  const OperatorConfig& op = cfg.op;
  switch (op.kind) {
    case OperatorKind::laplacian:
      return build_laplacian<Scalar>({op.m, op.dims});
    case OperatorKind::spectral: {
      SpectrumSpec spec;
      spec.kind = op.spectrum;
      spec.n = op.n;
      spec.r = op.r;
      spec.seed = op.seed;
      spec.top_shift = op.top_shift;
      return build_spectral<Scalar>(spec, op.basis, op.seed);
    }
    case OperatorKind::file:
      return load_coordinate_operator<Scalar>(op.path, op.lower_triangle);
  }
  throw ConfigError("operator.kind", "unsupported");
}

template <typename Scalar>
RunOutcome run_typed(const RunConfig& cfg, std::uint64_t seed) {
  using Clock = std::chrono::steady_clock;
  RunOutcome out;
  const Problem<Scalar> prob = build_problem<Scalar>(cfg);
  const auto& op = *prob.solved;
  out.mu = prob.mu;
  out.operator_description = op.describe();
  if (cfg.p > op.dim()) throw ConfigError("p", "must not exceed the operator dimension");
  if (cfg.solver.kind == SolverKind::crgd && cfg.solver.block > op.dim()) {
    throw ConfigError("solver.block", "must not exceed the operator dimension");
  }

  const auto start = Clock::now();
  Matrix<Scalar> x0 = default_initial_factor<Scalar>(op.dim(), cfg.p, seed);
  if (cfg.x0_ray_scale) x0 = scale_to_ray_minimizer(op, x0);

  SolveResult<Scalar> res;
  if (cfg.solver.kind == SolverKind::cg) {
    CgConfig cg;
    cg.beta_rule = cfg.solver.beta_rule;
    cg.grad_tolerance = cfg.solver.tolerance;
    cg.max_iters = cfg.solver.max_iters;
    cg.line_search.c1 = cfg.solver.c1;
    cg.line_search.c2 = cfg.solver.c2;
    cg.explicit_projection = cfg.solver.explicit_projection;
    cg.record_wall_time = cfg.record_wall_time;
    res = cg_solve(op, x0, cg);
  } else {
    CrgdConfig cd;
    cd.block = cfg.solver.block;
    cd.alpha = cfg.solver.alpha;
    cd.tolerance = cfg.solver.tolerance;
    cd.max_iters = cfg.solver.max_iters;
    cd.record_wall_time = cfg.record_wall_time;
    res = crgd_solve(op, x0, cd);
  }
  out.wall_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
  out.status = res.status;
  out.message = res.message;
  out.trace = std::move(res.trace);
  out.reference = target_eigenvalues(cfg);

  EigenPairs<Scalar> pairs;
  try {
    pairs = extract_eigenpairs(op, res.x);
  } catch (const RankDeficiencyError& e) {
    if (out.status == SolveStatus::converged) throw;
    out.message += out.message.empty() ? e.what() : std::string("; ") + e.what();
    return out;
  }
  out.extracted = true;
  if (cfg.shift) {
    for (Index i = 0; i < pairs.values.size(); ++i) {
      pairs.values(i) = unshift_eigenvalue(cfg.shift->mode, *prob.mu, pairs.values(i));
    }
  }
  out.eigenvalues = pairs.values;
  out.report = error_report(*prob.base, pairs, out.reference);
  return out;
}

}  // namespace

template <typename Scalar>
Problem<Scalar> build_problem(const RunConfig& cfg) {
  Problem<Scalar> prob;
  prob.base = build_base<Scalar>(cfg);
  prob.solved = prob.base;
  if (cfg.shift) {
    ShiftSpec spec;
    spec.mode = cfg.shift->mode;
    spec.inner_tolerance = cfg.shift->inner_tolerance;
    spec.inner_max_iters = cfg.shift->inner_max_iters;
    if (cfg.shift->mu) {
      spec.mu = *cfg.shift->mu;
    } else {
      spec.mu = (1.0 + kAutoMuMargin) * estimate_max_eigenvalue(*prob.base);
    }
    prob.mu = spec.mu;
    prob.solved = shift_operator<Scalar>(prob.base, spec);
  }
  return prob;
}

template Problem<double> build_problem<double>(const RunConfig&);
template Problem<std::complex<double>> build_problem<std::complex<double>>(const RunConfig&);

std::optional<RealVector> known_spectrum(const RunConfig& cfg) {
  switch (cfg.op.kind) {
    case OperatorKind::laplacian:
      return laplacian_eigenvalues({cfg.op.m, cfg.op.dims});
    case OperatorKind::spectral: {
      SpectrumSpec spec;
      spec.kind = cfg.op.spectrum;
      spec.n = cfg.op.n;
      spec.r = cfg.op.r;
      spec.seed = cfg.op.seed;
      spec.top_shift = cfg.op.top_shift;
      RealVector v = generate_spectrum(spec);
      std::sort(v.begin(), v.end(), std::greater<>());
      return v;
    }
    case OperatorKind::file:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<RealVector> target_eigenvalues(const RunConfig& cfg) {
  auto all = known_spectrum(cfg);
  if (!all || cfg.p > all->size()) return std::nullopt;
  if (!cfg.shift) return RealVector(all->head(cfg.p));
  return RealVector(all->tail(cfg.p).reverse());
}

int RunOutcome::exit_code() const {
  switch (status) {
    case SolveStatus::converged: return kExitOk;
    case SolveStatus::iteration_cap:
    case SolveStatus::stopped: return kExitNotConverged;
    default: return kExitNumerical;
  }
}

RunOutcome run(const RunConfig& cfg, const RunOptions& opts) {
  const std::uint64_t seed = opts.x0_seed.value_or(cfg.x0_seed);
  if (cfg.field == ScalarField::complex) return run_typed<std::complex<double>>(cfg, seed);
  return run_typed<double>(cfg, seed);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return kExitConfig;
  if (dynamic_cast<const ConstructionError*>(&e) != nullptr) return kExitConfig;
  if (dynamic_cast<const DimensionError*>(&e) != nullptr) return kExitConfig;
  return kExitNumerical;
}

}  // namespace bmeig::cli
