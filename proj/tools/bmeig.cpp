#include <iostream>

#include <CLI11.hpp>

#include "bmeig/bmeig.hpp"
#include "bmeig_cli/commands.hpp"
#include "bmeig_cli/run.hpp"

int main(int argc, char** argv) {
  using namespace bmeig::cli;
  CLI::App app{"Extreme eigenpairs of Hermitian PSD operators by Burer-Monteiro CG and "
               "cyclic coordinate descent"};
  app.set_version_flag("--version", bmeig::kVersion);
  app.require_subcommand(1);

  RunArgs run_args;
  std::string run_output;
  auto* run = app.add_subcommand("run", "Run one configuration and print the eigenpairs");
  run->add_option("config", run_args.path, "Config file (or trace file with --from-trace)")
      ->required();
  run->add_flag("--from-trace", run_args.from_trace, "Rerun from the header of a trace file");
  run->add_option("-o,--output", run_output, "Trace CSV path (overrides the config)");

  CompareArgs cmp_args;
  auto* cmp = app.add_subcommand("compare", "Run several configurations from the same x0");
  cmp->add_option("configs", cmp_args.paths, "Config files")->required();
  std::string out_dir;
  cmp->add_option("--out-dir", out_dir, "Write run<i>.csv traces here");

  SpectrumArgs sp_args;
  auto* sp = app.add_subcommand("spectrum", "Print a generated eigenvalue list");
  sp->add_option("kind", sp_args.kind, "random, uniform, ushape or logarithm")->required();
  sp->add_option("n", sp_args.n, "Dimension")->required();
  sp->add_option("r", sp_args.r, "Rank")->required();
  sp->add_option("seed", sp_args.seed, "Seed (used by random)")->required();
  sp->add_option("--top-shift", sp_args.top_shift, "Raise the leading t eigenvalues by lambda_1");

  OracleArgs or_args;
  auto* orc = app.add_subcommand("oracle", "Dense reference eigenvalues for small n");
  orc->add_option("config", or_args.path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (*run) {
    if (!run_output.empty()) run_args.output = run_output;
    return cmd_run(run_args, std::cout, std::cerr);
  }
  if (*cmp) {
    if (!out_dir.empty()) cmp_args.out_dir = out_dir;
    return cmd_compare(cmp_args, std::cout, std::cerr);
  }
  if (*sp) return cmd_spectrum(sp_args, std::cout, std::cerr);
  return cmd_oracle(or_args, std::cout, std::cerr);
}
