#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "bmeig_cli/commands.hpp"
#include "bmeig_cli/config.hpp"
#include "bmeig_cli/coo.hpp"
#include "bmeig_cli/run.hpp"
#include "bmeig_cli/trace_io.hpp"

using namespace bmeig;
using namespace bmeig::cli;
namespace fs = std::filesystem;

namespace {

const char* kLaplacian = R"(# 2D Laplacian, top 3
p = 3
x0_seed = 1
record_wall_time = false
[operator]
kind = laplacian
m = 10
dims = 2
[solver]
kind = cg
beta_rule = pr_plus
)";

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test");
}

std::string config_error_key(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("bmeig_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    const auto p = path / name;
    std::ofstream(p) << text;
    return p.string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string body_of(const std::string& trace) {
  std::istringstream in(trace);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0) out += line + "\n";
  }
  return out;
}

int tool(const std::string& args) {
  const std::string cmd = std::string(BMEIG_TOOL) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config parsing: sections, dotted keys and defaults") {
  const RunConfig a = parse(kLaplacian);
  CHECK(a.p == 3);
  CHECK(a.op.kind == OperatorKind::laplacian);
  CHECK(a.op.m == 10);
  CHECK(a.solver.kind == SolverKind::cg);
  CHECK(a.solver.beta_rule == BetaRule::polak_ribiere_plus);
  CHECK(a.solver.tolerance == 1e-8);
  CHECK(a.solver.max_iters == 2000);
  CHECK(a.solver.c1 == 1e-4);
  CHECK(a.solver.c2 == 0.4);
  CHECK(a.x0_ray_scale);
  CHECK_FALSE(a.shift.has_value());
  CHECK(a.field == ScalarField::real);

  const RunConfig b = parse(
      "p=3\nx0_seed=1\nrecord_wall_time=false\noperator.kind=laplacian\noperator.m=10\n"
      "operator.dims=2\nsolver.kind=cg\nsolver.beta_rule=pr_plus\n");
  CHECK(a.resolved() == b.resolved());

  const RunConfig f = parse(
      "p=4\nx0_seed=2\n[operator]\nkind=spectral\nspectrum=uniform\nn=256\nseed=0\n"
      "basis=fourier\n[solver]\nkind=crgd\nblock=16\nalpha=1e-3\n");
  CHECK(f.field == ScalarField::complex);
  CHECK(f.op.r == 256);
  CHECK(f.solver.max_iters == 100000);
}

TEST_CASE("resolved configs parse back to themselves") {
  const std::vector<std::string> texts = {
      kLaplacian,
      "p=2\nx0_seed=5\nx0_scale=none\noutput=t.csv\noperator.kind=spectral\n"
      "operator.spectrum=logarithm\noperator.n=64\noperator.r=32\noperator.seed=3\n"
      "operator.top_shift=2\nshift.mode=negative_shift\nshift.mu=auto\nsolver.kind=cg\n"
      "solver.beta_rule=fr\nsolver.c1=1e-3\nsolver.c2=0.3\nsolver.tolerance=1e-7\n",
      "p=3\nx0_seed=1\noperator.kind=laplacian\noperator.m=30\nshift.mode=shift_invert\n"
      "shift.mu=19.722320881555028\nshift.inner_tolerance=1e-11\nsolver.kind=crgd\n"
      "solver.block=30\nsolver.alpha=0.001\n",
      "p=1\nx0_seed=1\nscalar=complex\noperator.kind=file\noperator.path=a.coo\n"
      "operator.triangle=lower\nsolver.kind=cg\n",
  };
  for (const auto& t : texts) {
    const RunConfig c = parse(t);
    std::ostringstream echo;
    for (const auto& [k, v] : c.resolved()) echo << k << " = " << v << "\n";
    const RunConfig back = parse(echo.str());
    CHECK(back.resolved() == c.resolved());
  }
}

TEST_CASE("config errors name the offending key") {
  std::string no_p = kLaplacian;
  no_p.replace(no_p.find("p = 3\n"), 6, "");
  CHECK(config_error_key(no_p) == "p");
  CHECK(config_error_key("bogus = 1\n" + std::string(kLaplacian)) == "bogus");
  CHECK(config_error_key("p = 4\n" + std::string(kLaplacian)) == "p");
  CHECK(config_error_key(std::string(kLaplacian) + "spectrum = uniform\n") ==
        "solver.spectrum");
  CHECK(config_error_key(std::string(kLaplacian) + "[operator]\nspectrum = uniform\n") ==
        "operator.spectrum");
  CHECK(config_error_key(std::string(kLaplacian) + "alpha = 1\n") == "solver.alpha");
  CHECK(config_error_key("p=x\nx0_seed=1\noperator.kind=laplacian\noperator.m=3\n"
                         "solver.kind=cg\n") == "p");
  CHECK(config_error_key("p=1\noperator.kind=laplacian\noperator.m=3\nsolver.kind=cg\n") ==
        "x0_seed");
  CHECK(config_error_key("p=1\nx0_seed=1\noperator.kind=laplacian\noperator.m=3\n"
                         "shift.mode=shift_invert\nshift.mu=auto\nsolver.kind=cg\n") ==
        "shift.mu");
  CHECK(config_error_key("p=1\nx0_seed=1\noperator.kind=laplacian\noperator.m=3\n"
                         "solver.kind=cg\nsolver.c2=0.6\n") == "solver.c2");
  CHECK(config_error_key("p=20\nx0_seed=1\noperator.kind=laplacian\noperator.m=4\n"
                         "solver.kind=cg\n") == "p");
  CHECK(config_error_key("p=1\nx0_seed=1\noperator.kind=spectral\noperator.spectrum=uniform\n"
                         "operator.n=8\noperator.seed=0\noperator.basis=fourier\nscalar=real\n"
                         "solver.kind=cg\n") == "scalar");
  CHECK(config_error_key("p=1\nx0_seed=1\noperator.kind=laplacian\noperator.m=3\n"
                         "solver.kind=crgd\nsolver.alpha=1e-3\n") == "solver.block");
  CHECK_THROWS_AS(parse("just a line\n"), ConfigError);
}

TEST_CASE("run: 2D Laplacian top-3 matches the closed form") {
  const RunOutcome o = run(parse(kLaplacian));
  CHECK(o.status == SolveStatus::converged);
  CHECK(o.exit_code() == kExitOk);
  REQUIRE(o.reference.has_value());
  const RealVector want = laplacian_eigenvalues({10, 2}).head(3);
  CHECK((*o.reference - want).norm() == 0.0);
  REQUIRE(o.report.max_relative_error.has_value());
  CHECK(*o.report.max_relative_error <= 1e-8);
}

TEST_CASE("run: spectral uniform n=1024 with FR matches the generated spectrum") {
  const RunOutcome o = run(parse(
      "p=10\nx0_seed=3\nrecord_wall_time=false\noperator.kind=spectral\n"
      "operator.spectrum=uniform\noperator.n=1024\noperator.r=1024\noperator.seed=7\n"
      "operator.basis=cosine\nsolver.kind=cg\nsolver.beta_rule=fr\n"));
  CHECK(o.status == SolveStatus::converged);
  SpectrumSpec spec{SpectrumKind::uniform, 1024, 1024, 7, {}, 0};
  const RealVector want = generate_spectrum(spec).head(10);
  CHECK((*o.reference - want).norm() == 0.0);
  CHECK(*o.report.max_relative_error <= 1e-8);
}

TEST_CASE("run: shifted runs report eigenvalues of the base operator") {
  const RealVector all = laplacian_eigenvalues({12, 2});
  const std::string base =
      "p=2\nx0_seed=4\nrecord_wall_time=false\noperator.kind=laplacian\noperator.m=12\n"
      "solver.kind=cg\nsolver.tolerance=1e-10\nsolver.max_iters=20000\n";
  const RunOutcome inv = run(parse(base + "shift.mode=shift_invert\nshift.mu=" +
                                   format_double(all(all.size() - 1)) + "\n"));
  const RunOutcome neg = run(parse(base + "shift.mode=negative_shift\nshift.mu=auto\n"));
  const RealVector smallest = all.tail(2).reverse();
  for (const RunOutcome* o : {&inv, &neg}) {
    CHECK(o->status == SolveStatus::converged);
    CHECK((*o->reference - smallest).norm() == 0.0);
    CHECK(*o->report.max_relative_error <= 1e-6);
  }
  REQUIRE(neg.mu.has_value());
  CHECK(*neg.mu >= all(0));
}

TEST_CASE("trace files: fixed columns, blanks, determinism, self-description") {
  TempDir dir;
  const RunConfig cfg = parse(kLaplacian);
  const RunOutcome o1 = run(cfg);
  const RunOutcome o2 = run(cfg);
  std::ostringstream t1, t2;
  write_trace(t1, cfg, o1);
  write_trace(t2, cfg, o2);
  CHECK(t1.str() == t2.str());

  std::istringstream lines(t1.str());
  std::string line;
  std::vector<std::string> body;
  while (std::getline(lines, line)) {
    if (line.rfind("# ", 0) != 0) body.push_back(line);
  }
  REQUIRE(body.size() == o1.trace.size() + 1);
  CHECK(body[0] == kTraceColumns);
  CHECK(body[1].rfind("0,", 0) == 0);
  // First step has no omega (projection off) and no wall time.
  CHECK(body[1].substr(body[1].size() - 2) == ",,");
  // The final record has no step: only beta survives among the step columns.
  {
    std::vector<std::string> cols;
    std::istringstream row(body.back() + ",");
    for (std::string c; std::getline(row, c, ',');) cols.push_back(c);
    REQUIRE(cols.size() == 11);
    CHECK_FALSE(cols[1].empty());
    CHECK_FALSE(cols[2].empty());
    CHECK(cols[3].empty());
    for (std::size_t j = 5; j < cols.size(); ++j) CHECK(cols[j].empty());
  }

  // Re-running from the header alone reproduces the body.
  std::istringstream in(t1.str());
  const RunConfig back = config_from_trace(in);
  CHECK(back.resolved() == cfg.resolved());
  std::ostringstream t3;
  write_trace(t3, back, run(back));
  CHECK(t3.str() == t1.str());
}

TEST_CASE("trace files: crgd populates its columns only") {
  const RunConfig cfg = parse(
      "p=2\nx0_seed=1\nrecord_wall_time=false\noperator.kind=laplacian\noperator.m=20\n"
      "operator.dims=1\nsolver.kind=crgd\nsolver.block=5\nsolver.alpha=1e-4\n"
      "solver.max_iters=12\n");
  const RunOutcome o = run(cfg);
  CHECK(o.status == SolveStatus::iteration_cap);
  CHECK(o.exit_code() == kExitNotConverged);
  std::ostringstream t;
  write_trace(t, cfg, o);
  const std::string body = body_of(t.str());
  std::istringstream in(body);
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  // iter,f,grad_norm,alpha then six blank CG columns and blank wall_ns.
  auto fields = [](const std::string& row) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream rs(row);
    while (std::getline(rs, cell, ',')) out.push_back(cell);
    if (!row.empty() && row.back() == ',') out.push_back("");
    return out;
  };
  const auto f0 = fields(row0), f1 = fields(row1);
  REQUIRE(f0.size() == 11);
  REQUIRE(f1.size() == 11);
  CHECK_FALSE(f0[1].empty());
  CHECK(f1[1].empty());  // f is sampled once per sweep (4 iterations)
  CHECK_FALSE(f1[2].empty());
  CHECK(f1[3] == "0.0001");
  for (int c = 4; c < 11; ++c) CHECK(f1[static_cast<std::size_t>(c)].empty());
}

TEST_CASE("coordinate-list reader") {
  const std::string text =
      "% comment\n3 3 4\n1 1 2\n2 1 -1\n2 2 2\n3 3 1.5\n";
  std::istringstream in(text);
  const auto m = read_coordinate_list<double>(in, true, "mem");
  Matrix<double> want(3, 3);
  want << 2, -1, 0, -1, 2, 0, 0, 0, 1.5;
  CHECK((Matrix<double>(m) - want).norm() == 0.0);

  std::istringstream cin_("2 2 2\n1 1 1\n2 1 0 1\n");
  const auto mc = read_coordinate_list<std::complex<double>>(cin_, true, "mem");
  CHECK(Matrix<std::complex<double>>(mc)(0, 1) == std::complex<double>(0, -1));

  auto bad = [](const std::string& t, bool lower) {
    std::istringstream s(t);
    return read_coordinate_list<double>(s, lower, "mem");
  };
  CHECK_THROWS_AS(bad("2 3 0\n", false), ConstructionError);
  CHECK_THROWS_AS(bad("2 2 1\n3 1 1\n", false), ConstructionError);
  CHECK_THROWS_AS(bad("2 2 2\n1 1 1\n", false), ConstructionError);
  CHECK_THROWS_AS(bad("2 2 1\n1 2 1\n", true), ConstructionError);
  CHECK_THROWS_AS(bad("2 2 1\n1 1 1 2\n", false), ConstructionError);
  CHECK_THROWS_AS(bad("", false), ConstructionError);
}

TEST_CASE("run: file operator") {
  TempDir dir;
  std::ostringstream coo;
  const Index n = 30;
  coo << n << " " << n << " " << 2 * n - 1 << "\n";
  for (Index i = 1; i <= n; ++i) {
    coo << i << " " << i << " 2\n";
    if (i > 1) coo << i << " " << i - 1 << " -1\n";
  }
  const std::string path = dir.write("k.coo", coo.str());
  const RunOutcome o = run(parse("p=2\nx0_seed=1\nrecord_wall_time=false\noperator.kind=file\n"
                                 "operator.path=" + path + "\noperator.triangle=lower\n"
                                 "solver.kind=cg\n"));
  CHECK(o.status == SolveStatus::converged);
  CHECK_FALSE(o.reference.has_value());
  // Scaled 1D Laplacian: 2 - 2 cos(j pi / (n + 1)).
  for (Index j = 0; j < 2; ++j) {
    const double want = 2.0 - 2.0 * std::cos(static_cast<double>(n - j) * M_PI / (n + 1));
    CHECK(o.eigenvalues(j) == doctest::Approx(want).epsilon(1e-9));
    CHECK(o.report.residuals[static_cast<std::size_t>(j)] <= 1e-7);
  }
}

TEST_CASE("compare: shared start, summary rows, operator checks") {
  TempDir dir;
  const std::string common =
      "x0_seed=SEED\nrecord_wall_time=false\noperator.kind=spectral\noperator.n=1024\n"
      "operator.seed=7\noperator.basis=cosine\nsolver.kind=cg\nsolver.tolerance=1e-6\n"
      "solver.max_iters=20000\n";
  auto cfg = [&](const std::string& name, const std::string& extra, const std::string& seed) {
    std::string t = common;
    t.replace(t.find("SEED"), 4, seed);
    return dir.write(name, t + extra);
  };
  const auto fr = cfg("fr.cfg", "p=10\noperator.spectrum=uniform\nsolver.beta_rule=fr\n", "3");
  const auto pr = cfg("pr.cfg", "p=10\noperator.spectrum=uniform\n", "99");
  std::ostringstream out, err;
  CHECK(cmd_compare({{fr, pr}, (dir.path / "traces").string()}, out, err) == kExitOk);
  const std::string table = out.str();
  CHECK(table.find("cg-fr") != std::string::npos);
  CHECK(table.find("cg-pr_plus") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);
  // Both runs start from the first config's seed.
  const std::string t0 = slurp((dir.path / "traces" / "run0.csv").string());
  const std::string t1 = slurp((dir.path / "traces" / "run1.csv").string());
  CHECK(t1.find("# x0_seed=3\n") != std::string::npos);
  CHECK(t0.substr(t0.find("\n0,") + 1, 40) == t1.substr(t1.find("\n0,") + 1, 40));

  std::ostringstream one;
  CHECK(cmd_compare({{fr}, std::nullopt}, one, err) == kExitOk);
  const std::string one_table = one.str();
  CHECK(std::count(one_table.begin(), one_table.end(), '\n') == 2);

  const auto other = dir.write("lap.cfg", kLaplacian);
  std::ostringstream o2, e2;
  CHECK(cmd_compare({{fr, other}, std::nullopt}, o2, e2) == kExitConfig);
  CHECK(e2.str().find("operator") != std::string::npos);
}

TEST_CASE("compare: top-shifted logarithm spectrum converges in fewer iterations") {
  TempDir dir;
  const std::string base =
      "p=5\nx0_seed=11\nrecord_wall_time=false\noperator.kind=spectral\n"
      "operator.spectrum=logarithm\noperator.n=1024\noperator.seed=7\noperator.basis=cosine\n"
      "solver.kind=cg\nsolver.tolerance=1e-6\nsolver.max_iters=20000\n";
  const RunOutcome plain = run(parse(base));
  const RunOutcome shifted = run(parse(base + "operator.top_shift=5\n"));
  CHECK(plain.status == SolveStatus::converged);
  CHECK(shifted.status == SolveStatus::converged);
  CHECK(shifted.iterations() < plain.iterations());
}

TEST_CASE("spectrum and oracle verbs") {
  std::ostringstream out, err;
  CHECK(cmd_spectrum({"uniform", 4, 4, 0, 0}, out, err) == kExitOk);
  CHECK(out.str() == "1\n0.75\n0.5\n0.25\n");
  std::ostringstream o2;
  CHECK(cmd_spectrum({"logarithm", 4, 2, 0, 1}, o2, err) == kExitOk);
  CHECK(o2.str() == "2\n0.5\n0\n0\n");
  std::ostringstream o3, e3;
  CHECK(cmd_spectrum({"uniform", 4, 5, 0, 0}, o3, e3) == kExitConfig);

  TempDir dir;
  const auto path = dir.write("small.cfg",
                              "p=2\nx0_seed=1\noperator.kind=laplacian\noperator.m=4\n"
                              "solver.kind=cg\n");
  std::ostringstream o4, e4;
  CHECK(cmd_oracle({path}, o4, e4) == kExitOk);
  const std::string oracle_out = o4.str();
  CHECK(oracle_out.find("e-1") != std::string::npos);  // rel_diff column is tiny
  CHECK(std::count(oracle_out.begin(), oracle_out.end(), '\n') == 4);
}

TEST_CASE("binary exit codes") {
  TempDir dir;
  const auto good = dir.write("good.cfg", kLaplacian);
  CHECK(tool("run " + good) == 0);
  CHECK(tool("run " + dir.write("nop.cfg", "x0_seed=1\noperator.kind=laplacian\n"
                                           "operator.m=4\nsolver.kind=cg\n")) == 2);
  CHECK(tool("run " + dir.path.string() + "/missing.cfg") == 2);
  CHECK(tool("frobnicate") == 2);
  CHECK(tool("run " + dir.write("cap.cfg", std::string(kLaplacian) + "max_iters = 2\n")) == 3);
  CHECK(tool("run " + dir.write("blow.cfg",
                                "p=2\nx0_seed=1\noperator.kind=laplacian\noperator.m=20\n"
                                "operator.dims=1\nsolver.kind=crgd\nsolver.block=5\n"
                                "solver.alpha=1\n")) == 4);
  // Rerun from a trace header writes the same body.
  const std::string t1 = (dir.path / "t1.csv").string(), t2 = (dir.path / "t2.csv").string();
  CHECK(tool("run " + good + " -o " + t1) == 0);
  CHECK(tool("run --from-trace " + t1 + " -o " + t2) == 0);
  CHECK(body_of(slurp(t1)) == body_of(slurp(t2)));
  CHECK(tool("spectrum ushape 8 8 0") == 0);
}
