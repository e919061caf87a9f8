#include "bmeig_cli/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace bmeig::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

class Reader {
 public:
  Reader(std::map<std::string, Entry> entries, std::string source)
      : entries_(std::move(entries)), source_(std::move(source)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::optional<std::string> take(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    it->second.used = true;
    return it->second.value;
  }

  std::string require(const std::string& key) {
    auto v = take(key);
    if (!v) throw ConfigError(key, "missing required key");
    return *v;
  }

  template <typename T>
  T integer(const std::string& key, const std::string& text) const {
    T out{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      throw ConfigError(key, "expected an integer, got '" + text + "'" + where(key));
    }
    return out;
  }

  double real(const std::string& key, const std::string& text) const {
    double out = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      throw ConfigError(key, "expected a number, got '" + text + "'" + where(key));
    }
    return out;
  }

  bool boolean(const std::string& key, const std::string& text) const {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError(key, "expected true or false, got '" + text + "'" + where(key));
  }

  template <typename T>
  void opt_int(const std::string& key, T& dst) {
    if (auto v = take(key)) dst = integer<T>(key, *v);
  }
  void opt_real(const std::string& key, double& dst) {
    if (auto v = take(key)) dst = real(key, *v);
  }
  void opt_bool(const std::string& key, bool& dst) {
    if (auto v = take(key)) dst = boolean(key, *v);
  }

  /// Rejects a key that does not apply to the selected kind.
  void forbid(const std::string& key, const std::string& reason) {
    if (has(key)) throw ConfigError(key, "not valid " + reason + where(key));
  }

  void finish() const {
    for (const auto& [key, e] : entries_) {
      if (!e.used) {
        throw ConfigError(key, "unknown key (" + source_ + ":" + std::to_string(e.line) + ")");
      }
    }
  }

  std::string where(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return {};
    return " (" + source_ + ":" + std::to_string(it->second.line) + ")";
  }

 private:
  std::map<std::string, Entry> entries_;
  std::string source_;
};

void require_positive(const std::string& key, double v) {
  if (!(v > 0.0)) throw ConfigError(key, "must be positive");
}

void parse_operator(Reader& rd, RunConfig& cfg) {
  OperatorConfig& op = cfg.op;
  const std::string kind = rd.require("operator.kind");
  const std::vector<std::string> lap_keys = {"operator.m", "operator.dims"};
  const std::vector<std::string> spec_keys = {"operator.spectrum", "operator.n", "operator.r",
                                              "operator.seed", "operator.basis",
                                              "operator.top_shift"};
  const std::vector<std::string> file_keys = {"operator.path", "operator.triangle"};
  auto forbid_all = [&](const std::vector<std::string>& keys) {
    for (const auto& k : keys) rd.forbid(k, "for operator.kind = " + kind);
  };

  if (kind == "laplacian") {
    op.kind = OperatorKind::laplacian;
    forbid_all(spec_keys);
    forbid_all(file_keys);
    op.m = rd.integer<Index>("operator.m", rd.require("operator.m"));
    rd.opt_int("operator.dims", op.dims);
    if (op.m < 1) throw ConfigError("operator.m", "must be >= 1");
    if (op.dims != 1 && op.dims != 2) throw ConfigError("operator.dims", "must be 1 or 2");
  } else if (kind == "spectral") {
    op.kind = OperatorKind::spectral;
    forbid_all(lap_keys);
    forbid_all(file_keys);
    const std::string sk = rd.require("operator.spectrum");
    const auto parsed = parse_spectrum_kind(sk);
    if (!parsed || *parsed == SpectrumKind::explicit_values) {
      throw ConfigError("operator.spectrum",
                        "expected random, uniform, ushape or logarithm, got '" + sk + "'");
    }
    op.spectrum = *parsed;
    op.n = rd.integer<Index>("operator.n", rd.require("operator.n"));
    op.r = op.n;
    rd.opt_int("operator.r", op.r);
    op.seed = rd.integer<std::uint64_t>("operator.seed", rd.require("operator.seed"));
    if (auto b = rd.take("operator.basis")) {
      const auto bk = parse_basis_kind(*b);
      if (!bk) {
        throw ConfigError("operator.basis",
                          "expected qr, cosine, fourier or fourier2d, got '" + *b + "'");
      }
      op.basis = *bk;
    }
    rd.opt_int("operator.top_shift", op.top_shift);
    if (op.n < 1) throw ConfigError("operator.n", "must be >= 1");
    if (op.r < 1 || op.r > op.n) throw ConfigError("operator.r", "must be in [1, n]");
    if (op.top_shift < 0 || op.top_shift > op.r) {
      throw ConfigError("operator.top_shift", "must be in [0, r]");
    }
  } else if (kind == "file") {
    op.kind = OperatorKind::file;
    forbid_all(lap_keys);
    forbid_all(spec_keys);
    op.path = rd.require("operator.path");
    if (auto t = rd.take("operator.triangle")) {
      if (*t == "lower") {
        op.lower_triangle = true;
      } else if (*t != "full") {
        throw ConfigError("operator.triangle", "expected full or lower, got '" + *t + "'");
      }
    }
  } else {
    throw ConfigError("operator.kind", "expected laplacian, spectral or file, got '" + kind + "'");
  }
}

void parse_shift(Reader& rd, RunConfig& cfg) {
  const std::vector<std::string> keys = {"shift.mu", "shift.inner_tolerance",
                                         "shift.inner_max_iters"};
  auto mode = rd.take("shift.mode");
  if (!mode || *mode == "none") {
    for (const auto& k : keys) rd.forbid(k, "without shift.mode");
    return;
  }
  ShiftConfig sh;
  if (*mode == "shift_invert") {
    sh.mode = ShiftMode::shift_invert;
  } else if (*mode == "negative_shift") {
    sh.mode = ShiftMode::negative_shift;
  } else {
    throw ConfigError("shift.mode",
                      "expected none, shift_invert or negative_shift, got '" + *mode + "'");
  }
  const std::string mu = rd.require("shift.mu");
  if (mu == "auto") {
    if (sh.mode == ShiftMode::shift_invert) {
      throw ConfigError("shift.mu", "shift_invert needs an explicit mu");
    }
  } else {
    sh.mu = rd.real("shift.mu", mu);
    if (!(*sh.mu >= 0.0)) throw ConfigError("shift.mu", "must be >= 0");
  }
  if (sh.mode == ShiftMode::shift_invert) {
    rd.opt_real("shift.inner_tolerance", sh.inner_tolerance);
    rd.opt_int("shift.inner_max_iters", sh.inner_max_iters);
    require_positive("shift.inner_tolerance", sh.inner_tolerance);
    if (sh.inner_max_iters < 1) throw ConfigError("shift.inner_max_iters", "must be >= 1");
  } else {
    rd.forbid("shift.inner_tolerance", "for negative_shift");
    rd.forbid("shift.inner_max_iters", "for negative_shift");
  }
  cfg.shift = sh;
}

void parse_solver(Reader& rd, RunConfig& cfg) {
  SolverConfig& s = cfg.solver;
  const std::vector<std::string> cg_keys = {"solver.beta_rule", "solver.c1", "solver.c2",
                                            "solver.explicit_projection"};
  const std::vector<std::string> crgd_keys = {"solver.block", "solver.alpha"};
  const std::string kind = rd.require("solver.kind");
  if (kind == "cg") {
    s.kind = SolverKind::cg;
    for (const auto& k : crgd_keys) rd.forbid(k, "for solver.kind = cg");
    if (auto b = rd.take("solver.beta_rule")) {
      if (*b == "fr" || *b == "fletcher_reeves") {
        s.beta_rule = BetaRule::fletcher_reeves;
      } else if (*b == "pr_plus" || *b == "polak_ribiere_plus") {
        s.beta_rule = BetaRule::polak_ribiere_plus;
      } else {
        throw ConfigError("solver.beta_rule", "expected fr or pr_plus, got '" + *b + "'");
      }
    }
    s.max_iters = 2000;
    rd.opt_real("solver.c1", s.c1);
    rd.opt_real("solver.c2", s.c2);
    rd.opt_bool("solver.explicit_projection", s.explicit_projection);
    if (!(s.c1 > 0.0 && s.c1 < s.c2 && s.c2 < 0.5)) {
      throw ConfigError("solver.c2", "require 0 < c1 < c2 < 1/2");
    }
  } else if (kind == "crgd") {
    s.kind = SolverKind::crgd;
    for (const auto& k : cg_keys) rd.forbid(k, "for solver.kind = crgd");
    s.max_iters = 100000;
    s.block = rd.integer<Index>("solver.block", rd.require("solver.block"));
    s.alpha = rd.real("solver.alpha", rd.require("solver.alpha"));
    if (s.block < 1) throw ConfigError("solver.block", "must be >= 1");
    require_positive("solver.alpha", s.alpha);
  } else {
    throw ConfigError("solver.kind", "expected cg or crgd, got '" + kind + "'");
  }
  rd.opt_real("solver.tolerance", s.tolerance);
  rd.opt_int("solver.max_iters", s.max_iters);
  require_positive("solver.tolerance", s.tolerance);
  if (s.max_iters < 0) throw ConfigError("solver.max_iters", "must be >= 0");
}

Index operator_dimension(const OperatorConfig& op) {
  switch (op.kind) {
    case OperatorKind::laplacian: return op.dims == 1 ? op.m : op.m * op.m;
    case OperatorKind::spectral: return op.n;
    case OperatorKind::file: return 0;  // known after reading
  }
  return 0;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  std::map<std::string, Entry> entries;
  std::string prefix;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("", "malformed section header (" + source + ":" +
                                  std::to_string(lineno) + ")");
      }
      const std::string name = trim(t.substr(1, t.size() - 2));
      prefix = name.empty() ? std::string() : name + ".";
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "expected key = value (" + source + ":" + std::to_string(lineno) + ")");
    }
    const std::string key = prefix + trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty() || key.back() == '.') {
      throw ConfigError("", "empty key (" + source + ":" + std::to_string(lineno) + ")");
    }
    if (!entries.emplace(key, Entry{value, lineno, false}).second) {
      throw ConfigError(key, "duplicate key (" + source + ":" + std::to_string(lineno) + ")");
    }
  }

  Reader rd(std::move(entries), source);
  RunConfig cfg;
  parse_operator(rd, cfg);
  parse_shift(rd, cfg);
  parse_solver(rd, cfg);

  cfg.p = rd.integer<Index>("p", rd.require("p"));
  cfg.x0_seed = rd.integer<std::uint64_t>("x0_seed", rd.require("x0_seed"));
  if (auto s = rd.take("x0_scale")) {
    if (*s == "ray") {
      cfg.x0_ray_scale = true;
    } else if (*s == "none") {
      cfg.x0_ray_scale = false;
    } else {
      throw ConfigError("x0_scale", "expected ray or none, got '" + *s + "'");
    }
  }
  cfg.field = cfg.op.kind == OperatorKind::spectral ? basis_field(cfg.op.basis)
                                                      : ScalarField::real;
  if (auto f = rd.take("scalar")) {
    if (*f == "real") {
      cfg.field = ScalarField::real;
    } else if (*f == "complex") {
      cfg.field = ScalarField::complex;
    } else {
      throw ConfigError("scalar", "expected real or complex, got '" + *f + "'");
    }
  }
  if (cfg.op.kind == OperatorKind::spectral && basis_field(cfg.op.basis) == ScalarField::complex &&
      cfg.field == ScalarField::real) {
    throw ConfigError("scalar", "the fourier bases need scalar = complex");
  }
  if (cfg.op.kind == OperatorKind::spectral && cfg.op.basis == BasisKind::cosine &&
      cfg.field == ScalarField::complex) {
    throw ConfigError("scalar", "the cosine basis needs scalar = real");
  }
  if (auto o = rd.take("output")) cfg.output = *o;
  rd.opt_bool("record_wall_time", cfg.record_wall_time);
  rd.finish();

  if (cfg.p < 1) throw ConfigError("p", "must be >= 1");
  const Index n = operator_dimension(cfg.op);
  if (n > 0 && cfg.p > n) throw ConfigError("p", "must not exceed the operator dimension");
  if (cfg.solver.kind == SolverKind::crgd && n > 0 && cfg.solver.block > n) {
    throw ConfigError("solver.block", "must not exceed the operator dimension");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open '" + path + "'");
  return parse_config(in, path);
}

std::vector<std::pair<std::string, std::string>> RunConfig::resolved() const {
  std::vector<std::pair<std::string, std::string>> kv;
  auto add = [&](const std::string& k, const std::string& v) { kv.emplace_back(k, v); };
  add("p", std::to_string(p));
  add("x0_seed", std::to_string(x0_seed));
  add("x0_scale", x0_ray_scale ? "ray" : "none");
  add("scalar", to_string(field));
  add("record_wall_time", record_wall_time ? "true" : "false");
  if (!output.empty()) add("output", output);
  switch (op.kind) {
    case OperatorKind::laplacian:
      add("operator.kind", "laplacian");
      add("operator.m", std::to_string(op.m));
      add("operator.dims", std::to_string(op.dims));
      break;
    case OperatorKind::spectral:
      add("operator.kind", "spectral");
      add("operator.spectrum", to_string(op.spectrum));
      add("operator.n", std::to_string(op.n));
      add("operator.r", std::to_string(op.r));
      add("operator.seed", std::to_string(op.seed));
      add("operator.basis", to_string(op.basis));
      add("operator.top_shift", std::to_string(op.top_shift));
      break;
    case OperatorKind::file:
      add("operator.kind", "file");
      add("operator.path", op.path);
      add("operator.triangle", op.lower_triangle ? "lower" : "full");
      break;
  }
  if (shift) {
    add("shift.mode", to_string(shift->mode));
    add("shift.mu", shift->mu ? format_double(*shift->mu) : "auto");
    if (shift->mode == ShiftMode::shift_invert) {
      add("shift.inner_tolerance", format_double(shift->inner_tolerance));
      add("shift.inner_max_iters", std::to_string(shift->inner_max_iters));
    }
  } else {
    add("shift.mode", "none");
  }
  if (solver.kind == SolverKind::cg) {
    add("solver.kind", "cg");
    add("solver.beta_rule", to_string(solver.beta_rule));
    add("solver.c1", format_double(solver.c1));
    add("solver.c2", format_double(solver.c2));
    add("solver.explicit_projection", solver.explicit_projection ? "true" : "false");
  } else {
    add("solver.kind", "crgd");
    add("solver.block", std::to_string(solver.block));
    add("solver.alpha", format_double(solver.alpha));
  }
  add("solver.tolerance", format_double(solver.tolerance));
  add("solver.max_iters", std::to_string(solver.max_iters));
  return kv;
}

}  // namespace bmeig::cli
