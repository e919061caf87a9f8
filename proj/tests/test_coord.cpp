#include <doctest.h>

#include <complex>
#include <limits>
#include <set>

#include "bmeig/bmeig.hpp"
#include "oracles.hpp"

using namespace bmeig;
using cplx = std::complex<double>;

namespace {

std::vector<Index> one_based(const std::vector<Index>& rows) {
  std::vector<Index> out;
  for (Index r : rows) out.push_back(r + 1);
  return out;
}

template <typename S>
double stable_alpha(const HermitianOperator<S>& op) {
  return 0.05 / op.max_eigenvalue().value();
}

template <typename S>
OperatorPtr<S> sparse_band(Index n, Index band, std::uint64_t seed) {
  NormalGenerator gen(seed);
  std::vector<Eigen::Triplet<S>> t;
  for (Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, S(4.0 * band + 1.0 + std::abs(gen())));
    for (Index d = 1; d <= band && i + d < n; ++d) {
      const S v = draw_normal<S>(gen);
      t.emplace_back(i, i + d, v);
      t.emplace_back(i + d, i, S(Eigen::numext::conj(v)));
    }
  }
  Eigen::SparseMatrix<S, Eigen::RowMajor> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return std::make_shared<SparseOperator<S>>(m);
}

template <typename S>
void check_against_oracle(const HermitianOperator<S>& op, Index p, Index block, int steps,
                          std::uint64_t seed) {
  const Matrix<S> a = materialize(op);
  const double alpha = 0.05 / dense_eig(a).values(0);
  const Matrix<S> x0 = default_initial_factor<S>(op.dim(), p, seed);
  auto st = make_compact_state(op, x0, block, alpha);
  auto ref = oracle::full_crgd_init<S>(a, x0, block);
  for (int k = 0; k < steps; ++k) {
    crgd_step(op, st);
    oracle::full_crgd_step<S>(a, ref, block, alpha);
  }
  CHECK((st.x - ref.x).cwiseAbs().maxCoeff() <= 1e-10);
  const Matrix<S> full_delta = oracle::masked<S>(ref.delta, ref.k, block);
  for (Index i = 0; i < block; ++i) {
    CHECK((st.delta.row(i) - full_delta.row(st.rows[static_cast<std::size_t>(i)])).norm() <=
          1e-10 * std::max(1.0, full_delta.norm()));
  }
}

}  // namespace

TEST_CASE("mask examples") {
  const Matrix<double> z = random_normal_block<double>(6, 2, 1);
  CHECK(one_based(mask(z, 0, 2).rows) == std::vector<Index>{1, 2});
  CHECK(one_based(mask(z, 3, 2).rows) == std::vector<Index>{1, 2});
  const auto m = mask(z, 1, 2);
  CHECK(one_based(m.rows) == std::vector<Index>{3, 4});
  CHECK((m.block.row(0) - z.row(2)).norm() == 0.0);

  const Matrix<double> z5 = random_normal_block<double>(5, 2, 2);
  CHECK(one_based(mask(z5, 2, 2).rows) == std::vector<Index>{5, 1});
  CHECK_THROWS_AS(mask(z5, 0, 6), ConstructionError);
  CHECK_THROWS_AS(mask(z5, 0, 0), ConstructionError);
}

TEST_CASE("property: block masks select N distinct rows") {
  NormalGenerator gen(5);
  for (int t = 0; t < 300; ++t) {
    const Index n = 1 + static_cast<Index>(std::abs(gen()) * 40);
    const Index nb = 1 + static_cast<Index>(std::abs(gen()) * 1000) % n;
    const BlockMask m(n, nb);
    const std::int64_t k = static_cast<std::int64_t>(std::abs(gen()) * 1e6);
    const auto rows = m.rows(k);
    const std::set<Index> uniq(rows.begin(), rows.end());
    CHECK(uniq.size() == static_cast<std::size_t>(nb));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(m.position(k, rows[i]) == static_cast<Index>(i));
    }
    CHECK(rows.front() == static_cast<Index>((k % n) * nb % n));
  }
}

TEST_CASE("crgd_step with a zero direction recomputes the masked gradient") {
  auto op = build_laplacian<double>({8, 1});
  const Matrix<double> a = materialize(*op);
  const Matrix<double> x0 = default_initial_factor<double>(8, 1, 3);
  auto st = make_compact_state(*op, x0, 2, 1e-4);
  st.delta.setZero();
  st.b.setZero();
  st.c.setZero();
  st.s = st.a;
  const Matrix<double> a_before = st.a;
  crgd_step(*op, st);
  CHECK((st.x - x0).norm() == 0.0);
  CHECK((st.a - a_before).norm() == 0.0);
  const Matrix<double> want = -oracle::masked<double>(oracle::dense_gradient<double>(a, x0), 1, 2);
  for (Index i = 0; i < 2; ++i) {
    CHECK((st.delta.row(i) - want.row(st.rows[static_cast<std::size_t>(i)])).norm() <=
          1e-12 * want.norm());
  }
}

TEST_CASE("compact steps match the full-gradient oracle") {
  SUBCASE("1D Laplacian n=8, p=1, N=2, three steps with traces") {
    auto op = build_laplacian<double>({8, 1});
    const Matrix<double> a = materialize(*op);
    const Matrix<double> x0 = default_initial_factor<double>(8, 1, 11);
    auto st = make_compact_state(*op, x0, 2, 1e-4);
    auto ref = oracle::full_crgd_init<double>(a, x0, 2);
    for (int k = 0; k < 3; ++k) {
      const double f_c = objective(*op, st.x).value();
      const double f_o = oracle::dense_objective<double>(a, ref.x);
      CHECK(f_c == doctest::Approx(f_o).epsilon(1e-12));
      CHECK(st.delta.norm() == doctest::Approx(ref.delta.norm()).epsilon(1e-12));
      crgd_step(*op, st);
      oracle::full_crgd_step<double>(a, ref, 2, 1e-4);
    }
  }
  SUBCASE("1D Laplacian n=200, p=2, N=16 and N=48") {
    auto op = build_laplacian<double>({200, 1});
    check_against_oracle<double>(*op, 2, 16, 100, 1);
    check_against_oracle<double>(*op, 2, 48, 100, 2);
  }
  SUBCASE("property: random banded operators, shapes and block sizes") {
    NormalGenerator gen(77);
    for (int t = 0; t < 12; ++t) {
      const Index n = 5 + static_cast<Index>(std::abs(gen()) * 120) % 200;
      const Index p = 1 + static_cast<Index>(std::abs(gen()) * 10) % 5;
      const Index nb = 1 + static_cast<Index>(std::abs(gen()) * 100) % n;
      const Index band = 1 + t % 3;
      INFO("n=" << n << " p=" << p << " N=" << nb << " band=" << band);
      if (p > n) continue;
      if (t % 2 == 0) {
        check_against_oracle<double>(*sparse_band<double>(n, band, 100 + t), p, nb, 100, 200 + t);
      } else {
        check_against_oracle<cplx>(*sparse_band<cplx>(n, band, 100 + t), p, nb, 100, 200 + t);
      }
    }
  }
  SUBCASE("2D Laplacian and its negative shift") {
    auto lap = build_laplacian<double>({9, 2});
    check_against_oracle<double>(*lap, 3, 7, 100, 4);
    auto neg = shift_operator<double>(lap, {ShiftMode::negative_shift, *lap->max_eigenvalue(), 0, 0});
    check_against_oracle<double>(*neg, 3, 20, 100, 5);
  }
}

TEST_CASE("maintained s tracks the next Gram factor") {
  auto op = build_laplacian<cplx>({60, 1});
  const Matrix<cplx> x0 = default_initial_factor<cplx>(60, 3, 8);
  auto st = make_compact_state(*op, x0, 7, stable_alpha(*op));
  st.gram_refresh_interval = 0;
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const Matrix<cplx> s_prev = st.s;
    crgd_step(*op, st);
    const Matrix<cplx> exact = gram(st.x);
    worst = std::max(worst, (s_prev - exact).norm() / exact.norm());
    CHECK((st.a - exact).norm() <= 1e-8 * exact.norm());
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("gram refresh records the drift once per sweep") {
  auto op = build_laplacian<double>({50, 1});
  auto st = make_compact_state(*op, default_initial_factor<double>(50, 2, 1), 10,
                               stable_alpha(*op));
  CHECK(st.gram_refresh_interval == 5);
  for (int k = 0; k < 5; ++k) crgd_step(*op, st);
  CHECK(st.steps_since_refresh == 0);
  CHECK(st.last_drift <= kGramDriftTolerance);
  CHECK((st.a - gram(st.x)).norm() == 0.0);
}

TEST_CASE("a compact step reads only the masked rows and their band") {
  // Rows a step may read: delta's support, the next block, and rows within
  // the bandwidth of the next block. Everything else is poisoned with NaN;
  // the step must produce the same state as on the clean factor.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int dims : {1, 2}) {
    auto op = build_laplacian<double>({dims == 1 ? 400 : 20, dims});
    const Index n = op->dim();
    const Index band = *op->bandwidth();
    const Index nb = 13;
    auto st = make_compact_state(*op, default_initial_factor<double>(n, 3, 9), nb,
                                 stable_alpha(*op));
    st.gram_refresh_interval = 0;
    for (int k = 0; k < 60; ++k) {
      std::vector<bool> allowed(static_cast<std::size_t>(n), false);
      for (Index r : st.rows) allowed[static_cast<std::size_t>(r)] = true;
      for (Index r : st.mask.rows(st.k + 1)) {
        for (Index d = -band; d <= band; ++d) {
          if (r + d >= 0 && r + d < n) allowed[static_cast<std::size_t>(r + d)] = true;
        }
      }
      auto poisoned = st;
      for (Index i = 0; i < n; ++i) {
        if (!allowed[static_cast<std::size_t>(i)]) poisoned.x.row(i).setConstant(nan);
      }
      crgd_step(*op, st);
      crgd_step(*op, poisoned);
      CHECK((poisoned.delta - st.delta).norm() == 0.0);
      CHECK((poisoned.a - st.a).norm() == 0.0);
      CHECK((poisoned.s - st.s).norm() == 0.0);
      CHECK(poisoned.scratch.allFinite());
    }
  }
}

TEST_CASE("crgd_solve from a stationary factor stops within one sweep") {
  auto op = build_laplacian<double>({40, 1});
  const auto eig = dense_eig(materialize(*op));
  Matrix<double> x0 = eig.vectors.leftCols(2);
  for (Index i = 0; i < 2; ++i) x0.col(i) *= std::sqrt(eig.values(i));
  CrgdConfig cfg;
  cfg.block = 8;
  cfg.alpha = stable_alpha(*op);
  cfg.tolerance = 1e-8;
  cfg.record_wall_time = false;
  const auto res = crgd_solve(*op, x0, cfg);
  CHECK(res.status == SolveStatus::converged);
  CHECK(res.trace.size() == 5);
  for (const auto& r : res.trace) CHECK(r.grad_norm < 1e-8);
}

TEST_CASE("crgd_solve converges to the top eigenvalues with monotone sampled f") {
  const LaplacianSpec spec{30, 1};
  auto op = build_laplacian<double>(spec);
  const Matrix<double> a = materialize(*op);
  CrgdConfig cfg;
  cfg.block = 6;
  cfg.alpha = 0.1 / *op->max_eigenvalue();
  cfg.tolerance = 1e-6;
  cfg.max_iters = 400000;
  cfg.record_wall_time = false;
  const auto x0 = scale_to_ray_minimizer<double>(*op, default_initial_factor<double>(30, 2, 4));
  const auto res = crgd_solve(*op, x0, cfg);
  REQUIRE(res.status == SolveStatus::converged);
  double last = std::numeric_limits<double>::infinity();
  const double slack = 1e-13 * std::abs(res.trace.front().f);
  for (const auto& r : res.trace) {
    if (std::isnan(r.f)) continue;
    CHECK(r.f <= last + slack);
    last = r.f;
  }
  // The masked norms of the last sweep bound the full gradient.
  const double full = oracle::dense_gradient<double>(a, res.x).norm();
  CHECK(full <= std::sqrt(30.0 / 6.0) * cfg.tolerance * (1 + kGramDriftTolerance));
  const auto pairs = extract_eigenpairs(*op, res.x);
  const RealVector want = laplacian_eigenvalues(spec).head(2);
  CHECK(((pairs.values - want).array().abs() / want.array()).maxCoeff() <= 1e-8);
}

TEST_CASE("crgd contracts and divergence guard") {
  DenseOperator<double> dense(random_psd_matrix<double>(10, 1));
  CrgdConfig cfg;
  cfg.block = 2;
  CHECK_THROWS_AS(crgd_solve(dense, default_initial_factor<double>(10, 2, 1), cfg),
                  CapabilityError);

  auto op = build_laplacian<double>({20, 1});
  cfg.block = 21;
  CHECK_THROWS_AS(crgd_solve(*op, default_initial_factor<double>(20, 2, 1), cfg),
                  ConstructionError);
  cfg.block = 4;
  cfg.alpha = -1.0;
  CHECK_THROWS_AS(crgd_solve(*op, default_initial_factor<double>(20, 2, 1), cfg),
                  ConstructionError);

  cfg.alpha = 10.0 / *op->max_eigenvalue();
  cfg.record_wall_time = false;
  const auto res = crgd_solve(*op, scale_to_ray_minimizer<double>(
                                       *op, default_initial_factor<double>(20, 2, 1)),
                              cfg);
  CHECK(res.status == SolveStatus::step_too_large);
}
