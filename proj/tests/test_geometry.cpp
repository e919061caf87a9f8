#include <doctest.h>

#include <complex>

#include "bmeig/bmeig.hpp"
#include "oracles.hpp"

using namespace bmeig;
using cplx = std::complex<double>;

namespace {

template <typename S>
Matrix<S> random_skew(Index p, std::uint64_t seed) {
  const Matrix<S> g = random_normal_block<S>(p, p, seed);
  return g - g.adjoint();
}

template <typename S>
Matrix<S> random_hermitian_rhs_block(const Matrix<S>& x, std::uint64_t seed) {
  // With orthonormal x, z = x S has x* z = S, Hermitian when S is.
  const Matrix<S> g = random_normal_block<S>(x.cols(), x.cols(), seed);
  return x * (g + g.adjoint());
}

}  // namespace

TEST_CASE("real_inner examples") {
  const Matrix<double> i2 = Matrix<double>::Identity(2, 2);
  CHECK(real_inner(i2, i2) == 2.0);
  Matrix<cplx> a(1, 1);
  a(0, 0) = cplx(0, 1);
  CHECK(real_inner(a, a) == 1.0);
  Matrix<double> d1 = Matrix<double>::Zero(2, 2), d2 = Matrix<double>::Zero(2, 2);
  d1.diagonal() << 1, 2;
  d2.diagonal() << 3, 4;
  CHECK(real_inner(d1, d2) == 11.0);
  CHECK_THROWS_AS(real_inner(d1, Matrix<double>(Matrix<double>::Zero(2, 3))), DimensionError);
}

TEST_CASE_TEMPLATE("real_inner is symmetric and real-bilinear", S, double, cplx) {
  const auto a = random_normal_block<S>(7, 3, 1);
  const auto b = random_normal_block<S>(7, 3, 2);
  const auto c = random_normal_block<S>(7, 3, 3);
  CHECK(real_inner(a, b) == doctest::Approx(real_inner(b, a)).epsilon(1e-14));
  const Matrix<S> lin = 2.5 * a - 0.5 * c;
  CHECK(real_inner(lin, b) ==
        doctest::Approx(2.5 * real_inner(a, b) - 0.5 * real_inner(c, b)).epsilon(1e-12));
}

TEST_CASE("egrad examples") {
  Matrix<double> a1(1, 1);
  a1(0, 0) = 3.0;
  DenseOperator<double> op1(a1);
  Matrix<double> x1 = Matrix<double>::Ones(1, 1);
  CHECK(egrad(op1, x1)(0, 0) == doctest::Approx(-4.0));

  IdentityOperator<double> id(2);
  Matrix<double> x2(2, 1);
  x2 << 2.0, 0.0;
  const Matrix<double> g = egrad(id, x2);
  CHECK(g(0, 0) == doctest::Approx(12.0));
  CHECK(g(1, 0) == 0.0);

  const auto f = random_normal_block<double>(6, 2, 4);
  DenseOperator<double> exact(Matrix<double>(f * f.transpose()));
  CHECK(egrad(exact, f).norm() < 1e-12 * f.squaredNorm() * f.norm());
}

TEST_CASE_TEMPLATE("egrad matches central finite differences", S, double, cplx) {
  const Index n = 30, p = 3;
  const Matrix<S> a = random_psd_matrix<S>(n, 11);
  DenseOperator<S> op(a);
  const auto x = random_normal_block<S>(n, p, 12);
  const Matrix<S> g = egrad(op, x);
  for (int t = 0; t < 20; ++t) {
    const auto dir = random_normal_block<S>(n, p, 100 + t);
    const double h = 1e-5 * x.norm() / dir.norm();
    const Matrix<S> xp = x + h * dir;
    const Matrix<S> xm = x - h * dir;
    const double fd =
        (oracle::dense_objective<S>(a, xp) - oracle::dense_objective<S>(a, xm)) / (2 * h);
    const double an = real_inner(g, dir);
    CHECK(std::abs(fd - an) <= 1e-6 * std::abs(an));
  }
  CHECK((g - oracle::dense_gradient<S>(a, x)).norm() <= 1e-12 * g.norm());
}

TEST_CASE_TEMPLATE("egrad is horizontal", S, double, cplx) {
  auto op = build_laplacian<S>({6, 2});
  for (int t = 0; t < 5; ++t) {
    const auto x = random_normal_block<S>(36, 4, 30 + t);
    const Matrix<S> g = egrad(*op, x);
    CHECK(horizontality_defect(x, g) <= 1e-10 * x.norm() * g.norm());
  }
}

TEST_CASE("objective matches the dense formula") {
  auto lap = build_laplacian<double>({5, 2});
  const Matrix<double> a = materialize(*lap);
  const auto x = random_normal_block<double>(25, 3, 8);
  const auto obj = objective(*lap, x);
  REQUIRE(obj.constant.has_value());
  CHECK(obj.value() == doctest::Approx(oracle::dense_objective<double>(a, x)).epsilon(1e-12));

  SpectrumSpec spec{SpectrumKind::uniform, 16, 16, 0, {}, 0};
  auto sp = build_spectral<double>(spec, BasisKind::cosine, 0);
  const auto y = random_normal_block<double>(16, 2, 9);
  CHECK(objective(*sp, y).value() ==
        doctest::Approx(oracle::dense_objective<double>(materialize(*sp), y)).epsilon(1e-12));
}

TEST_CASE("solve_lyapunov examples") {
  const auto e_id = GramFactor<double>(Matrix<double>::Identity(3, 3));
  const auto z = random_skew<double>(3, 1);
  CHECK((solve_lyapunov(e_id, z) - 0.5 * z).norm() < 1e-15 * z.norm() + 1e-300);

  Matrix<double> e = Matrix<double>::Zero(2, 2);
  e.diagonal() << 1.0, 3.0;
  Matrix<double> z2(2, 2);
  z2 << 0, 4, -4, 0;
  const Matrix<double> om = solve_lyapunov(GramFactor<double>(e), z2);
  CHECK(om(0, 1) == doctest::Approx(1.0));
  CHECK(om(1, 0) == doctest::Approx(-1.0));
  CHECK(std::abs(om(0, 0)) < 1e-15);

  CHECK(solve_lyapunov(GramFactor<double>(e), Matrix<double>(Matrix<double>::Zero(2, 2))).norm() ==
        0.0);

  Matrix<double> sing = Matrix<double>::Zero(2, 2);
  sing(0, 0) = 1.0;
  CHECK_THROWS_AS(solve_lyapunov(GramFactor<double>(sing), z2), RankDeficiencyError);
}

TEST_CASE_TEMPLATE("solve_lyapunov residual", S, double, cplx) {
  for (int t = 0; t < 10; ++t) {
    const auto x = random_normal_block<S>(20, 5, 200 + t);
    const auto e = GramFactor<S>::of(x);
    const auto z = random_skew<S>(5, 300 + t);
    const Matrix<S> om = solve_lyapunov(e, z);
    CHECK((om * e.matrix() + e.matrix() * om - z).norm() <= 1e-12 * z.norm());
    CHECK((om + om.adjoint()).norm() == 0.0);
  }
}

TEST_CASE_TEMPLATE("projection examples and properties", S, double, cplx) {
  const Index n = 15, p = 3;
  const auto x = random_normal_block<S>(n, p, 1);
  const auto z = random_normal_block<S>(n, p, 2);

  // Horizontal input is unchanged; vertical input vanishes.
  Eigen::HouseholderQR<Matrix<S>> qr(x);
  const Matrix<S> q = qr.householderQ() * Matrix<S>::Identity(n, p);
  const Matrix<S> zh = random_hermitian_rhs_block<S>(q, 3);
  CHECK((project_horizontal(q, zh) - zh).norm() < 1e-12 * zh.norm());
  CHECK(project_vertical(q, zh).norm() < 1e-12 * zh.norm());

  const Matrix<S> omega0 = random_skew<S>(p, 4);
  const Matrix<S> zv = x * omega0;
  CHECK(project_horizontal(x, zv).norm() < 1e-12 * zv.norm());
  CHECK((project_vertical(x, zv) - zv).norm() < 1e-12 * zv.norm());

  const Matrix<S> ph = project_horizontal(x, z);
  const Matrix<S> pv = project_vertical(x, z);
  CHECK((ph + pv - z).norm() < 1e-12 * z.norm());
  CHECK(std::abs(real_inner(ph, pv)) < 1e-12 * z.squaredNorm());
  CHECK(horizontality_defect(x, ph) < 1e-10 * x.norm() * ph.norm());
  CHECK((project_horizontal(x, ph) - ph).norm() < 1e-12 * ph.norm());
}

TEST_CASE_TEMPLATE("projection gauge equivariance", S, double, cplx) {
  for (int t = 0; t < 5; ++t) {
    const auto x = random_normal_block<S>(12, 4, 10 + t);
    const auto z = random_normal_block<S>(12, 4, 20 + t);
    const Matrix<S> o = random_unitary<S>(4, 30 + t);
    const Matrix<S> lhs = project_horizontal<S>(x * o, z * o);
    const Matrix<S> rhs = project_horizontal<S>(x, z) * o;
    CHECK((lhs - rhs).norm() <= 1e-11 * z.norm());
  }
}

TEST_CASE("retract examples") {
  const auto x = random_normal_block<double>(5, 2, 1);
  const auto eta = random_normal_block<double>(5, 2, 2);
  CHECK((retract(x, eta, 0.0) - x).norm() == 0.0);

  Matrix<double> x1(2, 1), e1(2, 1);
  x1 << 1, 0;
  e1 << 0, 1;
  const Matrix<double> r = retract(x1, e1, 2.0);
  CHECK(r(0, 0) == 1.0);
  CHECK(r(1, 0) == 2.0);

  const Matrix<double> two = retract<double>(retract(x, eta, 0.25), eta, 0.5);
  CHECK((two - retract(x, eta, 0.75)).norm() < 1e-14 * (x.norm() + eta.norm()));

  // Stepping onto a rank-deficient point raises the diagnostic only.
  Matrix<double> y(2, 2), d(2, 2);
  y << 1, 0, 0, 1;
  d << 0, 0, 0, -1;
  RankDiagnostic diag;
  (void)retract(y, d, 1.0, &diag);
  CHECK(diag.warning);
  (void)retract(y, d, 0.5, &diag);
  CHECK_FALSE(diag.warning);
}

TEST_CASE_TEMPLATE("transport examples", S, double, cplx) {
  const Index n = 20, p = 3;
  auto op = build_laplacian<S>({20, 1});
  const auto x = random_normal_block<S>(n, p, 5);
  const Matrix<S> xi = egrad(*op, x);
  CHECK((transport(x, xi) - xi).norm() < 1e-12 * xi.norm());

  // A step along a horizontal direction keeps that direction horizontal.
  const Matrix<S> eta = -xi;
  const Matrix<S> x_new = retract<S>(x, eta, 1e-3);
  CHECK((transport(x_new, eta) - eta).norm() < 1e-10 * eta.norm());

  const auto y = random_normal_block<S>(n, p, 6);
  const Matrix<S> moved = transport(y, xi);
  CHECK(horizontality_defect(y, moved) < 1e-10 * y.norm() * moved.norm());
}

TEST_CASE("gram factor and jacobi against Eigen's self-adjoint solver") {
  for (int t = 0; t < 10; ++t) {
    const auto x = random_normal_block<cplx>(30, 6, 40 + t);
    const auto e = GramFactor<cplx>::of(x);
    Eigen::SelfAdjointEigenSolver<Matrix<cplx>> ref(gram(x));
    RealVector want = ref.eigenvalues().reverse();
    CHECK((e.eigenvalues() - want).norm() < 1e-12 * want.norm());
    const Matrix<cplx> u = e.eigenvectors();
    CHECK((u.adjoint() * u - Matrix<cplx>::Identity(6, 6)).norm() < 1e-12);
    CHECK((u * e.eigenvalues().asDiagonal() * u.adjoint() - gram(x)).norm() <
          1e-12 * gram(x).norm());
  }
}

TEST_CASE_TEMPLATE("scale_to_ray_minimizer is stationary along the ray", S, double, cplx) {
  auto op = build_laplacian<S>({7, 2});
  const auto x = default_initial_factor<S>(49, 3, 2);
  const Matrix<S> y = scale_to_ray_minimizer(*op, x);
  CHECK(std::abs(real_inner(egrad(*op, y), y)) <= 1e-10 * egrad(*op, x).norm() * y.norm());
  CHECK(objective(*op, y).value() < objective(*op, x).value());
  CHECK_THROWS_AS(scale_to_ray_minimizer<S>(*op, Matrix<S>(Matrix<S>::Zero(49, 3))),
                  RankDeficiencyError);
}
