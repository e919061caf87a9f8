#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "bmeig/linop.hpp"
#include "bmeig/spectrum.hpp"

namespace bmeig {

/// An orthonormal (real) or unitary (complex) n x n basis V with fast
/// analysis c = V* x and synthesis x = V c on blocks.
template <typename Scalar>
class OrthonormalBasis {
 public:
  virtual ~OrthonormalBasis() = default;
  virtual Index dim() const = 0;
  virtual std::string name() const = 0;
  virtual void analyze(const Matrix<Scalar>& x, Matrix<Scalar>& c) const = 0;
  virtual void synthesize(const Matrix<Scalar>& c, Matrix<Scalar>& x) const = 0;
};

template <typename Scalar>
using BasisPtr = std::shared_ptr<const OrthonormalBasis<Scalar>>;

/// Largest ||V* V u - u|| / ||u|| over a few seeded random probes.
template <typename Scalar>
double basis_orthonormality_defect(const OrthonormalBasis<Scalar>& basis,
                                   int probes = 3, std::uint64_t seed = 11) {
  double worst = 0.0;
  for (int t = 0; t < probes; ++t) {
    const Matrix<Scalar> u = random_normal_block<Scalar>(basis.dim(), 1, seed + t);
    Matrix<Scalar> c, back;
    basis.synthesize(u, c);
    basis.analyze(c, back);
    worst = std::max(worst, (back - u).norm() / u.norm());
    // Norm preservation catches a scaled-but-invertible pair.
    worst = std::max(worst, std::abs(c.norm() - u.norm()) / u.norm());
  }
  return worst;
}

/// Explicit dense basis Q (columns are the eigenvectors).
template <typename Scalar>
class ExplicitBasis final : public OrthonormalBasis<Scalar> {
 public:
  explicit ExplicitBasis(Matrix<Scalar> q) : q_(std::move(q)) {
    if (q_.rows() != q_.cols() || q_.rows() < 1) {
      throw ConstructionError("explicit basis: Q must be square");
    }
    if (basis_orthonormality_defect(*this) > 1e-10) {
      throw ConstructionError("explicit basis: Q is not orthonormal");
    }
  }

  /// Q from the Householder QR of a seeded n x n normal block.
  static std::shared_ptr<ExplicitBasis> seeded(Index n, std::uint64_t seed) {
    const Matrix<Scalar> g = random_normal_block<Scalar>(n, n, seed);
    Eigen::HouseholderQR<Matrix<Scalar>> qr(g);
    Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(n, n);
    return std::make_shared<ExplicitBasis>(std::move(q));
  }

  Index dim() const override { return q_.rows(); }
  std::string name() const override { return "qr"; }
  void analyze(const Matrix<Scalar>& x, Matrix<Scalar>& c) const override {
    c.noalias() = q_.adjoint() * x;
  }
  void synthesize(const Matrix<Scalar>& c, Matrix<Scalar>& x) const override {
    x.noalias() = q_ * c;
  }
  const Matrix<Scalar>& matrix() const { return q_; }

 private:
  Matrix<Scalar> q_;
};

namespace detail {

using Complex = std::complex<double>;

// Eigen's kissfft backend faults on length 1, where the DFT is the identity.
inline std::vector<Complex> fft_forward(const std::vector<Complex>& in) {
  if (in.size() <= 1) return in;
  Eigen::FFT<double> fft;
  std::vector<Complex> out;
  fft.fwd(out, in);
  return out;
}

/// Inverse DFT including the 1/n factor.
inline std::vector<Complex> fft_inverse(const std::vector<Complex>& in) {
  if (in.size() <= 1) return in;
  Eigen::FFT<double> fft;
  std::vector<Complex> out;
  fft.inv(out, in);
  return out;
}

// Unnormalized DCT-II, X_k = sum_i x_i cos(pi k (2i+1) / 2n), through one
// length-n complex FFT of the even/odd reordered input (Makhoul):
//   v_i = x_{2i},  v_{n-1-i} = x_{2i+1},  X_k = Re(exp(-i pi k / 2n) V_k).
inline std::vector<double> dct2(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<Complex> v(n);
  for (std::size_t i = 0; 2 * i < n; ++i) v[i] = x[2 * i];
  for (std::size_t i = 0; 2 * i + 1 < n; ++i) v[n - 1 - i] = x[2 * i + 1];
  const auto big_v = fft_forward(v);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double ang = -std::numbers::pi * static_cast<double>(k) /
                       (2.0 * static_cast<double>(n));
    out[k] = std::real(std::polar(1.0, ang) * big_v[k]);
  }
  return out;
}

// Exact inverse of dct2: V_k = exp(i pi k / 2n) (X_k - i X_{n-k}), X_n = 0.
inline std::vector<double> idct2(const std::vector<double>& big_x) {
  const std::size_t n = big_x.size();
  std::vector<Complex> big_v(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double mirror = k == 0 ? 0.0 : big_x[n - k];
    const double ang = std::numbers::pi * static_cast<double>(k) /
                       (2.0 * static_cast<double>(n));
    big_v[k] = std::polar(1.0, ang) * Complex(big_x[k], -mirror);
  }
  const auto v = fft_inverse(big_v);
  std::vector<double> x(n);
  for (std::size_t i = 0; 2 * i < n; ++i) x[2 * i] = std::real(v[i]);
  for (std::size_t i = 0; 2 * i + 1 < n; ++i) x[2 * i + 1] = std::real(v[n - 1 - i]);
  return x;
}

template <typename Scalar, typename ColumnFn>
void for_each_real_part(const Matrix<Scalar>& in, Matrix<Scalar>& out,
                        ColumnFn&& fn) {
  const Index n = in.rows();
  out.resize(n, in.cols());
  std::vector<double> buf(static_cast<std::size_t>(n));
  for (Index j = 0; j < in.cols(); ++j) {
    for (Index i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = std::real(in(i, j));
    auto re = fn(buf);
    if constexpr (is_complex_v<Scalar>) {
      for (Index i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = std::imag(in(i, j));
      auto im = fn(buf);
      for (Index i = 0; i < n; ++i) {
        out(i, j) = Scalar(re[static_cast<std::size_t>(i)], im[static_cast<std::size_t>(i)]);
      }
    } else {
      for (Index i = 0; i < n; ++i) out(i, j) = re[static_cast<std::size_t>(i)];
    }
  }
}

}  // namespace detail

/// Orthonormal type-II cosine basis: V* = C with
/// C_ki = w_k cos(pi k (2i+1) / 2n), w_0 = sqrt(1/n), w_k = sqrt(2/n).
/// Real matrix; complex blocks are transformed part by part.
template <typename Scalar>
class CosineBasis final : public OrthonormalBasis<Scalar> {
 public:
  explicit CosineBasis(Index n) : n_(n) {
    if (n < 1) throw ConstructionError("cosine basis: n must be >= 1");
  }
  Index dim() const override { return n_; }
  std::string name() const override { return "cosine"; }

  void analyze(const Matrix<Scalar>& x, Matrix<Scalar>& c) const override {
    detail::for_each_real_part(x, c, [this](const std::vector<double>& col) {
      auto out = detail::dct2(col);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] *= weight(k);
      return out;
    });
  }
  void synthesize(const Matrix<Scalar>& c, Matrix<Scalar>& x) const override {
    detail::for_each_real_part(c, x, [this](const std::vector<double>& col) {
      std::vector<double> big_x(col.size());
      for (std::size_t k = 0; k < col.size(); ++k) big_x[k] = col[k] / weight(k);
      return detail::idct2(big_x);
    });
  }

 private:
  double weight(std::size_t k) const {
    const double n = static_cast<double>(n_);
    return k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
  }
  Index n_;
};

/// Unitary DFT basis: V* = F with F_jk = exp(-2 pi i jk / n) / sqrt(n).
class FourierBasis final : public OrthonormalBasis<std::complex<double>> {
 public:
  using Scalar = std::complex<double>;
  explicit FourierBasis(Index n) : n_(n) {
    if (n < 1) throw ConstructionError("fourier basis: n must be >= 1");
  }
  Index dim() const override { return n_; }
  std::string name() const override { return "fourier"; }

  void analyze(const Matrix<Scalar>& x, Matrix<Scalar>& c) const override {
    transform(x, c, true);
  }
  void synthesize(const Matrix<Scalar>& c, Matrix<Scalar>& x) const override {
    transform(c, x, false);
  }

 private:
  void transform(const Matrix<Scalar>& in, Matrix<Scalar>& out,
                 bool forward) const {
    const double root_n = std::sqrt(static_cast<double>(n_));
    out.resize(n_, in.cols());
    std::vector<Scalar> col(static_cast<std::size_t>(n_));
    for (Index j = 0; j < in.cols(); ++j) {
      for (Index i = 0; i < n_; ++i) col[static_cast<std::size_t>(i)] = in(i, j);
      const auto res = forward ? detail::fft_forward(col) : detail::fft_inverse(col);
      const double s = forward ? 1.0 / root_n : root_n;
      for (Index i = 0; i < n_; ++i) out(i, j) = res[static_cast<std::size_t>(i)] * s;
    }
  }
  Index n_;
};

/// Unitary 2D DFT basis on an m x m grid (n = m^2), grid flattened
/// column-major: u(a, b) = x(a + m b).
class Fourier2dBasis final : public OrthonormalBasis<std::complex<double>> {
 public:
  using Scalar = std::complex<double>;
  explicit Fourier2dBasis(Index n) : n_(n) {
    m_ = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
    if (n < 1 || m_ * m_ != n) {
      throw ConstructionError("fourier2d basis: n must be a perfect square");
    }
  }
  Index dim() const override { return n_; }
  std::string name() const override { return "fourier2d"; }

  void analyze(const Matrix<Scalar>& x, Matrix<Scalar>& c) const override {
    transform(x, c, true);
  }
  void synthesize(const Matrix<Scalar>& c, Matrix<Scalar>& x) const override {
    transform(c, x, false);
  }

 private:
  void transform(const Matrix<Scalar>& in, Matrix<Scalar>& out,
                 bool forward) const {
    const double root_m = std::sqrt(static_cast<double>(m_));
    const double s = forward ? 1.0 / root_m : root_m;
    out.resize(n_, in.cols());
    std::vector<Scalar> line(static_cast<std::size_t>(m_));
    for (Index j = 0; j < in.cols(); ++j) {
      Matrix<Scalar> grid = in.col(j).reshaped(m_, m_);
      for (int pass = 0; pass < 2; ++pass) {
        for (Index a = 0; a < m_; ++a) {
          for (Index b = 0; b < m_; ++b) {
            line[static_cast<std::size_t>(b)] = pass == 0 ? grid(b, a) : grid(a, b);
          }
          const auto res = forward ? detail::fft_forward(line) : detail::fft_inverse(line);
          for (Index b = 0; b < m_; ++b) {
            (pass == 0 ? grid(b, a) : grid(a, b)) = res[static_cast<std::size_t>(b)] * s;
          }
        }
      }
      out.col(j) = grid.reshaped();
    }
  }
  Index n_;
  Index m_;
};

enum class BasisKind { qr, cosine, fourier, fourier2d };

inline std::optional<BasisKind> parse_basis_kind(const std::string& s) {
  if (s == "qr") return BasisKind::qr;
  if (s == "cosine" || s == "dct") return BasisKind::cosine;
  if (s == "fourier" || s == "fft") return BasisKind::fourier;
  if (s == "fourier2d" || s == "fft2") return BasisKind::fourier2d;
  return std::nullopt;
}

inline const char* to_string(BasisKind b) {
  switch (b) {
    case BasisKind::qr: return "qr";
    case BasisKind::cosine: return "cosine";
    case BasisKind::fourier: return "fourier";
    case BasisKind::fourier2d: return "fourier2d";
  }
  return "?";
}

/// Spectral-synthesis operator A = V diag(lambda) V*. eigenvalues(i) is the
/// eigenvalue of basis vector i.
template <typename Scalar>
class SpectralOperator final : public HermitianOperator<Scalar> {
 public:
  using Block = Matrix<Scalar>;

  SpectralOperator(BasisPtr<Scalar> basis, RealVector eigenvalues)
      : basis_(std::move(basis)), lambda_(std::move(eigenvalues)) {
    if (!basis_ || basis_->dim() != lambda_.size()) {
      throw ConstructionError("spectral: basis and eigenvalue sizes differ");
    }
  }

  Index dim() const override { return basis_->dim(); }
  std::string describe() const override {
    return "spectral(n=" + std::to_string(dim()) + ",basis=" + basis_->name() + ")";
  }
  void apply_into(const Block& x, Block& y) const override {
    Block c;
    basis_->analyze(x, c);
    c = lambda_.asDiagonal() * c;
    basis_->synthesize(c, y);
  }
  std::optional<double> frobenius_norm_sq() const override {
    return lambda_.squaredNorm();
  }
  std::optional<double> trace() const override { return lambda_.sum(); }
  std::optional<double> max_eigenvalue() const override {
    return lambda_.maxCoeff();
  }
  std::optional<double> min_eigenvalue() const override {
    return lambda_.minCoeff();
  }

  const BasisPtr<Scalar>& basis() const { return basis_; }
  const RealVector& eigenvalues() const { return lambda_; }

 private:
  BasisPtr<Scalar> basis_;
  RealVector lambda_;
};

template <typename Scalar>
BasisPtr<Scalar> make_basis(BasisKind kind, Index n, std::uint64_t seed) {
  switch (kind) {
    case BasisKind::qr:
      return ExplicitBasis<Scalar>::seeded(n, seed);
    case BasisKind::cosine:
      if constexpr (is_complex_v<Scalar>) {
        throw ConstructionError("cosine basis is real; use a real scalar field");
      } else {
        return std::make_shared<CosineBasis<Scalar>>(n);
      }
    case BasisKind::fourier:
      if constexpr (is_complex_v<Scalar>) {
        return std::make_shared<FourierBasis>(n);
      } else {
        throw ConstructionError("fourier basis requires the complex scalar field");
      }
    case BasisKind::fourier2d:
      if constexpr (is_complex_v<Scalar>) {
        return std::make_shared<Fourier2dBasis>(n);
      } else {
        throw ConstructionError("fourier2d basis requires the complex scalar field");
      }
  }
  throw ConstructionError("unknown basis kind");
}

/// Scalar field a basis kind lives in.
inline ScalarField basis_field(BasisKind kind) {
  return (kind == BasisKind::fourier || kind == BasisKind::fourier2d)
             ? ScalarField::complex
             : ScalarField::real;
}

template <typename Scalar>
OperatorPtr<Scalar> build_spectral(const SpectrumSpec& spec, BasisPtr<Scalar> basis) {
  RealVector lambda = generate_spectrum(spec);
  if (basis->dim() != lambda.size()) {
    throw ConstructionError("build_spectral: basis dimension differs from n");
  }
  return std::make_shared<SpectralOperator<Scalar>>(std::move(basis), std::move(lambda));
}

template <typename Scalar>
OperatorPtr<Scalar> build_spectral(const SpectrumSpec& spec, BasisKind kind,
                                   std::uint64_t basis_seed) {
  return build_spectral<Scalar>(spec, make_basis<Scalar>(kind, spec.n, basis_seed));
}

}  // namespace bmeig
