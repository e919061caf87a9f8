#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "bmeig/linop.hpp"

namespace bmeig::cli {

/// Coordinate-list text file:
///
///   % or # comment lines
///   rows cols nnz
///   i j re [im]        (1-based, nnz lines)
///
/// With lower_triangle, each off-diagonal entry (i, j) also sets (j, i) to
/// its conjugate. Duplicate entries are summed. A nonzero imaginary part in
/// a real-field read is an error.
template <typename Scalar>
Eigen::SparseMatrix<Scalar, Eigen::RowMajor> read_coordinate_list(std::istream& in,
                                                                  bool lower_triangle,
                                                                  const std::string& source) {
  auto fail = [&](int line, const std::string& what) {
    throw ConstructionError(source + ":" + std::to_string(line) + ": " + what);
  };
  std::string line;
  int lineno = 0;
  Index rows = -1, cols = -1, nnz = -1, count = 0;
  std::vector<Eigen::Triplet<Scalar>> t;
  while (std::getline(in, line)) {
    ++lineno;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '%' || line[b] == '#') continue;
    std::istringstream ls(line);
    if (rows < 0) {
      if (!(ls >> rows >> cols >> nnz) || rows < 1 || cols < 1 || nnz < 0) {
        fail(lineno, "expected 'rows cols nnz'");
      }
      if (rows != cols) fail(lineno, "matrix must be square");
      t.reserve(static_cast<std::size_t>(lower_triangle ? 2 * nnz : nnz));
      continue;
    }
    Index i = 0, j = 0;
    double re = 0.0, im = 0.0;
    if (!(ls >> i >> j >> re)) fail(lineno, "expected 'i j value'");
    ls >> im;
    if (i < 1 || j < 1 || i > rows || j > cols) fail(lineno, "index out of range");
    Scalar v;
    if constexpr (is_complex_v<Scalar>) {
      v = Scalar(re, im);
    } else {
      if (im != 0.0) fail(lineno, "complex entry in a real matrix; set scalar = complex");
      v = re;
    }
    t.emplace_back(i - 1, j - 1, v);
    if (lower_triangle && i != j) {
      if (j > i) fail(lineno, "entry above the diagonal with triangle = lower");
      t.emplace_back(j - 1, i - 1, Eigen::numext::conj(v));
    }
    if (++count > nnz) fail(lineno, "more entries than declared");
  }
  if (rows < 0) fail(lineno, "missing 'rows cols nnz' line");
  if (count != nnz) fail(lineno, "fewer entries than declared");
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

template <typename Scalar>
OperatorPtr<Scalar> load_coordinate_operator(const std::string& path, bool lower_triangle) {
  std::ifstream in(path);
  if (!in) throw ConstructionError("cannot open '" + path + "'");
  return std::make_shared<SparseOperator<Scalar>>(
      read_coordinate_list<Scalar>(in, lower_triangle, path), "file");
}

}  // namespace bmeig::cli
