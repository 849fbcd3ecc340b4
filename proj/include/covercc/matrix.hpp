#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace covercc {

// Dense row-major matrix of doubles. Deliberately small: the toolkit needs
// storage plus three contraction patterns, implemented in matrix.cpp.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  std::span<const double> row_span(std::size_t r) const { return {row(r), cols}; }

  bool operator==(const Matrix&) const = default;
};

// c = a * b^T where a is m x k and b is n x k. c is resized to m x n.
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c);

// c = a^T * b where a is k x m and b is k x n. c is resized to m x n.
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);

// c = a * b where a is m x k and b is k x n. c is resized to m x n.
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);

// m * x for a single vector.
std::vector<double> matvec(const Matrix& m, std::span<const double> x);

// m^T * x.
std::vector<double> matvec_t(const Matrix& m, std::span<const double> x);

}  // namespace covercc
