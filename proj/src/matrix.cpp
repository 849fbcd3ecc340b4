#include "covercc/matrix.hpp"

#include <cassert>

namespace covercc {

namespace {
constexpr std::size_t kTile = 64;
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.cols == b.cols);
  const std::size_t m = a.rows, n = b.rows, k = a.cols;
  c.rows = m;
  c.cols = n;
  c.data.assign(m * n, 0.0);
  // Row-dot-row with tiling over b so its rows stay cache resident while a
  // tile of a is swept. The innermost loop is a contiguous dot product.
  for (std::size_t j0 = 0; j0 < n; j0 += kTile) {
    const std::size_t j1 = std::min(j0 + kTile, n);
    for (std::size_t i = 0; i < m; ++i) {
      const double* ai = a.row(i);
      double* ci = c.row(i);
      for (std::size_t j = j0; j < j1; ++j) {
        const double* bj = b.row(j);
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
        ci[j] = acc;
      }
    }
  }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.rows == b.rows);
  const std::size_t k = a.rows, m = a.cols, n = b.cols;
  c.rows = m;
  c.cols = n;
  c.data.assign(m * n, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a.row(p);
    const double* bp = b.row(p);
    for (std::size_t i = 0; i < m; ++i) {
      const double api = ap[i];
      if (api == 0.0) continue;
      double* ci = c.row(i);
      for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
}

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.cols == b.rows);
  const std::size_t m = a.rows, k = a.cols, n = b.cols;
  c.rows = m;
  c.cols = n;
  c.data.assign(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      if (aip == 0.0) continue;
      const double* bp = b.row(p);
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
  assert(x.size() == m.cols);
  std::vector<double> y(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* mi = m.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) acc += mi[j] * x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> matvec_t(const Matrix& m, std::span<const double> x) {
  assert(x.size() == m.rows);
  std::vector<double> y(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* mi = m.row(i);
    for (std::size_t j = 0; j < m.cols; ++j) y[j] += xi * mi[j];
  }
  return y;
}

}  // namespace covercc
