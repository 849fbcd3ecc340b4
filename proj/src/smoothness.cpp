#include "covercc/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "covercc/errors.hpp"

namespace covercc {

namespace {

void check_resolution(int resolution) {
  if (resolution < 2)
    throw validation_error("smoothness grid: resolution must be >= 2, got " +
                           std::to_string(resolution));
}

// Witness for the early exits: the largest single-component range over the
// grid, together with the rows achieving it. If the range is below eps no
// pair anywhere can violate; otherwise the witness pair itself violates and
// bounds the search radius.
struct Spread {
  double value = 0.0;
  std::size_t row_min = 0, row_max = 0;
};

Spread component_spread(const Matrix& values) {
  Spread best;
  for (std::size_t k = 0; k < values.cols; ++k) {
    double lo = values(0, k), hi = values(0, k);
    std::size_t lo_row = 0, hi_row = 0;
    for (std::size_t i = 1; i < values.rows; ++i) {
      const double v = values(i, k);
      if (v < lo) {
        lo = v;
        lo_row = i;
      }
      if (v > hi) {
        hi = v;
        hi_row = i;
      }
    }
    if (hi - lo > best.value) {
      best.value = hi - lo;
      best.row_min = lo_row;
      best.row_max = hi_row;
    }
  }
  return best;
}

bool rows_violate(const Matrix& values, std::size_t a, std::size_t b, double eps) {
  const double* pa = values.row(a);
  const double* pb = values.row(b);
  for (std::size_t k = 0; k < values.cols; ++k)
    if (std::abs(pa[k] - pb[k]) >= eps) return true;
  return false;
}

double delta_1d(const GridEval& grid, double eps) {
  const int n = grid.resolution;
  const double h = grid_spacing(n);
  const Spread spread = component_spread(grid.values);
  if (spread.value < eps) return 1.0;  // sqrt(d) cap, d = 1

  // The witness pair violates, so a violating gap no larger than this
  // exists; gaps are scanned in increasing order and the first hit is the
  // minimum over all pairs.
  const std::size_t gap_limit =
      std::size_t(std::max(spread.row_max, spread.row_min) -
                  std::min(spread.row_max, spread.row_min));
  for (std::size_t gap = 1; gap <= gap_limit; ++gap)
    for (std::size_t i = 0; i + gap < std::size_t(n); ++i)
      if (rows_violate(grid.values, i, i + gap, eps)) return double(gap) * h;
  return 1.0;  // unreachable given the witness, kept for safety
}

double delta_2d(const GridEval& grid, double eps) {
  const int n = grid.resolution;
  const double h = grid_spacing(n);
  const double cap = std::sqrt(2.0);
  const Spread spread = component_spread(grid.values);
  if (spread.value < eps) return cap;

  const auto row_of = [n](std::size_t idx) { return long(idx) / n; };
  const auto col_of = [n](std::size_t idx) { return long(idx) % n; };
  const long wi = row_of(spread.row_max) - row_of(spread.row_min);
  const long wj = col_of(spread.row_max) - col_of(spread.row_min);
  const long witness_sq = wi * wi + wj * wj;

  // Canonical offsets (a,b): a > 0 with any b, or a = 0 with b > 0. Every
  // unordered grid pair appears under exactly one of them. Sorted by exact
  // Euclidean offset length; the first offset with a violating pair yields
  // the minimum distance.
  struct Offset {
    long a, b;
    long sq;
  };
  std::vector<Offset> offsets;
  const long amax = std::min<long>(n - 1, long(std::ceil(std::sqrt(double(witness_sq)))));
  for (long a = 0; a <= amax; ++a) {
    const long rem = witness_sq - a * a;
    if (rem < 0) break;
    const long bmax = std::min<long>(n - 1, long(std::floor(std::sqrt(double(rem)) + 1e-9)));
    const long bmin = a == 0 ? 1 : -bmax;
    for (long b = bmin; b <= bmax; ++b) {
      if (a == 0 && b <= 0) continue;
      offsets.push_back({a, b, a * a + b * b});
    }
  }
  std::sort(offsets.begin(), offsets.end(),
            [](const Offset& x, const Offset& y) { return x.sq < y.sq; });

  for (const Offset& off : offsets) {
    const long i_lo = 0, i_hi = n - off.a;           // valid first-row range
    const long j_lo = std::max(0L, -off.b), j_hi = std::min<long>(n, n - off.b);
    for (long i = i_lo; i < i_hi; ++i) {
      const std::size_t base = std::size_t(i) * n;
      const std::size_t shifted = std::size_t(i + off.a) * n + off.b;
      for (long j = j_lo; j < j_hi; ++j)
        if (rows_violate(grid.values, base + j, shifted + j, eps))
          return h * std::sqrt(double(off.sq));
    }
  }
  return cap;  // unreachable given the witness, kept for safety
}

}  // namespace

double grid_spacing(int resolution) {
  check_resolution(resolution);
  return 1.0 / double(resolution - 1);
}

GridEval eval_grid(const Mlp& net, int resolution) {
  check_resolution(resolution);
  const int dim = net.in_dim();
  if (dim != 1 && dim != 2)
    throw validation_error("eval_grid: grid evaluation supports d in {1,2}, "
                           "network input is " + std::to_string(dim));
  GridEval grid;
  grid.dim = dim;
  grid.resolution = resolution;
  const double h = grid_spacing(resolution);
  if (dim == 1) {
    Matrix x(resolution, 1);
    for (int i = 0; i < resolution; ++i) x(i, 0) = i * h;
    grid.values = forward_batch(net, x);
  } else {
    Matrix x(std::size_t(resolution) * resolution, 2);
    std::size_t r = 0;
    for (int i = 0; i < resolution; ++i)
      for (int j = 0; j < resolution; ++j, ++r) {
        x(r, 0) = i * h;
        x(r, 1) = j * h;
      }
    grid.values = forward_batch(net, x);
  }
  return grid;
}

GridEval eval_grid(const ProbFn& f, int dim, int resolution, int n_outputs) {
  check_resolution(resolution);
  if (dim != 1 && dim != 2)
    throw validation_error("eval_grid: d must be 1 or 2, got " + std::to_string(dim));
  if (n_outputs < 2)
    throw validation_error("eval_grid: need at least 2 output components");
  GridEval grid;
  grid.dim = dim;
  grid.resolution = resolution;
  const double h = grid_spacing(resolution);
  const std::size_t n_points =
      dim == 1 ? std::size_t(resolution) : std::size_t(resolution) * resolution;
  grid.values = Matrix(n_points, n_outputs);
  std::vector<double> x(dim);
  for (std::size_t r = 0; r < n_points; ++r) {
    if (dim == 1) {
      x[0] = double(r) * h;
    } else {
      x[0] = double(r / resolution) * h;
      x[1] = double(r % resolution) * h;
    }
    const std::vector<double> v = f(x);
    if (v.size() != std::size_t(n_outputs))
      throw validation_error("eval_grid: function returned " +
                             std::to_string(v.size()) + " components, expected " +
                             std::to_string(n_outputs));
    std::copy(v.begin(), v.end(), grid.values.row(r));
  }
  return grid;
}

double delta_f_grid(const GridEval& grid, double eps) {
  if (grid.dim != 1 && grid.dim != 2)
    throw validation_error("delta_f_grid: d must be 1 or 2");
  check_resolution(grid.resolution);
  if (!(eps > 0.0))
    throw undefined_error("delta_f_grid: eps = " + std::to_string(eps) +
                          " leaves delta_f undefined (need eps > 0)");
  if (eps >= 1.0) return std::sqrt(double(grid.dim));
  return grid.dim == 1 ? delta_1d(grid, eps) : delta_2d(grid, eps);
}

double delta_f_grid(const Mlp& net, int resolution, double eps) {
  if (!(eps > 0.0))
    throw undefined_error("delta_f_grid: eps = " + std::to_string(eps) +
                          " leaves delta_f undefined (need eps > 0)");
  if (eps >= 1.0) return std::sqrt(double(net.in_dim()));
  return delta_f_grid(eval_grid(net, resolution), eps);
}

double delta_f_grid(const ProbFn& f, int dim, int resolution, int n_outputs,
                    double eps) {
  if (!(eps > 0.0))
    throw undefined_error("delta_f_grid: eps = " + std::to_string(eps) +
                          " leaves delta_f undefined (need eps > 0)");
  if (eps >= 1.0) return std::sqrt(double(dim));
  return delta_f_grid(eval_grid(f, dim, resolution, n_outputs), eps);
}

double delta_spectral(double lipschitz, double loss, double c) {
  if (!(lipschitz > 0.0))
    throw validation_error("delta_spectral: lipschitz must be > 0");
  if (!(loss >= 0.0))
    throw validation_error("delta_spectral: loss must be >= 0");
  if (!(c > 0.0 && c < 1.0))
    throw validation_error("delta_spectral: c must lie in (0,1)");
  const double eps = std::exp(-loss) - c;
  if (!(eps > 0.0))
    throw undefined_error("delta_spectral: e^{-loss} = " +
                          std::to_string(std::exp(-loss)) + " <= c = " +
                          std::to_string(c) + ", margin undefined");
  return eps / lipschitz;
}

}  // namespace covercc
