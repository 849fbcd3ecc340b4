#pragma once

#include <functional>
#include <span>
#include <vector>

#include "covercc/matrix.hpp"
#include "covercc/mlp.hpp"

namespace covercc {

// Any map from [0,1]^d into probability vectors; used for closed-form test
// functions. Networks go through the batched fast path instead.
using ProbFn = std::function<std::vector<double>(std::span<const double>)>;

// Values of f on the regular grid over [0,1]^d, one row per grid point.
// 1D: point i sits at i*h with h = 1/(resolution-1).
// 2D: point (i,j) sits at (i*h, j*h) and occupies row i*resolution + j.
struct GridEval {
  Matrix values;
  int dim = 0;
  int resolution = 0;
};

double grid_spacing(int resolution);

GridEval eval_grid(const Mlp& net, int resolution);
GridEval eval_grid(const ProbFn& f, int dim, int resolution, int n_outputs);

// Grid restriction of delta_f(eps) = inf{ ||x-y|| : ||f(x)-f(y)||_inf >= eps },
// capped at sqrt(d) when no grid pair violates. The search sweeps grid
// offsets in increasing Euclidean length and stops at the first offset with
// a violating pair, so it returns exactly what the exhaustive pair scan
// would. eps >= 1 short-circuits to the cap (probability coordinates cannot
// differ by 1); eps <= 0 is an undefined query.
double delta_f_grid(const GridEval& grid, double eps);
double delta_f_grid(const Mlp& net, int resolution, double eps);
double delta_f_grid(const ProbFn& f, int dim, int resolution, int n_outputs,
                    double eps);

// Spectral surrogate (e^{-loss} - c) / lipschitz. Throws undefined_error
// when e^{-loss} <= c. Uncapped; callers comparing against grid values on
// [0,1]^d should clamp to sqrt(d) themselves.
double delta_spectral(double lipschitz, double loss, double c);

}  // namespace covercc
