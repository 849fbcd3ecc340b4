#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "covercc/dataset.hpp"
#include "covercc/matrix.hpp"

namespace covercc {

// Empirical cover curve h(r): the fraction of test points whose nearest
// training point lies strictly closer than r. Radii are increasing and
// confined to (0, sqrt(d)], the diameter of the unit cube.
struct HCurve {
  std::vector<double> radii;
  std::vector<double> values;
  int dim = 0;
};

struct SepGap {
  double value = 0.0;       // min distance between differently labelled points
  std::size_t i = 0, j = 0; // row indices achieving it
  bool coincident = false;  // true when value == 0 (duplicate point, two labels)
};

struct HBoundCheck {
  bool ok = false;
  double min_slack = 0.0;   // min over radii of h(r) - (1 - sqrt(d)/r (1-rho))
  double worst_radius = 0.0;
};

// Everything the `cover` pipeline reports for a train/test pair. sc holds
// the diagonal of the class-cover matrix; mc is the full K x K matrix whose
// (i,j) entry is the cover of class-j test mass by class-i training balls
// (diagonal equals sc by construction).
struct CoverReport {
  int dim = 0;
  int n_classes = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;         // rows in the supplied test set
  std::size_t n_test_single = 0;  // single-label rows actually used
  std::vector<std::size_t> train_class_counts, test_class_counts;
  double rho_T = 0.0;
  std::vector<double> sc;
  Matrix mc;
  double cd = 0.0;
  double cc = 0.0;
  double delta_T = 0.0;
};

// Exact brute-force nearest-neighbour distances from every query row to the
// training rows, Euclidean metric, blocked inner loops. Partitioning the
// queries over threads cannot change any output bit (each query reduces
// independently with min). n_threads = 0 picks hardware concurrency.
std::vector<double> nn_distances(const Matrix& train, const Matrix& query,
                                 int n_threads = 0);

// h(r) over the given radii; the comparison dist < r is strict (open balls).
HCurve h_curve(const std::vector<double>& nn_dists, int dim,
               std::vector<double> radii);

// count equispaced radii k*sqrt(d)/count, k = 1..count.
std::vector<double> default_radii(int dim, std::size_t count);

// Closed form of (1/sqrt(d)) * integral of h: 1 - sum(min(dist_i, sqrt(d))) /
// (m sqrt(d)).
double total_cover(const std::vector<double>& nn_dists, int dim);

// K x K matrix C(i,j) = total cover of the class-j test points by the
// class-i training points. Both datasets must be single-label and every
// class 1..K must appear on both sides.
Matrix class_cover_matrix(const LabeledDataset& train, const LabeledDataset& test);

// mean(diagonal) - mean(off-diagonal). Requires K >= 2.
double cover_difference(const Matrix& covers);

// (1 - rho_T) / cd; throws undefined_error when cd == 0.
double cover_complexity(double rho_T, double cd);

// Minimum distance between differently labelled training points.
SepGap empirical_separation_gap(const LabeledDataset& train);

// Verifies h(r) >= 1 - (sqrt(d)/r)(1 - rho_T) - 1e-9 at every radius.
HBoundCheck h_bound_check(const HCurve& curve, double rho_T);

// Full pipeline. Multi-label test rows (synthetic buffer bands) are dropped
// before any mu estimate, so rho_T, sc and mc all refer to the normalized
// single-label restriction; the dropped count is reported.
CoverReport make_cover_report(const LabeledDataset& train,
                              const LabeledDataset& test);

void write_h_curve_csv(const HCurve& curve, const std::string& path);

}  // namespace covercc
