#pragma once

#include <optional>
#include <string>
#include <vector>

#include "covercc/dataset.hpp"
#include "covercc/matrix.hpp"
#include "covercc/mlp.hpp"

namespace covercc {

// c-accuracy at a point: some label in its tag set gets probability
// strictly above c. Requires 0.5 <= c < 1 so at most one class qualifies.
double c_accuracy(const Mlp& net, const LabeledDataset& test, double c);

// Strict argmax membership; any tie counts as a failure.
double expected_accuracy(const Mlp& net, const LabeledDataset& test);

// rho restricted to the c-accurate training points, relative to rho_T:
// total_cover(T~_c vs test) / total_cover(T vs test). Returns 0 when no
// training point is c-accurate.
double c_accuracy_on_train(const Mlp& net, const LabeledDataset& train,
                           const LabeledDataset& test, double c);

// Variants over precomputed probability rows, reused by the harness so one
// forward pass serves accuracy, loss and smoothness.
double c_accuracy_from_probs(const Matrix& probs,
                             const std::vector<LabelSet>& labels, double c);
double expected_accuracy_from_probs(const Matrix& probs,
                                    const std::vector<LabelSet>& labels);

struct BoundValue {
  double value = 0.0;
  bool vacuous = false;  // true when value <= 0, i.e. the bound says nothing
};

// 1 - (sqrt(d)/delta) (1 - rho_T). Requires delta > 0.
BoundValue thm_lower_bound(double rho_T, int dim, double delta);

// 1 - (sqrt(d)/delta) (1 - p_c1_on_T * rho_T).
BoundValue prop31_bound(double p_c1_on_T, double rho_T, int dim, double delta);

struct ErrorBound {
  double min_form = 0.0;       // sqrt(d) (1-rho_T) / min(delta0, kappa delta_T)
  double alpha_cc_form = 0.0;  // alpha(T) * CC(T), algebraically the same
  double alpha = 0.0;
  double cc = 0.0;
};

ErrorBound error_bound_cc(int dim, double delta0, double delta_T, double kappa,
                          double cd, double rho_T);

// Hypotheses actually checked before a bound is quoted.
struct BoundPreconditions {
  bool train_single_label = false;
  bool loss_below_threshold = false;  // L_max < -ln c
  bool epsilon_positive = false;      // e^{-L_max} - c > 0
  bool delta_positive = false;        // delta still > 0 after the grid shrink
  bool all_met() const {
    return train_single_label && loss_below_threshold && epsilon_positive &&
           delta_positive;
  }
};

struct BoundReport {
  int dim = 0;
  int n_classes = 0;
  double c = 0.0;
  double loss_max = 0.0;
  double loss_mean = 0.0;
  double rho_T = 0.0;
  double delta_T = 0.0;
  std::optional<double> delta0;      // unknown for real data
  double delta_f_raw = 0.0;          // grid or spectral estimate, pre-shrink
  double delta_f = 0.0;              // conservative value used in the bound
  std::string delta_f_estimator;     // "grid" or "spectral"
  double delta_used = 0.0;           // min(delta0, delta_f) when delta0 known
  BoundPreconditions preconditions;
  double bound = 0.0;                // NaN when preconditions unmet
  bool vacuous = false;
  double p_c = 0.0;
  double p_expected = 0.0;
  double p_c_on_train = 0.0;
  std::size_t n_test_used = 0;       // single-label test rows measured against
  std::size_t n_test_dropped = 0;
};

struct BoundReportOptions {
  double c = 0.5;
  std::optional<double> delta0;
  int grid_resolution = 0;  // 0 = 10000 in 1D, 250 per axis in 2D
};

// Assembles measured accuracies, the smoothness estimate and the resulting
// lower bound for one trained network. Grid estimator in d <= 2, spectral
// surrogate above. Multi-label test rows are dropped from every estimate
// (the counts are reported).
BoundReport make_bound_report(const Mlp& net, const LabeledDataset& train,
                              const LabeledDataset& test,
                              const BoundReportOptions& opts);

}  // namespace covercc
