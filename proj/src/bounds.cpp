#include "covercc/bounds.hpp"

#include <cmath>
#include <limits>

#include "covercc/cover.hpp"
#include "covercc/errors.hpp"
#include "covercc/smoothness.hpp"

namespace covercc {

namespace {

void check_c(double c) {
  if (!(c >= 0.5 && c < 1.0))
    throw validation_error("c must lie in [0.5, 1), got " + std::to_string(c));
}

void check_probs_shape(const Matrix& probs, const std::vector<LabelSet>& labels) {
  if (probs.rows != labels.size())
    throw validation_error("accuracy: " + std::to_string(probs.rows) +
                           " probability rows but " +
                           std::to_string(labels.size()) + " label sets");
  if (probs.rows == 0) throw validation_error("accuracy: empty test set");
}

}  // namespace

double c_accuracy_from_probs(const Matrix& probs,
                             const std::vector<LabelSet>& labels, double c) {
  check_c(c);
  check_probs_shape(probs, labels);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < probs.rows; ++i) {
    const double* row = probs.row(i);
    for (Label k : labels[i]) {
      if (row[k - 1] > c) {
        ++hits;
        break;
      }
    }
  }
  return double(hits) / double(probs.rows);
}

double expected_accuracy_from_probs(const Matrix& probs,
                                    const std::vector<LabelSet>& labels) {
  check_probs_shape(probs, labels);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < probs.rows; ++i) {
    const double* row = probs.row(i);
    std::size_t arg = 0;
    std::size_t ties = 1;
    for (std::size_t j = 1; j < probs.cols; ++j) {
      if (row[j] > row[arg]) {
        arg = j;
        ties = 1;
      } else if (row[j] == row[arg]) {
        ++ties;
      }
    }
    if (ties == 1 && labels[i].contains(Label(arg + 1))) ++hits;
  }
  return double(hits) / double(probs.rows);
}

double c_accuracy(const Mlp& net, const LabeledDataset& test, double c) {
  test.validate();
  if (test.n_classes > net.out_dim())
    throw validation_error("c_accuracy: dataset has more classes than network outputs");
  return c_accuracy_from_probs(forward_batch(net, test.points), test.labels, c);
}

double expected_accuracy(const Mlp& net, const LabeledDataset& test) {
  test.validate();
  if (test.n_classes > net.out_dim())
    throw validation_error("expected_accuracy: dataset has more classes than network outputs");
  return expected_accuracy_from_probs(forward_batch(net, test.points), test.labels);
}

double c_accuracy_on_train(const Mlp& net, const LabeledDataset& train,
                           const LabeledDataset& test, double c) {
  check_c(c);
  train.validate();
  test.validate();
  if (!train.single_label())
    throw validation_error("c_accuracy_on_train: training set must be single-label");

  const Matrix train_probs = forward_batch(net, train.points);
  std::vector<std::size_t> accurate;
  for (std::size_t i = 0; i < train.size(); ++i)
    if (train_probs(i, train.labels[i].only() - 1) > c) accurate.push_back(i);
  if (accurate.empty()) return 0.0;

  Matrix sub(accurate.size(), train.points.cols);
  for (std::size_t r = 0; r < accurate.size(); ++r)
    std::copy(train.points.row(accurate[r]),
              train.points.row(accurate[r]) + train.points.cols, sub.row(r));

  const int d = train.dim();
  const double rho_sub = total_cover(nn_distances(sub, test.points), d);
  const double rho_all = total_cover(nn_distances(train.points, test.points), d);
  if (rho_all == 0.0)
    throw undefined_error("c_accuracy_on_train: rho_T = 0, ratio undefined");
  return rho_sub / rho_all;
}

BoundValue thm_lower_bound(double rho_T, int dim, double delta) {
  if (!(rho_T >= 0.0 && rho_T <= 1.0))
    throw validation_error("thm_lower_bound: rho_T outside [0,1]");
  if (dim < 1) throw validation_error("thm_lower_bound: dim must be >= 1");
  if (!(delta > 0.0))
    throw validation_error("thm_lower_bound: delta must be > 0, got " +
                           std::to_string(delta));
  BoundValue out;
  out.value = 1.0 - std::sqrt(double(dim)) / delta * (1.0 - rho_T);
  out.vacuous = out.value <= 0.0;
  return out;
}

BoundValue prop31_bound(double p_c1_on_T, double rho_T, int dim, double delta) {
  if (!(p_c1_on_T >= 0.0 && p_c1_on_T <= 1.0))
    throw validation_error("prop31_bound: p_c1_on_T outside [0,1]");
  if (!(rho_T >= 0.0 && rho_T <= 1.0))
    throw validation_error("prop31_bound: rho_T outside [0,1]");
  if (dim < 1) throw validation_error("prop31_bound: dim must be >= 1");
  if (!(delta > 0.0))
    throw validation_error("prop31_bound: delta must be > 0");
  BoundValue out;
  out.value = 1.0 - std::sqrt(double(dim)) / delta * (1.0 - p_c1_on_T * rho_T);
  out.vacuous = out.value <= 0.0;
  return out;
}

ErrorBound error_bound_cc(int dim, double delta0, double delta_T, double kappa,
                          double cd, double rho_T) {
  if (dim < 1) throw validation_error("error_bound_cc: dim must be >= 1");
  if (!(delta0 > 0.0)) throw validation_error("error_bound_cc: delta0 must be > 0");
  if (!(delta_T > 0.0)) throw validation_error("error_bound_cc: delta_T must be > 0");
  if (!(kappa > 0.0 && kappa <= 1.0))
    throw validation_error("error_bound_cc: kappa must lie in (0,1]");
  if (!(rho_T >= 0.0 && rho_T <= 1.0))
    throw validation_error("error_bound_cc: rho_T outside [0,1]");
  if (cd == 0.0)
    throw undefined_error("error_bound_cc: cd = 0 leaves CC undefined");

  const double root_d = std::sqrt(double(dim));
  const double denom = std::min(delta0, kappa * delta_T);
  ErrorBound out;
  out.min_form = root_d * (1.0 - rho_T) / denom;
  out.alpha = root_d * cd / denom;
  out.cc = (1.0 - rho_T) / cd;
  out.alpha_cc_form = out.alpha * out.cc;
  return out;
}

BoundReport make_bound_report(const Mlp& net, const LabeledDataset& train,
                              const LabeledDataset& test,
                              const BoundReportOptions& opts) {
  check_c(opts.c);
  train.validate();
  test.validate();
  if (train.dim() != test.dim())
    throw validation_error("bound report: train/test dimension mismatch");
  if (train.dim() != net.in_dim())
    throw validation_error("bound report: network input " +
                           std::to_string(net.in_dim()) + " but data dimension " +
                           std::to_string(train.dim()));
  if (opts.delta0 && !(*opts.delta0 > 0.0))
    throw validation_error("bound report: delta0 must be > 0 when given");

  BoundReport rep;
  rep.dim = train.dim();
  rep.n_classes = train.n_classes;
  rep.c = opts.c;
  rep.delta0 = opts.delta0;

  rep.preconditions.train_single_label = train.single_label();
  if (!rep.preconditions.train_single_label)
    throw validation_error("bound report: training set must be single-label");

  const LabeledDataset test_single = single_label_subset(test, &rep.n_test_dropped);
  if (test_single.size() == 0)
    throw validation_error("bound report: no single-label test points");
  rep.n_test_used = test_single.size();

  const LossSummary ls = losses(net, train);
  rep.loss_max = ls.max;
  rep.loss_mean = ls.mean;
  rep.rho_T = total_cover(nn_distances(train.points, test_single.points), rep.dim);
  rep.delta_T = empirical_separation_gap(train).value;

  rep.p_c = c_accuracy(net, test_single, opts.c);
  rep.p_expected = expected_accuracy(net, test_single);
  rep.p_c_on_train = c_accuracy_on_train(net, train, test_single, opts.c);

  const double threshold = -std::log(opts.c);
  rep.preconditions.loss_below_threshold = rep.loss_max < threshold;
  const double eps = std::exp(-rep.loss_max) - opts.c;
  rep.preconditions.epsilon_positive = eps > 0.0;

  const double root_d = std::sqrt(double(rep.dim));
  if (rep.preconditions.epsilon_positive) {
    if (rep.dim <= 2) {
      const int res = opts.grid_resolution > 0 ? opts.grid_resolution
                                               : (rep.dim == 1 ? 10000 : 250);
      rep.delta_f_estimator = "grid";
      rep.delta_f_raw = delta_f_grid(net, res, eps);
      // The grid restriction can only overestimate the true infimum, so
      // shrink by one spacing before quoting a bound.
      rep.delta_f = rep.delta_f_raw - grid_spacing(res);
    } else {
      rep.delta_f_estimator = "spectral";
      rep.delta_f_raw = std::min(delta_spectral(lipschitz_product(net), rep.loss_max,
                                                opts.c),
                                 root_d);
      rep.delta_f = rep.delta_f_raw;  // already a lower bound on delta_f
    }
    rep.delta_used = opts.delta0 ? std::min(*opts.delta0, rep.delta_f) : rep.delta_f;
    rep.preconditions.delta_positive = rep.delta_used > 0.0;
  }

  if (rep.preconditions.all_met()) {
    const BoundValue bv = thm_lower_bound(rep.rho_T, rep.dim, rep.delta_used);
    rep.bound = bv.value;
    rep.vacuous = bv.vacuous;
  } else {
    rep.bound = std::numeric_limits<double>::quiet_NaN();
    rep.vacuous = true;
  }
  return rep;
}

}  // namespace covercc
