#include "covercc/cover.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include "covercc/errors.hpp"

namespace covercc {

namespace {

constexpr std::size_t kTrainBlock = 256;

void nn_distances_range(const Matrix& train, const Matrix& query,
                        std::size_t q0, std::size_t q1, double* out) {
  const std::size_t d = train.cols;
  for (std::size_t t0 = 0; t0 < train.rows; t0 += kTrainBlock) {
    const std::size_t t1 = std::min(t0 + kTrainBlock, train.rows);
    for (std::size_t qi = q0; qi < q1; ++qi) {
      const double* qp = query.row(qi);
      double best = out[qi];
      for (std::size_t ti = t0; ti < t1; ++ti) {
        const double* tp = train.row(ti);
        double sq = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double diff = qp[c] - tp[c];
          sq += diff * diff;
        }
        best = std::min(best, sq);
      }
      out[qi] = best;
    }
  }
}

}  // namespace

std::vector<double> nn_distances(const Matrix& train, const Matrix& query,
                                 int n_threads) {
  if (train.rows == 0) throw validation_error("nn_distances: empty train set");
  if (query.rows == 0) throw validation_error("nn_distances: empty query set");
  if (train.cols != query.cols)
    throw validation_error("nn_distances: dimension mismatch, train d=" +
                           std::to_string(train.cols) + " query d=" +
                           std::to_string(query.cols));

  std::vector<double> sq(query.rows, std::numeric_limits<double>::infinity());
  unsigned want = n_threads > 0 ? unsigned(n_threads)
                                : std::max(1u, std::thread::hardware_concurrency());
  // Threading only pays off once there is real work per chunk.
  if (want > 1 && query.rows * train.rows * train.cols < 1u << 22) want = 1;
  if (want <= 1) {
    nn_distances_range(train, query, 0, query.rows, sq.data());
  } else {
    const std::size_t chunk = (query.rows + want - 1) / want;
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < want; ++w) {
      const std::size_t q0 = std::min<std::size_t>(w * chunk, query.rows);
      const std::size_t q1 = std::min<std::size_t>(q0 + chunk, query.rows);
      if (q0 == q1) continue;
      workers.emplace_back(nn_distances_range, std::cref(train), std::cref(query),
                           q0, q1, sq.data());
    }
    for (auto& t : workers) t.join();
  }
  for (double& v : sq) v = std::sqrt(v);
  return sq;
}

HCurve h_curve(const std::vector<double>& nn_dists, int dim,
               std::vector<double> radii) {
  if (nn_dists.empty()) throw validation_error("h_curve: no distances");
  if (dim < 1) throw validation_error("h_curve: dim must be >= 1");
  if (radii.empty()) throw validation_error("h_curve: no radii");
  const double cap = std::sqrt(double(dim));
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || radii[i] > cap * (1 + 1e-12))
      throw validation_error("h_curve: radius " + std::to_string(radii[i]) +
                             " outside (0, sqrt(d)]");
    if (i > 0 && radii[i] <= radii[i - 1])
      throw validation_error("h_curve: radii must be strictly increasing");
  }
  std::vector<double> sorted = nn_dists;
  std::sort(sorted.begin(), sorted.end());
  HCurve curve;
  curve.dim = dim;
  curve.values.reserve(radii.size());
  for (double r : radii) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), r);
    curve.values.push_back(double(it - sorted.begin()) / double(sorted.size()));
  }
  curve.radii = std::move(radii);
  return curve;
}

std::vector<double> default_radii(int dim, std::size_t count) {
  if (dim < 1 || count == 0)
    throw validation_error("default_radii: need dim >= 1 and count >= 1");
  const double cap = std::sqrt(double(dim));
  std::vector<double> r(count);
  for (std::size_t k = 0; k < count; ++k) r[k] = cap * double(k + 1) / double(count);
  return r;
}

double total_cover(const std::vector<double>& nn_dists, int dim) {
  if (nn_dists.empty()) throw validation_error("total_cover: no distances");
  if (dim < 1) throw validation_error("total_cover: dim must be >= 1");
  const double cap = std::sqrt(double(dim));
  double sum = 0.0;
  for (double v : nn_dists) {
    if (!(v >= 0.0))
      throw validation_error("total_cover: negative distance " + std::to_string(v));
    sum += std::min(v, cap);
  }
  return 1.0 - sum / (double(nn_dists.size()) * cap);
}

namespace {

// Row indices of each class; index 0 holds class 1.
std::vector<std::vector<std::size_t>> split_by_class(const LabeledDataset& ds,
                                                     const char* side) {
  std::vector<std::vector<std::size_t>> by_class(ds.n_classes);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds.labels[i].single())
      throw validation_error(std::string(side) +
                             " set has a multi-label row at index " +
                             std::to_string(i));
    by_class[ds.labels[i].only() - 1].push_back(i);
  }
  for (int k = 0; k < ds.n_classes; ++k)
    if (by_class[k].empty())
      throw validation_error(std::string(side) + " set has no points of class " +
                             std::to_string(k + 1));
  return by_class;
}

Matrix gather_rows(const Matrix& src, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), src.cols);
  for (std::size_t r = 0; r < rows.size(); ++r)
    std::copy(src.row(rows[r]), src.row(rows[r]) + src.cols, out.row(r));
  return out;
}

}  // namespace

Matrix class_cover_matrix(const LabeledDataset& train, const LabeledDataset& test) {
  train.validate();
  test.validate();
  if (train.dim() != test.dim())
    throw validation_error("class_cover_matrix: dimension mismatch");
  if (train.n_classes != test.n_classes)
    throw validation_error("class_cover_matrix: class count mismatch");
  const int k = train.n_classes;
  if (k < 2) throw validation_error("class_cover_matrix: need K >= 2 classes");

  const auto train_cls = split_by_class(train, "train");
  const auto test_cls = split_by_class(test, "test");

  std::vector<Matrix> train_pts(k), test_pts(k);
  for (int i = 0; i < k; ++i) {
    train_pts[i] = gather_rows(train.points, train_cls[i]);
    test_pts[i] = gather_rows(test.points, test_cls[i]);
  }

  Matrix covers(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      covers(i, j) =
          total_cover(nn_distances(train_pts[i], test_pts[j]), train.dim());
  return covers;
}

double cover_difference(const Matrix& covers) {
  if (covers.rows != covers.cols || covers.rows < 2)
    throw validation_error("cover_difference: need a square matrix with K >= 2");
  const std::size_t k = covers.rows;
  double diag = 0.0, off = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      (i == j ? diag : off) += covers(i, j);
  return diag / double(k) - off / double(k * (k - 1));
}

double cover_complexity(double rho_T, double cd) {
  if (!(rho_T >= 0.0 && rho_T <= 1.0))
    throw validation_error("cover_complexity: rho_T outside [0,1]");
  if (cd == 0.0)
    throw undefined_error("cover_complexity: cd = 0 leaves CC undefined");
  return (1.0 - rho_T) / cd;
}

SepGap empirical_separation_gap(const LabeledDataset& train) {
  train.validate();
  const auto by_class = [&] {
    // reuse the single-label check but tolerate missing classes here
    std::vector<std::vector<std::size_t>> cls(train.n_classes);
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (!train.labels[i].single())
        throw validation_error("empirical_separation_gap: multi-label row " +
                               std::to_string(i));
      cls[train.labels[i].only() - 1].push_back(i);
    }
    return cls;
  }();
  int present = 0;
  for (const auto& c : by_class)
    if (!c.empty()) ++present;
  if (present < 2)
    throw validation_error(
        "empirical_separation_gap: need at least 2 distinct labels, found " +
        std::to_string(present));

  SepGap gap;
  gap.value = std::numeric_limits<double>::infinity();
  const std::size_t d = train.points.cols;
  for (std::size_t i = 0; i < train.size(); ++i) {
    for (std::size_t j = i + 1; j < train.size(); ++j) {
      if (train.labels[i] == train.labels[j]) continue;
      double sq = 0.0;
      const double* a = train.points.row(i);
      const double* b = train.points.row(j);
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = a[c] - b[c];
        sq += diff * diff;
      }
      const double dist = std::sqrt(sq);
      if (dist < gap.value) {
        gap.value = dist;
        gap.i = i;
        gap.j = j;
      }
    }
  }
  gap.coincident = gap.value == 0.0;
  return gap;
}

HBoundCheck h_bound_check(const HCurve& curve, double rho_T) {
  if (curve.radii.empty()) throw validation_error("h_bound_check: empty curve");
  if (!(rho_T >= 0.0 && rho_T <= 1.0))
    throw validation_error("h_bound_check: rho_T outside [0,1]");
  const double root_d = std::sqrt(double(curve.dim));
  HBoundCheck check;
  check.min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.radii.size(); ++i) {
    const double lower = 1.0 - (root_d / curve.radii[i]) * (1.0 - rho_T);
    const double slack = curve.values[i] - lower;
    if (slack < check.min_slack) {
      check.min_slack = slack;
      check.worst_radius = curve.radii[i];
    }
  }
  check.ok = check.min_slack >= -1e-9;
  return check;
}

CoverReport make_cover_report(const LabeledDataset& train,
                              const LabeledDataset& test) {
  train.validate();
  test.validate();
  if (train.dim() != test.dim())
    throw validation_error("cover report: train d=" + std::to_string(train.dim()) +
                           " but test d=" + std::to_string(test.dim()));
  if (train.n_classes != test.n_classes)
    throw validation_error("cover report: train K=" +
                           std::to_string(train.n_classes) + " but test K=" +
                           std::to_string(test.n_classes));
  if (!train.single_label())
    throw validation_error("cover report: training set must be single-label");

  std::size_t removed = 0;
  const LabeledDataset test_single = single_label_subset(test, &removed);
  if (test_single.size() == 0)
    throw validation_error("cover report: test set has no single-label points");

  CoverReport rep;
  rep.dim = train.dim();
  rep.n_classes = train.n_classes;
  rep.n_train = train.size();
  rep.n_test = test.size();
  rep.n_test_single = test_single.size();

  rep.rho_T =
      total_cover(nn_distances(train.points, test_single.points), rep.dim);
  rep.mc = class_cover_matrix(train, test_single);
  rep.sc.resize(rep.n_classes);
  for (int i = 0; i < rep.n_classes; ++i) rep.sc[i] = rep.mc(i, i);
  rep.cd = cover_difference(rep.mc);
  rep.cc = cover_complexity(rep.rho_T, rep.cd);
  rep.delta_T = empirical_separation_gap(train).value;

  rep.train_class_counts.assign(rep.n_classes, 0);
  rep.test_class_counts.assign(rep.n_classes, 0);
  for (const auto& s : train.labels) ++rep.train_class_counts[s.only() - 1];
  for (const auto& s : test_single.labels) ++rep.test_class_counts[s.only() - 1];
  return rep;
}

void write_h_curve_csv(const HCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot open '" + path + "' for writing");
  out << "r,h\n";
  char buf[40];
  for (std::size_t i = 0; i < curve.radii.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", curve.radii[i]);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", curve.values[i]);
    out << buf << '\n';
  }
  if (!out) throw validation_error("write to '" + path + "' failed");
}

}  // namespace covercc
