// Acceptance suite: twelve end-to-end checks over the shipped defaults.
// Prints one [PASS]/[FAIL]/[SKIP] line per criterion and exits with the
// number of failures, so the binary doubles as a release gate.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "covercc/bounds.hpp"
#include "covercc/cover.hpp"
#include "covercc/dataset.hpp"
#include "covercc/errors.hpp"
#include "covercc/harness.hpp"
#include "covercc/matrix.hpp"
#include "covercc/mlp.hpp"
#include "covercc/rng.hpp"
#include "covercc/smoothness.hpp"
#include "oracles.hpp"

using namespace covercc;

namespace {

using Clock = std::chrono::steady_clock;

double secs_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string str(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

Matrix random_points(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix m(rows, cols);
  for (auto& v : m.data) v = unif(rng);
  return m;
}

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::fail;
  std::string detail;
};

Outcome verdict(bool ok, const std::string& detail) {
  return {ok ? Status::pass : Status::fail, detail};
}

// --------------------------------------------------------------------------
// 1. Interval table defaults.

Outcome criterion_table() {
  const auto t0 = Clock::now();
  OnedimTable table;
  try {
    table = run_table_onedim(TableOnedimConfig{});
  } catch (const std::exception& e) {
    return verdict(false, std::string("run_table_onedim threw: ") + e.what());
  }
  const double wall = secs_since(t0);

  const double want_rho[] = {0.972, 0.988, 0.994, 0.997};
  const double want_bound[] = {0.38, 0.69, 0.85, 0.92};
  bool ok = table.rows.size() == 4;
  double rho_dev = 0.0, min_pc = 1.0;
  std::string bounds;
  for (std::size_t i = 0; ok && i < table.rows.size(); ++i) {
    const TableRow& row = table.rows[i];
    rho_dev = std::max(rho_dev, std::abs(row.rho_T - want_rho[i]));
    min_pc = std::min(min_pc, row.p_c);
    ok = ok && std::abs(row.rho_T - want_rho[i]) <= 1e-3;
    ok = ok && row.p_c >= 0.999;
    ok = ok && row.delta_defined && !std::isnan(row.bound);
    ok = ok && std::abs(row.bound - want_bound[i]) <= 0.10;
    if (i > 0) ok = ok && row.bound > table.rows[i - 1].bound;
    bounds += (i ? "/" : "") + str(row.bound, 3);
  }
  ok = ok && wall < 120.0;
  return verdict(ok, "rho dev " + str(rho_dev, 2) + ", min p_c " +
                         str(min_pc, 5) + ", bounds " + bounds + ", " +
                         str(wall, 3) + " s (limit 120)");
}

// --------------------------------------------------------------------------
// Shared trace suite: twenty seeded 1D runs and five seeded 2D runs with
// default configs, reused by criteria 2, 6, 7 and 9.

struct TraceSuite {
  std::vector<SmoothnessTrace> one_d, two_d;
  std::string error;  // first failure message, empty when every run finished
  double wall = 0.0;
};

TraceSuite build_trace_suite() {
  TraceSuite s;
  const auto t0 = Clock::now();
  try {
    for (std::uint64_t stream = 0; stream < 20; ++stream) {
      TraceConfig cfg;
      cfg.problem = "1d";
      cfg.stream = stream;
      s.one_d.push_back(run_trace(cfg));
    }
    for (std::uint64_t stream = 0; stream < 5; ++stream) {
      TraceConfig cfg;
      cfg.problem = "2d";
      cfg.stream = stream;
      s.two_d.push_back(run_trace(cfg));
    }
  } catch (const std::exception& e) {
    s.error = e.what();
  }
  s.wall = secs_since(t0);
  return s;
}

// --------------------------------------------------------------------------
// 2. Measured c-accuracy never undercuts a bound whose preconditions held.

Outcome criterion_bound_validity(const TraceSuite& s) {
  if (!s.error.empty()) return verdict(false, "trace run aborted: " + s.error);
  std::size_t checked = 0, violations = 0;
  const auto scan = [&](const std::vector<SmoothnessTrace>& traces) {
    for (const SmoothnessTrace& tr : traces)
      for (const TraceRecord& rec : tr.records)
        if (rec.precond_ok) {
          ++checked;
          if (rec.p_c < rec.bound - 1e-9) ++violations;
        }
  };
  scan(s.one_d);
  scan(s.two_d);
  const bool ok = s.one_d.size() >= 20 && s.two_d.size() >= 5 &&
                  checked > 0 && violations == 0 && s.wall < 600.0;
  return verdict(ok, std::to_string(s.one_d.size()) + " 1d + " +
                         std::to_string(s.two_d.size()) + " 2d runs, " +
                         std::to_string(checked) + " bounded evals, " +
                         std::to_string(violations) + " violations, " +
                         str(s.wall, 3) + " s (limit 600)");
}

// --------------------------------------------------------------------------
// 3. h(r) >= 1 - (sqrt(d)/r)(1 - rho_T) at 100 radii per random instance.

Outcome criterion_h_bound() {
  auto rng = make_rng(1003);
  std::uniform_int_distribution<int> train_n(3, 40), test_n(50, 300);
  int violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 200; ++t) {
    const int d = 1 + t % 3;
    const Matrix train = random_points(rng, std::size_t(train_n(rng)), std::size_t(d));
    const Matrix query = random_points(rng, std::size_t(test_n(rng)), std::size_t(d));
    const auto nn = nn_distances(train, query);
    const double rho = total_cover(nn, d);
    const HBoundCheck chk = h_bound_check(h_curve(nn, d, default_radii(d, 100)), rho);
    if (!chk.ok) ++violations;
    min_slack = std::min(min_slack, chk.min_slack);
  }
  return verdict(violations == 0,
                 "200 instances x 100 radii, " + std::to_string(violations) +
                     " violations, min slack " + str(min_slack, 3));
}

// --------------------------------------------------------------------------
// 4. Closed-form rho agrees with trapezoid quadrature of the h-curve.

Outcome criterion_quadrature() {
  auto rng = make_rng(1004);
  std::uniform_int_distribution<int> train_n(2, 50), test_n(30, 200);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int d = 1 + t % 3;
    const Matrix train = random_points(rng, std::size_t(train_n(rng)), std::size_t(d));
    const Matrix query = random_points(rng, std::size_t(test_n(rng)), std::size_t(d));
    const auto nn = nn_distances(train, query);
    worst = std::max(worst, std::abs(total_cover(nn, d) -
                                     oracles::total_cover_trapezoid(nn, d)));
  }
  return verdict(worst <= 1e-4,
                 "100 instances, max |closed - trapezoid| " + str(worst, 3) +
                     " (limit 1e-4)");
}

// --------------------------------------------------------------------------
// 5. CC is invariant under joint rescaling while no distance is truncated.

LabeledDataset boxed_random(std::mt19937_64& rng, int n, int d) {
  std::uniform_real_distribution<double> unif(0.36, 0.64);
  Matrix pts{std::size_t(n), std::size_t(d)};
  for (auto& v : pts.data) v = unif(rng);
  std::vector<LabelSet> labels;
  labels.reserve(std::size_t(n));
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < n; ++i) labels.emplace_back(coin(rng) ? 1 : 2);
  labels[0] = LabelSet(1);
  labels[1] = LabelSet(2);
  return LabeledDataset{std::move(pts), std::move(labels), 2, "boxed"};
}

Outcome criterion_scale_invariance() {
  auto rng = make_rng(1005);
  std::uniform_int_distribution<int> train_n(8, 40), test_n(40, 160);
  const double lambdas[] = {0.3, 0.5, 0.9};
  double worst = 0.0;
  int unstable = 0;
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + t % 3;
    LabeledDataset train, test;
    CoverReport rep0;
    bool found = false;
    // All points live in [0.36, 0.64]^d, so every pairwise distance stays
    // below sqrt(d) at any scale and the cover truncation never engages.
    // Redraw instances whose cd sits at the noise floor: CC is a ratio and
    // a 1e-9 relative comparison needs a denominator clear of rounding.
    for (int attempt = 0; attempt < 100 && !found; ++attempt) {
      train = boxed_random(rng, train_n(rng), d);
      test = boxed_random(rng, test_n(rng), d);
      try {
        rep0 = make_cover_report(train, test);
      } catch (const undefined_error&) {
        continue;
      }
      found = std::abs(rep0.cd) >= 1e-3;
    }
    if (!found) {
      ++unstable;
      continue;
    }
    for (double lambda : lambdas) {
      const double shift = (1.0 - lambda) / 2.0;
      const CoverReport rep = make_cover_report(
          affine_transform(train, lambda, shift),
          affine_transform(test, lambda, shift));
      worst = std::max(worst, std::abs(rep.cc - rep0.cc) / std::abs(rep0.cc));
    }
  }
  return verdict(unstable == 0 && worst <= 1e-9,
                 "50 instances x 3 scales, max relative cc drift " +
                     str(worst, 3) + " (limit 1e-9)");
}

// --------------------------------------------------------------------------
// 6. Trained-net smoothness never exceeds half the separation gap by more
//    than one grid spacing, at any evaluation with max loss below ln 2.

Outcome criterion_gap_ceiling(const TraceSuite& s) {
  std::size_t checked = 0, violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  const auto scan = [&](const std::vector<SmoothnessTrace>& traces) {
    for (const SmoothnessTrace& tr : traces)
      for (const TraceRecord& rec : tr.records) {
        if (!(rec.train_loss_max < std::log(2.0)) || std::isnan(rec.delta_grid))
          continue;
        ++checked;
        const double excess = rec.delta_grid - (tr.delta_T / 2.0 + tr.grid_step);
        worst = std::max(worst, excess);
        if (excess > 1e-12) ++violations;
      }
  };
  scan(s.one_d);
  scan(s.two_d);
  const bool ok = s.error.empty() && checked > 0 && violations == 0;
  return verdict(ok, std::to_string(checked) + " evals with L_max < ln 2, " +
                         std::to_string(violations) +
                         " above delta_T/2 + spacing, worst excess " +
                         str(worst, 3));
}

// --------------------------------------------------------------------------
// 7. The spectral surrogate sits below the grid value plus one spacing.

Outcome criterion_spectral_order(const TraceSuite& s) {
  std::size_t checked = 0, violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (const SmoothnessTrace& tr : s.one_d)
    for (const TraceRecord& rec : tr.records) {
      if (!rec.delta_defined || std::isnan(rec.delta_grid) ||
          std::isnan(rec.delta_spectral))
        continue;
      ++checked;
      const double excess = rec.delta_spectral - (rec.delta_grid + tr.grid_step);
      worst = std::max(worst, excess);
      if (excess > 1e-12) ++violations;
    }
  const bool ok = s.error.empty() && checked > 0 && violations == 0;
  return verdict(ok, std::to_string(checked) + " 1d evals, " +
                         std::to_string(violations) +
                         " spectral values above grid + spacing, worst excess " +
                         str(worst, 3));
}

// --------------------------------------------------------------------------
// 8. Numerical kernels against independent oracles.

// Smallest |pre-activation| across the hidden layers for every probe row.
// Central differences are only a valid derivative reference when no ReLU
// kink sits inside the FD step, so probe batches that come close to one
// are redrawn before the comparison.
double min_abs_preact(const Mlp& net, const Matrix& x) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < x.rows; ++r) {
    const std::span<const double> xr = x.row_span(r);
    std::vector<double> a(xr.begin(), xr.end());
    for (int layer = 0; layer + 1 < net.depth(); ++layer) {
      const Matrix& w = net.weights[std::size_t(layer)];
      std::vector<double> z(w.rows);
      for (std::size_t i = 0; i < w.rows; ++i) {
        double s = net.biases[std::size_t(layer)][i];
        for (std::size_t j = 0; j < w.cols; ++j) s += w(i, j) * a[j];
        z[i] = s;
        best = std::min(best, std::abs(s));
      }
      for (double& v : z) v = std::max(v, 0.0);
      a = std::move(z);
    }
  }
  return best;
}

Outcome criterion_kernels() {
  auto rng = make_rng(1008);

  const std::vector<std::vector<int>> shapes = {
      {2, 4, 3}, {3, 5, 2}, {1, 6, 2},    {4, 8, 3},    {2, 3, 3, 2},
      {3, 4, 4, 2}, {1, 5, 5, 3}, {5, 6, 2}, {2, 7, 4}, {4, 4, 4, 4}};
  double worst_fd = 0.0;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const Mlp net = init_mlp(shapes[i], 8100 + i);
    Matrix x = random_points(rng, 6, std::size_t(net.in_dim()));
    for (int attempt = 0; attempt < 200 && min_abs_preact(net, x) < 1e-3;
         ++attempt)
      x = random_points(rng, 6, std::size_t(net.in_dim()));
    std::uniform_int_distribution<int> lab(0, net.out_dim() - 1);
    std::vector<int> labels(x.rows);
    for (int& l : labels) l = lab(rng);
    const Gradients g = backward(net, x, labels);
    const oracles::FdGradients fg = oracles::fd_gradients(net, x, labels);
    for (std::size_t layer = 0; layer < g.w.size(); ++layer) {
      for (std::size_t k = 0; k < g.w[layer].data.size(); ++k)
        worst_fd = std::max(
            worst_fd, oracles::rel_err(g.w[layer].data[k], fg.w[layer].data[k]));
      for (std::size_t k = 0; k < g.b[layer].size(); ++k)
        worst_fd = std::max(
            worst_fd, oracles::rel_err(g.b[layer][k], fg.b[layer][k]));
    }
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 32);
  double worst_sn = 0.0;
  for (int t = 0; t < 50; ++t) {
    Matrix w(std::size_t(dim(rng)), std::size_t(dim(rng)));
    for (auto& v : w.data) v = gauss(rng);
    worst_sn = std::max(worst_sn, oracles::rel_err(
                                      spectral_norm(w),
                                      oracles::spectral_norm_dense(w)));
  }

  const int res_1d[] = {80, 125, 200};
  const int res_2d[] = {12, 20, 28, 36};
  const double epss[] = {0.02, 0.1, 0.3};
  int exact = 0;
  for (int t = 0; t < 20; ++t) {
    const bool planar = t >= 12;
    const Mlp net = init_mlp(planar ? std::vector<int>{2, 5, 3}
                                    : std::vector<int>{1, 6, 2},
                             8300 + std::uint64_t(t));
    const int res = planar ? res_2d[(t - 12) % 4] : res_1d[t % 3];
    const GridEval ge = eval_grid(net, res);
    const double eps = epss[t % 3];
    if (delta_f_grid(ge, eps) == oracles::delta_exhaustive(ge, eps)) ++exact;
  }

  const bool ok = worst_fd < 1e-6 && worst_sn < 1e-6 && exact == 20;
  return verdict(ok, "fd max rel " + str(worst_fd, 3) + ", power-vs-jacobi max rel " +
                         str(worst_sn, 3) + ", pruned == exhaustive " +
                         std::to_string(exact) + "/20");
}

// --------------------------------------------------------------------------
// 9. The smoothness peak is interior for most seeds; the iteration gap
//    between the peak and the test-loss minimum is reported, not gated.

Outcome criterion_peak(const TraceSuite& s) {
  int interior = 0, with_peak = 0;
  double gap_sum = 0.0, gap_max = 0.0;
  for (const SmoothnessTrace& tr : s.one_d) {
    std::vector<int> defined;
    for (std::size_t i = 0; i < tr.records.size(); ++i)
      if (tr.records[i].delta_defined) defined.push_back(int(i));
    if (tr.argmax_delta < 0 || defined.empty()) continue;
    ++with_peak;
    if (defined.size() >= 3 && tr.argmax_delta != defined.front() &&
        tr.argmax_delta != defined.back())
      ++interior;
    if (tr.argmin_test_loss >= 0) {
      const double gap = std::abs(
          double(tr.records[std::size_t(tr.argmax_delta)].iteration) -
          double(tr.records[std::size_t(tr.argmin_test_loss)].iteration));
      gap_sum += gap;
      gap_max = std::max(gap_max, gap);
    }
  }
  const std::size_t n = s.one_d.size();
  const bool ok = s.error.empty() && n >= 20 &&
                  interior * 5 >= int(n) * 4;  // >= 80 percent
  const double gap_mean = with_peak > 0 ? gap_sum / with_peak : 0.0;
  return verdict(ok, "interior peak " + std::to_string(interior) + "/" +
                         std::to_string(n) + " seeds, alignment gap mean " +
                         str(gap_mean, 4) + " max " + str(gap_max, 4) +
                         " iterations (reported, not gated)");
}

// --------------------------------------------------------------------------
// 10. Depth, width and data-size sweeps at 50 reps.

const SweepCell* find_cell(const ExperimentSummary& s, const std::string& sweep,
                           int param) {
  for (const SweepCell& c : s.cells)
    if (c.sweep == sweep && c.param == param) return &c;
  return nullptr;
}

Outcome criterion_sweeps() {
  const auto t0 = Clock::now();
  SweepConfig cfg;
  ExperimentSummary dw, dsz;
  try {
    dw = run_depth_width(cfg);
    dsz = run_datasize(cfg);
  } catch (const std::exception& e) {
    return verdict(false, std::string("sweep threw: ") + e.what());
  }
  const double wall = secs_since(t0);

  bool ok = true;
  for (const ExperimentSummary* s : {&dw, &dsz})
    for (const SweepCell& c : s->cells) ok = ok && c.n_used > 0 && c.mean > 0.0;

  const SweepCell* d_first = find_cell(dw, "depth", cfg.depths.front());
  const SweepCell* d_last = find_cell(dw, "depth", cfg.depths.back());
  const SweepCell* w_first = find_cell(dw, "width", cfg.widths.front());
  const SweepCell* w_last = find_cell(dw, "width", cfg.widths.back());
  ok = ok && d_first && d_last && w_first && w_last;
  double d_drop = 0.0, w_drop = 0.0;
  if (ok) {
    ok = ok && d_first->mean > d_last->mean;
    d_drop = (d_first->mean - d_last->mean) / d_first->mean;
    w_drop = (w_first->mean - w_last->mean) / w_first->mean;
    ok = ok && d_drop > w_drop;
  }

  double ds_min = std::numeric_limits<double>::infinity(), ds_max = 0.0;
  for (int n : cfg.data_sizes) {
    const SweepCell* c = find_cell(dsz, "datasize", n);
    if (!c) {
      ok = false;
      break;
    }
    ds_min = std::min(ds_min, c->mean);
    ds_max = std::max(ds_max, c->mean);
  }
  const double ratio = ds_min > 0.0 ? ds_max / ds_min : 0.0;
  ok = ok && ratio > 0.0 && ratio <= 2.0 && wall < 1800.0;

  return verdict(ok, "depth drop " + str(100.0 * d_drop, 3) +
                         "%, width drop " + str(100.0 * w_drop, 3) +
                         "%, datasize max/min " + str(ratio, 3) + ", " +
                         str(wall, 3) + " s (limit 1800)");
}

// --------------------------------------------------------------------------
// 11. Random labellings blow the cover complexity up.

Outcome criterion_random_label() {
  RandomLabelConfig cfg;
  RandomLabelCc r;
  try {
    r = run_random_label_cc(cfg);
  } catch (const std::exception& e) {
    return verdict(false, std::string("run_random_label_cc threw: ") + e.what());
  }
  const bool ok = r.reps == 50 && r.n_blowup >= 45;
  return verdict(ok, "|cc| >= 5x original in " + std::to_string(r.n_blowup) +
                         "/" + std::to_string(r.reps) +
                         " reps (need 45), original cc " + str(r.cc_original, 4));
}

// --------------------------------------------------------------------------
// 12. Regression over the published benchmark rows; full MNIST check when
//     the IDX files are supplied via COVERCC_MNIST_DIR.

Outcome criterion_benchmark() {
  LineFit fit;
  try {
    fit = run_cc_fit(true);
  } catch (const std::exception& e) {
    return verdict(false, std::string("run_cc_fit threw: ") + e.what());
  }
  bool ok = fit.n == 15;
  ok = ok && std::abs(fit.slope - 0.014) <= 0.1 * 0.014;
  ok = ok && std::abs(fit.r2 - 0.92) <= 0.1 * 0.92;
  std::string detail = "slope " + str(fit.slope, 4) + " (0.014 +- 10%), r2 " +
                       str(fit.r2, 4) + " (0.92 +- 10%)";

  const char* dir = std::getenv("COVERCC_MNIST_DIR");
  if (dir == nullptr || std::string(dir).empty()) {
    detail += "; mnist part skipped (COVERCC_MNIST_DIR unset)";
    return verdict(ok, detail);
  }
  try {
    const std::string base(dir);
    const LabeledDataset train = load_idx_pair(
        base + "/train-images-idx3-ubyte", base + "/train-labels-idx1-ubyte");
    const LabeledDataset test = load_idx_pair(
        base + "/t10k-images-idx3-ubyte", base + "/t10k-labels-idx1-ubyte");
    const CoverReport rep = make_cover_report(train, test);
    ok = ok && std::abs(rep.rho_T - 0.848) <= 0.01;
    ok = ok && std::abs(rep.cc - 1.44) <= 0.05;
    detail += "; mnist rho_T " + str(rep.rho_T, 4) + " (0.848 +- 0.01), cc " +
              str(rep.cc, 4) + " (1.44 +- 0.05)";
  } catch (const std::exception& e) {
    ok = false;
    detail += std::string("; mnist load failed: ") + e.what();
  }
  return verdict(ok, detail);
}

}  // namespace

int main() {
  int failures = 0;
  const auto emit = [&](int id, const char* name, const Outcome& o) {
    const char* tag = o.status == Status::pass   ? "[PASS]"
                      : o.status == Status::skip ? "[SKIP]"
                                                 : "[FAIL]";
    std::cout << tag << " criterion " << id << " (" << name << "): " << o.detail
              << std::endl;
    if (o.status == Status::fail) ++failures;
  };

  emit(1, "interval table defaults", criterion_table());
  const TraceSuite suite = build_trace_suite();
  emit(2, "bound validity over seeded traces", criterion_bound_validity(suite));
  emit(3, "h-curve lower bound", criterion_h_bound());
  emit(4, "quadrature identity", criterion_quadrature());
  emit(5, "scale invariance of cc", criterion_scale_invariance());
  emit(6, "separation-gap smoothness ceiling", criterion_gap_ceiling(suite));
  emit(7, "spectral surrogate below grid", criterion_spectral_order(suite));
  emit(8, "numerical kernels vs oracles", criterion_kernels());
  emit(9, "peak interiority and alignment", criterion_peak(suite));
  emit(10, "depth, width and data-size sweeps", criterion_sweeps());
  emit(11, "random-label blowup", criterion_random_label());
  emit(12, "benchmark regression and optional mnist", criterion_benchmark());

  if (failures == 0)
    std::cout << "acceptance: all criteria passed" << std::endl;
  else
    std::cout << "acceptance: " << failures << " criterion(s) failed" << std::endl;
  return failures;
}
