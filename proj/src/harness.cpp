#include "covercc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "covercc/errors.hpp"
#include "covercc/rng.hpp"
#include "covercc/smoothness.hpp"

namespace covercc {
namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path path = fs::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw run_error("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw run_error("write failed for " + path.string());
}

void write_json(const std::string& dir, const std::string& name, const json& j) {
  write_file(dir, name, j.dump(2) + "\n");
}

// Indices and 0-based labels of the single-label test rows; multi-label
// rows (ideal-labeling buffer bands) never enter a measurement.
struct TestView {
  std::vector<std::size_t> rows;
  std::vector<int> labels0;
};

TestView single_view(const LabeledDataset& test) {
  TestView view;
  for (std::size_t i = 0; i < test.size(); ++i)
    if (test.labels[i].single()) {
      view.rows.push_back(i);
      view.labels0.push_back(test.labels[i].only() - 1);
    }
  if (view.rows.empty())
    throw validation_error("test set has no single-label rows");
  return view;
}

double view_p_c(const Matrix& probs, const TestView& view, double c) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < view.rows.size(); ++i)
    if (probs(view.rows[i], std::size_t(view.labels0[i])) > c) ++hits;
  return double(hits) / double(view.rows.size());
}

double view_test_loss(const Matrix& probs, const TestView& view) {
  double sum = 0.0;
  for (std::size_t i = 0; i < view.rows.size(); ++i) {
    const double p = probs(view.rows[i], std::size_t(view.labels0[i]));
    sum += -std::log(std::max(p, 1e-300));
  }
  return sum / double(view.rows.size());
}

// Fraction of the nn distances strictly below r (the h-curve at one radius).
double h_at(const std::vector<double>& sorted_nn, double r) {
  const auto it = std::lower_bound(sorted_nn.begin(), sorted_nn.end(), r);
  return double(it - sorted_nn.begin()) / double(sorted_nn.size());
}

struct EvalSetup {
  const LabeledDataset* train = nullptr;
  const Matrix* eval_points = nullptr;  // test rows; in d <= 2 also the grid
  TestView view;
  int dim = 0;
  int resolution = 0;  // 0 switches to the spectral-only path
  double c = 0.5;
  double rho_T = 0.0;
  std::optional<double> delta0;
  bool use_mean_loss = false;  // epsilon displayed from L_mean (high-d)
};

TraceRecord evaluate_once(const Mlp& net, const EvalSetup& s, int iteration) {
  if (s.resolution > 0 && s.use_mean_loss)
    throw validation_error("grid smoothness traces must use the max loss");

  TraceRecord rec;
  rec.iteration = iteration;
  const LossSummary train_loss = losses(net, *s.train);
  rec.train_loss_mean = train_loss.mean;
  rec.train_loss_max = train_loss.max;

  Matrix probs = forward_batch(net, *s.eval_points);
  rec.test_loss = view_test_loss(probs, s.view);
  rec.p_c = view_p_c(probs, s.view, s.c);

  const double sel = s.use_mean_loss ? train_loss.mean : train_loss.max;
  rec.epsilon = std::exp(-sel) - s.c;
  rec.delta_defined = rec.epsilon > 0.0;

  const double root_d = std::sqrt(double(s.dim));
  double delta_for_bound = 0.0;
  if (rec.delta_defined) {
    const double lip = lipschitz_product(net);
    rec.delta_spectral = std::min(delta_spectral(lip, sel, s.c), root_d);
    if (s.resolution > 0) {
      GridEval grid{std::move(probs), s.dim, s.resolution};
      rec.delta_grid = delta_f_grid(grid, rec.epsilon);
      // The grid infimum can only overestimate the true one, never by more
      // than one spacing, so back off before quoting a bound.
      delta_for_bound =
          std::max(rec.delta_grid - grid_spacing(s.resolution), 0.0);
    } else {
      delta_for_bound = rec.delta_spectral;
    }
    if (s.delta0) delta_for_bound = std::min(delta_for_bound, *s.delta0);
  }

  BoundPreconditions pre;
  pre.train_single_label = true;  // enforced by losses() above
  pre.loss_below_threshold = train_loss.max < -std::log(s.c);
  pre.epsilon_positive = std::exp(-train_loss.max) - s.c > 0.0;
  pre.delta_positive = delta_for_bound > 0.0;
  rec.precond_ok = pre.all_met();
  if (rec.precond_ok) {
    rec.bound = thm_lower_bound(s.rho_T, s.dim, delta_for_bound).value;
    if (rec.p_c < rec.bound - 1e-9)
      throw run_error("accuracy bound violated at iteration " +
                      std::to_string(iteration) + ": p_c = " + fmt(rec.p_c) +
                      " < bound = " + fmt(rec.bound));
  }
  return rec;
}

json trace_config_json(const TraceConfig& cfg) {
  return json{{"problem", cfg.problem},
              {"master_seed", cfg.master_seed},
              {"stream", cfg.stream},
              {"iterations", cfg.iterations},
              {"eval_interval", cfg.eval_interval},
              {"grid_resolution", cfg.grid_resolution},
              {"n_train", cfg.n_train},
              {"mnist_dir", cfg.mnist_dir}};
}

json sweep_config_json(const SweepConfig& cfg) {
  return json{{"depths", cfg.depths},
              {"widths", cfg.widths},
              {"data_sizes", cfg.data_sizes},
              {"reps", cfg.reps},
              {"gp_n", cfg.gp_n},
              {"gp_length", cfg.gp_length},
              {"iteration_cap", cfg.iteration_cap},
              {"eval_interval", cfg.eval_interval},
              {"patience", cfg.patience},
              {"c", cfg.c},
              {"learning_rate", cfg.learning_rate},
              {"grid_resolution", cfg.grid_resolution},
              {"master_seed", cfg.master_seed}};
}

LabeledDataset take_rows(const LabeledDataset& ds, std::size_t count) {
  if (count == 0 || count > ds.size())
    throw validation_error("take_rows: count must lie in 1..n");
  LabeledDataset out;
  out.points = Matrix(count, ds.points.cols);
  std::copy(ds.points.data.begin(),
            ds.points.data.begin() + count * ds.points.cols,
            out.points.data.begin());
  out.labels.assign(ds.labels.begin(), ds.labels.begin() + count);
  out.n_classes = ds.n_classes;
  out.name = ds.name + " [first " + std::to_string(count) + "]";
  return out;
}

bool has_all_classes(const LabeledDataset& ds) {
  std::vector<bool> seen(std::size_t(ds.n_classes), false);
  for (const auto& ls : ds.labels)
    for (Label k : ls) seen[std::size_t(k - 1)] = true;
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

// Uniform points in [0,1]^d labelled by the argmax of k independent GP
// draws; rows are split alternately so train and test share the labeling.
TrainTestPair gp_multiclass_pair(int d, int k, int n_train, int n_test,
                                 double length_scale, std::uint64_t seed) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    auto rng = make_rng(mix_seed(seed, 0x67706d63ULL, std::uint64_t(attempt)), 0);
    const std::size_t total = std::size_t(n_train) + std::size_t(n_test);
    Matrix pts(total, std::size_t(d));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (auto& v : pts.data) v = unif(rng);

    std::vector<std::vector<double>> g(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) g[std::size_t(j)] = gp_sample(pts, length_scale, rng);

    TrainTestPair pair;
    pair.train.points = Matrix(std::size_t(n_train), std::size_t(d));
    pair.test.points = Matrix(std::size_t(n_test), std::size_t(d));
    std::size_t tr = 0, te = 0;
    for (std::size_t i = 0; i < total; ++i) {
      int best = 0;
      for (int j = 1; j < k; ++j)
        if (g[std::size_t(j)][i] > g[std::size_t(best)][i]) best = j;
      const bool to_train = (i % 2 == 0) ? tr < std::size_t(n_train)
                                         : te >= std::size_t(n_test);
      if (to_train) {
        std::copy(pts.row(i), pts.row(i) + pts.cols, pair.train.points.row(tr++));
        pair.train.labels.emplace_back(best + 1);
      } else {
        std::copy(pts.row(i), pts.row(i) + pts.cols, pair.test.points.row(te++));
        pair.test.labels.emplace_back(best + 1);
      }
    }
    char tag[96];
    std::snprintf(tag, sizeof tag, "gp-multiclass(d=%d,k=%d,l=%g)", d, k,
                  length_scale);
    pair.train.n_classes = pair.test.n_classes = k;
    pair.train.name = std::string(tag) + " train";
    pair.test.name = std::string(tag) + " test";
    pair.train.validate();
    pair.test.validate();
    if (has_all_classes(pair.train) && has_all_classes(pair.test)) return pair;
  }
  throw run_error("gp_multiclass_pair: some class stayed empty after 8 draws");
}

std::string trace_csv(const std::vector<TraceRecord>& records) {
  std::string out =
      "iteration,train_loss_mean,train_loss_max,test_loss,epsilon,"
      "delta_defined,delta_grid,delta_spectral,p_c,bound,precond_ok\n";
  for (const auto& r : records) {
    out += std::to_string(r.iteration);
    out += ',';
    out += fmt(r.train_loss_mean);
    out += ',';
    out += fmt(r.train_loss_max);
    out += ',';
    out += fmt(r.test_loss);
    out += ',';
    out += fmt(r.epsilon);
    out += ',';
    out += r.delta_defined ? '1' : '0';
    out += ',';
    out += fmt(r.delta_grid);
    out += ',';
    out += fmt(r.delta_spectral);
    out += ',';
    out += fmt(r.p_c);
    out += ',';
    out += fmt(r.bound);
    out += ',';
    out += r.precond_ok ? '1' : '0';
    out += '\n';
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

OnedimTable run_table_onedim(const TableOnedimConfig& cfg,
                             const std::string& out_dir) {
  if (cfg.ns.empty()) throw validation_error("run_table_onedim: ns is empty");
  if (!(cfg.c >= 0.5 && cfg.c < 1.0))
    throw validation_error("run_table_onedim: c must lie in [0.5, 1)");
  if (cfg.grid_resolution < 2)
    throw validation_error("run_table_onedim: grid_resolution must be >= 2");
  if (cfg.hidden.empty())
    throw validation_error("run_table_onedim: hidden layer list is empty");

  OnedimTable table;
  table.config = cfg;

  for (const int n : cfg.ns) {
    const TrainTestPair pair = synth_1d(n, cfg.delta0, cfg.n_test);

    std::vector<int> sizes{1};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(2);
    Mlp net = init_mlp(sizes, mix_seed(cfg.master_seed, 0x7461626cULL,
                                       std::uint64_t(n)));
    TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.iterations = cfg.iterations;
    tc.eval_interval = cfg.eval_interval;
    tc.seed = mix_seed(cfg.master_seed, 0x7461626dULL, std::uint64_t(n));

    // Stop once the smoothness peak has passed and report the checkpoint
    // that achieved it; training further only sharpens the transition.
    EarlyStopMonitor monitor(cfg.patience);
    Mlp best = net;
    int best_iter = 0;
    train(net, pair.train, tc, [&](int it, const Mlp& m) {
      const LossSummary ls = losses(m, pair.train);
      const double eps = std::exp(-ls.max) - cfg.c;
      const bool defined = eps > 0.0;
      double delta = 0.0;
      if (defined) delta = delta_f_grid(m, cfg.grid_resolution, eps);
      const bool stop = monitor.feed(defined, delta);
      if (defined && monitor.peak_index == monitor.defined_count - 1 &&
          monitor.peak == delta) {
        best = m;
        best_iter = it;
      }
      return !stop;
    });

    const TestView view = single_view(pair.test);
    Matrix single_pts(view.rows.size(), 1);
    for (std::size_t i = 0; i < view.rows.size(); ++i)
      single_pts(i, 0) = pair.test.points(view.rows[i], 0);
    std::vector<double> nn = nn_distances(pair.train.points, single_pts);

    TableRow row;
    row.n = n;
    row.iterations_used = best_iter;
    row.rho_T = total_cover(nn, 1);

    const LossSummary ls = losses(best, pair.train);
    row.loss_max = ls.max;
    const double eps = std::exp(-ls.max) - cfg.c;

    const Matrix probs = forward_batch(best, pair.test.points);
    row.p_c = view_p_c(probs, view, cfg.c);

    if (monitor.defined_count > 0 && eps > 0.0) {
      const double dg = delta_f_grid(best, cfg.grid_resolution, eps);
      const double shrunk = std::max(dg - grid_spacing(cfg.grid_resolution), 0.0);
      row.delta = std::min(cfg.delta0, shrunk);
      row.delta_defined = true;
    }

    std::sort(nn.begin(), nn.end());
    row.h_at_delta = row.delta_defined ? h_at(nn, row.delta) : 0.0;

    if (row.delta_defined && row.delta > 0.0 && ls.max < -std::log(cfg.c)) {
      row.bound = thm_lower_bound(row.rho_T, 1, row.delta).value;
      if (row.p_c < row.bound - 1e-9)
        throw run_error("accuracy bound violated at n = " + std::to_string(n) +
                        ": p_c = " + fmt(row.p_c) + " < bound = " +
                        fmt(row.bound));
    }
    table.rows.push_back(row);
  }

  if (!out_dir.empty()) {
    std::string csv =
        "n,iterations_used,loss_max,rho_T,delta,delta_defined,p_c,h_at_delta,"
        "bound\n";
    json jrows = json::array();
    for (const auto& r : table.rows) {
      csv += std::to_string(r.n) + ',' + std::to_string(r.iterations_used) +
             ',' + fmt(r.loss_max) + ',' + fmt(r.rho_T) + ',' + fmt(r.delta) +
             ',' + (r.delta_defined ? '1' : '0') + ',' + fmt(r.p_c) + ',' +
             fmt(r.h_at_delta) + ',' + fmt(r.bound) + '\n';
      jrows.push_back(json{{"n", r.n},
                           {"iterations_used", r.iterations_used},
                           {"loss_max", r.loss_max},
                           {"rho_T", r.rho_T},
                           {"delta", r.delta},
                           {"delta_defined", r.delta_defined},
                           {"p_c", r.p_c},
                           {"h_at_delta", r.h_at_delta},
                           {"bound", r.bound}});
    }
    write_file(out_dir, "table.csv", csv);
    write_json(out_dir, "summary.json",
               json{{"schema_version", "covercc/1"},
                    {"kind", "table-1d"},
                    {"rows", jrows}});
    write_json(out_dir, "config.json",
               json{{"kind", "table-1d"},
                    {"ns", cfg.ns},
                    {"delta0", cfg.delta0},
                    {"n_test", cfg.n_test},
                    {"hidden", cfg.hidden},
                    {"learning_rate", cfg.learning_rate},
                    {"iterations", cfg.iterations},
                    {"eval_interval", cfg.eval_interval},
                    {"patience", cfg.patience},
                    {"c", cfg.c},
                    {"grid_resolution", cfg.grid_resolution},
                    {"master_seed", cfg.master_seed}});
  }
  return table;
}

// ---------------------------------------------------------------------------

SmoothnessTrace run_trace(const TraceConfig& cfg, const std::string& out_dir) {
  SmoothnessTrace tr;
  LabeledDataset train_ds, test_ds;
  std::vector<int> sizes;
  TrainConfig tc;
  EvalSetup setup;
  int iterations, eval_interval;

  if (cfg.problem == "1d") {
    const int n = cfg.n_train > 0 ? cfg.n_train : 20;
    const int res = cfg.grid_resolution > 0 ? cfg.grid_resolution : 10000;
    iterations = cfg.iterations > 0 ? cfg.iterations : 1000;
    eval_interval = cfg.eval_interval > 0 ? cfg.eval_interval : 10;

    TrainTestPair pair = synth_1d(n, 0.1, res);
    train_ds = std::move(pair.train);
    test_ds = std::move(pair.test);
    sizes = {1, 30, 30, 2};
    tr.problem = "1d";
    tr.dim = 1;
    tr.delta0 = 0.1;
    tr.c = 0.5;
    tr.grid_step = grid_spacing(res);
    setup.resolution = res;
    setup.delta0 = 0.1;
  } else if (cfg.problem == "2d") {
    const int m = cfg.n_train > 0 ? cfg.n_train : 20;
    const int res = cfg.grid_resolution > 0 ? cfg.grid_resolution : 250;
    iterations = cfg.iterations > 0 ? cfg.iterations : 2000;
    eval_interval = cfg.eval_interval > 0 ? cfg.eval_interval : 10;

    TrainTestPair pair = synth_2d(m, 0.1, res);
    train_ds = std::move(pair.train);
    test_ds = std::move(pair.test);
    sizes = {2, 30, 30, 2};
    tr.problem = "2d";
    tr.dim = 2;
    tr.delta0 = 0.1;
    tr.c = 0.5;
    tr.grid_step = grid_spacing(res);
    setup.resolution = res;
    setup.delta0 = 0.1;
  } else if (cfg.problem == "highdim") {
    iterations = cfg.iterations > 0 ? cfg.iterations : 200;
    eval_interval = cfg.eval_interval > 0 ? cfg.eval_interval : 2;
    const std::uint64_t base = mix_seed(cfg.master_seed, 3, cfg.stream);

    int k;
    if (!cfg.mnist_dir.empty()) {
      namespace fs = std::filesystem;
      const auto at = [&](const char* f) {
        return (fs::path(cfg.mnist_dir) / f).string();
      };
      LabeledDataset full_train = load_idx_pair(at("train-images-idx3-ubyte"),
                                                at("train-labels-idx1-ubyte"));
      LabeledDataset full_test = load_idx_pair(at("t10k-images-idx3-ubyte"),
                                               at("t10k-labels-idx1-ubyte"));
      const std::size_t ntr =
          cfg.n_train > 0 ? std::size_t(cfg.n_train) : std::size_t(1000);
      train_ds = take_rows(full_train, std::min(ntr, full_train.size()));
      test_ds = take_rows(full_test, std::min(std::size_t(1000), full_test.size()));
      k = 10;
    } else {
      const int n = cfg.n_train > 0 ? cfg.n_train : 500;
      TrainTestPair pair = gp_multiclass_pair(16, 4, n, n, 0.8, base);
      train_ds = std::move(pair.train);
      test_ds = std::move(pair.test);
      k = 4;
    }
    sizes = {train_ds.dim(), 100, 100, k};
    tr.problem = "highdim";
    tr.dim = train_ds.dim();
    tr.c = 0.9;
    tr.grid_step = 0.0;
    setup.resolution = 0;
    setup.use_mean_loss = true;
    tc.batch_size = 300;
    if (tc.batch_size > int(train_ds.size())) tc.batch_size = 0;
  } else {
    throw validation_error("run_trace: unknown problem '" + cfg.problem + "'");
  }

  const int problem_tag = tr.problem == "1d" ? 1 : tr.problem == "2d" ? 2 : 3;
  const std::uint64_t base = mix_seed(cfg.master_seed, std::uint64_t(problem_tag),
                                      cfg.stream);
  Mlp net = init_mlp(sizes, mix_seed(base, 1, 0));
  tc.iterations = iterations;
  tc.eval_interval = eval_interval;
  tc.seed = mix_seed(base, 2, 0);

  setup.train = &train_ds;
  setup.eval_points = &test_ds.points;
  setup.view = single_view(test_ds);
  setup.dim = tr.dim;
  setup.c = tr.c;

  Matrix single_pts(setup.view.rows.size(), test_ds.points.cols);
  for (std::size_t i = 0; i < setup.view.rows.size(); ++i)
    std::copy(test_ds.points.row(setup.view.rows[i]),
              test_ds.points.row(setup.view.rows[i]) + test_ds.points.cols,
              single_pts.row(i));
  setup.rho_T = total_cover(nn_distances(train_ds.points, single_pts), tr.dim);
  tr.delta_T = empirical_separation_gap(train_ds).value;

  train(net, train_ds, tc, [&](int it, const Mlp& m) {
    tr.records.push_back(evaluate_once(m, setup, it));
    return true;
  });

  double best_delta = -1.0, best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tr.records.size(); ++i) {
    const TraceRecord& r = tr.records[i];
    const double d = setup.resolution > 0 ? r.delta_grid : r.delta_spectral;
    if (r.delta_defined && d > best_delta) {
      best_delta = d;
      tr.argmax_delta = int(i);
    }
    if (r.test_loss < best_loss) {
      best_loss = r.test_loss;
      tr.argmin_test_loss = int(i);
    }
  }

  if (!out_dir.empty()) {
    write_file(out_dir, "trace.csv", trace_csv(tr.records));
    json peak = nullptr;
    if (tr.argmax_delta >= 0) {
      const TraceRecord& r = tr.records[std::size_t(tr.argmax_delta)];
      peak = json{{"index", tr.argmax_delta},
                  {"iteration", r.iteration},
                  {"delta", setup.resolution > 0 ? r.delta_grid : r.delta_spectral}};
    }
    json minloss = nullptr;
    if (tr.argmin_test_loss >= 0) {
      const TraceRecord& r = tr.records[std::size_t(tr.argmin_test_loss)];
      minloss = json{{"index", tr.argmin_test_loss},
                     {"iteration", r.iteration},
                     {"test_loss", r.test_loss}};
    }
    json gap = nullptr;
    if (tr.argmax_delta >= 0 && tr.argmin_test_loss >= 0)
      gap = tr.records[std::size_t(tr.argmax_delta)].iteration -
            tr.records[std::size_t(tr.argmin_test_loss)].iteration;
    write_json(out_dir, "summary.json",
               json{{"schema_version", "covercc/1"},
                    {"kind", "trace"},
                    {"problem", tr.problem},
                    {"dim", tr.dim},
                    {"c", tr.c},
                    {"delta0", std::isnan(tr.delta0) ? json(nullptr)
                                                     : json(tr.delta0)},
                    {"delta_T", tr.delta_T},
                    {"grid_step", tr.grid_step},
                    {"rho_T", setup.rho_T},
                    {"n_evals", tr.records.size()},
                    {"peak_delta", peak},
                    {"min_test_loss", minloss},
                    {"alignment_gap_iterations", gap}});
    write_json(out_dir, "config.json", trace_config_json(cfg));
  }
  return tr;
}

// ---------------------------------------------------------------------------

namespace {

struct RepOutcome {
  bool defined = false;
  double ratio = 0.0;  // peak delta_f / delta_T
  int regen = 0;
};

RepOutcome run_sweep_rep(const std::vector<int>& sizes, int n_points,
                         const SweepConfig& cfg, std::uint64_t cell_seed,
                         int rep) {
  RepOutcome out;
  LabeledDataset ds;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 16)
      throw run_error("sweep: GP labeling stayed one-class after 16 draws");
    const std::uint64_t seed =
        mix_seed(cell_seed, std::uint64_t(rep), std::uint64_t(attempt));
    ds = gp_binary_dataset(n_points, cfg.gp_length, seed);
    if (has_all_classes(ds)) break;
    ++out.regen;
  }

  const double delta_T = empirical_separation_gap(ds).value;
  Mlp net = init_mlp(sizes, mix_seed(cell_seed, std::uint64_t(rep), 0xA1));
  TrainConfig tc;
  tc.learning_rate = cfg.learning_rate;
  tc.iterations = cfg.iteration_cap;
  tc.eval_interval = cfg.eval_interval;
  tc.seed = mix_seed(cell_seed, std::uint64_t(rep), 0xA2);

  EarlyStopMonitor monitor(cfg.patience);
  train(net, ds, tc, [&](int, const Mlp& m) {
    const LossSummary ls = losses(m, ds);
    const double eps = std::exp(-ls.max) - cfg.c;
    double delta = 0.0;
    const bool defined = eps > 0.0;
    if (defined) delta = delta_f_grid(m, cfg.grid_resolution, eps);
    return !monitor.feed(defined, delta);
  });

  if (monitor.defined_count == 0) return out;
  out.defined = true;
  out.ratio = monitor.peak / delta_T;
  return out;
}

SweepCell run_sweep_cell(const std::string& sweep, int param,
                         const std::vector<int>& sizes, int n_points,
                         const SweepConfig& cfg, std::uint64_t tag) {
  SweepCell cell;
  cell.sweep = sweep;
  cell.param = param;
  const std::uint64_t cell_seed =
      mix_seed(cfg.master_seed, tag, std::uint64_t(param));
  std::vector<double> ratios;
  for (int rep = 0; rep < cfg.reps; ++rep) {
    const RepOutcome o = run_sweep_rep(sizes, n_points, cfg, cell_seed, rep);
    cell.n_regen += o.regen;
    if (o.defined) {
      ratios.push_back(o.ratio);
      ++cell.n_used;
    } else {
      ++cell.n_excluded;
    }
  }
  if (!ratios.empty()) {
    cell.mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) /
                double(ratios.size());
    if (ratios.size() > 1) {
      double ss = 0.0;
      for (const double v : ratios) ss += (v - cell.mean) * (v - cell.mean);
      cell.stddev = std::sqrt(ss / double(ratios.size() - 1));
    }
  }
  return cell;
}

void validate_sweep_config(const SweepConfig& cfg) {
  if (cfg.reps < 1) throw validation_error("sweep: reps must be >= 1");
  if (!(cfg.c >= 0.5 && cfg.c < 1.0))
    throw validation_error("sweep: c must lie in [0.5, 1)");
  if (cfg.grid_resolution < 2)
    throw validation_error("sweep: grid_resolution must be >= 2");
  if (cfg.patience < 1) throw validation_error("sweep: patience must be >= 1");
  if (cfg.iteration_cap < 1)
    throw validation_error("sweep: iteration_cap must be >= 1");
}

void write_sweep_outputs(const ExperimentSummary& summary,
                         const SweepConfig& cfg, const std::string& out_dir) {
  if (out_dir.empty()) return;
  std::string csv = "sweep,param,n_used,n_excluded,n_regen,mean,stddev\n";
  json jcells = json::array();
  for (const auto& c : summary.cells) {
    csv += c.sweep + ',' + std::to_string(c.param) + ',' +
           std::to_string(c.n_used) + ',' + std::to_string(c.n_excluded) +
           ',' + std::to_string(c.n_regen) + ',' + fmt(c.mean) + ',' +
           fmt(c.stddev) + '\n';
    jcells.push_back(json{{"sweep", c.sweep},
                          {"param", c.param},
                          {"n_used", c.n_used},
                          {"n_excluded", c.n_excluded},
                          {"n_regen", c.n_regen},
                          {"mean", c.mean},
                          {"stddev", c.stddev}});
  }
  write_file(out_dir, "table.csv", csv);
  write_json(out_dir, "summary.json",
             json{{"schema_version", "covercc/1"},
                  {"kind", summary.name},
                  {"cells", jcells}});
  json jc = sweep_config_json(cfg);
  jc["kind"] = summary.name;
  write_json(out_dir, "config.json", jc);
}

}  // namespace

ExperimentSummary run_depth_width(const SweepConfig& cfg,
                                  const std::string& out_dir) {
  validate_sweep_config(cfg);
  if (cfg.depths.empty() && cfg.widths.empty())
    throw validation_error("run_depth_width: nothing to sweep");

  ExperimentSummary summary;
  summary.name = "depth-width";
  for (const int depth : cfg.depths) {
    if (depth < 1) throw validation_error("run_depth_width: depth must be >= 1");
    std::vector<int> sizes{1};
    sizes.insert(sizes.end(), std::size_t(depth), 30);
    sizes.push_back(2);
    summary.cells.push_back(
        run_sweep_cell("depth", depth, sizes, cfg.gp_n, cfg, 0xD0));
  }
  for (const int width : cfg.widths) {
    if (width < 1) throw validation_error("run_depth_width: width must be >= 1");
    const std::vector<int> sizes{1, width, width, 2};
    summary.cells.push_back(
        run_sweep_cell("width", width, sizes, cfg.gp_n, cfg, 0xD1));
  }
  write_sweep_outputs(summary, cfg, out_dir);
  return summary;
}

ExperimentSummary run_datasize(const SweepConfig& cfg,
                               const std::string& out_dir) {
  validate_sweep_config(cfg);
  if (cfg.data_sizes.empty())
    throw validation_error("run_datasize: nothing to sweep");

  ExperimentSummary summary;
  summary.name = "datasize";
  const std::vector<int> sizes{1, 30, 30, 2};
  for (const int n : cfg.data_sizes) {
    if (n < 2) throw validation_error("run_datasize: n must be >= 2");
    summary.cells.push_back(run_sweep_cell("datasize", n, sizes, n, cfg, 0xD2));
  }
  write_sweep_outputs(summary, cfg, out_dir);
  return summary;
}

// ---------------------------------------------------------------------------

LabeledDataset permute_labels(const LabeledDataset& ds,
                              const std::vector<std::size_t>& perm) {
  if (perm.size() != ds.size())
    throw validation_error("permute_labels: permutation size mismatch");
  std::vector<bool> seen(perm.size(), false);
  for (const std::size_t p : perm) {
    if (p >= perm.size() || seen[p])
      throw validation_error("permute_labels: not a permutation");
    seen[p] = true;
  }
  LabeledDataset out = ds;
  for (std::size_t i = 0; i < perm.size(); ++i) out.labels[i] = ds.labels[perm[i]];
  return out;
}

RandomLabelCc run_random_label_cc(const LabeledDataset& train,
                                  const LabeledDataset& test, int reps,
                                  std::uint64_t master_seed,
                                  const std::string& out_dir) {
  if (reps < 1) throw validation_error("run_random_label_cc: reps must be >= 1");
  const CoverReport original = make_cover_report(train, test);

  RandomLabelCc result;
  result.cc_original = original.cc;
  result.reps = reps;

  std::vector<std::size_t> perm_train(train.size()), perm_test(test.size());
  for (int rep = 0; rep < reps; ++rep) {
    auto rng = make_rng(mix_seed(master_seed, 0xCC, std::uint64_t(rep)), 1);
    std::iota(perm_train.begin(), perm_train.end(), std::size_t{0});
    std::iota(perm_test.begin(), perm_test.end(), std::size_t{0});
    std::shuffle(perm_train.begin(), perm_train.end(), rng);
    std::shuffle(perm_test.begin(), perm_test.end(), rng);
    const LabeledDataset t = permute_labels(train, perm_train);
    const LabeledDataset q = permute_labels(test, perm_test);
    try {
      const CoverReport rep_report = make_cover_report(t, q);
      result.cc_values.push_back(rep_report.cc);
    } catch (const undefined_error&) {
      ++result.n_undefined;  // cd hit exactly zero; excluded from the stats
    }
  }

  if (!result.cc_values.empty()) {
    std::vector<double> abs_cc;
    abs_cc.reserve(result.cc_values.size());
    for (const double v : result.cc_values) {
      abs_cc.push_back(std::fabs(v));
      if (v > 0)
        ++result.n_positive;
      else if (v < 0)
        ++result.n_negative;
      if (std::fabs(v) >= 5.0 * std::fabs(result.cc_original))
        ++result.n_blowup;
    }
    std::sort(abs_cc.begin(), abs_cc.end());
    result.min_abs = abs_cc.front();
    const std::size_t m = abs_cc.size();
    result.median_abs = m % 2 == 1
                            ? abs_cc[m / 2]
                            : 0.5 * (abs_cc[m / 2 - 1] + abs_cc[m / 2]);
  }

  if (!out_dir.empty()) {
    write_json(out_dir, "summary.json",
               json{{"schema_version", "covercc/1"},
                    {"kind", "random-cc"},
                    {"cc_original", result.cc_original},
                    {"reps", result.reps},
                    {"n_undefined", result.n_undefined},
                    {"n_positive", result.n_positive},
                    {"n_negative", result.n_negative},
                    {"min_abs", result.min_abs},
                    {"median_abs", result.median_abs},
                    {"n_blowup", result.n_blowup},
                    {"cc_values", result.cc_values}});
  }
  return result;
}

RandomLabelCc run_random_label_cc(const RandomLabelConfig& cfg,
                                  const std::string& out_dir) {
  if (cfg.n_train < 2 || cfg.n_test < 1)
    throw validation_error("run_random_label_cc: dataset sizes too small");
  TrainTestPair pair;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 16)
      throw run_error("run_random_label_cc: GP pair stayed one-class");
    pair = gp_binary_pair(cfg.n_train, cfg.n_test, cfg.gp_length,
                          mix_seed(cfg.master_seed, 0xCD, std::uint64_t(attempt)));
    if (has_all_classes(pair.train) && has_all_classes(pair.test)) break;
  }
  RandomLabelCc result = run_random_label_cc(pair.train, pair.test, cfg.reps,
                                             cfg.master_seed, out_dir);
  if (!out_dir.empty())
    write_json(out_dir, "config.json",
               json{{"kind", "random-cc"},
                    {"n_train", cfg.n_train},
                    {"n_test", cfg.n_test},
                    {"gp_length", cfg.gp_length},
                    {"reps", cfg.reps},
                    {"master_seed", cfg.master_seed}});
  return result;
}

// ---------------------------------------------------------------------------

LineFit fit_cc_error_line(std::span<const CcErrorPoint> points, bool normalize) {
  if (points.size() < 2)
    throw validation_error("fit_cc_error_line: need at least 2 points");
  double sxx = 0.0, sxy = 0.0, sy = 0.0;
  std::vector<double> ys;
  ys.reserve(points.size());
  for (const auto& p : points) {
    if (normalize && !(p.k >= 1.0))
      throw validation_error("fit_cc_error_line: class count must be >= 1");
    const double y = normalize ? p.error / std::sqrt(p.k) : p.error;
    ys.push_back(y);
    sxx += p.cc * p.cc;
    sxy += p.cc * y;
    sy += y;
  }
  if (sxx == 0.0)
    throw validation_error("fit_cc_error_line: all cc values are zero");

  LineFit fit;
  fit.n = int(points.size());
  fit.slope = sxy / sxx;
  const double ybar = sy / double(points.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double r = ys[i] - fit.slope * points[i].cc;
    ss_res += r * r;
    ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
  }
  if (ss_tot == 0.0)
    throw validation_error("fit_cc_error_line: responses are constant");
  fit.r2 = 1.0 - ss_res / ss_tot;
  return fit;
}

std::span<const BenchRow> published_benchmark() {
  static const BenchRow rows[] = {
      {"MNIST", "Original", 784, 10, .8480, .1053, 1.442, .01},
      {"CIFAR-10", "Original", 3072, 10, .8332, .0163, 10.23, .45},
      {"CIFAR-10", "Grey", 1024, 10, .8486, .0125, 12.11, .53},
      {"CIFAR-10", "Conv", 1024, 10, .9505, .0094, 5.280, .18},
      {"SVHN", "Original", 3072, 10, .9034, .0076, 12.68, .49},
      {"SVHN", "Grey", 1024, 10, .9117, .0084, 10.48, .56},
      {"SVHN", "Conv", 1024, 10, .9632, .0123, 2.995, .23},
      {"CIFAR-100-coarse", "Original", 3072, 20, .8337, .0185, 9.012, .62},
      {"CIFAR-100-coarse", "Grey", 1024, 20, .8541, .0132, 11.08, .72},
      {"CIFAR-100-coarse", "Conv", 1024, 20, .9626, .0070, 5.326, .40},
      {"COIL-20", "Original", 16384, 20, .9176, .2385, .3453, .03},
      {"CIFAR-100-fine", "Original", 3072, 100, .8337, .0270, 6.149, .73},
      {"CIFAR-100-fine", "Grey", 1024, 100, .8541, .0198, 7.380, .81},
      {"CIFAR-100-fine", "Conv", 1024, 100, .9457, .0136, 4.000, .52},
      {"COIL-100", "Original", 49152, 100, .9430, .1944, .2930, .01},
  };
  return rows;
}

LineFit run_cc_fit(bool normalize, const std::string& out_dir) {
  const auto rows = published_benchmark();
  std::vector<CcErrorPoint> points;
  points.reserve(rows.size());
  for (const auto& r : rows)
    points.push_back(CcErrorPoint{r.cc, r.error, double(r.k)});
  const LineFit fit = fit_cc_error_line(points, normalize);

  if (!out_dir.empty()) {
    json jrows = json::array();
    for (const auto& r : rows)
      jrows.push_back(json{{"dataset", r.dataset},
                           {"variant", r.variant},
                           {"dim", r.dim},
                           {"k", r.k},
                           {"rho_T", r.rho_T},
                           {"cd", r.cd},
                           {"cc", r.cc},
                           {"error", r.error}});
    write_json(out_dir, "summary.json",
               json{{"schema_version", "covercc/1"},
                    {"kind", "cc-fit"},
                    {"normalize", normalize},
                    {"slope", fit.slope},
                    {"r2", fit.r2},
                    {"n", fit.n},
                    {"rows", jrows}});
    write_json(out_dir, "config.json",
               json{{"kind", "cc-fit"}, {"normalize", normalize}});
  }
  return fit;
}

// ---------------------------------------------------------------------------

bool EarlyStopMonitor::feed(bool defined, double delta) {
  if (patience < 1)
    throw validation_error("EarlyStopMonitor: patience must be >= 1");
  if (stopped) return true;
  if (!defined) return false;

  const int idx = defined_count++;
  if (std::isnan(peak) || delta > peak) {
    peak = delta;
    peak_index = idx;
    below_count = 0;
    return false;
  }
  if (delta < peak * (1.0 - rel_drop)) {
    if (++below_count >= patience) stopped = true;
  } else {
    below_count = 0;
  }
  return stopped;
}

}  // namespace covercc
