#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covercc/bounds.hpp"
#include "covercc/cover.hpp"
#include "covercc/dataset.hpp"
#include "covercc/mlp.hpp"

namespace covercc {

inline constexpr std::uint64_t kDefaultMasterSeed = 20240901ULL;

// ---------------------------------------------------------------------------
// 1D interval table

struct TableOnedimConfig {
  std::vector<int> ns = {10, 20, 40, 80};
  double delta0 = 0.1;
  int n_test = 10000;
  std::vector<int> hidden = {30, 30};
  double learning_rate = 1e-3;
  int iterations = 1000;   // cap; training stops at the smoothness peak
  int eval_interval = 10;
  int patience = 3;
  double c = 0.5;
  int grid_resolution = 10000;
  std::uint64_t master_seed = kDefaultMasterSeed;
};

struct TableRow {
  int n = 0;
  int iterations_used = 0;  // iteration of the checkpoint the row reports
  double loss_max = 0.0;
  double rho_T = 0.0;
  double delta = 0.0;      // min(delta0, shrunk grid delta_f), 0 when undefined
  bool delta_defined = false;
  double p_c = 0.0;
  double h_at_delta = 0.0;
  double bound = std::numeric_limits<double>::quiet_NaN();
};

struct OnedimTable {
  TableOnedimConfig config;
  std::vector<TableRow> rows;
};

// Runs the interval problem for every n: nearest-neighbour cover of the
// equispaced test set, a 1-30-30-2 network trained with Adam until the grid
// smoothness at eps = e^{-L_max} - c stops improving, and the accuracy
// bound of the peak-smoothness checkpoint. Aborts with run_error if a
// measured p_c undercuts a bound whose preconditions held. Writes
// table.csv/summary.json/config.json into out_dir when non-empty.
OnedimTable run_table_onedim(const TableOnedimConfig& cfg,
                             const std::string& out_dir = "");

// ---------------------------------------------------------------------------
// Smoothness traces

struct TraceConfig {
  std::string problem = "1d";  // "1d" | "2d" | "highdim"
  std::uint64_t master_seed = kDefaultMasterSeed;
  std::uint64_t stream = 0;    // repetition index inside a seeded suite
  int iterations = 0;          // 0 = problem default (1000, 2000, 100 epochs)
  int eval_interval = 0;       // 0 = default (10 iterations; 1 epoch high-d)
  int grid_resolution = 0;     // 0 = default (10000 points, 250 per axis)
  int n_train = 0;             // 0 = default (20, grid side 20, 500)
  std::string mnist_dir;       // high-d only: directory with the IDX files
};

struct TraceRecord {
  int iteration = 0;
  double train_loss_mean = 0.0;
  double train_loss_max = 0.0;
  double test_loss = 0.0;
  double epsilon = 0.0;         // e^{-L} - c with the problem's loss choice
  bool delta_defined = false;
  double delta_grid = std::numeric_limits<double>::quiet_NaN();
  double delta_spectral = std::numeric_limits<double>::quiet_NaN();  // capped
  double p_c = 0.0;
  double bound = std::numeric_limits<double>::quiet_NaN();
  bool precond_ok = false;
};

struct SmoothnessTrace {
  std::string problem;
  int dim = 0;
  double delta0 = std::numeric_limits<double>::quiet_NaN();
  double delta_T = 0.0;
  double c = 0.5;
  double grid_step = 0.0;       // 0 for the spectral-only high-d path
  std::vector<TraceRecord> records;
  int argmax_delta = -1;        // record index of the smoothness peak
  int argmin_test_loss = -1;
};

SmoothnessTrace run_trace(const TraceConfig& cfg, const std::string& out_dir = "");

// ---------------------------------------------------------------------------
// Sweeps over depth, width and dataset size (normalized smoothness peak)

struct SweepConfig {
  std::vector<int> depths = {1, 2, 3, 4, 5};      // hidden layers, width 30
  std::vector<int> widths = {5, 10, 20, 40, 80};  // hidden width, 2 layers
  std::vector<int> data_sizes = {10, 20, 40, 80}; // 1-30-30-2 network
  int reps = 50;
  int gp_n = 10;            // depth/width dataset size
  double gp_length = 0.2;
  int iteration_cap = 1500;
  int eval_interval = 10;
  int patience = 3;
  double c = 0.5;
  double learning_rate = 1e-3;
  int grid_resolution = 2500;
  std::uint64_t master_seed = kDefaultMasterSeed;
};

struct SweepCell {
  std::string sweep;  // "depth" | "width" | "datasize"
  int param = 0;
  int n_used = 0;      // reps contributing a defined peak
  int n_excluded = 0;  // reps where delta never became defined
  int n_regen = 0;     // degenerate one-class GP draws that were redrawn
  double mean = 0.0;   // of peak delta_f / delta_T
  double stddev = 0.0;
};

struct ExperimentSummary {
  std::string name;
  std::vector<SweepCell> cells;
};

ExperimentSummary run_depth_width(const SweepConfig& cfg,
                                  const std::string& out_dir = "");
ExperimentSummary run_datasize(const SweepConfig& cfg,
                               const std::string& out_dir = "");

// ---------------------------------------------------------------------------
// Random-label cover complexity

struct RandomLabelConfig {
  int n_train = 500;
  int n_test = 500;
  double gp_length = 0.2;
  int reps = 50;
  std::uint64_t master_seed = kDefaultMasterSeed;
};

struct RandomLabelCc {
  double cc_original = 0.0;
  int reps = 0;
  std::vector<double> cc_values;  // defined reps, in rep order
  int n_undefined = 0;            // cd == 0, excluded from the stats below
  int n_positive = 0, n_negative = 0;
  double min_abs = 0.0, median_abs = 0.0;
  int n_blowup = 0;               // |cc| >= 5 |cc_original|
};

// Builds one GP-labelled train/test pair, then re-permutes the label
// vectors uniformly at random per repetition and recomputes CC each time.
RandomLabelCc run_random_label_cc(const RandomLabelConfig& cfg,
                                  const std::string& out_dir = "");

// As above on a caller-supplied pair.
RandomLabelCc run_random_label_cc(const LabeledDataset& train,
                                  const LabeledDataset& test, int reps,
                                  std::uint64_t master_seed,
                                  const std::string& out_dir = "");

// Applies a row permutation to the label vector only (point i keeps its
// coordinates and receives labels[perm[i]]).
LabeledDataset permute_labels(const LabeledDataset& ds,
                              const std::vector<std::size_t>& perm);

// ---------------------------------------------------------------------------
// Cover-complexity vs error regression

struct CcErrorPoint {
  double cc = 0.0;
  double error = 0.0;
  double k = 1.0;  // class count, used when normalizing error by sqrt(K)
};

struct LineFit {
  double slope = 0.0;  // least squares through the origin
  double r2 = 0.0;     // 1 - SS_res / SS_tot, SS_tot about the mean of y
  int n = 0;
};

LineFit fit_cc_error_line(std::span<const CcErrorPoint> points, bool normalize);

// Published cover statistics for the standard image benchmarks (Orig =
// flattened pixels, Grey = greyscale, Conv = pretrained-features variants).
struct BenchRow {
  const char* dataset;
  const char* variant;
  int dim;
  int k;
  double rho_T;
  double cd;
  double cc;
  double error;  // best test error of the reference classifiers
};

std::span<const BenchRow> published_benchmark();

// Runs the regression over the published rows (error normalized by sqrt(K))
// and writes summary.json/config.json when out_dir is non-empty.
LineFit run_cc_fit(bool normalize = true, const std::string& out_dir = "");

// ---------------------------------------------------------------------------
// Early stopping on the smoothness trace

struct EarlyStopMonitor {
  explicit EarlyStopMonitor(int patience_ = 3, double rel_drop_ = 0.0)
      : patience(patience_), rel_drop(rel_drop_) {}

  int patience;
  double rel_drop;
  double peak = std::numeric_limits<double>::quiet_NaN();
  int peak_index = -1;   // 0-based among defined evaluations
  int defined_count = 0;
  int below_count = 0;
  bool stopped = false;

  // Feed one evaluation; undefined entries neither consume nor reset
  // patience. Returns true once `patience` consecutive defined values sat
  // below the running peak.
  bool feed(bool defined, double delta);
};

}  // namespace covercc
