// covercc: cover complexity and network smoothness toolkit.
//
// Subcommands:
//   gen         write a synthetic train/test pair as CSV
//   cover       cover statistics of a train/test pair
//   sepgap      empirical separation gap of a training set
//   train       fit an MLP and save a checkpoint
//   smoothness  grid and spectral smoothness of a checkpoint
//   bound       accuracy lower bound report for a checkpoint
//   experiment  packaged studies (table-1d, trace, depth-width, datasize,
//               random-cc, cc-fit)
//
// Exit codes: 0 success, 1 rejected input, 2 failed computation.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "covercc/bounds.hpp"
#include "covercc/cover.hpp"
#include "covercc/dataset.hpp"
#include "covercc/errors.hpp"
#include "covercc/harness.hpp"
#include "covercc/mlp.hpp"
#include "covercc/smoothness.hpp"

using namespace covercc;
using nlohmann::json;

namespace {

constexpr const char* kSchemaVersion = "covercc/1";

// --------------------------------------------------------------------------
// Shared dataset input

struct DataOpts {
  std::string train_path, test_path;
  int classes = 0;
  std::string kind;  // interval | annulus | gp
  int n = 20;
  int n_test = 10000;
  double delta0 = 0.1;
  double length_scale = 0.2;
  std::uint64_t seed = 0;
};

void add_data_options(CLI::App* cmd, DataOpts& o, bool with_test) {
  cmd->add_option("--train", o.train_path, "training CSV file");
  if (with_test) cmd->add_option("--test", o.test_path, "test CSV file");
  cmd->add_option("--classes", o.classes, "class count for CSV input");
  cmd->add_option("--gen", o.kind,
                  "generate instead of loading: interval, annulus or gp");
  cmd->add_option("--n", o.n, "generated train size (grid side for annulus)");
  cmd->add_option("--n-test", o.n_test,
                  "generated test size (grid side for annulus)");
  cmd->add_option("--delta0", o.delta0, "interval/annulus separation width");
  cmd->add_option("--length-scale", o.length_scale, "gp kernel length scale");
  cmd->add_option("--seed", o.seed, "gp sampling seed");
}

IdealLabelSpec spec_from(const DataOpts& o) {
  IdealLabelSpec s;
  if (o.kind == "interval")
    s.kind = IdealKind::interval_1d;
  else if (o.kind == "annulus")
    s.kind = IdealKind::annulus_2d;
  else if (o.kind == "gp")
    s.kind = IdealKind::gp_binary;
  else
    throw validation_error("unknown generator '" + o.kind +
                           "' (expected interval, annulus or gp)");
  s.n = o.n;
  s.n_test = o.n_test;
  s.delta0 = o.delta0;
  s.length_scale = o.length_scale;
  s.seed = o.seed;
  return s;
}

struct LoadedPair {
  TrainTestPair pair;
  CsvNormalization norm;
};

LoadedPair load_pair(const DataOpts& o) {
  LoadedPair lp;
  if (!o.kind.empty()) {
    lp.pair = generate(spec_from(o));
    return lp;
  }
  if (o.train_path.empty() || o.test_path.empty())
    throw validation_error("provide --train and --test CSV files, or --gen");
  if (o.classes < 2)
    throw validation_error("--classes must be >= 2 for CSV input");
  CsvDataset tr = load_csv_dataset(o.train_path, o.classes);
  CsvDataset te = load_csv_dataset(o.test_path, o.classes, tr.norm);
  lp.pair.train = std::move(tr.data);
  lp.pair.test = std::move(te.data);
  lp.norm = tr.norm;
  return lp;
}

LabeledDataset load_train_only(const DataOpts& o) {
  if (!o.kind.empty()) return generate(spec_from(o)).train;
  if (o.train_path.empty())
    throw validation_error("provide a --train CSV file or --gen");
  if (o.classes < 2)
    throw validation_error("--classes must be >= 2 for CSV input");
  return load_csv_dataset(o.train_path, o.classes).data;
}

// --------------------------------------------------------------------------
// Output

void emit(const json& j, const std::string& format,
          const std::string& out_path) {
  std::string text;
  if (format == "json") {
    text = j.dump(2) + "\n";
  } else {
    for (const auto& [key, value] : j.items()) {
      if (key == "schema_version") continue;
      text += key;
      text += " = ";
      text += value.is_string() ? value.get<std::string>() : value.dump();
      text += '\n';
    }
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw validation_error("cannot open " + out_path + " for writing");
    out << text;
    if (!out) throw validation_error("write to " + out_path + " failed");
  }
  std::cout << text;
}

json maybe(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

json cover_json(const CoverReport& r, const CsvNormalization& norm) {
  json mc = json::array();
  for (std::size_t i = 0; i < r.mc.rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < r.mc.cols; ++j) row.push_back(r.mc(i, j));
    mc.push_back(row);
  }
  json j{{"schema_version", kSchemaVersion},
         {"kind", "cover"},
         {"dim", r.dim},
         {"n_classes", r.n_classes},
         {"n_train", r.n_train},
         {"n_test", r.n_test},
         {"n_test_single", r.n_test_single},
         {"train_class_counts", r.train_class_counts},
         {"test_class_counts", r.test_class_counts},
         {"rho_T", r.rho_T},
         {"sc", r.sc},
         {"mc", mc},
         {"cd", r.cd},
         {"cc", r.cc},
         {"delta_T", r.delta_T}};
  if (norm.applied)
    j["normalization"] = json{{"applied", true}, {"lo", norm.lo}, {"hi", norm.hi}};
  return j;
}

json bound_json(const BoundReport& r) {
  return json{
      {"schema_version", kSchemaVersion},
      {"kind", "bound"},
      {"dim", r.dim},
      {"n_classes", r.n_classes},
      {"c", r.c},
      {"loss_max", r.loss_max},
      {"loss_mean", r.loss_mean},
      {"rho_T", r.rho_T},
      {"delta_T", r.delta_T},
      {"delta0", r.delta0 ? json(*r.delta0) : json(nullptr)},
      {"delta_f_raw", r.delta_f_raw},
      {"delta_f", r.delta_f},
      {"delta_f_estimator", r.delta_f_estimator},
      {"delta_used", r.delta_used},
      {"preconditions",
       json{{"train_single_label", r.preconditions.train_single_label},
            {"loss_below_threshold", r.preconditions.loss_below_threshold},
            {"epsilon_positive", r.preconditions.epsilon_positive},
            {"delta_positive", r.preconditions.delta_positive},
            {"all_met", r.preconditions.all_met()}}},
      {"bound", maybe(r.bound)},
      {"vacuous", r.vacuous},
      {"p_c", r.p_c},
      {"p_expected", r.p_expected},
      {"p_c_on_train", r.p_c_on_train},
      {"n_test_used", r.n_test_used},
      {"n_test_dropped", r.n_test_dropped}};
}

std::string resolve_out_dir(const std::string& flag, const char* name) {
  if (!flag.empty()) return flag;
  const char* env = std::getenv("COVERCC_OUTDIR");
  if (env && *env) return (std::filesystem::path(env) / name).string();
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cover complexity and network smoothness toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string format = "json";
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"json", "text"}));

  // ---- gen
  auto* gen_cmd = app.add_subcommand("gen", "write a synthetic pair as CSV");
  DataOpts gen_opts;
  std::string gen_train_out, gen_test_out;
  add_data_options(gen_cmd, gen_opts, false);
  gen_cmd->add_option("--train-out", gen_train_out, "output CSV for the train set")
      ->required();
  gen_cmd->add_option("--test-out", gen_test_out, "output CSV for the test set")
      ->required();

  // ---- cover
  auto* cover_cmd = app.add_subcommand("cover", "cover statistics of a pair");
  DataOpts cover_opts;
  std::string cover_hcurve, cover_out;
  int cover_radii = 100;
  add_data_options(cover_cmd, cover_opts, true);
  cover_cmd->add_option("--h-curve", cover_hcurve,
                        "also write the empirical h curve to this CSV");
  cover_cmd->add_option("--radii", cover_radii, "h curve radius count");
  cover_cmd->add_option("--out", cover_out, "also write the report here");

  // ---- sepgap
  auto* sep_cmd = app.add_subcommand("sepgap", "empirical separation gap");
  DataOpts sep_opts;
  add_data_options(sep_cmd, sep_opts, false);

  // ---- train
  auto* train_cmd = app.add_subcommand("train", "fit an MLP, save a checkpoint");
  DataOpts train_opts;
  std::vector<int> train_arch{30, 30};
  std::string train_ckpt, train_loss_csv;
  int train_iters = 1000, train_batch = 0, train_eval = 10;
  double train_lr = 1e-3;
  std::uint64_t train_init_seed = 1, train_batch_seed = 2;
  add_data_options(train_cmd, train_opts, false);
  train_cmd->add_option("--arch", train_arch, "hidden layer widths")
      ->delimiter(',');
  train_cmd->add_option("--checkpoint", train_ckpt, "checkpoint output path")
      ->required();
  train_cmd->add_option("--iterations", train_iters, "Adam iterations");
  train_cmd->add_option("--lr", train_lr, "learning rate");
  train_cmd->add_option("--batch", train_batch, "batch size (0 = full batch)");
  train_cmd->add_option("--eval-interval", train_eval, "hook interval");
  train_cmd->add_option("--init-seed", train_init_seed, "weight init seed");
  train_cmd->add_option("--batch-seed", train_batch_seed, "batch order seed");
  train_cmd->add_option("--loss-csv", train_loss_csv,
                        "write per-iteration batch loss here");

  // ---- smoothness
  auto* sm_cmd = app.add_subcommand("smoothness", "smoothness of a checkpoint");
  DataOpts sm_opts;
  std::string sm_ckpt;
  double sm_c = 0.5;
  int sm_res = 0;
  add_data_options(sm_cmd, sm_opts, false);
  sm_cmd->add_option("--checkpoint", sm_ckpt, "checkpoint path")->required();
  sm_cmd->add_option("--c", sm_c, "confidence level in [0.5, 1)");
  sm_cmd->add_option("--resolution", sm_res,
                     "grid resolution (0 = 10000 in 1D, 250 per axis in 2D)");

  // ---- bound
  auto* bound_cmd = app.add_subcommand("bound", "accuracy lower bound report");
  DataOpts bound_opts;
  std::string bound_ckpt;
  double bound_c = 0.5;
  int bound_res = 0;
  double bound_delta0 = -1.0;  // < 0 = unknown
  add_data_options(bound_cmd, bound_opts, true);
  bound_cmd->add_option("--checkpoint", bound_ckpt, "checkpoint path")->required();
  bound_cmd->add_option("--c", bound_c, "confidence level in [0.5, 1)");
  bound_cmd->add_option("--resolution", bound_res, "grid resolution override");
  bound_cmd->add_option("--known-delta0", bound_delta0,
                        "separation of the ideal labeling, when known");

  // ---- experiment
  auto* exp_cmd = app.add_subcommand("experiment", "run a packaged study");
  exp_cmd->require_subcommand(1);
  exp_cmd->fallthrough();
  std::string exp_out_dir;
  std::uint64_t exp_seed = kDefaultMasterSeed;
  exp_cmd->add_option("--out-dir", exp_out_dir,
                      "output directory (default $COVERCC_OUTDIR/<name>)");
  exp_cmd->add_option("--master-seed", exp_seed, "master seed for the study");

  auto* tab_cmd = exp_cmd->add_subcommand("table-1d", "interval problem table");
  TableOnedimConfig tab_cfg;
  tab_cmd->add_option("--ns", tab_cfg.ns, "train sizes")->delimiter(',');
  tab_cmd->add_option("--iterations", tab_cfg.iterations, "Adam iterations");
  tab_cmd->add_option("--c", tab_cfg.c, "confidence level");
  tab_cmd->add_option("--n-test", tab_cfg.n_test, "test grid size");
  tab_cmd->add_option("--resolution", tab_cfg.grid_resolution,
                      "smoothness grid resolution");

  auto* trace_cmd = exp_cmd->add_subcommand("trace", "smoothness trace");
  TraceConfig trace_cfg;
  if (const char* env = std::getenv("COVERCC_MNIST_DIR"); env && *env)
    trace_cfg.mnist_dir = env;
  trace_cmd->add_option("--problem", trace_cfg.problem, "1d, 2d or highdim")
      ->check(CLI::IsMember({"1d", "2d", "highdim"}));
  trace_cmd->add_option("--stream", trace_cfg.stream, "repetition stream");
  trace_cmd->add_option("--iterations", trace_cfg.iterations,
                        "training iterations (0 = problem default)");
  trace_cmd->add_option("--eval-interval", trace_cfg.eval_interval,
                        "evaluation interval (0 = problem default)");
  trace_cmd->add_option("--resolution", trace_cfg.grid_resolution,
                        "grid resolution (0 = problem default)");
  trace_cmd->add_option("--n", trace_cfg.n_train,
                        "train size (0 = problem default)");
  trace_cmd->add_option("--mnist-dir", trace_cfg.mnist_dir,
                        "IDX directory for the high-dimensional problem");

  auto* dw_cmd = exp_cmd->add_subcommand("depth-width", "architecture sweeps");
  SweepConfig dw_cfg;
  dw_cmd->add_option("--depths", dw_cfg.depths, "hidden layer counts")
      ->delimiter(',');
  dw_cmd->add_option("--widths", dw_cfg.widths, "hidden widths")->delimiter(',');
  dw_cmd->add_option("--reps", dw_cfg.reps, "repetitions per cell");
  dw_cmd->add_option("--resolution", dw_cfg.grid_resolution, "grid resolution");
  dw_cmd->add_option("--cap", dw_cfg.iteration_cap, "iteration cap");
  dw_cmd->add_option("--patience", dw_cfg.patience, "early stop patience");

  auto* size_cmd = exp_cmd->add_subcommand("datasize", "dataset size sweep");
  SweepConfig size_cfg;
  size_cmd->add_option("--sizes", size_cfg.data_sizes, "train sizes")
      ->delimiter(',');
  size_cmd->add_option("--reps", size_cfg.reps, "repetitions per cell");
  size_cmd->add_option("--resolution", size_cfg.grid_resolution,
                       "grid resolution");
  size_cmd->add_option("--cap", size_cfg.iteration_cap, "iteration cap");
  size_cmd->add_option("--patience", size_cfg.patience, "early stop patience");

  auto* rl_cmd = exp_cmd->add_subcommand("random-cc",
                                         "cover complexity under random labels");
  RandomLabelConfig rl_cfg;
  rl_cmd->add_option("--n-train", rl_cfg.n_train, "train size");
  rl_cmd->add_option("--n-test", rl_cfg.n_test, "test size");
  rl_cmd->add_option("--length-scale", rl_cfg.gp_length, "gp length scale");
  rl_cmd->add_option("--reps", rl_cfg.reps, "label permutations");

  auto* fit_cmd = exp_cmd->add_subcommand("cc-fit",
                                          "error vs cover complexity line fit");
  bool fit_raw = false;
  fit_cmd->add_flag("--raw", fit_raw, "fit the raw error, not error / sqrt(K)");

  try {
    app.parse(argc, argv);

    if (gen_cmd->parsed()) {
      if (gen_opts.kind.empty())
        throw validation_error("gen: --gen interval|annulus|gp is required");
      const TrainTestPair pair = generate(spec_from(gen_opts));
      save_csv_dataset(pair.train, gen_train_out);
      save_csv_dataset(pair.test, gen_test_out);
      emit(json{{"schema_version", kSchemaVersion},
                {"kind", "gen"},
                {"train_out", gen_train_out},
                {"test_out", gen_test_out},
                {"dim", pair.train.dim()},
                {"n_train", pair.train.size()},
                {"n_test", pair.test.size()}},
           format, "");
    } else if (cover_cmd->parsed()) {
      const LoadedPair lp = load_pair(cover_opts);
      const CoverReport report = make_cover_report(lp.pair.train, lp.pair.test);
      if (!cover_hcurve.empty()) {
        std::size_t dropped = 0;
        const LabeledDataset single = single_label_subset(lp.pair.test, &dropped);
        const auto nn = nn_distances(lp.pair.train.points, single.points);
        const HCurve curve = h_curve(
            nn, report.dim, default_radii(report.dim, std::size_t(cover_radii)));
        write_h_curve_csv(curve, cover_hcurve);
      }
      emit(cover_json(report, lp.norm), format, cover_out);
    } else if (sep_cmd->parsed()) {
      const LabeledDataset train_ds = load_train_only(sep_opts);
      const SepGap gap = empirical_separation_gap(train_ds);
      emit(json{{"schema_version", kSchemaVersion},
                {"kind", "sepgap"},
                {"value", gap.value},
                {"i", gap.i},
                {"j", gap.j},
                {"coincident", gap.coincident}},
           format, "");
    } else if (train_cmd->parsed()) {
      const LabeledDataset train_ds = load_train_only(train_opts);
      std::vector<int> sizes{train_ds.dim()};
      sizes.insert(sizes.end(), train_arch.begin(), train_arch.end());
      sizes.push_back(train_ds.n_classes);
      Mlp net = init_mlp(sizes, train_init_seed);
      TrainConfig tc;
      tc.learning_rate = train_lr;
      tc.iterations = train_iters;
      tc.batch_size = train_batch;
      tc.eval_interval = train_eval;
      tc.seed = train_batch_seed;
      const TrainLog log = train(net, train_ds, tc);
      save_checkpoint(net, train_ckpt);
      if (!train_loss_csv.empty()) {
        std::ofstream out(train_loss_csv, std::ios::binary);
        if (!out)
          throw validation_error("cannot open " + train_loss_csv +
                                 " for writing");
        out << "iteration,batch_loss\n";
        char buf[64];
        for (std::size_t i = 0; i < log.batch_loss.size(); ++i) {
          std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, log.batch_loss[i]);
          out << buf;
        }
      }
      const LossSummary ls = losses(net, train_ds);
      emit(json{{"schema_version", kSchemaVersion},
                {"kind", "train"},
                {"sizes", sizes},
                {"iterations", train_iters},
                {"loss_mean", ls.mean},
                {"loss_max", ls.max},
                {"checkpoint", train_ckpt}},
           format, "");
    } else if (sm_cmd->parsed()) {
      const Mlp net = load_checkpoint(sm_ckpt);
      const LabeledDataset train_ds = load_train_only(sm_opts);
      if (train_ds.dim() != net.in_dim())
        throw validation_error("checkpoint expects dimension " +
                               std::to_string(net.in_dim()) + ", data has " +
                               std::to_string(train_ds.dim()));
      if (!(sm_c >= 0.5 && sm_c < 1.0))
        throw validation_error("--c must lie in [0.5, 1)");
      const LossSummary ls = losses(net, train_ds);
      const double eps = std::exp(-ls.max) - sm_c;
      const double lip = lipschitz_product(net);
      json j{{"schema_version", kSchemaVersion},
             {"kind", "smoothness"},
             {"dim", net.in_dim()},
             {"c", sm_c},
             {"loss_mean", ls.mean},
             {"loss_max", ls.max},
             {"epsilon", eps},
             {"lipschitz", lip}};
      const double root_d = std::sqrt(double(net.in_dim()));
      j["delta_spectral"] = maybe(
          eps > 0.0 ? delta_spectral(lip, ls.max, sm_c)
                    : std::numeric_limits<double>::quiet_NaN());
      j["delta_spectral_capped"] =
          eps > 0.0 ? json(std::min(delta_spectral(lip, ls.max, sm_c), root_d))
                    : json(nullptr);
      if (net.in_dim() <= 2) {
        const int res = sm_res > 0 ? sm_res : (net.in_dim() == 1 ? 10000 : 250);
        j["grid_resolution"] = res;
        j["grid_step"] = grid_spacing(res);
        if (eps > 0.0) {
          const double dg = delta_f_grid(net, res, eps);
          j["delta_grid"] = dg;
          j["delta_grid_shrunk"] = std::max(dg - grid_spacing(res), 0.0);
        } else {
          j["delta_grid"] = nullptr;
          j["delta_grid_shrunk"] = nullptr;
        }
      }
      j["defined"] = eps > 0.0;
      emit(j, format, "");
    } else if (bound_cmd->parsed()) {
      const Mlp net = load_checkpoint(bound_ckpt);
      const LoadedPair lp = load_pair(bound_opts);
      BoundReportOptions opts;
      opts.c = bound_c;
      opts.grid_resolution = bound_res;
      if (bound_delta0 >= 0.0)
        opts.delta0 = bound_delta0;
      else if (bound_opts.kind == "interval" || bound_opts.kind == "annulus")
        opts.delta0 = bound_opts.delta0;
      const BoundReport report =
          make_bound_report(net, lp.pair.train, lp.pair.test, opts);
      emit(bound_json(report), format, "");
    } else if (exp_cmd->parsed()) {
      if (tab_cmd->parsed()) {
        tab_cfg.master_seed = exp_seed;
        const std::string dir = resolve_out_dir(exp_out_dir, "table-1d");
        const OnedimTable table = run_table_onedim(tab_cfg, dir);
        json rows = json::array();
        for (const auto& r : table.rows)
          rows.push_back(json{{"n", r.n},
                              {"iterations_used", r.iterations_used},
                              {"loss_max", r.loss_max},
                              {"rho_T", r.rho_T},
                              {"delta", r.delta},
                              {"delta_defined", r.delta_defined},
                              {"p_c", r.p_c},
                              {"h_at_delta", r.h_at_delta},
                              {"bound", maybe(r.bound)}});
        emit(json{{"schema_version", kSchemaVersion},
                  {"kind", "table-1d"},
                  {"out_dir", dir},
                  {"rows", rows}},
             format, "");
      } else if (trace_cmd->parsed()) {
        trace_cfg.master_seed = exp_seed;
        const std::string dir = resolve_out_dir(exp_out_dir, "trace");
        const SmoothnessTrace tr = run_trace(trace_cfg, dir);
        json peak = nullptr;
        if (tr.argmax_delta >= 0) {
          const TraceRecord& r = tr.records[std::size_t(tr.argmax_delta)];
          peak = json{{"iteration", r.iteration},
                      {"delta", tr.grid_step > 0.0 ? r.delta_grid
                                                   : r.delta_spectral}};
        }
        json minloss = nullptr;
        if (tr.argmin_test_loss >= 0) {
          const TraceRecord& r = tr.records[std::size_t(tr.argmin_test_loss)];
          minloss = json{{"iteration", r.iteration}, {"test_loss", r.test_loss}};
        }
        emit(json{{"schema_version", kSchemaVersion},
                  {"kind", "trace"},
                  {"problem", tr.problem},
                  {"dim", tr.dim},
                  {"delta_T", tr.delta_T},
                  {"n_evals", tr.records.size()},
                  {"peak_delta", peak},
                  {"min_test_loss", minloss},
                  {"out_dir", dir}},
             format, "");
      } else if (dw_cmd->parsed() || size_cmd->parsed()) {
        SweepConfig& cfg = dw_cmd->parsed() ? dw_cfg : size_cfg;
        cfg.master_seed = exp_seed;
        const char* name = dw_cmd->parsed() ? "depth-width" : "datasize";
        const std::string dir = resolve_out_dir(exp_out_dir, name);
        const ExperimentSummary summary = dw_cmd->parsed()
                                              ? run_depth_width(cfg, dir)
                                              : run_datasize(cfg, dir);
        json cells = json::array();
        for (const auto& c : summary.cells)
          cells.push_back(json{{"sweep", c.sweep},
                               {"param", c.param},
                               {"n_used", c.n_used},
                               {"n_excluded", c.n_excluded},
                               {"n_regen", c.n_regen},
                               {"mean", c.mean},
                               {"stddev", c.stddev}});
        emit(json{{"schema_version", kSchemaVersion},
                  {"kind", summary.name},
                  {"cells", cells},
                  {"out_dir", dir}},
             format, "");
      } else if (rl_cmd->parsed()) {
        rl_cfg.master_seed = exp_seed;
        const std::string dir = resolve_out_dir(exp_out_dir, "random-cc");
        const RandomLabelCc r = run_random_label_cc(rl_cfg, dir);
        emit(json{{"schema_version", kSchemaVersion},
                  {"kind", "random-cc"},
                  {"cc_original", r.cc_original},
                  {"reps", r.reps},
                  {"n_undefined", r.n_undefined},
                  {"n_positive", r.n_positive},
                  {"n_negative", r.n_negative},
                  {"min_abs", r.min_abs},
                  {"median_abs", r.median_abs},
                  {"n_blowup", r.n_blowup},
                  {"out_dir", dir}},
             format, "");
      } else if (fit_cmd->parsed()) {
        const std::string dir = resolve_out_dir(exp_out_dir, "cc-fit");
        const LineFit fit = run_cc_fit(!fit_raw, dir);
        emit(json{{"schema_version", kSchemaVersion},
                  {"kind", "cc-fit"},
                  {"normalize", !fit_raw},
                  {"slope", fit.slope},
                  {"r2", fit.r2},
                  {"n", fit.n},
                  {"out_dir", dir}},
             format, "");
      }
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const numerical_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const undefined_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const run_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
