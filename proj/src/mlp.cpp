#include "covercc/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <json.hpp>

#include "covercc/errors.hpp"
#include "covercc/rng.hpp"

namespace covercc {

namespace {

constexpr const char* kCheckpointFormat = "covercc-mlp/1";

void validate_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2)
    throw validation_error("mlp: need at least input and output layers");
  for (int s : sizes)
    if (s < 1)
      throw validation_error("mlp: layer size " + std::to_string(s) + " < 1");
  if (sizes.back() < 2)
    throw validation_error("mlp: output layer needs >= 2 classes");
}

void check_input(const Mlp& net, std::size_t cols) {
  if (cols != std::size_t(net.in_dim()))
    throw validation_error("mlp: input dimension " + std::to_string(cols) +
                           " does not match network input " +
                           std::to_string(net.in_dim()));
}

// In-place softmax of each row, guarded by max subtraction.
void softmax_rows(Matrix& z) {
  for (std::size_t i = 0; i < z.rows; ++i) {
    double* row = z.row(i);
    double mx = row[0];
    for (std::size_t j = 1; j < z.cols; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < z.cols; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (std::size_t j = 0; j < z.cols; ++j) row[j] /= sum;
  }
}

void add_bias_rows(Matrix& z, const std::vector<double>& b) {
  for (std::size_t i = 0; i < z.rows; ++i) {
    double* row = z.row(i);
    for (std::size_t j = 0; j < z.cols; ++j) row[j] += b[j];
  }
}

void relu_rows(Matrix& z) {
  for (double& v : z.data) v = v > 0.0 ? v : 0.0;
}

// Pre-activations of every layer for a batch; out[i] holds layer i+1's z.
std::vector<Matrix> forward_layers(const Mlp& net, const Matrix& x) {
  check_input(net, x.cols);
  std::vector<Matrix> zs(net.depth());
  const Matrix* cur = &x;
  Matrix activated;
  for (int layer = 0; layer < net.depth(); ++layer) {
    gemm_nt(*cur, net.weights[layer], zs[layer]);
    add_bias_rows(zs[layer], net.biases[layer]);
    if (layer + 1 < net.depth()) {
      activated = zs[layer];
      relu_rows(activated);
      cur = &activated;
    }
  }
  return zs;
}

std::vector<int> zero_based_labels(const LabeledDataset& ds, int n_classes) {
  std::vector<int> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds.labels[i].single())
      throw validation_error("losses: multi-label row " + std::to_string(i) +
                             " (training losses need single labels)");
    const int k = ds.labels[i].only();
    if (k > n_classes)
      throw validation_error("losses: label " + std::to_string(k) +
                             " exceeds network output size " +
                             std::to_string(n_classes));
    out[i] = k - 1;
  }
  return out;
}

}  // namespace

Mlp init_mlp(const std::vector<int>& sizes, std::uint64_t seed) {
  validate_sizes(sizes);
  Mlp net;
  net.sizes = sizes;
  net.init_seed = seed;
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t layer = 1; layer < sizes.size(); ++layer) {
    const int fan_in = sizes[layer - 1];
    const int fan_out = sizes[layer];
    const double sd = std::sqrt(2.0 / fan_in);
    Matrix w(fan_out, fan_in);
    for (double& v : w.data) v = sd * gauss(rng);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(fan_out, 0.0);
  }
  return net;
}

std::vector<double> forward(const Mlp& net, std::span<const double> x) {
  check_input(net, x.size());
  std::vector<double> cur(x.begin(), x.end());
  for (int layer = 0; layer < net.depth(); ++layer) {
    std::vector<double> z = matvec(net.weights[layer], cur);
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += net.biases[layer][j];
    if (layer + 1 < net.depth())
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    cur = std::move(z);
  }
  double mx = cur[0];
  for (double v : cur) mx = std::max(mx, v);
  double sum = 0.0;
  for (double& v : cur) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : cur) v /= sum;
  return cur;
}

Matrix forward_batch(const Mlp& net, const Matrix& x) {
  auto zs = forward_layers(net, x);
  Matrix probs = std::move(zs.back());
  softmax_rows(probs);
  return probs;
}

LossSummary losses(const Mlp& net, const LabeledDataset& ds) {
  ds.validate();
  const auto labels = zero_based_labels(ds, net.out_dim());
  auto zs = forward_layers(net, ds.points);
  const Matrix& logits = zs.back();

  LossSummary out;
  out.per_sample.resize(ds.size());
  out.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double* row = logits.row(i);
    double mx = row[0];
    for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, row[j]);
    double lse = 0.0;
    for (std::size_t j = 0; j < logits.cols; ++j) lse += std::exp(row[j] - mx);
    const double loss = std::log(lse) - (row[labels[i]] - mx);
    out.per_sample[i] = loss;
    out.max = std::max(out.max, loss);
    sum += loss;
  }
  out.mean = sum / double(ds.size());
  return out;
}

Gradients backward(const Mlp& net, const Matrix& x, const std::vector<int>& labels) {
  if (x.rows == 0) throw validation_error("backward: empty batch");
  if (labels.size() != x.rows)
    throw validation_error("backward: batch has " + std::to_string(x.rows) +
                           " rows but " + std::to_string(labels.size()) +
                           " labels");
  for (int k : labels)
    if (k < 0 || k >= net.out_dim())
      throw validation_error("backward: label index " + std::to_string(k) +
                             " outside network outputs");

  const int l = net.depth();
  auto zs = forward_layers(net, x);

  // Activations a_0..a_{l-1} feeding each layer (a_0 is the input batch).
  std::vector<Matrix> acts(l);
  acts[0] = x;
  for (int layer = 1; layer < l; ++layer) {
    acts[layer] = zs[layer - 1];
    relu_rows(acts[layer]);
  }

  // dL/dz_l for mean cross-entropy: (softmax - onehot) / batch.
  Matrix delta = std::move(zs.back());
  softmax_rows(delta);
  const double inv_batch = 1.0 / double(x.rows);
  for (std::size_t i = 0; i < delta.rows; ++i) {
    double* row = delta.row(i);
    row[labels[i]] -= 1.0;
    for (std::size_t j = 0; j < delta.cols; ++j) row[j] *= inv_batch;
  }

  Gradients g;
  g.w.resize(l);
  g.b.resize(l);
  for (int layer = l - 1; layer >= 0; --layer) {
    gemm_tn(delta, acts[layer], g.w[layer]);
    g.b[layer].assign(net.sizes[layer + 1], 0.0);
    for (std::size_t i = 0; i < delta.rows; ++i) {
      const double* row = delta.row(i);
      for (std::size_t j = 0; j < delta.cols; ++j) g.b[layer][j] += row[j];
    }
    if (layer > 0) {
      Matrix next;
      gemm_nn(delta, net.weights[layer], next);
      // ReLU mask from the stored pre-activations; derivative at 0 is 0.
      const Matrix& z = zs[layer - 1];
      for (std::size_t idx = 0; idx < next.data.size(); ++idx)
        if (!(z.data[idx] > 0.0)) next.data[idx] = 0.0;
      delta = std::move(next);
    }
  }
  return g;
}

void adam_step(Mlp& net, const Gradients& g, const TrainConfig& cfg,
               AdamState& state) {
  const int l = net.depth();
  if (int(g.w.size()) != l)
    throw validation_error("adam_step: gradient layer count mismatch");
  if (state.t == 0) {
    state.mw.resize(l);
    state.vw.resize(l);
    state.mb.resize(l);
    state.vb.resize(l);
    for (int i = 0; i < l; ++i) {
      state.mw[i] = Matrix(net.weights[i].rows, net.weights[i].cols);
      state.vw[i] = Matrix(net.weights[i].rows, net.weights[i].cols);
      state.mb[i].assign(net.biases[i].size(), 0.0);
      state.vb[i].assign(net.biases[i].size(), 0.0);
    }
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, double(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, double(state.t));

  const auto update = [&](double& param, double grad, double& m, double& v) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
    param -= cfg.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + cfg.epsilon);
  };

  for (int i = 0; i < l; ++i) {
    for (std::size_t idx = 0; idx < net.weights[i].data.size(); ++idx)
      update(net.weights[i].data[idx], g.w[i].data[idx], state.mw[i].data[idx],
             state.vw[i].data[idx]);
    for (std::size_t idx = 0; idx < net.biases[i].size(); ++idx)
      update(net.biases[i][idx], g.b[i][idx], state.mb[i][idx],
             state.vb[i][idx]);
  }
}

TrainLog train(Mlp& net, const LabeledDataset& ds, const TrainConfig& cfg,
               const EvalHook& hook) {
  ds.validate();
  check_input(net, ds.points.cols);
  if (cfg.iterations < 1)
    throw validation_error("train: iterations must be >= 1");
  if (cfg.eval_interval < 1)
    throw validation_error("train: eval_interval must be >= 1");
  if (!(cfg.learning_rate > 0.0))
    throw validation_error("train: learning_rate must be > 0");
  if (cfg.batch_size < 0 || cfg.batch_size > int(ds.size()))
    throw validation_error("train: batch_size must lie in 0..n");

  const auto all_labels = zero_based_labels(ds, net.out_dim());
  const std::size_t n = ds.size();
  const std::size_t batch = cfg.batch_size == 0 ? n : std::size_t(cfg.batch_size);

  AdamState state;
  TrainLog log;
  log.batch_loss.reserve(cfg.iterations);

  auto rng = make_rng(cfg.seed, 0x6b617463ULL);  // batch-order stream
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = n;  // force a shuffle before the first minibatch

  Matrix bx(batch, ds.points.cols);
  std::vector<int> by(batch);

  for (int it = 1; it <= cfg.iterations; ++it) {
    const Matrix* px;
    const std::vector<int>* py;
    if (batch == n) {
      px = &ds.points;
      py = &all_labels;
    } else {
      for (std::size_t b = 0; b < batch; ++b) {
        if (cursor == n) {
          std::shuffle(order.begin(), order.end(), rng);
          cursor = 0;
        }
        const std::size_t src = order[cursor++];
        std::copy(ds.points.row(src), ds.points.row(src) + ds.points.cols,
                  bx.row(b));
        by[b] = all_labels[src];
      }
      px = &bx;
      py = &by;
    }

    // Batch loss before the step, from the same forward pass shape as the
    // gradient. Cheap relative to backward, so recomputed plainly.
    {
      auto zs = forward_layers(net, *px);
      const Matrix& logits = zs.back();
      double sum = 0.0;
      for (std::size_t i = 0; i < logits.rows; ++i) {
        const double* row = logits.row(i);
        double mx = row[0];
        for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, row[j]);
        double lse = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j)
          lse += std::exp(row[j] - mx);
        sum += std::log(lse) - (row[(*py)[i]] - mx);
      }
      log.batch_loss.push_back(sum / double(logits.rows));
    }

    const Gradients g = backward(net, *px, *py);
    adam_step(net, g, cfg, state);

    if (hook && (it % cfg.eval_interval == 0 || it == cfg.iterations))
      if (!hook(it, net)) break;
  }
  return log;
}

double spectral_norm(const Matrix& w, std::uint64_t seed) {
  if (w.rows == 0 || w.cols == 0)
    throw validation_error("spectral_norm: empty matrix");
  bool nonzero = false;
  for (double v : w.data)
    if (v != 0.0) nonzero = true;
  if (!nonzero) return 0.0;

  auto rng = make_rng(seed, w.rows * 1315423911ULL + w.cols);
  std::normal_distribution<double> gauss(0.0, 1.0);
  constexpr int kMaxIters = 10000;
  constexpr double kTol = 1e-8;
  constexpr int kMaxRestarts = 3;

  int iters_used = 0;
  double best = 0.0;
  for (int restart = 0; restart < kMaxRestarts; ++restart) {
    std::vector<double> v(w.cols);
    double norm = 0.0;
    for (double& x : v) {
      x = gauss(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;

    double sigma = 0.0;
    bool stagnated = false;
    while (iters_used < kMaxIters) {
      ++iters_used;
      std::vector<double> u = matvec(w, v);
      double unorm = 0.0;
      for (double x : u) unorm += x * x;
      unorm = std::sqrt(unorm);
      if (unorm == 0.0) {
        stagnated = true;  // start vector fell in the null space
        break;
      }
      std::vector<double> back = matvec_t(w, u);
      double bnorm = 0.0;
      for (double x : back) bnorm += x * x;
      bnorm = std::sqrt(bnorm);
      if (bnorm == 0.0) {
        stagnated = true;
        break;
      }
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = back[i] / bnorm;
      const double prev = sigma;
      sigma = unorm;  // Rayleigh estimate ||W v|| with unit v
      if (std::abs(sigma - prev) <= kTol * std::max(sigma, 1e-300)) {
        best = std::max(best, sigma);
        return best;
      }
    }
    best = std::max(best, sigma);
    if (!stagnated) break;  // hit the iteration budget
  }
  return best;
}

double lipschitz_product(const Mlp& net) {
  double prod = 1.0;
  for (const Matrix& w : net.weights) prod *= spectral_norm(w);
  return prod;
}

void save_checkpoint(const Mlp& net, const std::string& path) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["sizes"] = net.sizes;
  j["init_seed"] = net.init_seed;
  j["weights"] = nlohmann::json::array();
  j["biases"] = nlohmann::json::array();
  for (const Matrix& w : net.weights) j["weights"].push_back(w.data);
  for (const auto& b : net.biases) j["biases"].push_back(b);
  std::ofstream out(path);
  if (!out) throw validation_error("cannot open '" + path + "' for writing");
  out << j.dump(1) << '\n';
  if (!out) throw validation_error("write to '" + path + "' failed");
}

Mlp load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw format_error("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.contains("format") || j["format"] != kCheckpointFormat)
    throw format_error("checkpoint '" + path + "' has format tag " +
                       (j.contains("format") ? j["format"].dump() : "<missing>") +
                       ", expected \"" + kCheckpointFormat + "\"");
  Mlp net;
  try {
    net.sizes = j.at("sizes").get<std::vector<int>>();
    net.init_seed = j.at("init_seed").get<std::uint64_t>();
    validate_sizes(net.sizes);
    const auto& ws = j.at("weights");
    const auto& bs = j.at("biases");
    if (ws.size() != net.sizes.size() - 1 || bs.size() != net.sizes.size() - 1)
      throw format_error("checkpoint '" + path + "' layer count mismatch");
    for (std::size_t layer = 1; layer < net.sizes.size(); ++layer) {
      Matrix w(net.sizes[layer], net.sizes[layer - 1]);
      const auto vals = ws[layer - 1].get<std::vector<double>>();
      if (vals.size() != w.data.size())
        throw format_error("checkpoint '" + path + "' weight shape mismatch at layer " +
                           std::to_string(layer));
      w.data = vals;
      net.weights.push_back(std::move(w));
      auto b = bs[layer - 1].get<std::vector<double>>();
      if (b.size() != std::size_t(net.sizes[layer]))
        throw format_error("checkpoint '" + path + "' bias shape mismatch at layer " +
                           std::to_string(layer));
      net.biases.push_back(std::move(b));
    }
  } catch (const nlohmann::json::exception& e) {
    throw format_error("checkpoint '" + path + "' is malformed: " + e.what());
  }
  return net;
}

}  // namespace covercc
