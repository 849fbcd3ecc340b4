#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "covercc/dataset.hpp"
#include "covercc/matrix.hpp"

namespace covercc {

// Fully connected ReLU network with a softmax head, 64-bit doubles
// throughout. sizes = (n_0, ..., n_l) with n_0 the input dimension and n_l
// the class count; weights[i] is sizes[i+1] x sizes[i].
struct Mlp {
  std::vector<int> sizes;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  std::uint64_t init_seed = 0;

  int depth() const { return static_cast<int>(weights.size()); }
  int in_dim() const { return sizes.front(); }
  int out_dim() const { return sizes.back(); }
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int iterations = 1000;
  int batch_size = 0;  // 0 = full batch
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int eval_interval = 10;
  std::uint64_t seed = 0;  // batch-order stream
};

// He initialization: W ~ N(0, 2/fan_in), biases zero. Deterministic for a
// fixed (sizes, seed) pair.
Mlp init_mlp(const std::vector<int>& sizes, std::uint64_t seed);

// Softmax probabilities for one input (max-subtracted for stability).
std::vector<double> forward(const Mlp& net, std::span<const double> x);

// Probabilities for a batch of inputs, one row per input row.
Matrix forward_batch(const Mlp& net, const Matrix& x);

struct LossSummary {
  double mean = 0.0;
  double max = 0.0;
  std::vector<double> per_sample;  // -ln f_{k_i}(x_i)
};

// Cross-entropy against the (single) label of every row. Computed through
// log-softmax so confidently wrong logits cannot overflow.
LossSummary losses(const Mlp& net, const LabeledDataset& ds);

struct Gradients {
  std::vector<Matrix> w;
  std::vector<std::vector<double>> b;
};

// Exact gradient of the mean cross-entropy over the batch. labels are
// 0-based class indices. ReLU'(0) = 0.
Gradients backward(const Mlp& net, const Matrix& x, const std::vector<int>& labels);

struct AdamState {
  std::vector<Matrix> mw, vw;
  std::vector<std::vector<double>> mb, vb;
  long t = 0;
};

// One bias-corrected Adam update; state tensors are allocated lazily on the
// first call.
void adam_step(Mlp& net, const Gradients& g, const TrainConfig& cfg, AdamState& state);

struct TrainLog {
  std::vector<double> batch_loss;  // mean CE of the batch fed at each iteration
};

// Return false to stop training after the current iteration.
using EvalHook = std::function<bool(int iteration, const Mlp& net)>;

// Adam training loop. Full-batch when cfg.batch_size == 0; otherwise the
// batch order is a seeded per-epoch shuffle. The hook fires at every
// eval_interval-th iteration and at the final one. Bitwise reproducible for
// fixed (net, dataset, config).
TrainLog train(Mlp& net, const LabeledDataset& ds, const TrainConfig& cfg,
               const EvalHook& hook = nullptr);

// Largest singular value via power iteration on W^T W: relative tolerance
// 1e-8, at most 10^4 iterations, seeded random start, restart on stagnation.
double spectral_norm(const Matrix& w, std::uint64_t seed = 0x5eedULL);

// Product of the layer spectral norms, the network's Lipschitz upper bound.
double lipschitz_product(const Mlp& net);

// Versioned JSON checkpoint (format tag, sizes, row-major weights, biases).
void save_checkpoint(const Mlp& net, const std::string& path);
Mlp load_checkpoint(const std::string& path);

}  // namespace covercc
