#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "covercc/matrix.hpp"

namespace covercc {

using Label = int;

// Small sorted set of class labels attached to one point. Training data is
// single-label; synthetic test grids may carry {1,2} inside the buffer band
// where the ideal tag function is multivalued.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(Label single) : labels_{single} {}
  LabelSet(std::initializer_list<Label> ls);
  static LabelSet from_values(std::vector<Label> ls);  // sorts, dedups

  bool contains(Label k) const;
  bool single() const { return labels_.size() == 1; }
  Label only() const;  // requires single()
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }

  auto begin() const { return labels_.begin(); }
  auto end() const { return labels_.end(); }
  const std::vector<Label>& values() const { return labels_; }

  bool operator==(const LabelSet&) const = default;

 private:
  std::vector<Label> labels_;  // sorted ascending, no duplicates
};

// A finite point set in [0,1]^d with one non-empty label set per row.
// Labels are drawn from 1..n_classes.
struct LabeledDataset {
  Matrix points;
  std::vector<LabelSet> labels;
  int n_classes = 0;
  std::string name;

  std::size_t size() const { return points.rows; }
  int dim() const { return static_cast<int>(points.cols); }
  bool single_label() const;

  // Throws validation_error on any broken invariant (count mismatch,
  // coordinates outside [0,1], labels outside 1..n_classes).
  void validate() const;
};

struct TrainTestPair {
  LabeledDataset train;
  LabeledDataset test;
};

// Min-max statistics captured when a CSV file needed rescaling into [0,1].
// Feed the train file's stats back in when loading the paired test file so
// both go through the identical transform.
struct CsvNormalization {
  bool applied = false;
  std::vector<double> lo, hi;  // per-dimension source ranges
};

struct CsvDataset {
  LabeledDataset data;
  CsvNormalization norm;
};

/// Loads rows of the form x1,...,xd,label (label may be a ;-joined list).
/// A non-numeric first row is treated as a header and skipped. When any
/// coordinate falls outside [0,1] the whole file is min-max rescaled per
/// dimension and the transform is recorded in the result.
CsvDataset load_csv_dataset(const std::string& path, int n_classes);

/// Same, but applies a previously recorded transform instead of deriving
/// one, clamping the results into [0,1].
CsvDataset load_csv_dataset(const std::string& path, int n_classes,
                            const CsvNormalization& norm);

/// Writes the dataset back out in the load format. Multi-label rows are
/// emitted as ;-joined lists and survive a round trip.
void save_csv_dataset(const LabeledDataset& ds, const std::string& path);

/// Reads an IDX image/label file pair (big-endian, magics 0x00000803 and
/// 0x00000801). Pixels are scaled to [0,1] by /255 and labels are shifted
/// from 0-based to 1..K. Errors name the offending file.
LabeledDataset load_idx_pair(const std::string& images_path,
                             const std::string& labels_path);

// Two-class interval problem on [0,1]. Class 1 sits on n/2 equispaced
// points of [0, 0.5 - delta0/2], class 2 mirrors it, and the open middle
// band of width delta0 holds no training point. The test set is n_test
// equispaced points tagged by the ideal interval labeling, so band points
// carry {1,2}.
TrainTestPair synth_1d(int n, double delta0, int n_test);

// Two-class annulus problem on [0,1]^2 around the center (0.5, 0.5): an m^2
// grid minus the points whose center distance lies strictly inside
// (0.4 - delta0/2, 0.4 + delta0/2). Inside the closed inner disc the label
// is {1}, outside the closed outer region {2}. The test set is an m_test^2
// grid tagged by the same rule with {1,2} in the open band.
TrainTestPair synth_2d(int m, double delta0, int m_test);

// n equispaced points on [0,1] labelled by comparing two functions drawn
// from a zero-mean Gaussian process with RBF kernel exp(-(x-x')^2/(2 l^2)):
// {1} where g1 > g2, {2} otherwise. Deterministic for a fixed seed.
LabeledDataset gp_binary_dataset(int n, double length_scale, std::uint64_t seed);

// As above, but samples one GP labeling jointly over n_train + n_test
// equispaced points and splits them into an interleaved train/test pair, so
// both sides share a single underlying ideal labeling.
TrainTestPair gp_binary_pair(int n_train, int n_test, double length_scale,
                             std::uint64_t seed);

// x -> scale * x + shift, applied per coordinate. Requires scale in (0,1]
// and throws validation_error if any result leaves [0,1].
LabeledDataset affine_transform(const LabeledDataset& ds, double scale,
                                double shift);

// Copy containing only the single-label rows; optionally reports how many
// rows were dropped.
LabeledDataset single_label_subset(const LabeledDataset& ds,
                                   std::size_t* n_removed = nullptr);

// Draws one GP sample over arbitrary points (rows of `points`) with the RBF
// kernel above. Exposed so higher-dimensional synthetic sets can reuse the
// sampler. Uses the shared jitter ladder on the Cholesky factorization.
std::vector<double> gp_sample(const Matrix& points, double length_scale,
                              std::mt19937_64& rng);

// Lower Cholesky factor of a + jitter*I. Starts at jitter 1e-10 and
// escalates tenfold up to 1e-4 before giving up with numerical_error.
// The jitter that succeeded is reported through jitter_used if non-null.
Matrix cholesky_with_jitter(const Matrix& a, double* jitter_used = nullptr);

// Descriptor for the ideal labelings the generators implement.
enum class IdealKind { interval_1d, annulus_2d, gp_binary };

struct IdealLabelSpec {
  IdealKind kind = IdealKind::interval_1d;
  int n = 20;                 // train size (grid side for annulus_2d)
  int n_test = 10000;         // test size (grid side for annulus_2d)
  double delta0 = 0.1;        // separation parameter, interval/annulus only
  double length_scale = 0.2;  // gp_binary only
  std::uint64_t seed = 0;     // gp_binary only

  void validate() const;
};

TrainTestPair generate(const IdealLabelSpec& spec);

}  // namespace covercc
