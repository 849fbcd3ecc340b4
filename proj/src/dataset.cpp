#include "covercc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "covercc/errors.hpp"
#include "covercc/rng.hpp"

namespace covercc {

namespace {

std::string q(const std::string& s) { return "'" + s + "'"; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

bool parse_double(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_long(std::string_view cell, long& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), last, out);
  return ec == std::errc() && ptr == last;
}

void format_double(char* buf, std::size_t n, double v) {
  std::snprintf(buf, n, "%.17g", v);
}

}  // namespace

LabelSet::LabelSet(std::initializer_list<Label> ls) : labels_(ls) {
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
}

LabelSet LabelSet::from_values(std::vector<Label> ls) {
  std::sort(ls.begin(), ls.end());
  ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
  LabelSet out;
  out.labels_ = std::move(ls);
  return out;
}

bool LabelSet::contains(Label k) const {
  return std::binary_search(labels_.begin(), labels_.end(), k);
}

Label LabelSet::only() const {
  if (labels_.size() != 1)
    throw validation_error("LabelSet::only() called on a set of size " +
                           std::to_string(labels_.size()));
  return labels_[0];
}

bool LabeledDataset::single_label() const {
  return std::all_of(labels.begin(), labels.end(),
                     [](const LabelSet& s) { return s.single(); });
}

void LabeledDataset::validate() const {
  if (points.rows != labels.size())
    throw validation_error("dataset " + q(name) + ": " +
                           std::to_string(points.rows) + " points but " +
                           std::to_string(labels.size()) + " label sets");
  if (points.rows == 0) throw validation_error("dataset " + q(name) + " is empty");
  if (points.cols == 0)
    throw validation_error("dataset " + q(name) + " has dimension 0");
  if (n_classes < 1)
    throw validation_error("dataset " + q(name) + ": n_classes must be >= 1");
  for (std::size_t i = 0; i < points.rows; ++i) {
    for (std::size_t j = 0; j < points.cols; ++j) {
      const double v = points(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw validation_error("dataset " + q(name) + ": coordinate (" +
                               std::to_string(i) + "," + std::to_string(j) +
                               ") = " + std::to_string(v) + " outside [0,1]");
    }
    if (labels[i].empty())
      throw validation_error("dataset " + q(name) + ": empty label set at row " +
                             std::to_string(i));
    for (Label k : labels[i])
      if (k < 1 || k > n_classes)
        throw validation_error("dataset " + q(name) + ": label " +
                               std::to_string(k) + " at row " + std::to_string(i) +
                               " outside 1.." + std::to_string(n_classes));
  }
}

// ---------------------------------------------------------------------------
// CSV load/save

namespace {

struct RawCsv {
  std::vector<std::vector<double>> coords;
  std::vector<LabelSet> labels;
  std::size_t dim = 0;
};

RawCsv read_csv_rows(const std::string& path, int n_classes) {
  if (n_classes < 2)
    throw validation_error("load_csv_dataset: n_classes must be >= 2, got " +
                           std::to_string(n_classes));
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open CSV file " + q(path));

  RawCsv raw;
  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    auto cells = split(sv, ',');
    if (!seen_content) {
      seen_content = true;
      double probe;
      if (!parse_double(cells[0], probe)) continue;  // header row
    }
    if (cells.size() < 2)
      throw parse_error(q(path) + " line " + std::to_string(line_no) +
                        ": expected x1,...,xd,label");
    if (raw.dim == 0) {
      raw.dim = cells.size() - 1;
    } else if (cells.size() - 1 != raw.dim) {
      throw parse_error(q(path) + " line " + std::to_string(line_no) + ": got " +
                        std::to_string(cells.size() - 1) +
                        " coordinates, expected " + std::to_string(raw.dim));
    }
    std::vector<double> row(raw.dim);
    for (std::size_t j = 0; j < raw.dim; ++j)
      if (!parse_double(cells[j], row[j]))
        throw parse_error(q(path) + " line " + std::to_string(line_no) +
                          ": bad number '" + std::string(trim(cells[j])) + "'");
    std::vector<Label> ls;
    for (std::string_view part : split(cells.back(), ';')) {
      long lab;
      if (!parse_long(part, lab))
        throw parse_error(q(path) + " line " + std::to_string(line_no) +
                          ": bad label '" + std::string(trim(part)) + "'");
      if (lab < 1 || lab > n_classes)
        throw validation_error(q(path) + " line " + std::to_string(line_no) +
                               ": label " + std::to_string(lab) + " outside 1.." +
                               std::to_string(n_classes));
      ls.push_back(static_cast<Label>(lab));
    }
    raw.labels.push_back(LabelSet::from_values(std::move(ls)));
    raw.coords.push_back(std::move(row));
  }
  if (raw.coords.empty())
    throw validation_error("CSV file " + q(path) + " contains no data rows");
  return raw;
}

CsvDataset assemble_csv(RawCsv raw, const std::string& path, int n_classes,
                        const CsvNormalization* given) {
  const std::size_t n = raw.coords.size();
  const std::size_t d = raw.dim;
  CsvDataset out;

  if (given) {
    if (given->applied && (given->lo.size() != d || given->hi.size() != d))
      throw validation_error("normalization stats have dimension " +
                             std::to_string(given->lo.size()) + ", file " +
                             q(path) + " has " + std::to_string(d));
    out.norm = *given;
  } else {
    bool needs = false;
    for (const auto& row : raw.coords)
      for (double v : row)
        if (v < 0.0 || v > 1.0) needs = true;
    out.norm.applied = needs;
    if (needs) {
      out.norm.lo.assign(d, std::numeric_limits<double>::infinity());
      out.norm.hi.assign(d, -std::numeric_limits<double>::infinity());
      for (const auto& row : raw.coords)
        for (std::size_t j = 0; j < d; ++j) {
          out.norm.lo[j] = std::min(out.norm.lo[j], row[j]);
          out.norm.hi[j] = std::max(out.norm.hi[j], row[j]);
        }
    }
  }

  Matrix pts(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double v = raw.coords[i][j];
      if (out.norm.applied) {
        const double span = out.norm.hi[j] - out.norm.lo[j];
        v = span > 0.0 ? (v - out.norm.lo[j]) / span : 0.0;
        v = std::clamp(v, 0.0, 1.0);
      } else if (v < 0.0 || v > 1.0) {
        throw validation_error(q(path) + ": coordinate " + std::to_string(v) +
                               " outside [0,1] but the supplied normalization "
                               "was derived from in-range data");
      }
      pts(i, j) = v;
    }
  }

  out.data.points = std::move(pts);
  out.data.labels = std::move(raw.labels);
  out.data.n_classes = n_classes;
  out.data.name = path;
  out.data.validate();
  return out;
}

}  // namespace

CsvDataset load_csv_dataset(const std::string& path, int n_classes) {
  return assemble_csv(read_csv_rows(path, n_classes), path, n_classes, nullptr);
}

CsvDataset load_csv_dataset(const std::string& path, int n_classes,
                            const CsvNormalization& norm) {
  return assemble_csv(read_csv_rows(path, n_classes), path, n_classes, &norm);
}

void save_csv_dataset(const LabeledDataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw validation_error("cannot open " + q(path) + " for writing");
  char buf[40];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.points.cols; ++j) {
      format_double(buf, sizeof buf, ds.points(i, j));
      out << buf << ',';
    }
    bool first = true;
    for (Label k : ds.labels[i]) {
      if (!first) out << ';';
      out << k;
      first = false;
    }
    out << '\n';
  }
  if (!out) throw validation_error("write to " + q(path) + " failed");
}

// ---------------------------------------------------------------------------
// IDX load

namespace {

std::vector<unsigned char> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open IDX file " + q(path));
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t off,
                        const std::string& path) {
  if (off + 4 > b.size())
    throw format_error("IDX file " + q(path) + " truncated in header");
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

}  // namespace

LabeledDataset load_idx_pair(const std::string& images_path,
                             const std::string& labels_path) {
  const auto img = read_file_bytes(images_path);
  const auto lbl = read_file_bytes(labels_path);

  const std::uint32_t img_magic = read_be32(img, 0, images_path);
  if (img_magic != 0x00000803u)
    throw format_error("IDX file " + q(images_path) + ": magic 0x" +
                       [&] { char b[16]; std::snprintf(b, sizeof b, "%08x", img_magic); return std::string(b); }() +
                       ", expected 0x00000803 (unsigned-byte images, 3 dims)");
  const std::uint32_t n = read_be32(img, 4, images_path);
  const std::uint32_t rows = read_be32(img, 8, images_path);
  const std::uint32_t cols = read_be32(img, 12, images_path);
  const std::size_t want = 16 + std::size_t(n) * rows * cols;
  if (img.size() != want)
    throw format_error("IDX file " + q(images_path) + ": payload is " +
                       std::to_string(img.size() - std::min<std::size_t>(16, img.size())) +
                       " bytes, header promises " + std::to_string(want - 16));

  const std::uint32_t lbl_magic = read_be32(lbl, 0, labels_path);
  if (lbl_magic != 0x00000801u)
    throw format_error("IDX file " + q(labels_path) + ": magic 0x" +
                       [&] { char b[16]; std::snprintf(b, sizeof b, "%08x", lbl_magic); return std::string(b); }() +
                       ", expected 0x00000801 (unsigned-byte labels, 1 dim)");
  const std::uint32_t n_lbl = read_be32(lbl, 4, labels_path);
  if (lbl.size() != 8 + std::size_t(n_lbl))
    throw format_error("IDX file " + q(labels_path) + ": payload is " +
                       std::to_string(lbl.size() - std::min<std::size_t>(8, lbl.size())) +
                       " bytes, header promises " + std::to_string(n_lbl));
  if (n != n_lbl)
    throw format_error("IDX pair mismatch: " + q(images_path) + " holds " +
                       std::to_string(n) + " images but " + q(labels_path) +
                       " holds " + std::to_string(n_lbl) + " labels");
  if (n == 0) throw validation_error("IDX pair " + q(images_path) + " is empty");

  const std::size_t d = std::size_t(rows) * cols;
  LabeledDataset ds;
  ds.points = Matrix(n, d);
  ds.labels.reserve(n);
  int max_label = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    const unsigned char* px = img.data() + 16 + std::size_t(i) * d;
    double* row = ds.points.row(i);
    for (std::size_t j = 0; j < d; ++j) row[j] = px[j] / 255.0;
    const int k = int(lbl[8 + i]) + 1;  // stored 0-based
    max_label = std::max(max_label, k);
    ds.labels.emplace_back(k);
  }
  ds.n_classes = max_label;
  ds.name = images_path;
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// Synthetic generators

TrainTestPair synth_1d(int n, double delta0, int n_test) {
  if (n < 4 || n % 2 != 0)
    throw validation_error("synth_1d: n must be even and >= 4, got " +
                           std::to_string(n));
  if (!(delta0 > 0.0 && delta0 < 1.0))
    throw validation_error("synth_1d: delta0 must lie in (0,1), got " +
                           std::to_string(delta0));
  if (n_test < 2)
    throw validation_error("synth_1d: n_test must be >= 2, got " +
                           std::to_string(n_test));

  const double step = (1.0 - delta0) / (n - 2);
  const double lo = 0.5 - delta0 / 2;
  const double hi = 0.5 + delta0 / 2;

  TrainTestPair pair;
  char tag[96];
  std::snprintf(tag, sizeof tag, "synth-1d(n=%d,delta0=%g)", n, delta0);

  pair.train.points = Matrix(n, 1);
  pair.train.labels.reserve(n);
  const int half = n / 2;
  for (int k = 0; k < half; ++k) {
    pair.train.points(k, 0) = k * step;
    pair.train.labels.emplace_back(1);
  }
  for (int k = 0; k < half; ++k) {
    pair.train.points(half + k, 0) = 1.0 - (half - 1 - k) * step;
    pair.train.labels.emplace_back(2);
  }
  pair.train.n_classes = 2;
  pair.train.name = std::string(tag) + " train";

  pair.test.points = Matrix(n_test, 1);
  pair.test.labels.reserve(n_test);
  for (int j = 0; j < n_test; ++j) {
    const double x = double(j) / (n_test - 1);
    pair.test.points(j, 0) = x;
    if (x <= lo)
      pair.test.labels.emplace_back(1);
    else if (x >= hi)
      pair.test.labels.emplace_back(2);
    else
      pair.test.labels.push_back(LabelSet{1, 2});
  }
  pair.test.n_classes = 2;
  pair.test.name = std::string(tag) + " test";

  pair.train.validate();
  pair.test.validate();
  return pair;
}

TrainTestPair synth_2d(int m, double delta0, int m_test) {
  if (m < 2)
    throw validation_error("synth_2d: m must be >= 2, got " + std::to_string(m));
  if (!(delta0 > 0.0 && delta0 < 0.8))
    throw validation_error("synth_2d: delta0 must lie in (0,0.8), got " +
                           std::to_string(delta0));
  if (m_test < 2)
    throw validation_error("synth_2d: m_test must be >= 2, got " +
                           std::to_string(m_test));

  const double lo = 0.4 - delta0 / 2;
  const double hi = 0.4 + delta0 / 2;
  const auto center_dist = [](double x, double y) {
    return std::sqrt((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5));
  };

  char tag[96];
  std::snprintf(tag, sizeof tag, "synth-2d(m=%d,delta0=%g)", m, delta0);

  std::vector<double> pts;
  std::vector<LabelSet> labs;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double x = double(i) / (m - 1);
      const double y = double(j) / (m - 1);
      const double r = center_dist(x, y);
      if (r <= lo) {
        pts.push_back(x), pts.push_back(y);
        labs.emplace_back(1);
      } else if (r >= hi) {
        pts.push_back(x), pts.push_back(y);
        labs.emplace_back(2);
      }
      // points strictly inside the band are removed
    }
  }
  TrainTestPair pair;
  pair.train.points = Matrix(pts.size() / 2, 2);
  std::copy(pts.begin(), pts.end(), pair.train.points.data.begin());
  pair.train.labels = std::move(labs);
  pair.train.n_classes = 2;
  pair.train.name = std::string(tag) + " train";

  pair.test.points = Matrix(std::size_t(m_test) * m_test, 2);
  pair.test.labels.reserve(pair.test.points.rows);
  std::size_t row = 0;
  for (int i = 0; i < m_test; ++i) {
    for (int j = 0; j < m_test; ++j, ++row) {
      const double x = double(i) / (m_test - 1);
      const double y = double(j) / (m_test - 1);
      pair.test.points(row, 0) = x;
      pair.test.points(row, 1) = y;
      const double r = center_dist(x, y);
      if (r <= lo)
        pair.test.labels.emplace_back(1);
      else if (r >= hi)
        pair.test.labels.emplace_back(2);
      else
        pair.test.labels.push_back(LabelSet{1, 2});
    }
  }
  pair.test.n_classes = 2;
  pair.test.name = std::string(tag) + " test";

  pair.train.validate();
  pair.test.validate();
  return pair;
}

// ---------------------------------------------------------------------------
// Gaussian process labelings

Matrix cholesky_with_jitter(const Matrix& a, double* jitter_used) {
  if (a.rows != a.cols)
    throw validation_error("cholesky_with_jitter: matrix is " +
                           std::to_string(a.rows) + "x" + std::to_string(a.cols));
  const std::size_t n = a.rows;
  for (double jitter = 1e-10; jitter <= 1e-4 * (1 + 1e-12); jitter *= 10.0) {
    Matrix l(n, n);
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double sum = a(i, j) + (i == j ? jitter : 0.0);
        for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
        if (i == j) {
          if (sum <= 0.0) {
            ok = false;
            break;
          }
          l(i, i) = std::sqrt(sum);
        } else {
          l(i, j) = sum / l(j, j);
        }
      }
    }
    if (ok) {
      if (jitter_used) *jitter_used = jitter;
      return l;
    }
  }
  throw numerical_error(
      "cholesky_with_jitter: matrix not positive definite even with jitter 1e-4");
}

std::vector<double> gp_sample(const Matrix& points, double length_scale,
                              std::mt19937_64& rng) {
  if (!(length_scale > 0.0))
    throw validation_error("gp_sample: length_scale must be > 0");
  if (points.rows == 0) throw validation_error("gp_sample: no points");
  const std::size_t n = points.rows;
  Matrix k(n, n);
  const double inv = 1.0 / (2.0 * length_scale * length_scale);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sq = 0.0;
      for (std::size_t c = 0; c < points.cols; ++c) {
        const double diff = points(i, c) - points(j, c);
        sq += diff * diff;
      }
      const double v = std::exp(-sq * inv);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  const Matrix l = cholesky_with_jitter(k);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> z(n);
  for (double& zi : z) zi = gauss(rng);
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= i; ++j) acc += l(i, j) * z[j];
    g[i] = acc;
  }
  return g;
}

namespace {

LabeledDataset gp_label_points(Matrix points, double length_scale,
                               std::uint64_t seed, const std::string& name) {
  auto rng = make_rng(seed);
  const auto g1 = gp_sample(points, length_scale, rng);
  const auto g2 = gp_sample(points, length_scale, rng);
  LabeledDataset ds;
  ds.labels.reserve(points.rows);
  for (std::size_t i = 0; i < points.rows; ++i)
    ds.labels.emplace_back(g1[i] > g2[i] ? 1 : 2);
  ds.points = std::move(points);
  ds.n_classes = 2;
  ds.name = name;
  ds.validate();
  return ds;
}

}  // namespace

LabeledDataset gp_binary_dataset(int n, double length_scale, std::uint64_t seed) {
  if (n < 2)
    throw validation_error("gp_binary_dataset: n must be >= 2, got " +
                           std::to_string(n));
  Matrix pts(n, 1);
  for (int i = 0; i < n; ++i) pts(i, 0) = double(i) / (n - 1);
  char tag[96];
  std::snprintf(tag, sizeof tag, "gp-1d(n=%d,ell=%g,seed=%llu)", n, length_scale,
                static_cast<unsigned long long>(seed));
  return gp_label_points(std::move(pts), length_scale, seed, tag);
}

TrainTestPair gp_binary_pair(int n_train, int n_test, double length_scale,
                             std::uint64_t seed) {
  if (n_train < 2 || n_test < 1)
    throw validation_error("gp_binary_pair: need n_train >= 2 and n_test >= 1");
  const int total = n_train + n_test;
  char tag[96];
  std::snprintf(tag, sizeof tag, "gp-1d-pair(n=%d+%d,ell=%g,seed=%llu)", n_train,
                n_test, length_scale, static_cast<unsigned long long>(seed));
  Matrix pts(total, 1);
  for (int i = 0; i < total; ++i) pts(i, 0) = double(i) / (total - 1);
  LabeledDataset all = gp_label_points(std::move(pts), length_scale, seed, tag);

  // Spread the test rows evenly through the sorted points so train and test
  // interleave.
  std::vector<bool> is_test(total, false);
  for (int j = 0; j < n_test; ++j)
    is_test[std::size_t((j + 0.5) * total / n_test)] = true;
  // Rounding can land two picks on one index; fill any shortfall from the end.
  int picked = int(std::count(is_test.begin(), is_test.end(), true));
  for (int i = total - 1; picked < n_test && i >= 0; --i)
    if (!is_test[i]) {
      is_test[i] = true;
      ++picked;
    }

  TrainTestPair pair;
  pair.train.points = Matrix(n_train, 1);
  pair.test.points = Matrix(n_test, 1);
  std::size_t tr = 0, te = 0;
  for (int i = 0; i < total; ++i) {
    if (is_test[i]) {
      pair.test.points(te, 0) = all.points(i, 0);
      pair.test.labels.push_back(all.labels[i]);
      ++te;
    } else {
      pair.train.points(tr, 0) = all.points(i, 0);
      pair.train.labels.push_back(all.labels[i]);
      ++tr;
    }
  }
  pair.train.n_classes = pair.test.n_classes = 2;
  pair.train.name = all.name + " train";
  pair.test.name = all.name + " test";
  pair.train.validate();
  pair.test.validate();
  return pair;
}

// ---------------------------------------------------------------------------

LabeledDataset affine_transform(const LabeledDataset& ds, double scale,
                                double shift) {
  ds.validate();
  if (!(scale > 0.0 && scale <= 1.0))
    throw validation_error("affine_transform: scale must lie in (0,1], got " +
                           std::to_string(scale));
  LabeledDataset out = ds;
  out.name = ds.name + "+affine";
  for (std::size_t i = 0; i < out.points.rows; ++i)
    for (std::size_t j = 0; j < out.points.cols; ++j) {
      const double v = scale * ds.points(i, j) + shift;
      if (!(v >= 0.0 && v <= 1.0))
        throw validation_error(
            "affine_transform: row " + std::to_string(i) + " coordinate " +
            std::to_string(j) + " maps to " + std::to_string(v) +
            ", outside [0,1]");
      out.points(i, j) = v;
    }
  return out;
}

LabeledDataset single_label_subset(const LabeledDataset& ds,
                                   std::size_t* n_removed) {
  std::size_t keep = 0;
  for (const auto& s : ds.labels)
    if (s.single()) ++keep;
  if (n_removed) *n_removed = ds.size() - keep;
  LabeledDataset out;
  out.points = Matrix(keep, ds.points.cols);
  out.labels.reserve(keep);
  std::size_t r = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds.labels[i].single()) continue;
    std::copy(ds.points.row(i), ds.points.row(i) + ds.points.cols,
              out.points.row(r));
    out.labels.push_back(ds.labels[i]);
    ++r;
  }
  out.n_classes = ds.n_classes;
  out.name = ds.name + " (single-label)";
  return out;
}

void IdealLabelSpec::validate() const {
  switch (kind) {
    case IdealKind::interval_1d:
      if (n < 4 || n % 2 != 0)
        throw validation_error("interval-1d: n must be even and >= 4");
      if (!(delta0 > 0.0 && delta0 < 1.0))
        throw validation_error("interval-1d: delta0 must lie in (0,1)");
      if (n_test < 2) throw validation_error("interval-1d: n_test must be >= 2");
      break;
    case IdealKind::annulus_2d:
      if (n < 2) throw validation_error("annulus-2d: grid side must be >= 2");
      if (!(delta0 > 0.0 && delta0 < 0.8))
        throw validation_error("annulus-2d: delta0 must lie in (0,0.8)");
      if (n_test < 2)
        throw validation_error("annulus-2d: test grid side must be >= 2");
      break;
    case IdealKind::gp_binary:
      if (n < 2) throw validation_error("gp-binary: n must be >= 2");
      if (n_test < 1) throw validation_error("gp-binary: n_test must be >= 1");
      if (!(length_scale > 0.0))
        throw validation_error("gp-binary: length_scale must be > 0");
      break;
  }
}

TrainTestPair generate(const IdealLabelSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case IdealKind::interval_1d:
      return synth_1d(spec.n, spec.delta0, spec.n_test);
    case IdealKind::annulus_2d:
      return synth_2d(spec.n, spec.delta0, spec.n_test);
    case IdealKind::gp_binary:
    default:
      return gp_binary_pair(spec.n, spec.n_test, spec.length_scale, spec.seed);
  }
}

}  // namespace covercc
