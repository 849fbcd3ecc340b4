#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "covercc/dataset.hpp"
#include "covercc/errors.hpp"
#include "covercc/rng.hpp"

using namespace covercc;
using doctest::Approx;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

void write_bytes(const std::string& path, const std::vector<unsigned char>& b) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), long(b.size()));
}

void push_be32(std::vector<unsigned char>& b, std::uint32_t v) {
  b.push_back((v >> 24) & 0xff);
  b.push_back((v >> 16) & 0xff);
  b.push_back((v >> 8) & 0xff);
  b.push_back(v & 0xff);
}

}  // namespace

TEST_CASE("LabelSet sorts, deduplicates and answers membership") {
  const LabelSet ls{3, 1, 3, 2};
  CHECK(ls.size() == 3);
  CHECK(ls.values() == std::vector<Label>{1, 2, 3});
  CHECK(ls.contains(2));
  CHECK_FALSE(ls.contains(4));
  CHECK_FALSE(ls.single());

  const LabelSet single{7};
  CHECK(single.single());
  CHECK(single.only() == 7);

  const LabelSet from = LabelSet::from_values({5, 5, 4});
  CHECK(from.values() == std::vector<Label>{4, 5});
}

TEST_CASE("LabeledDataset::validate rejects broken invariants") {
  LabeledDataset ds;
  ds.points = Matrix(2, 1);
  ds.points(0, 0) = 0.2;
  ds.points(1, 0) = 0.8;
  ds.labels = {LabelSet{1}, LabelSet{2}};
  ds.n_classes = 2;
  CHECK_NOTHROW(ds.validate());

  SUBCASE("coordinate outside the unit cube") {
    ds.points(1, 0) = 1.5;
    CHECK_THROWS_AS(ds.validate(), validation_error);
  }
  SUBCASE("label outside 1..K") {
    ds.labels[0] = LabelSet{3};
    CHECK_THROWS_AS(ds.validate(), validation_error);
  }
  SUBCASE("label row count mismatch") {
    ds.labels.pop_back();
    CHECK_THROWS_AS(ds.validate(), validation_error);
  }
  SUBCASE("empty label set") {
    ds.labels[0] = LabelSet{};
    CHECK_THROWS_AS(ds.validate(), validation_error);
  }
}

TEST_CASE("synth_1d places the two classes around the separation band") {
  const TrainTestPair pair = synth_1d(4, 0.1, 5);

  REQUIRE(pair.train.size() == 4);
  CHECK(pair.train.points(0, 0) == Approx(0.0));
  CHECK(pair.train.points(1, 0) == Approx(0.45));
  CHECK(pair.train.points(2, 0) == Approx(0.55));
  CHECK(pair.train.points(3, 0) == Approx(1.0));
  CHECK(pair.train.labels[0] == LabelSet{1});
  CHECK(pair.train.labels[1] == LabelSet{1});
  CHECK(pair.train.labels[2] == LabelSet{2});
  CHECK(pair.train.labels[3] == LabelSet{2});

  // Test tags follow the ideal labeling; the open band carries both labels.
  REQUIRE(pair.test.size() == 5);
  CHECK(pair.test.labels[0] == LabelSet{1});   // 0.00
  CHECK(pair.test.labels[1] == LabelSet{1});   // 0.25
  CHECK(pair.test.labels[2] == LabelSet{1, 2});  // 0.50
  CHECK(pair.test.labels[3] == LabelSet{2});   // 0.75
  CHECK(pair.test.labels[4] == LabelSet{2});   // 1.00
}

TEST_CASE("synth_1d rejects bad parameters") {
  CHECK_THROWS_AS(synth_1d(5, 0.1, 10), validation_error);   // odd n
  CHECK_THROWS_AS(synth_1d(2, 0.1, 10), validation_error);   // too small
  CHECK_THROWS_AS(synth_1d(10, 0.0, 10), validation_error);  // empty band
  CHECK_THROWS_AS(synth_1d(10, 1.0, 10), validation_error);
  CHECK_THROWS_AS(synth_1d(10, 0.1, 1), validation_error);
}

TEST_CASE("synth_2d labels by distance from the center and removes the band") {
  SUBCASE("2x2 grid corners all land outside the outer radius") {
    const TrainTestPair pair = synth_2d(2, 0.1, 3);
    REQUIRE(pair.train.size() == 4);
    for (const auto& ls : pair.train.labels) CHECK(ls == LabelSet{2});

    REQUIRE(pair.test.size() == 9);
    for (std::size_t r = 0; r < 9; ++r) {
      const double dx = pair.test.points(r, 0) - 0.5;
      const double dy = pair.test.points(r, 1) - 0.5;
      const double dist = std::sqrt(dx * dx + dy * dy);
      if (dist == 0.0)
        CHECK(pair.test.labels[r] == LabelSet{1});
      else
        CHECK(pair.test.labels[r] == LabelSet{2});
    }
  }

  SUBCASE("no training point survives strictly inside the band") {
    const TrainTestPair pair = synth_2d(21, 0.2, 2);
    const double lo = 0.4 - 0.2 / 2;
    const double hi = 0.4 + 0.2 / 2;
    for (std::size_t r = 0; r < pair.train.size(); ++r) {
      const double dx = pair.train.points(r, 0) - 0.5;
      const double dy = pair.train.points(r, 1) - 0.5;
      const double dist = std::sqrt(dx * dx + dy * dy);
      CHECK((dist <= lo || dist >= hi));
      if (dist <= lo)
        CHECK(pair.train.labels[r] == LabelSet{1});
      else
        CHECK(pair.train.labels[r] == LabelSet{2});
    }
  }
}

TEST_CASE("CSV round trip preserves points and multi-label rows") {
  LabeledDataset ds;
  ds.points = Matrix(3, 2);
  ds.points(0, 0) = 0.125;
  ds.points(0, 1) = 1.0;
  ds.points(1, 0) = 0.1 + 0.2;  // not exactly representable, exercises %.17g
  ds.points(1, 1) = 0.0;
  ds.points(2, 0) = 0.5;
  ds.points(2, 1) = 0.5;
  ds.labels = {LabelSet{1}, LabelSet{2}, LabelSet{1, 2}};
  ds.n_classes = 2;

  const std::string path = temp_path("covercc_roundtrip.csv");
  save_csv_dataset(ds, path);
  const CsvDataset loaded = load_csv_dataset(path, 2);

  CHECK_FALSE(loaded.norm.applied);
  REQUIRE(loaded.data.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(loaded.data.points(i, 0) == ds.points(i, 0));
    CHECK(loaded.data.points(i, 1) == ds.points(i, 1));
    CHECK(loaded.data.labels[i] == ds.labels[i]);
  }
}

TEST_CASE("CSV loader derives min-max normalization and reapplies it") {
  const std::string train_path = temp_path("covercc_norm_train.csv");
  const std::string test_path = temp_path("covercc_norm_test.csv");
  write_text(train_path, "0,10,1\n4,20,1\n8,30,2\n");
  write_text(test_path, "4,25,2\n");

  const CsvDataset train = load_csv_dataset(train_path, 2);
  REQUIRE(train.norm.applied);
  CHECK(train.norm.lo == std::vector<double>{0.0, 10.0});
  CHECK(train.norm.hi == std::vector<double>{8.0, 30.0});
  CHECK(train.data.points(1, 0) == Approx(0.5));
  CHECK(train.data.points(2, 1) == Approx(1.0));

  const CsvDataset test = load_csv_dataset(test_path, 2, train.norm);
  CHECK(test.data.points(0, 0) == Approx(0.5));
  CHECK(test.data.points(0, 1) == Approx(0.75));
}

TEST_CASE("CSV loader skips a header row and reports parse errors by line") {
  const std::string path = temp_path("covercc_header.csv");
  write_text(path, "x1,x2,label\n0.1,0.2,1\n0.3,0.4,2\n");
  const CsvDataset ds = load_csv_dataset(path, 2);
  CHECK(ds.data.size() == 2);

  SUBCASE("bad number carries its line number") {
    write_text(path, "0.1,0.2,1\n0.3,0.4,2\n0.5,oops,1\n");
    try {
      load_csv_dataset(path, 2);
      FAIL("expected parse_error");
    } catch (const parse_error& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("ragged row is rejected") {
    write_text(path, "0.1,0.2,1\n0.3,2\n");
    CHECK_THROWS_AS(load_csv_dataset(path, 2), parse_error);
  }
  SUBCASE("label outside 1..K is rejected") {
    write_text(path, "0.1,0.2,7\n");
    CHECK_THROWS_AS(load_csv_dataset(path, 2), validation_error);
  }
  SUBCASE("non-numeric label token is a parse error") {
    write_text(path, "0.1,0.2,banana\n");
    CHECK_THROWS_AS(load_csv_dataset(path, 2), parse_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_csv_dataset(temp_path("covercc_nope.csv"), 2),
                    validation_error);
  }
}

TEST_CASE("IDX loader reads a well-formed pair and rejects broken files") {
  const std::string img_path = temp_path("covercc_images.idx");
  const std::string lab_path = temp_path("covercc_labels.idx");

  std::vector<unsigned char> img;
  push_be32(img, 0x00000803);
  push_be32(img, 2);  // 2 images
  push_be32(img, 2);  // rows
  push_be32(img, 2);  // cols
  for (unsigned char v : {0, 51, 102, 153, 204, 255, 0, 255}) img.push_back(v);

  std::vector<unsigned char> lab;
  push_be32(lab, 0x00000801);
  push_be32(lab, 2);
  lab.push_back(0);
  lab.push_back(1);

  write_bytes(img_path, img);
  write_bytes(lab_path, lab);

  const LabeledDataset ds = load_idx_pair(img_path, lab_path);
  REQUIRE(ds.size() == 2);
  CHECK(ds.dim() == 4);
  CHECK(ds.points(0, 0) == Approx(0.0));
  CHECK(ds.points(0, 1) == Approx(51.0 / 255.0));
  CHECK(ds.points(1, 1) == Approx(1.0));
  CHECK(ds.labels[0] == LabelSet{1});
  CHECK(ds.labels[1] == LabelSet{2});
  CHECK(ds.n_classes == 2);

  SUBCASE("bad image magic names the file") {
    auto broken = img;
    broken[3] = 0x07;
    write_bytes(img_path, broken);
    try {
      load_idx_pair(img_path, lab_path);
      FAIL("expected format_error");
    } catch (const format_error& e) {
      CHECK(std::string(e.what()).find(img_path) != std::string::npos);
    }
  }
  SUBCASE("count mismatch between images and labels") {
    auto short_lab = lab;
    short_lab[7] = 1;  // claims one label
    short_lab.pop_back();
    write_bytes(lab_path, short_lab);
    CHECK_THROWS_AS(load_idx_pair(img_path, lab_path), format_error);
  }
  SUBCASE("truncated image payload") {
    auto truncated = img;
    truncated.pop_back();
    write_bytes(img_path, truncated);
    CHECK_THROWS_AS(load_idx_pair(img_path, lab_path), format_error);
  }
}

TEST_CASE("gp_binary_dataset is deterministic per seed") {
  const LabeledDataset a = gp_binary_dataset(64, 0.2, 7);
  const LabeledDataset b = gp_binary_dataset(64, 0.2, 7);
  REQUIRE(a.size() == b.size());
  CHECK(a.points.data == b.points.data);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.labels[i] == b.labels[i]);
}

TEST_CASE("a huge length scale yields one constant label") {
  // With correlations this strong both draws are essentially constant
  // functions, so one of them dominates everywhere.
  const LabeledDataset ds = gp_binary_dataset(50, 1000.0, 3);
  for (std::size_t i = 1; i < ds.size(); ++i)
    CHECK(ds.labels[i] == ds.labels[0]);
}

TEST_CASE("gp_binary_pair interleaves and preserves the shared labeling") {
  const TrainTestPair pair = gp_binary_pair(6, 3, 0.2, 11);
  CHECK(pair.train.size() == 6);
  CHECK(pair.test.size() == 3);

  // All nine points come from the same equispaced set.
  const LabeledDataset all = [] {
    Matrix pts(9, 1);
    for (int i = 0; i < 9; ++i) pts(i, 0) = double(i) / 8.0;
    LabeledDataset ds;
    ds.points = std::move(pts);
    return ds;
  }();
  std::vector<double> seen;
  for (std::size_t i = 0; i < 6; ++i) seen.push_back(pair.train.points(i, 0));
  for (std::size_t i = 0; i < 3; ++i) seen.push_back(pair.test.points(i, 0));
  std::sort(seen.begin(), seen.end());
  for (int i = 0; i < 9; ++i) CHECK(seen[std::size_t(i)] == Approx(all.points(i, 0)));

  SUBCASE("an even train/test split alternates rows") {
    const TrainTestPair even = gp_binary_pair(5, 5, 0.2, 11);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(even.train.points(i, 0) == Approx(double(2 * i) / 9.0));
      CHECK(even.test.points(i, 0) == Approx(double(2 * i + 1) / 9.0));
    }
  }
}

TEST_CASE("cholesky_with_jitter reconstructs and escalates") {
  SUBCASE("identity needs only the smallest jitter") {
    Matrix eye(3, 3);
    for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
    double jitter = 0.0;
    const Matrix l = cholesky_with_jitter(eye, &jitter);
    CHECK(jitter == Approx(1e-10));
    for (int i = 0; i < 3; ++i) CHECK(l(i, i) == Approx(std::sqrt(1.0 + jitter)));
  }

  SUBCASE("L L^T reproduces a random SPD matrix") {
    auto rng = make_rng(42);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Matrix a(4, 4);
    for (auto& v : a.data) v = unif(rng);
    Matrix spd(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = i == j ? 0.5 : 0.0;
        for (int k = 0; k < 4; ++k) s += a(i, k) * a(j, k);
        spd(i, j) = s;
      }
    double jitter = 0.0;
    const Matrix l = cholesky_with_jitter(spd, &jitter);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += l(i, k) * l(j, k);
        const double target = spd(i, j) + (i == j ? jitter : 0.0);
        CHECK(s == Approx(target).epsilon(1e-9));
      }
  }

  SUBCASE("an indefinite matrix exhausts the ladder") {
    Matrix bad(2, 2);
    bad(0, 0) = 1.0;
    bad(0, 1) = 2.0;
    bad(1, 0) = 2.0;
    bad(1, 1) = 1.0;
    CHECK_THROWS_AS(cholesky_with_jitter(bad), numerical_error);
  }
}

TEST_CASE("affine_transform scales into the cube and rejects escapes") {
  const TrainTestPair pair = synth_1d(4, 0.1, 5);
  const LabeledDataset shrunk = affine_transform(pair.train, 0.5, 0.25);
  CHECK(shrunk.points(0, 0) == Approx(0.25));
  CHECK(shrunk.points(3, 0) == Approx(0.75));
  CHECK(shrunk.labels == pair.train.labels);

  CHECK_THROWS_AS(affine_transform(pair.train, 1.0, 0.5), validation_error);
  CHECK_THROWS_AS(affine_transform(pair.train, 0.0, 0.5), validation_error);
  CHECK_THROWS_AS(affine_transform(pair.train, 1.5, 0.0), validation_error);
}

TEST_CASE("single_label_subset drops exactly the multi-label rows") {
  const TrainTestPair pair = synth_1d(4, 0.1, 11);
  std::size_t removed = 0;
  const LabeledDataset single = single_label_subset(pair.test, &removed);
  CHECK(single.size() + removed == pair.test.size());
  for (const auto& ls : single.labels) CHECK(ls.single());
  CHECK(removed == 1);  // only x = 0.5 sits strictly inside the band
}

TEST_CASE("generate dispatches on the ideal labeling kind") {
  IdealLabelSpec spec;
  spec.kind = IdealKind::interval_1d;
  spec.n = 10;
  spec.n_test = 101;
  CHECK(generate(spec).train.dim() == 1);

  spec.kind = IdealKind::annulus_2d;
  spec.n = 8;
  spec.n_test = 9;
  CHECK(generate(spec).train.dim() == 2);

  spec.kind = IdealKind::gp_binary;
  spec.n = 12;
  spec.n_test = 5;
  spec.seed = 1;
  const TrainTestPair gp = generate(spec);
  CHECK(gp.train.size() == 12);
  CHECK(gp.test.size() == 5);

  SUBCASE("invalid sizes are rejected up front") {
    spec.kind = IdealKind::interval_1d;
    spec.n = 3;
    CHECK_THROWS_AS(generate(spec), validation_error);
  }
}
