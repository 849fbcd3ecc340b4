#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "covercc/cover.hpp"
#include "covercc/dataset.hpp"
#include "covercc/errors.hpp"
#include "covercc/rng.hpp"
#include "oracles.hpp"

using namespace covercc;
using doctest::Approx;

namespace {

Matrix column(std::initializer_list<double> xs) {
  Matrix m(xs.size(), 1);
  std::size_t i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

Matrix random_points(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix m(rows, cols);
  for (auto& v : m.data) v = unif(rng);
  return m;
}

}  // namespace

TEST_CASE("nn_distances matches a hand computation") {
  const Matrix train = column({0.2, 0.8});
  const Matrix query = column({0.1, 0.5, 0.9});
  const auto nn = nn_distances(train, query);
  REQUIRE(nn.size() == 3);
  CHECK(nn[0] == Approx(0.1));
  CHECK(nn[1] == Approx(0.3));
  CHECK(nn[2] == Approx(0.1));
}

TEST_CASE("nn_distances is bitwise independent of the thread count") {
  auto rng = make_rng(101);
  const Matrix train = random_points(200, 3, rng);
  const Matrix query = random_points(157, 3, rng);
  const auto serial = nn_distances(train, query, 1);
  const auto four = nn_distances(train, query, 4);
  const auto def = nn_distances(train, query);
  CHECK(serial == four);
  CHECK(serial == def);
}

TEST_CASE("nn_distances validates its inputs") {
  const Matrix t = column({0.2});
  CHECK_THROWS_AS(nn_distances(Matrix(0, 1), t), validation_error);
  CHECK_THROWS_AS(nn_distances(t, Matrix(0, 1)), validation_error);
  Matrix wide(1, 2);
  CHECK_THROWS_AS(nn_distances(t, wide), validation_error);
}

TEST_CASE("h_curve counts strictly closer neighbours") {
  const std::vector<double> nn{0.1, 0.3, 0.1};
  const HCurve curve = h_curve(nn, 1, {0.1, 0.2, 0.3, 0.35});
  CHECK(curve.values[0] == Approx(0.0));       // 0.1 < 0.1 is false
  CHECK(curve.values[1] == Approx(2.0 / 3.0));
  CHECK(curve.values[2] == Approx(2.0 / 3.0));  // 0.3 < 0.3 is false
  CHECK(curve.values[3] == Approx(1.0));
  CHECK(curve.dim == 1);

  SUBCASE("radius outside (0, sqrt(d)]") {
    CHECK_THROWS_AS(h_curve(nn, 1, {0.0, 0.5}), validation_error);
    CHECK_THROWS_AS(h_curve(nn, 1, {1.5}), validation_error);
  }
  SUBCASE("radii must increase strictly") {
    CHECK_THROWS_AS(h_curve(nn, 1, {0.5, 0.5}), validation_error);
  }
  SUBCASE("empty inputs") {
    CHECK_THROWS_AS(h_curve({}, 1, {0.5}), validation_error);
    CHECK_THROWS_AS(h_curve(nn, 1, {}), validation_error);
    CHECK_THROWS_AS(h_curve(nn, 0, {0.5}), validation_error);
  }
}

TEST_CASE("default_radii spans (0, sqrt(d)] evenly") {
  const auto r = default_radii(4, 8);
  REQUIRE(r.size() == 8);
  for (std::size_t k = 0; k < 8; ++k) CHECK(r[k] == Approx(0.25 * double(k + 1)));
  CHECK(r.back() == Approx(2.0));

  const auto r1 = default_radii(1, 100);
  CHECK(r1.back() == Approx(1.0));
  CHECK_THROWS_AS(default_radii(0, 10), validation_error);
  CHECK_THROWS_AS(default_radii(1, 0), validation_error);
}

TEST_CASE("total_cover has the claimed closed form") {
  CHECK(total_cover({0.1, 0.3, 0.1}, 1) == Approx(1.0 - 0.5 / 3.0));
  // Distances beyond the cube diameter saturate.
  CHECK(total_cover({5.0}, 1) == Approx(0.0));
  CHECK(total_cover({0.0, 0.0}, 2) == Approx(1.0));
  CHECK_THROWS_AS(total_cover({}, 1), validation_error);
  CHECK_THROWS_AS(total_cover({0.5}, 0), validation_error);
  CHECK_THROWS_AS(total_cover({-0.5}, 1), validation_error);
}

TEST_CASE("total_cover agrees with trapezoid quadrature of h") {
  auto rng = make_rng(202);
  std::uniform_int_distribution<int> dim_pick(1, 3);
  std::uniform_int_distribution<std::size_t> train_n(5, 40), query_n(10, 50);
  for (int rep = 0; rep < 30; ++rep) {
    const int d = dim_pick(rng);
    const Matrix train = random_points(train_n(rng), std::size_t(d), rng);
    const Matrix query = random_points(query_n(rng), std::size_t(d), rng);
    const auto nn = nn_distances(train, query, 1);
    const double closed = total_cover(nn, d);
    const double quad = oracles::total_cover_trapezoid(nn, d, 10000);
    CHECK(std::abs(closed - quad) <= 1e-4);
  }
}

TEST_CASE("class_cover_matrix on a separable hand case") {
  LabeledDataset train;
  train.points = column({0.0, 1.0});
  train.labels = {LabelSet{1}, LabelSet{2}};
  train.n_classes = 2;
  LabeledDataset test;
  test.points = column({0.1, 0.9});
  test.labels = {LabelSet{1}, LabelSet{2}};
  test.n_classes = 2;

  const Matrix mc = class_cover_matrix(train, test);
  CHECK(mc(0, 0) == Approx(0.9));
  CHECK(mc(0, 1) == Approx(0.1));
  CHECK(mc(1, 0) == Approx(0.1));
  CHECK(mc(1, 1) == Approx(0.9));
  CHECK(cover_difference(mc) == Approx(0.8));

  SUBCASE("multi-label rows are rejected") {
    test.labels[0] = LabelSet{1, 2};
    CHECK_THROWS_AS(class_cover_matrix(train, test), validation_error);
  }
  SUBCASE("a class missing on one side is rejected") {
    test.labels = {LabelSet{1}, LabelSet{1}};
    CHECK_THROWS_AS(class_cover_matrix(train, test), validation_error);
  }
  SUBCASE("class count mismatch is rejected") {
    test.n_classes = 3;
    test.labels = {LabelSet{1}, LabelSet{3}};
    CHECK_THROWS_AS(class_cover_matrix(train, test), validation_error);
  }
}

TEST_CASE("cover_difference averages diagonal against off-diagonal") {
  Matrix eye(3, 3);
  for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
  CHECK(cover_difference(eye) == Approx(1.0));

  Matrix m(2, 2);
  m(0, 0) = 0.9;
  m(0, 1) = 0.3;
  m(1, 0) = 0.3;
  m(1, 1) = 0.9;
  CHECK(cover_difference(m) == Approx(0.6));

  CHECK_THROWS_AS(cover_difference(Matrix(1, 1)), validation_error);
  CHECK_THROWS_AS(cover_difference(Matrix(2, 3)), validation_error);
}

TEST_CASE("cover_complexity is (1 - rho) / cd") {
  CHECK(cover_complexity(0.9, 0.6) == Approx(1.0 / 6.0));
  CHECK(cover_complexity(0.9, -0.05) == Approx(-2.0));
  CHECK(cover_complexity(1.0, 0.5) == Approx(0.0));
  CHECK_THROWS_AS(cover_complexity(0.9, 0.0), undefined_error);
  CHECK_THROWS_AS(cover_complexity(1.5, 0.5), validation_error);

  // Published MNIST row: rho = .848, cd = .1053 give CC = 1.442 after
  // rounding to four digits.
  CHECK(std::abs(cover_complexity(0.848, 0.1053) - 1.442) < 2e-3);
}

TEST_CASE("empirical_separation_gap finds the closest cross pair") {
  const TrainTestPair pair = synth_1d(20, 0.1, 5);
  const SepGap gap = empirical_separation_gap(pair.train);
  CHECK(gap.value == Approx(0.1).epsilon(1e-12));
  CHECK_FALSE(gap.coincident);
  CHECK(pair.train.labels[gap.i] != pair.train.labels[gap.j]);
  const double xi = pair.train.points(gap.i, 0);
  const double xj = pair.train.points(gap.j, 0);
  CHECK(std::abs(xi - xj) == Approx(gap.value));

  SUBCASE("coincident points of different classes") {
    LabeledDataset ds;
    ds.points = column({0.3, 0.3, 0.7});
    ds.labels = {LabelSet{1}, LabelSet{2}, LabelSet{2}};
    ds.n_classes = 2;
    const SepGap g = empirical_separation_gap(ds);
    CHECK(g.value == 0.0);
    CHECK(g.coincident);
  }
  SUBCASE("a single represented class is rejected") {
    LabeledDataset ds;
    ds.points = column({0.3, 0.7});
    ds.labels = {LabelSet{1}, LabelSet{1}};
    ds.n_classes = 2;
    CHECK_THROWS_AS(empirical_separation_gap(ds), validation_error);
  }
}

TEST_CASE("h_bound_check reports slack against the cover lower bound") {
  const HCurve curve = h_curve({0.05, 0.1}, 1, {0.2});
  const HBoundCheck check = h_bound_check(curve, 0.9);
  CHECK(check.ok);
  CHECK(check.min_slack == Approx(0.5));
  CHECK(check.worst_radius == Approx(0.2));

  SUBCASE("a curve below the bound fails") {
    HCurve bad;
    bad.radii = {0.5};
    bad.values = {0.0};
    bad.dim = 1;
    const HBoundCheck fail = h_bound_check(bad, 1.0);
    CHECK_FALSE(fail.ok);
    CHECK(fail.min_slack == Approx(-1.0));
    CHECK(fail.worst_radius == Approx(0.5));
  }
  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(h_bound_check(HCurve{}, 0.5), validation_error);
    CHECK_THROWS_AS(h_bound_check(curve, 1.5), validation_error);
  }
}

TEST_CASE("the bound holds on real nearest-neighbour curves") {
  const TrainTestPair pair = synth_1d(10, 0.1, 1000);
  const LabeledDataset test_single = single_label_subset(pair.test);
  const auto nn = nn_distances(pair.train.points, test_single.points, 1);
  const double rho = total_cover(nn, 1);
  const HCurve curve = h_curve(nn, 1, default_radii(1, 100));
  const HBoundCheck check = h_bound_check(curve, rho);
  CHECK(check.ok);
  CHECK(check.min_slack >= -1e-9);
}

TEST_CASE("make_cover_report assembles the full pipeline") {
  const TrainTestPair pair = synth_1d(10, 0.1, 10000);
  const CoverReport rep = make_cover_report(pair.train, pair.test);

  CHECK(rep.dim == 1);
  CHECK(rep.n_classes == 2);
  CHECK(rep.n_train == 10);
  CHECK(rep.n_test == 10000);
  CHECK(rep.n_test_single == 9000);
  CHECK(rep.train_class_counts == std::vector<std::size_t>{5, 5});
  CHECK(rep.test_class_counts == std::vector<std::size_t>{4500, 4500});
  CHECK(rep.rho_T == Approx(0.9718778150037226).epsilon(1e-12));
  CHECK(rep.delta_T == Approx(0.1).epsilon(1e-12));
  REQUIRE(rep.sc.size() == 2);
  CHECK(rep.sc[0] == Approx(rep.mc(0, 0)));
  CHECK(rep.sc[1] == Approx(rep.mc(1, 1)));
  CHECK(rep.cd > 0.0);
  CHECK(rep.cc == Approx((1.0 - rep.rho_T) / rep.cd).epsilon(1e-12));

  SUBCASE("the CC identity holds across generated instances") {
    for (int n : {6, 10, 20}) {
      const TrainTestPair p = synth_1d(n, 0.1, 501);
      const CoverReport r = make_cover_report(p.train, p.test);
      CHECK(r.cc * r.cd == Approx(1.0 - r.rho_T).epsilon(1e-12));
    }
    const TrainTestPair p2 = synth_2d(9, 0.1, 21);
    const CoverReport r2 = make_cover_report(p2.train, p2.test);
    CHECK(r2.cc * r2.cd == Approx(1.0 - r2.rho_T).epsilon(1e-12));
  }
  SUBCASE("multi-label training data is rejected") {
    LabeledDataset bad = pair.train;
    bad.labels[0] = LabelSet{1, 2};
    CHECK_THROWS_AS(make_cover_report(bad, pair.test), validation_error);
  }
}

TEST_CASE("write_h_curve_csv emits r,h rows") {
  const HCurve curve = h_curve({0.1, 0.3, 0.1}, 1, {0.2, 0.35});
  const auto path =
      (std::filesystem::temp_directory_path() / "covercc_hcurve.csv").string();
  write_h_curve_csv(curve, path);

  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "r,h");
  REQUIRE(std::getline(in, line));
  std::istringstream row1(line);
  double r = 0.0, h = 0.0;
  char comma = 0;
  row1 >> r >> comma >> h;
  CHECK(r == Approx(0.2));
  CHECK(h == Approx(2.0 / 3.0));
  REQUIRE(std::getline(in, line));
  CHECK_FALSE(std::getline(in, line));
}
