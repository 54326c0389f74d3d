#include <doctest.h>

#include <cmath>
#include <numeric>

#include "../oracles.hpp"
#include "fatiguescope/error.hpp"
#include "fatiguescope/cross_validation.hpp"
#include "fatiguescope/ensemble.hpp"
#include "fatiguescope/estimator.hpp"
#include "fatiguescope/metrics.hpp"
#include "fatiguescope/rng.hpp"
#include "fatiguescope/tree.hpp"

using namespace fatiguescope;
using namespace fatiguescope::model;

namespace {

CueRatings percent_all(double v) {
  CueRatings c;
  c.scale = CueScale::percent_0_100;
  c.values.fill(v);
  return c;
}

FeatureMatrix column(const std::vector<double>& x) {
  FeatureMatrix m(x.size(), 1);
  for (std::size_t i = 0; i < x.size(); ++i) m(i, 0) = x[i];
  return m;
}

std::vector<std::vector<double>> rows_of(const FeatureMatrix& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    out.emplace_back(row.begin(), row.end());
  }
  return out;
}

void check_min_leaf(const RegressionTree& t, std::size_t min_leaf) {
  // a lone root leaf may hold fewer samples than the minimum
  const auto& nodes = t.nodes();
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) CHECK(nodes[i].samples >= min_leaf);
  }
}

struct Synthetic {
  FeatureMatrix x;
  std::vector<double> y;
};

Synthetic linear_data(std::size_t n, std::uint64_t seed, double noise = 1.0) {
  Rng rng(seed);
  Synthetic s{FeatureMatrix(n, 1), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform() * 10;
    s.x(i, 0) = x;
    s.y.push_back(3 * x + noise * rng.normal());
  }
  return s;
}

}  // namespace

TEST_CASE("combined estimator worked values") {
  const CombinedEstimator e;
  CHECK(std::abs(e(percent_all(0)).value() - 44.41) < 1e-9);
  CHECK(std::abs(e(percent_all(100)).value() - 67.21) < 1e-9);
  CHECK(std::abs(e(percent_all(50)).value() - 55.81) < 1e-9);
  auto x1 = percent_all(0);
  x1[Cue::hanging_eyelids] = 100;
  CHECK(std::abs(e(x1).value() - 48.11) < 1e-9);
  CHECK(e.min_output() == doctest::Approx(44.41));
  CHECK(e.max_output() == doctest::Approx(67.21));
}

TEST_CASE("combined estimator is affine and matches the written-out formula") {
  const CombinedEstimator e;
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    CueRatings a = percent_all(0), b = percent_all(0), ab = percent_all(0);
    std::array<double, 8> raw{};
    for (std::size_t i = 0; i < kCueCount; ++i) {
      a.values[i] = rng.uniform() * 50;
      b.values[i] = rng.uniform() * 50;
      ab.values[i] = a.values[i] + b.values[i];
      raw[i] = a.values[i];
    }
    CHECK(std::abs(e.raw(ab) - e.raw(a) - e.raw(b) + e.raw(percent_all(0))) < 1e-9);
    CHECK(std::abs(e.raw(a) - oracle::combined_estimate(raw)) < 1e-9);
  }
}

TEST_CASE("combined estimator rejects the rater scale") {
  CueRatings r;
  CHECK_THROWS_AS(CombinedEstimator{}(r), Error);
  CHECK_THROWS_AS(CombinedEstimator{}(percent_all(101)), Error);
}

TEST_CASE("combine_linear_estimators") {
  const auto same = combine_linear_estimators(std::vector<LinearModel>(8, {0.8, 40}));
  for (double c : same.coefficients) CHECK(c == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(same.intercept == doctest::Approx(40));

  const std::array<double, 8> slopes{0.296, 0.240, 0.328, 0.112, 0.176, 0.264, 0.216, 0.192};
  std::vector<LinearModel> models;
  for (double s : slopes) models.push_back({s, 44.41});
  const auto e = combine_linear_estimators(models);
  const CombinedEstimator def;
  for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(e.coefficients[i] - def.coefficients[i]) < 1e-12);
  CHECK(std::abs(e.intercept - def.intercept) < 1e-12);

  // intercept is order free, coefficients follow positions
  auto rotated = models;
  std::rotate(rotated.begin(), rotated.begin() + 1, rotated.end());
  const auto r = combine_linear_estimators(rotated);
  CHECK(r.intercept == doctest::Approx(e.intercept));
  CHECK(r.coefficients[0] == doctest::Approx(e.coefficients[1]));
  CHECK_THROWS_AS(combine_linear_estimators(std::vector<LinearModel>(7)), Error);
}

TEST_CASE("rescale to percent") {
  CueRatings r;
  r.values.fill(1.0);
  const auto p = rescale_to_percent(r);
  CHECK(p.scale == CueScale::percent_0_100);
  CHECK(CombinedEstimator{}(p).value() == doctest::Approx(50.11).epsilon(1e-12));
}

TEST_CASE("rmse and smape values") {
  const std::vector<double> a{1, 2, 3};
  CHECK(rmse(a, a) == 0.0);
  CHECK(std::abs(rmse(std::vector<double>{3, 4}, std::vector<double>{0, 0}) - std::sqrt(12.5)) < 1e-9);
  CHECK(rmse(std::vector<double>{5, 6, 7}, std::vector<double>{7, 8, 9}) == doctest::Approx(2.0));
  CHECK(smape(a, a) == 0.0);
  CHECK(std::abs(smape(std::vector<double>{2}, std::vector<double>{0}) - 100) < 1e-9);
  CHECK(std::abs(smape(std::vector<double>{1, 3}, std::vector<double>{1, 1}) - 25) < 1e-9);
  CHECK(smape(std::vector<double>{0, 0}, std::vector<double>{0, 0}) == 0.0);
  CHECK_THROWS_AS(rmse(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
  CHECK_THROWS_AS(smape(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST_CASE("smape is symmetric and bounded") {
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> f(5), a(5);
    for (auto& v : f) v = rng.normal() * 30;
    for (auto& v : a) v = rng.normal() * 30;
    const double s = smape(f, a);
    CHECK(s == smape(a, f));
    CHECK((s >= 0.0 && s <= 100.0));
  }
}

TEST_CASE("fit_tree examples") {
  std::vector<double> xs(14), ys(14);
  for (int i = 0; i < 14; ++i) {
    xs[i] = i;
    ys[i] = i < 7 ? 0 : 10;
  }
  const auto x = column(xs);

  SUBCASE("constant target") {
    const auto t = fit_tree(x, std::vector<double>(14, 3.5), {1, 0});
    CHECK(t.leaf_count() == 1);
    CHECK(t.predict(std::vector<double>{4}) == 3.5);
  }
  SUBCASE("min leaf 7 admits the 7/7 split") {
    const auto t = fit_tree(x, ys, {7, 0});
    REQUIRE(t.nodes().size() == 3);
    CHECK(t.nodes()[0].threshold > 6);
    CHECK(t.nodes()[0].threshold < 7);
    CHECK(t.predict(std::vector<double>{0}) == 0);
    CHECK(t.predict(std::vector<double>{13}) == 10);
  }
  SUBCASE("min leaf 8 leaves a single leaf") {
    const auto t = fit_tree(x, ys, {8, 0});
    CHECK(t.leaf_count() == 1);
    CHECK(t.predict(std::vector<double>{0}) == 5);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(fit_tree(FeatureMatrix(), std::vector<double>{}, {}), Error);
    CHECK_THROWS_AS(fit_tree(x, std::vector<double>(13), {}), Error);
  }
}

TEST_CASE("fit_tree agrees with the exhaustive oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 2 + rng.below(25);
    const std::size_t d = 1 + rng.below(3);
    FeatureMatrix x(n, d);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t f = 0; f < d; ++f) x(i, f) = static_cast<double>(rng.below(6));  // repeated values
      y[i] = std::round(rng.normal() * 20) / 4;
    }
    const std::size_t leaf = 1 + rng.below(4);
    const int depth = static_cast<int>(rng.below(4));
    const auto t = fit_tree(x, y, {leaf, depth});
    CHECK(oracle::same_tree(t, oracle::exhaustive_tree(rows_of(x), y, leaf, depth)));
    check_min_leaf(t, leaf);
  }
}

TEST_CASE("tree predictions ignore training row order") {
  Rng rng(8);
  FeatureMatrix x(40, 2);
  std::vector<double> y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    x(i, 0) = static_cast<double>(rng.below(5));
    x(i, 1) = static_cast<double>(rng.below(5));
    y[i] = x(i, 0) + x(i, 1);  // plenty of equal-gain candidates
  }
  const auto base = fit_tree(x, y, {2, 3});
  std::vector<std::size_t> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  for (int t = 0; t < 10; ++t) {
    fisher_yates_shuffle(std::span<std::size_t>(perm), rng);
    FeatureMatrix xp(40, 2);
    std::vector<double> yp(40);
    for (std::size_t i = 0; i < 40; ++i) {
      xp(i, 0) = x(perm[i], 0);
      xp(i, 1) = x(perm[i], 1);
      yp[i] = y[perm[i]];
    }
    CHECK(fit_tree(xp, yp, {2, 3}) == base);
  }
}

TEST_CASE("lsboost memorizes with one full tree") {
  const auto x = column({0.5, 1.5, 2.5});
  const std::vector<double> y{1, 2, 3};
  BoostConfig c;
  c.cycles = 1;
  c.learn_rate = 1.0;
  c.max_depth = 0;
  c.min_leaf_size = 1;
  std::vector<double> curve;
  const auto m = fit_lsboost(x, y, c, &curve);
  CHECK(curve.back() < 1e-12);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(m.predict_raw(x.row(i)) - y[i]) < 1e-9);
}

TEST_CASE("lsboost basics") {
  SUBCASE("constant target") {
    const auto x = column({1, 2, 3, 4, 5});
    const auto m = fit_lsboost(x, std::vector<double>(5, 55.0), BoostConfig{});
    for (double v : {-100.0, 0.0, 3.3, 1e6}) CHECK(m.predict(std::vector<double>{v}).value() == 55.0);
  }
  SUBCASE("no trees predicts the baseline") {
    const EnsembleModel m(BoostConfig{}, 42.0, 0.1, 3, {});
    CHECK(m.predict(std::vector<double>{1, 2, 3}).value() == 42.0);
    CHECK_THROWS_AS(m.predict(std::vector<double>{1, 2}), Error);
  }
  SUBCASE("clamped output, raw output available") {
    const EnsembleModel m(BoostConfig{}, 130.0, 0.1, 1, {});
    CHECK(m.predict(std::vector<double>{0}).value() == 100.0);
    CHECK(m.predict_raw(std::vector<double>{0}) == 130.0);
  }
  SUBCASE("training rmse never rises") {
    const auto s = linear_data(120, 3);
    std::vector<double> curve;
    fit_lsboost(s.x, s.y, BoostConfig{}, &curve);
    REQUIRE(curve.size() == 497);
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] <= curve[i - 1] + 1e-12);
  }
  SUBCASE("leaves respect the minimum") {
    const auto s = linear_data(90, 4);
    const auto m = fit_lsboost(s.x, s.y, BoostConfig{});
    for (const auto& t : m.trees()) check_min_leaf(t, 7);
  }
}

TEST_CASE("bagging") {
  const auto s = linear_data(80, 5);
  BoostConfig c;
  c.method = EnsembleMethod::bag;
  c.cycles = 30;
  c.min_leaf_size = 3;
  c.seed = 9;
  const auto a = fit_ensemble(s.x, s.y, c);
  const auto b = fit_ensemble(s.x, s.y, c);
  CHECK(a.trees() == b.trees());
  CHECK(a.trees().size() == 30);
  CHECK(a.learn_rate() == doctest::Approx(1.0 / 30));
  c.seed = 10;
  CHECK_FALSE(fit_ensemble(s.x, s.y, c).trees() == a.trees());
  const auto pred = a.predict_raw(s.x);
  CHECK(rmse(pred, s.y) < 3.0);
}

TEST_CASE("boost config validation and json") {
  BoostConfig c;
  CHECK_NOTHROW(c.validate());
  c.cycles = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.learn_rate = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.min_leaf_size = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.method = EnsembleMethod::bag;
  c.learn_rate = 0.5;
  CHECK(nlohmann::json(c).get<BoostConfig>() == c);
  CHECK(nlohmann::json::parse("{\"cycles\": 12}").get<BoostConfig>().cycles == 12);
  CHECK_THROWS_AS(parse_method("adaboost"), Error);
}

TEST_CASE("model serialization preserves predictions bit for bit") {
  const auto s = linear_data(60, 6);
  BoostConfig c;
  c.cycles = 40;
  const auto m = fit_lsboost(s.x, s.y, c);
  const auto back = EnsembleModel::from_json(nlohmann::json::parse(m.to_json().dump()));
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> probe{rng.uniform() * 12 - 1};
    CHECK(back.predict_raw(probe) == m.predict_raw(probe));
  }
  CHECK(back.trees() == m.trees());
  auto bad = m.to_json();
  bad["schema"] = "other/9";
  CHECK_THROWS_AS(EnsembleModel::from_json(bad), Error);
}

TEST_CASE("fold assignment") {
  SUBCASE("leave one out") {
    const auto f = assign_folds(6, 6, 1);
    std::vector<std::size_t> sorted = f;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 6; ++i) CHECK(sorted[i] == i);
  }
  SUBCASE("10 samples in 3 folds") {
    const auto f = assign_folds(10, 3, 4);
    std::array<int, 3> sizes{};
    for (auto j : f) ++sizes[j];
    CHECK(sizes == std::array<int, 3>{4, 3, 3});
  }
  SUBCASE("balanced for many shapes") {
    for (std::size_t n = 2; n < 40; ++n) {
      for (std::size_t k = 2; k <= n && k < 12; ++k) {
        const auto f = assign_folds(n, k, n * 31 + k);
        std::vector<std::size_t> sizes(k);
        for (auto j : f) ++sizes[j];
        const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
        CHECK(*hi - *lo <= 1);
      }
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(assign_folds(5, 1, 0), Error);
    CHECK_THROWS_AS(assign_folds(5, 6, 0), Error);
  }
  SUBCASE("seeded") {
    CHECK(assign_folds(30, 5, 8) == assign_folds(30, 5, 8));
    CHECK(assign_folds(30, 5, 8) != assign_folds(30, 5, 9));
  }
}

TEST_CASE("perfect oracle cv equals the full-data metric") {
  const auto s = linear_data(37, 12, 0.0);
  const FitPredict truth = [](const FeatureMatrix&, std::span<const double>, const FeatureMatrix& xv) {
    std::vector<double> out;
    for (std::size_t i = 0; i < xv.rows(); ++i) out.push_back(3 * xv(i, 0));
    return out;
  };
  const Metric m = [](std::span<const double> p, std::span<const double> a) { return rmse(p, a); };
  const auto cv = kfold_cv(s.x, s.y, 5, truth, m, 1);
  CHECK(cv.mean < 1e-12);
  std::vector<double> full;
  for (std::size_t i = 0; i < s.x.rows(); ++i) full.push_back(3 * s.x(i, 0));
  CHECK(std::abs(cv.mean - rmse(full, s.y)) < 1e-12);
  for (std::size_t i = 0; i < s.y.size(); ++i) CHECK(cv.out_of_fold[i] == full[i]);
}
