#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tailrisk/error.hpp"
#include "tailrisk/parallel.hpp"
#include "tailrisk/timeseries.hpp"

using namespace tailrisk;

namespace {

std::vector<double> random_returns(std::size_t n, unsigned seed, double scale = 0.01) {
  std::mt19937_64 rng(seed);
  std::student_t_distribution<double> t(4.0);
  std::vector<double> r(n);
  for (double& v : r) v = scale * t(rng);
  return r;
}

// Sort the w losses before t and pick the order statistic by index.
std::pair<double, double> sort_oracle(const std::vector<double>& r, std::size_t t, std::size_t w, double alpha) {
  std::vector<double> losses;
  for (std::size_t j = t - w; j < t; ++j) losses.push_back(-r[j]);
  std::sort(losses.begin(), losses.end());
  const auto up = static_cast<std::size_t>(std::ceil((1.0 - alpha) * w - 1e-9));
  const auto lo = static_cast<std::size_t>(std::max(1.0, std::ceil(alpha * w - 1e-9)));
  return {losses[up - 1], losses[lo - 1]};
}

}  // namespace

TEST_CASE("log returns") {
  const double e = std::numbers::e;
  auto r = ts::log_returns(PriceSeries({1, 2, 3}, {1.0, e, e * e}));
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.timestamps() == std::vector<std::int64_t>{2, 3});

  r = ts::log_returns(PriceSeries({1, 2, 3}, {5, 5, 5}));
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 0.0);

  r = ts::log_returns(PriceSeries({1, 2, 3}, {100, 105, 99}));
  CHECK(std::abs(r[0] - 0.04879016416943200) < 1e-15);
  CHECK(std::abs(r[1] - (-0.058840500022933465)) < 1e-15);
}

TEST_CASE("price series validation") {
  CHECK_THROWS_AS(PriceSeries({1, 2, 3}, {1.0, 0.0, 2.0}), DataError);
  CHECK_THROWS_WITH(PriceSeries({1, 2, 3}, {1.0, -2.0, 2.0}), doctest::Contains("index 1"));
  CHECK_THROWS_AS(PriceSeries({1, 1}, {1.0, 2.0}), DataError);
  CHECK_THROWS_AS(PriceSeries({1}, {1.0}), DataError);
}

TEST_CASE("rolling VaR: constant losses") {
  const auto r = ReturnSeries::from_values(std::vector<double>(50, -0.02));
  for (double alpha : {0.01, 0.05, 0.25}) {
    const auto tv = ts::rolling_hist_var(r, {alpha, 10});
    for (double u : tv.upper) CHECK(u == 0.02);
    for (double l : tv.lower) CHECK(l == 0.02);
  }
}

TEST_CASE("rolling VaR: four-point window") {
  // Losses 1,2,3,4 then anything; alpha 0.25 -> upper is rank 3, lower rank 1.
  const auto r = ReturnSeries::from_values({-1, -2, -3, -4, 0.5});
  const auto tv = ts::rolling_hist_var(r, {0.25, 4});
  REQUIRE(tv.first == 4);
  REQUIRE(tv.size() == 1);
  const auto expect = sort_oracle(r.values(), 4, 4, 0.25);
  CHECK(tv.upper_at(4) == expect.first);
  CHECK(tv.lower_at(4) == expect.second);
  CHECK(tv.upper_at(4) == 3.0);
  CHECK(tv.lower_at(4) == 1.0);
}

TEST_CASE("rolling VaR matches a per-window sort on 10000 points") {
  const auto values = random_returns(10000, 7);
  const auto r = ReturnSeries::from_values(values);
  for (std::size_t w : {24u, 240u, 2880u}) {
    for (double alpha : {0.01, 0.05, 0.1}) {
      const auto fast = ts::rolling_hist_var(r, {alpha, w});
      const auto slow = ts::rolling_hist_var_serial(r, {alpha, w});
      REQUIRE(fast.first == w);
      REQUIRE(fast.size() == values.size() - w);
      bool all_equal = true;
      for (std::size_t t = w; t < values.size(); ++t) {
        const auto [up, lo] = sort_oracle(values, t, w, alpha);
        all_equal = all_equal && fast.upper_at(t) == up && fast.lower_at(t) == lo && slow.upper_at(t) == up &&
                    slow.lower_at(t) == lo;
      }
      CHECK(all_equal);
    }
  }
}

TEST_CASE("rolling VaR is independent of the worker count") {
  const auto r = ReturnSeries::from_values(random_returns(20000, 11));
  TvarSeries one, four;
  {
    ScopedWorkers guard(1);
    one = ts::rolling_hist_var(r, {0.05, 100});
  }
  {
    ScopedWorkers guard(4);
    four = ts::rolling_hist_var(r, {0.05, 100});
  }
  CHECK(one.upper == four.upper);
  CHECK(one.lower == four.lower);
}

TEST_CASE("rolling VaR: upper >= lower and window checks") {
  const auto r = ReturnSeries::from_values(random_returns(500, 3));
  const auto tv = ts::rolling_hist_var(r, {0.1, 24});
  for (std::size_t k = 0; k < tv.size(); ++k) CHECK(tv.upper[k] >= tv.lower[k]);
  CHECK_THROWS_AS(ts::rolling_hist_var(r, {0.1, 500}), DataError);
  CHECK_THROWS_AS(ts::rolling_hist_var(r, {0.6, 24}), ConfigError);
  CHECK_THROWS_AS(ts::rolling_hist_var(r, {0.1, 1}), ConfigError);
}

TEST_CASE("rolling VaR uses only past data") {
  auto values = random_returns(300, 5);
  const auto base = ts::rolling_hist_var(ReturnSeries::from_values(values), {0.05, 24});
  values[200] = -0.5;  // perturb one return
  const auto moved = ts::rolling_hist_var(ReturnSeries::from_values(values), {0.05, 24});
  for (std::size_t t = 24; t <= 200; ++t) CHECK(base.upper_at(t) == moved.upper_at(t));
  CHECK(moved.upper_at(201) == sort_oracle(values, 201, 24, 0.05).first);
  CHECK(moved.upper_at(201) > base.upper_at(201));
}

TEST_CASE("exceedance rate") {
  TvarSeries tv;
  tv.first = 0;
  tv.upper = {0.1, 0.1, 0.1, 0.1};
  tv.lower = {-0.1, -0.1, -0.1, -0.1};
  CHECK(ts::exceedance_rate(ReturnSeries::from_values({0.0, 0.01, -0.05, 0.2}), tv) == 0.0);
  CHECK(ts::exceedance_rate(ReturnSeries::from_values({-0.2, -0.1, -0.3, -0.15}), tv) == 1.0);
  CHECK(ts::exceedance_rate(ReturnSeries::from_values({-0.1, 0.0, 0.0, 0.0}), tv) == 0.25);

  const auto values = random_returns(3000, 9);
  const auto r = ReturnSeries::from_values(values);
  const auto t2 = ts::rolling_hist_var(r, {0.01, 24});
  std::size_t hits = 0;
  for (std::size_t t = 24; t < values.size(); ++t) hits += -values[t] >= t2.upper_at(t);
  CHECK(ts::exceedance_rate(r, t2) == static_cast<double>(hits) / static_cast<double>(values.size() - 24));

  TvarSeries empty;
  empty.first = 10;
  CHECK_THROWS_AS(ts::exceedance_rate(r.slice(0, 5), empty), DataError);
}

TEST_CASE("labels") {
  TvarSeries tv;
  tv.first = 0;
  tv.upper = {0.05, 0.05, 0.05, 0.05, 0.05};
  tv.lower = {-0.05, -0.05, -0.05, -0.05, -0.05};
  // losses: 0, 0.06, -0.06, 0.05 (boundary), -0.05 (boundary)
  const auto labels = ts::make_labels(ReturnSeries::from_values({0.0, -0.06, 0.06, -0.05, 0.05}), tv);
  CHECK(labels.values == std::vector<int>{0, 2, 1, 0, 0});

  const auto values = random_returns(5000, 13);
  const auto r = ReturnSeries::from_values(values);
  const auto t2 = ts::rolling_hist_var(r, {0.05, 240});
  const auto y = ts::make_labels(r, t2);
  REQUIRE(y.first == 240);
  std::size_t twos = 0;
  for (std::size_t t = 240; t < values.size(); ++t) {
    const double loss = -values[t];
    const int expect = loss > t2.upper_at(t) ? 2 : (loss < t2.lower_at(t) ? 1 : 0);
    CHECK(y.at_return(t) == expect);
    twos += expect == 2;
  }
  // For i.i.d. data P(loss > k-th order statistic of w) = (w - k + 1) / (w + 1).
  const double expected = (240.0 - 228.0 + 1.0) / 241.0;
  const double n = static_cast<double>(y.size());
  const double freq = static_cast<double>(twos) / n;
  CHECK(std::abs(freq - expected) < 3.0 * std::sqrt(expected * (1.0 - expected) / n));
}

TEST_CASE("oracle signals") {
  TvarSeries tv;
  tv.first = 0;
  tv.upper = {0.05, 0.05, 0.05};
  tv.lower = {-0.05, -0.05, -0.05};
  const auto s = ts::oracle_signals(ReturnSeries::from_values({-0.01, -0.05, -0.07}), tv);
  CHECK(s.values == std::vector<int>{0, 1, 1});

  for (unsigned seed = 0; seed < 20; ++seed) {
    const auto values = random_returns(1000, 100 + seed);
    const auto r = ReturnSeries::from_values(values);
    const auto t2 = ts::rolling_hist_var(r, {0.05, 24});
    const auto sig = ts::oracle_signals(r, t2);
    std::vector<double> protected_r, upper;
    for (std::size_t t = sig.first; t < sig.end(); ++t) {
      protected_r.push_back((1 - sig.at_return(t)) * values[t]);
      upper.push_back(t2.upper_at(t));
    }
    // A zero return never breaches a positive target; a non-positive target can be met by a flat position.
    std::size_t breaches = 0;
    for (std::size_t k = 0; k < protected_r.size(); ++k) breaches += -protected_r[k] > std::max(upper[k], 0.0);
    CHECK(breaches == 0);
  }
}

TEST_CASE("min tpr") {
  CHECK(ts::min_tpr(0.045, 0.01) == doctest::Approx(0.7778).epsilon(1e-4));
  CHECK(ts::min_tpr(0.125, 0.10) == doctest::Approx(0.20).epsilon(1e-12));
  CHECK(ts::min_tpr(0.03, 0.03) == 0.0);
  CHECK(ts::min_tpr(0.0, 0.01) == 0.0);
  CHECK(ts::min_tpr(0.01, 0.05) == 0.0);
}

TEST_CASE("class costs") {
  LabelSeries all_zero{0, {0, 0, 0}};
  auto cm = ts::class_costs(ReturnSeries::from_values({0.01, 0.02, -0.01}), all_zero);
  CHECK(cm.class_weights[0] == 1.0);
  CHECK(cm.class_weights[1] == 0.0);
  CHECK(cm.cost_true_positive == 0.0);
  CHECK(cm.empty_class[1]);
  CHECK(cm.empty_class[2]);
  CHECK(cm.any_empty());

  LabelSeries two{0, {0, 2}};
  cm = ts::class_costs(ReturnSeries::from_values({0.03, -0.08}), two);
  CHECK(cm.class_means[0] == 0.03);
  CHECK(cm.class_means[2] == -0.08);
  CHECK(cm.class_weights[0] == 0.5);
  CHECK(cm.class_weights[2] == 0.5);
  CHECK(cm.cost_false_positive == doctest::Approx(0.015));
  CHECK(cm.cost_true_positive == doctest::Approx(0.04));

  const auto values = random_returns(4000, 21);
  const auto r = ReturnSeries::from_values(values);
  const auto y = ts::make_labels(r, ts::rolling_hist_var(r, {0.05, 100}));
  cm = ts::class_costs(r, y);
  CHECK(std::abs(cm.class_weights[0] + cm.class_weights[1] + cm.class_weights[2] - 1.0) < 1e-12);
  CHECK(cm.class_means[2] <= 0.0);
  CHECK(cm.cost_true_positive >= 0.0);
}

TEST_CASE("time-series folds") {
  auto folds = ts::time_series_folds(100, 25, 25);
  REQUIRE(folds.size() == 3);
  CHECK(folds[0].train_end == 25);
  CHECK(folds[1].train_end == 50);
  CHECK(folds[2].train_end == 75);
  CHECK(folds[2].test_end == 100);

  folds = ts::time_series_folds(60, 20, 40);
  CHECK(folds.size() == 1);

  folds = ts::time_series_folds(1000, 37, 100);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    CHECK(folds[f].train_begin == 0);
    CHECK(folds[f].test_begin >= folds[f].train_end);
    if (f > 0) CHECK(folds[f].test_begin >= folds[f - 1].test_end);
  }
  CHECK_THROWS_AS(ts::time_series_folds(40, 20, 30), ConfigError);
  CHECK_THROWS_AS(ts::time_series_folds(100, 0, 30), ConfigError);
}
