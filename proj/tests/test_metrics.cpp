#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "tailrisk/metrics.hpp"

using namespace tailrisk;
using namespace tailrisk::metrics;

namespace {

struct Sample {
  std::vector<double> scores;
  std::vector<int> labels;
};

Sample random_sample(std::size_t n, std::uint64_t seed, bool ties = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Sample s;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = u(rng) < 0.3 ? 1 : 0;
    double score = 0.4 * y + 0.8 * u(rng);
    if (ties) score = std::round(score * 10.0) / 10.0;
    s.scores.push_back(score);
    s.labels.push_back(y);
  }
  s.labels[0] = 1;
  s.labels[1] = 0;
  return s;
}

// Every distinct score as a cutoff, counted from scratch.
std::vector<RocPoint> brute_force(const Sample& s) {
  std::vector<double> cut(s.scores);
  std::sort(cut.begin(), cut.end(), std::greater<>());
  cut.erase(std::unique(cut.begin(), cut.end()), cut.end());
  const double P = static_cast<double>(std::count(s.labels.begin(), s.labels.end(), 1));
  const double N = static_cast<double>(s.labels.size()) - P;
  std::vector<RocPoint> pts{{0.0, 0.0}};
  for (double c : cut) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < s.scores.size(); ++i)
      if (s.scores[i] >= c) (s.labels[i] ? tp : fp) += 1;
    pts.push_back({fp / N, tp / P});
  }
  return pts;
}

}  // namespace

TEST_CASE("six-point ROC by hand") {
  const std::vector<double> scores{0.9, 0.8, 0.7, 0.6, 0.55, 0.4};
  const std::vector<int> labels{1, 1, 0, 1, 0, 0};
  const RocCurve c = roc_curve(scores, labels);
  const std::vector<std::pair<double, double>> expected{{0, 0},         {0, 1.0 / 3}, {0, 2.0 / 3}, {1.0 / 3, 2.0 / 3},
                                                        {1.0 / 3, 1.0}, {2.0 / 3, 1}, {1, 1}};
  REQUIRE(c.points.size() == expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) {
    CHECK(c.points[k].fpr == doctest::Approx(expected[k].first));
    CHECK(c.points[k].tpr == doctest::Approx(expected[k].second));
  }
  CHECK(auc(c) == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("separating, anti-separating and tied scores") {
  const std::vector<double> s{0.1, 0.2, 0.8, 0.9};
  const RocCurve perfect = roc_curve(s, std::vector<int>{0, 0, 1, 1});
  CHECK(std::any_of(perfect.points.begin(), perfect.points.end(),
                    [](const RocPoint& p) { return p.fpr == 0.0 && p.tpr == 1.0; }));
  CHECK(auc(perfect) == 1.0);
  const RocCurve anti = roc_curve(s, std::vector<int>{1, 1, 0, 0});
  CHECK(std::any_of(anti.points.begin(), anti.points.end(),
                    [](const RocPoint& p) { return p.fpr == 1.0 && p.tpr == 0.0; }));
  CHECK(auc(anti) == 0.0);
  const RocCurve flat = roc_curve(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{1, 0, 1, 0});
  CHECK(flat.points.size() == 2);
  CHECK(auc(flat) == 0.5);
  CHECK_THROWS_AS(roc_curve(s, std::vector<int>{1, 1, 1, 1}), DataError);
  CHECK_THROWS_AS(roc_curve(s, std::vector<int>{1, 0}), DataError);
}

TEST_CASE("ROC matches a brute-force sweep") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Sample s = random_sample(10 + seed * 12, seed, seed % 2 == 0);
    const RocCurve c = roc_curve(s.scores, s.labels);
    const auto ref = brute_force(s);
    REQUIRE(c.points.size() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) {
      CHECK(c.points[k].fpr == ref[k].fpr);
      CHECK(c.points[k].tpr == ref[k].tpr);
    }
  }
}

TEST_CASE("AUC is invariant under strictly increasing maps") {
  const Sample s = random_sample(400, 77);
  const double base = auc(roc_curve(s.scores, s.labels));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int k = 0; k < 100; ++k) {
    const double a = u(rng), b = u(rng), c = u(rng) - 1.5;
    std::vector<double> mapped;
    for (double x : s.scores) {
      switch (k % 3) {
        case 0: mapped.push_back(a * x * x * x + b * x + c); break;
        case 1: mapped.push_back(std::exp(a * x) - c); break;
        default: mapped.push_back(std::atan(a * (x - 0.5)) + c); break;
      }
    }
    CHECK(auc(roc_curve(mapped, s.labels)) == base);
  }
}

TEST_CASE("risk-adjusted area") {
  const Sample s = random_sample(300, 8);
  const RocCurve c = roc_curve(s.scores, s.labels);
  for (double cost : {0.001, 0.5, 3.0}) CHECK(risk_adjusted_area(c, cost, cost) == auc(c));

  const RocCurve perfect = roc_curve(std::vector<double>{0.1, 0.9}, std::vector<int>{0, 1});
  CHECK(risk_adjusted_area(perfect, 2.0, 2.0) == 1.0);
  CHECK(risk_adjusted_area(perfect, 2.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(risk_adjusted_area(c, 0.0, 0.0), DataError);

  double previous = -1.0;
  for (double ct = 0.0; ct <= 4.0; ct += 0.05) {
    const double area = risk_adjusted_area(c, 1.0, ct);
    CHECK(area >= previous);
    CHECK(area >= 0.0);
    CHECK(area <= 1.0);
    previous = area;
  }

  CostMatrix costs;
  costs.cost_false_positive = 0.004;
  costs.cost_true_positive = 0.001;
  const AaucReport rep = risk_adjusted_auc(s.scores, s.labels, costs);
  CHECK(rep.auc == auc(c));
  CHECK(rep.aauc == risk_adjusted_area(c, 0.004, 0.001));
  CHECK(rep.aauc < rep.auc);
}

TEST_CASE("folded metric") {
  const Metric area = [](std::span<const double> s, std::span<const int> y) { return auc(roc_curve(s, y)); };
  // Fold 1 AUC 1, fold 2 AUC 0.5, fold 3 single class.
  const std::vector<double> scores{0.1, 0.9, 0.2, 0.8, 0.5, 0.5, 0.5, 0.5, 0.3, 0.7};
  const std::vector<int> labels{0, 1, 0, 1, 1, 0, 1, 0, 1, 1};
  const std::vector<Fold> folds{{0, 0, 0, 4}, {0, 4, 4, 8}, {0, 8, 8, 10}};
  const FoldedMetric fm = folded_metric(scores, labels, folds, area);
  CHECK(fm.values == std::vector<double>{1.0, 0.5});
  CHECK(fm.mean == 0.75);
  CHECK(fm.variance == doctest::Approx(0.125));
  CHECK(fm.skipped == std::vector<std::size_t>{2});

  const std::vector<Fold> same{{0, 0, 0, 4}, {0, 0, 0, 4}, {0, 0, 0, 4}};
  CHECK(folded_metric(scores, labels, same, area).variance == 0.0);
  const std::vector<Fold> degenerate{{0, 8, 8, 10}};
  CHECK_THROWS_AS(folded_metric(scores, labels, degenerate, area), DataError);
}
