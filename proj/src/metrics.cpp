#include "tailrisk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tailrisk::metrics {

RocCurve roc_curve(std::span<const double> scores, std::span<const int> positives) {
  if (scores.size() != positives.size()) throw DataError("roc_curve: scores and labels differ in length");
  RocCurve curve;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw DataError("roc_curve: non-finite score at index " + std::to_string(i));
    (positives[i] != 0 ? curve.positives : curve.negatives) += 1;
  }
  if (curve.positives == 0 || curve.negatives == 0) throw DataError("roc_curve: need both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const double P = static_cast<double>(curve.positives), N = static_cast<double>(curve.negatives);
  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double cutoff = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == cutoff; ++i) (positives[order[i]] != 0 ? tp : fp) += 1;
    curve.cutoffs.push_back(cutoff);
    curve.points.push_back({static_cast<double>(fp) / N, static_cast<double>(tp) / P});
  }
  return curve;
}

RocCurve roc_curve(const ProbabilitySeries& scores, const BinarySeries& positives) {
  const std::size_t begin = std::max(scores.first, positives.first);
  const std::size_t end = std::min(scores.end(), positives.end());
  if (end <= begin) throw DataError("roc_curve: series do not overlap");
  return roc_curve(std::span(scores.values).subspan(begin - scores.first, end - begin),
                   std::span(positives.values).subspan(begin - positives.first, end - begin));
}

double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const RocPoint& a = curve.points[k - 1];
    const RocPoint& b = curve.points[k];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  return area;
}

double risk_adjusted_area(const RocCurve& curve, double cost_false_positive, double cost_true_positive) {
  if (!(cost_false_positive >= 0.0) || !(cost_true_positive >= 0.0))
    throw DataError("risk_adjusted_auc: costs must be non-negative");
  const double m = std::max(cost_false_positive, cost_true_positive);
  if (m == 0.0) throw DataError("risk_adjusted_auc: cF and cT are both zero");
  const double sx = cost_false_positive / m, sy = cost_true_positive / m;
  double area = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const RocPoint& a = curve.points[k - 1];
    const RocPoint& b = curve.points[k];
    area += (b.fpr * sx - a.fpr * sx) * (a.tpr * sy + b.tpr * sy) * 0.5;
  }
  const RocPoint& last = curve.points.back();
  area += (1.0 - last.fpr * sx) * last.tpr * sy;
  return area;
}

AaucReport risk_adjusted_auc(std::span<const double> scores, std::span<const int> positives, const CostMatrix& costs) {
  const RocCurve curve = roc_curve(scores, positives);
  AaucReport out;
  out.cost_false_positive = costs.cost_false_positive;
  out.cost_true_positive = costs.cost_true_positive;
  out.auc = auc(curve);
  out.aauc = risk_adjusted_area(curve, costs.cost_false_positive, costs.cost_true_positive);
  return out;
}

FoldedMetric folded_metric(std::span<const double> scores, std::span<const int> positives,
                           std::span<const Fold> folds, const Metric& metric) {
  if (scores.size() != positives.size()) throw DataError("folded_metric: scores and labels differ in length");
  FoldedMetric out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const Fold& fold = folds[f];
    if (fold.test_end > scores.size() || fold.test_begin >= fold.test_end)
      throw DataError("folded_metric: fold " + std::to_string(f) + " lies outside the series");
    const auto s = scores.subspan(fold.test_begin, fold.test_end - fold.test_begin);
    const auto y = positives.subspan(fold.test_begin, fold.test_end - fold.test_begin);
    const auto pos = std::count_if(y.begin(), y.end(), [](int v) { return v != 0; });
    if (pos == 0 || static_cast<std::size_t>(pos) == y.size()) {
      out.skipped.push_back(f);
      continue;
    }
    out.values.push_back(metric(s, y));
  }
  if (out.values.empty()) throw DataError("folded_metric: every fold holds a single class");
  const double n = static_cast<double>(out.values.size());
  out.mean = std::accumulate(out.values.begin(), out.values.end(), 0.0) / n;
  if (out.values.size() > 1) {
    double ss = 0.0;
    for (double v : out.values) ss += (v - out.mean) * (v - out.mean);
    out.variance = ss / (n - 1.0);
  }
  return out;
}

}  // namespace tailrisk::metrics
