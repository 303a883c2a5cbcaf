#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tailrisk/error.hpp"
#include "tailrisk/timeseries.hpp"

namespace tailrisk::metrics {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Points from (0,0) to (1,1), one per distinct score taken as the cutoff
/// (score >= cutoff is called positive), highest cutoff first.
struct RocCurve {
  std::vector<RocPoint> points;
  std::vector<double> cutoffs;  // cutoffs[k] produces points[k + 1]
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

RocCurve roc_curve(std::span<const double> scores, std::span<const int> positives);
/// On the returns both series cover.
RocCurve roc_curve(const ProbabilitySeries& scores, const BinarySeries& positives);

/// Trapezoidal area under the points as given.
double auc(const RocCurve& curve);

struct AaucReport {
  double auc = 0.0;
  double aauc = 0.0;
  double cost_false_positive = 0.0;
  double cost_true_positive = 0.0;
};

/// Area under (cF FPR / m, cT TPR / m), m = max(cF, cT), extended flat to x = 1.
double risk_adjusted_area(const RocCurve& curve, double cost_false_positive, double cost_true_positive);

AaucReport risk_adjusted_auc(std::span<const double> scores, std::span<const int> positives, const CostMatrix& costs);

using Metric = std::function<double(std::span<const double> scores, std::span<const int> positives)>;

struct FoldedMetric {
  double mean = 0.0;
  double variance = 0.0;  // sample variance across used folds, 0 with one fold
  std::vector<double> values;
  std::vector<std::size_t> skipped;  // folds whose test slice holds a single class
};

/// Metric over each fold's test slice [test_begin, test_end).
FoldedMetric folded_metric(std::span<const double> scores, std::span<const int> positives,
                           std::span<const Fold> folds, const Metric& metric);

}  // namespace tailrisk::metrics
