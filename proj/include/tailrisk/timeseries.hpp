#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace tailrisk {

/// Hourly close prices. Timestamps are epoch hours, strictly increasing.
class PriceSeries {
 public:
  PriceSeries(std::vector<std::int64_t> hours, std::vector<double> closes);

  const std::vector<std::int64_t>& timestamps() const noexcept { return hours_; }
  const std::vector<double>& closes() const noexcept { return closes_; }
  std::size_t size() const noexcept { return closes_.size(); }

 private:
  std::vector<std::int64_t> hours_;
  std::vector<double> closes_;
};

/// One-period log-returns. values()[i] = ln(P[i+1]/P[i]), stamped with the
/// timestamp of P[i+1]. The loss series is -values().
class ReturnSeries {
 public:
  ReturnSeries(std::vector<std::int64_t> hours, std::vector<double> values);

  /// Synthetic stamps 1..n, for generated data and tests.
  static ReturnSeries from_values(std::vector<double> values);

  const std::vector<std::int64_t>& timestamps() const noexcept { return hours_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  /// Copy of [begin, end), keeping stamps.
  ReturnSeries slice(std::size_t begin, std::size_t end) const;

 private:
  std::vector<std::int64_t> hours_;
  std::vector<double> values_;
};

/// A series whose entry k applies to return index first + k.
template <class T>
struct Aligned {
  std::size_t first = 0;
  std::vector<T> values;

  std::size_t size() const noexcept { return values.size(); }
  std::size_t end() const noexcept { return first + values.size(); }
  bool covers(std::size_t i) const noexcept { return i >= first && i < end(); }
  const T& at_return(std::size_t i) const { return values.at(i - first); }
};

using ProbabilitySeries = Aligned<double>;
using BinarySeries = Aligned<int>;
using LabelSeries = Aligned<int>;

struct RiskTargetSpec {
  double alpha = 0.01;
  std::size_t window = 24;

  /// Throws DataError/ConfigError when alpha is outside (0, 0.5) or the window
  /// does not fit a series of n returns.
  void validate(std::size_t n) const;
};

/// Rolling historical VaR targets. upper[k] = TVaR^{alpha,w} and lower[k] =
/// TVaR^{1-alpha,w} for return first + k, both computed from the w losses
/// strictly before it. first == window.
struct TvarSeries {
  std::size_t first = 0;
  std::vector<double> upper;
  std::vector<double> lower;

  std::size_t size() const noexcept { return upper.size(); }
  std::size_t end() const noexcept { return first + upper.size(); }
  bool covers(std::size_t i) const noexcept { return i >= first && i < end(); }
  double upper_at(std::size_t i) const { return upper.at(i - first); }
  double lower_at(std::size_t i) const { return lower.at(i - first); }
};

struct CostMatrix {
  std::array<double, 3> class_means{};    // r-bar_i
  std::array<double, 3> class_weights{};  // p-bar_i
  std::array<bool, 3> empty_class{};
  double cost_false_positive = 0.0;  // cF = r0 p0 + r1 p1
  double cost_true_positive = 0.0;   // cT = -r2 p2

  bool any_empty() const noexcept { return empty_class[0] || empty_class[1] || empty_class[2]; }
};

struct Fold {
  std::size_t train_begin = 0, train_end = 0;
  std::size_t test_begin = 0, test_end = 0;
};

namespace ts {

ReturnSeries log_returns(const PriceSeries& prices);

/// 1-based rank of the order statistic used for the level-q loss quantile of a
/// window of w losses: ceil(q * w), clamped to [1, w].
std::size_t quantile_rank(double q, std::size_t w);

/// (upper, lower) thresholds of a single window of losses.
std::pair<double, double> window_thresholds(std::span<const double> losses, double alpha);

/// Sliding sorted-window kernel, chunked across OpenMP workers.
TvarSeries rolling_hist_var(const ReturnSeries& returns, const RiskTargetSpec& spec);
/// Reference: nth_element per window.
TvarSeries rolling_hist_var_serial(const ReturnSeries& returns, const RiskTargetSpec& spec);

/// Threshold pair for the period right after the last return (the live forecast).
std::pair<double, double> next_target(const ReturnSeries& returns, const RiskTargetSpec& spec);

/// Fraction of aligned t with -r_t >= upper_t.
double exceedance_rate(const ReturnSeries& returns, const TvarSeries& tvar);
double exceedance_rate(std::span<const double> returns, std::span<const double> upper);

/// 2 iff -r > upper; 1 iff -r < lower; else 0 (strict inequalities).
LabelSeries make_labels(const ReturnSeries& returns, const TvarSeries& tvar);

/// s_t = 1[-r_{t+1} >= TVaR_{t+1}], stored against the return it hedges.
BinarySeries oracle_signals(const ReturnSeries& returns, const TvarSeries& tvar);

/// Minimum true-positive rate that keeps the hedged exceedance at or below alpha.
double min_tpr(double exceedance, double alpha);

CostMatrix class_costs(const ReturnSeries& returns, const LabelSeries& labels);

/// Expanding-window splits: train [0, k), test [k, k + fold_len).
std::vector<Fold> time_series_folds(std::size_t n, std::size_t fold_len, std::size_t min_train);

}  // namespace ts
}  // namespace tailrisk
