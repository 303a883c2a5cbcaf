#include "tailrisk/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tailrisk/error.hpp"
#include "tailrisk/parallel.hpp"

namespace tailrisk {

PriceSeries::PriceSeries(std::vector<std::int64_t> hours, std::vector<double> closes)
    : hours_(std::move(hours)), closes_(std::move(closes)) {
  if (hours_.size() != closes_.size())
    throw DataError("price series: " + std::to_string(hours_.size()) + " timestamps vs " +
                    std::to_string(closes_.size()) + " closes");
  if (closes_.size() < 2) throw DataError("price series needs at least 2 closes");
  for (std::size_t i = 0; i < closes_.size(); ++i) {
    if (!(closes_[i] > 0.0) || !std::isfinite(closes_[i]))
      throw DataError("non-positive price at index " + std::to_string(i));
    if (i > 0 && hours_[i] <= hours_[i - 1])
      throw DataError("timestamps not strictly increasing at index " + std::to_string(i));
  }
}

ReturnSeries::ReturnSeries(std::vector<std::int64_t> hours, std::vector<double> values)
    : hours_(std::move(hours)), values_(std::move(values)) {
  if (hours_.size() != values_.size()) throw DataError("return series: timestamp/value length mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw DataError("non-finite return at index " + std::to_string(i));
    if (i > 0 && hours_[i] <= hours_[i - 1])
      throw DataError("return timestamps not strictly increasing at index " + std::to_string(i));
  }
}

ReturnSeries ReturnSeries::from_values(std::vector<double> values) {
  std::vector<std::int64_t> hours(values.size());
  for (std::size_t i = 0; i < hours.size(); ++i) hours[i] = static_cast<std::int64_t>(i) + 1;
  return ReturnSeries(std::move(hours), std::move(values));
}

ReturnSeries ReturnSeries::slice(std::size_t begin, std::size_t end) const {
  end = std::min(end, size());
  begin = std::min(begin, end);
  return ReturnSeries({hours_.begin() + begin, hours_.begin() + end}, {values_.begin() + begin, values_.begin() + end});
}

void RiskTargetSpec::validate(std::size_t n) const {
  if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("alpha must lie in (0, 0.5), got " + std::to_string(alpha));
  if (window < 2) throw ConfigError("window must be >= 2");
  if (window >= n)
    throw DataError("window " + std::to_string(window) + " >= series length " + std::to_string(n));
}

namespace ts {

ReturnSeries log_returns(const PriceSeries& prices) {
  const auto& p = prices.closes();
  std::vector<double> r(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i) r[i - 1] = std::log(p[i] / p[i - 1]);
  return ReturnSeries({prices.timestamps().begin() + 1, prices.timestamps().end()}, std::move(r));
}

std::size_t quantile_rank(double q, std::size_t w) {
  // The 1e-9 guard stops (1 - 0.01) * 100 from rounding up to rank 100.
  const double raw = std::ceil(q * static_cast<double>(w) - 1e-9);
  return static_cast<std::size_t>(std::clamp(raw, 1.0, static_cast<double>(w)));
}

std::pair<double, double> window_thresholds(std::span<const double> losses, double alpha) {
  const std::size_t w = losses.size();
  std::vector<double> sorted(losses.begin(), losses.end());
  std::sort(sorted.begin(), sorted.end());
  return {sorted[quantile_rank(1.0 - alpha, w) - 1], sorted[quantile_rank(alpha, w) - 1]};
}

TvarSeries rolling_hist_var_serial(const ReturnSeries& returns, const RiskTargetSpec& spec) {
  spec.validate(returns.size());
  const std::size_t n = returns.size(), w = spec.window;
  const std::size_t k_up = quantile_rank(1.0 - spec.alpha, w) - 1;
  const std::size_t k_lo = quantile_rank(spec.alpha, w) - 1;
  TvarSeries out;
  out.first = w;
  out.upper.resize(n - w);
  out.lower.resize(n - w);
  std::vector<double> buf(w);
  for (std::size_t t = w; t < n; ++t) {
    for (std::size_t j = 0; j < w; ++j) buf[j] = -returns[t - w + j];
    std::nth_element(buf.begin(), buf.begin() + k_up, buf.end());
    out.upper[t - w] = buf[k_up];
    std::nth_element(buf.begin(), buf.begin() + k_lo, buf.end());
    out.lower[t - w] = buf[k_lo];
  }
  return out;
}

TvarSeries rolling_hist_var(const ReturnSeries& returns, const RiskTargetSpec& spec) {
  spec.validate(returns.size());
  const std::size_t n = returns.size(), w = spec.window;
  const std::size_t k_up = quantile_rank(1.0 - spec.alpha, w) - 1;
  const std::size_t k_lo = quantile_rank(spec.alpha, w) - 1;
  TvarSeries out;
  out.first = w;
  out.upper.resize(n - w);
  out.lower.resize(n - w);
  const auto& r = returns.values();

  const auto chunks = fixed_chunks(n - w, 4096);
  const int workers = worker_count();
#pragma omp parallel for schedule(dynamic) num_threads(workers) if (workers > 1)
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    const auto [lo, hi] = chunks[c];
    // Sorted window of the w losses preceding return w + lo.
    std::vector<double> window(w);
    for (std::size_t j = 0; j < w; ++j) window[j] = -r[lo + j];
    std::sort(window.begin(), window.end());
    for (std::size_t k = lo; k < hi; ++k) {
      if (k > lo) {
        const double leaving = -r[k - 1];
        const double entering = -r[k - 1 + w];
        window.erase(std::lower_bound(window.begin(), window.end(), leaving));
        window.insert(std::upper_bound(window.begin(), window.end(), entering), entering);
      }
      out.upper[k] = window[k_up];
      out.lower[k] = window[k_lo];
    }
  }
  return out;
}

std::pair<double, double> next_target(const ReturnSeries& returns, const RiskTargetSpec& spec) {
  if (spec.window > returns.size()) throw DataError("not enough returns for the next target");
  std::vector<double> losses(spec.window);
  for (std::size_t j = 0; j < spec.window; ++j) losses[j] = -returns[returns.size() - spec.window + j];
  return window_thresholds(losses, spec.alpha);
}

double exceedance_rate(std::span<const double> returns, std::span<const double> upper) {
  if (returns.empty() || returns.size() != upper.size()) throw DataError("exceedance_rate: empty or misaligned input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < returns.size(); ++i) hits += (-returns[i] >= upper[i]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(returns.size());
}

double exceedance_rate(const ReturnSeries& returns, const TvarSeries& tvar) {
  const std::size_t end = std::min(tvar.end(), returns.size());
  if (end <= tvar.first) throw DataError("exceedance_rate: empty overlap");
  return exceedance_rate(std::span(returns.values()).subspan(tvar.first, end - tvar.first),
                         std::span(tvar.upper).first(end - tvar.first));
}

LabelSeries make_labels(const ReturnSeries& returns, const TvarSeries& tvar) {
  const std::size_t end = std::min(tvar.end(), returns.size());
  LabelSeries out;
  out.first = tvar.first;
  for (std::size_t t = tvar.first; t < end; ++t) {
    const double loss = -returns[t];
    int label = 0;
    if (loss > tvar.upper_at(t))
      label = 2;
    else if (loss < tvar.lower_at(t))
      label = 1;
    out.values.push_back(label);
  }
  return out;
}

BinarySeries oracle_signals(const ReturnSeries& returns, const TvarSeries& tvar) {
  const std::size_t end = std::min(tvar.end(), returns.size());
  BinarySeries out;
  out.first = tvar.first;
  for (std::size_t t = tvar.first; t < end; ++t) out.values.push_back(-returns[t] >= tvar.upper_at(t) ? 1 : 0);
  return out;
}

double min_tpr(double exceedance, double alpha) {
  if (!(exceedance > 0.0) || !(alpha > 0.0) || alpha >= exceedance) return 0.0;
  return std::clamp((exceedance - alpha) / exceedance, 0.0, 1.0);
}

CostMatrix class_costs(const ReturnSeries& returns, const LabelSeries& labels) {
  CostMatrix cm;
  std::array<double, 3> sums{};
  std::array<std::size_t, 3> counts{};
  std::size_t total = 0;
  for (std::size_t t = labels.first; t < labels.end() && t < returns.size(); ++t) {
    const int y = labels.at_return(t);
    if (y < 0 || y > 2) throw DataError("label out of range at index " + std::to_string(t));
    sums[y] += returns[t];
    ++counts[y];
    ++total;
  }
  if (total == 0) throw DataError("class_costs: no aligned observations");
  for (int i = 0; i < 3; ++i) {
    cm.empty_class[i] = counts[i] == 0;
    cm.class_means[i] = counts[i] ? sums[i] / static_cast<double>(counts[i]) : 0.0;
    cm.class_weights[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  cm.cost_false_positive = cm.class_means[0] * cm.class_weights[0] + cm.class_means[1] * cm.class_weights[1];
  cm.cost_true_positive = -cm.class_means[2] * cm.class_weights[2];
  return cm;
}

std::vector<Fold> time_series_folds(std::size_t n, std::size_t fold_len, std::size_t min_train) {
  if (fold_len == 0 || min_train == 0 || n < min_train + fold_len)
    throw ConfigError("time_series_folds: need n >= min_train + fold_len with both positive (n=" +
                      std::to_string(n) + ", fold_len=" + std::to_string(fold_len) +
                      ", min_train=" + std::to_string(min_train) + ")");
  std::vector<Fold> folds;
  for (std::size_t k = min_train; k + fold_len <= n; k += fold_len) folds.push_back({0, k, k, k + fold_len});
  return folds;
}

}  // namespace ts
}  // namespace tailrisk
