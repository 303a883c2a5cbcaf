#include "tailrisk/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "tailrisk/io.hpp"

namespace tailrisk::strategy {

namespace {

struct Range {
  std::size_t begin = 0, end = 0;
};

Range overlap(const ProbabilitySeries& probs, const ReturnSeries& returns, const TvarSeries& tvar) {
  Range r{std::max(probs.first, tvar.first), std::min({probs.end(), tvar.end(), returns.size()})};
  if (r.end <= r.begin) throw DataError("threshold_select: probabilities, returns and targets do not overlap");
  return r;
}

}  // namespace

ThresholdChoice threshold_select_with_bound(const ProbabilitySeries& probs, const ReturnSeries& returns,
                                            const TvarSeries& tvar, double required_tpr) {
  const Range range = overlap(probs, returns, tvar);
  const std::size_t n = range.end - range.begin;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), range.begin);
  std::size_t events = 0;
  for (std::size_t t : order) {
    const double p = probs.at_return(t);
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("threshold_select: probability outside [0, 1] at index " + std::to_string(t));
    events += -returns[t] >= tvar.upper_at(t) ? 1 : 0;
  }
  if (events == 0) throw DataError("threshold_select: no tail event in the training range");
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs.at_return(a) > probs.at_return(b); });

  // Cutoffs from the largest down; each hedges every p >= u.
  struct Candidate {
    double u, tpr, excess;
  };
  std::vector<Candidate> candidates;
  std::size_t hedged = 0, tp = 0;
  double excess = 0.0;
  auto absorb_down_to = [&](double u) {
    while (hedged < n && probs.at_return(order[hedged]) >= u) {
      const std::size_t t = order[hedged++];
      excess -= returns[t];
      tp += -returns[t] >= tvar.upper_at(t) ? 1 : 0;
    }
    candidates.push_back({u, static_cast<double>(tp) / static_cast<double>(events), excess});
  };
  absorb_down_to(1.0);
  for (std::size_t i = 0; i < n;) {
    const double p = probs.at_return(order[i]);
    std::size_t j = i;
    while (j < n && probs.at_return(order[j]) == p) ++j;
    if (j == n) break;
    absorb_down_to(0.5 * (p + probs.at_return(order[j])));
    i = j;
  }
  absorb_down_to(0.0);

  ThresholdChoice out;
  out.required_tpr = required_tpr;
  const Candidate* best = nullptr;
  for (const Candidate& c : candidates)
    if (c.tpr >= required_tpr && (!best || c.excess > best->excess)) best = &c;
  if (!best) {
    out.feasible = false;
    for (const Candidate& c : candidates)
      if (!best || c.tpr > best->tpr) best = &c;
  }
  out.u_star = best->u;
  out.tpr = best->tpr;
  out.excess_return = best->excess;
  return out;
}

ThresholdChoice threshold_select(const ProbabilitySeries& probs, const ReturnSeries& returns, const TvarSeries& tvar,
                                 double alpha) {
  const Range range = overlap(probs, returns, tvar);
  const double exceedance = ts::exceedance_rate(std::span(returns.values()).subspan(range.begin, range.end - range.begin),
                                                std::span(tvar.upper).subspan(range.begin - tvar.first, range.end - range.begin));
  return threshold_select_with_bound(probs, returns, tvar, ts::min_tpr(exceedance, alpha));
}

PositionSeries positions_from_probabilities(const ProbabilitySeries& probs, double u) {
  PositionSeries out;
  out.first = probs.first;
  out.values.reserve(probs.size());
  for (double p : probs.values) out.values.push_back(p >= u ? 0.0 : 1.0);
  return out;
}

PositionSeries oracle_positions(const ReturnSeries& returns, const TvarSeries& tvar) {
  const BinarySeries s = ts::oracle_signals(returns, tvar);
  PositionSeries out;
  out.first = s.first;
  for (int v : s.values) out.values.push_back(v ? 0.0 : 1.0);
  return out;
}

double max_drawdown(std::span<const double> equity) {
  double peak = -std::numeric_limits<double>::infinity(), worst = 0.0;
  for (double e : equity) {
    peak = std::max(peak, e);
    if (peak > 0.0) worst = std::max(worst, (peak - e) / peak);
  }
  return worst;
}

SummaryStats summary_stats(std::span<const double> r, double periods_per_year) {
  if (r.size() < 2) throw DataError("summary_stats: need at least two returns");
  SummaryStats s;
  s.periods = r.size();
  const double n = static_cast<double>(r.size());
  std::vector<double> equity{1.0};
  for (double v : r) equity.push_back(equity.back() * (1.0 + v));
  s.total_return = equity.back() - 1.0;
  s.max_drawdown = max_drawdown(equity);
  s.average_return = std::accumulate(r.begin(), r.end(), 0.0) / n;
  double ss = 0.0, down = 0.0;
  for (double v : r) {
    ss += (v - s.average_return) * (v - s.average_return);
    if (v < 0.0) down += v * v;
  }
  const double stdev = std::sqrt(ss / (n - 1.0));
  const double downside = std::sqrt(down / n);
  const double scale = std::sqrt(periods_per_year);
  s.annual_return = s.average_return * periods_per_year;
  s.volatility = stdev * scale;
  s.sharpe = s.volatility > 0.0 ? s.annual_return / s.volatility : 0.0;
  if (downside > 0.0) {
    s.sortino = s.annual_return / (downside * scale);
  } else {
    s.sortino = std::numeric_limits<double>::infinity();
    s.sortino_infinite = true;
  }
  return s;
}

BacktestReport backtest(const PositionSeries& positions, const ReturnSeries& returns, double fee_rate) {
  if (!(fee_rate >= 0.0)) throw ConfigError("backtest: fee rate must be non-negative");
  if (positions.size() == 0 || positions.end() > returns.size())
    throw DataError("backtest: positions run past the returns (" + std::to_string(positions.end()) + " > " +
                    std::to_string(returns.size()) + ")");
  BacktestReport rep;
  rep.first = positions.first;
  double previous = 0.0, equity = 1.0;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const std::size_t t = positions.first + k;
    const double pos = positions.values[k];
    if (!(pos >= 0.0 && pos <= 1.0)) throw DataError("backtest: position outside [0, 1] at index " + std::to_string(t));
    const double turnover = std::abs(pos - previous);
    const double fee = fee_rate * turnover;
    const double R = pos * returns[t] - fee;
    if (turnover > 0.0) ++rep.trades;
    rep.fees += fee;
    equity *= 1.0 + R;
    rep.timestamps.push_back(returns.timestamps()[t]);
    rep.positions.push_back(pos);
    rep.strategy_returns.push_back(R);
    rep.equity.push_back(equity);
    previous = pos;
  }
  if (rep.strategy_returns.size() >= 2) rep.stats = summary_stats(rep.strategy_returns);
  return rep;
}

ExceedanceCheck strategy_exceedance(std::span<const double> strategy_returns, std::span<const double> upper,
                                    double alpha) {
  ExceedanceCheck out;
  out.fraction = ts::exceedance_rate(strategy_returns, upper);
  out.pass = out.fraction <= alpha;
  return out;
}

ExceedanceCheck strategy_exceedance(const BacktestReport& report, const TvarSeries& tvar, double alpha) {
  const std::size_t begin = std::max(report.first, tvar.first);
  const std::size_t end = std::min(report.first + report.strategy_returns.size(), tvar.end());
  if (end <= begin) throw DataError("strategy_exceedance: report and targets do not overlap");
  return strategy_exceedance(std::span(report.strategy_returns).subspan(begin - report.first, end - begin),
                             std::span(tvar.upper).subspan(begin - tvar.first, end - begin), alpha);
}

PositionSeries benchmark_buy_hold(const ReturnSeries& returns, std::size_t first) {
  if (first >= returns.size()) throw DataError("benchmark_buy_hold: start past the end of the returns");
  return {first, std::vector<double>(returns.size() - first, 1.0)};
}

double var_normal(const VolForecast& forecast, double alpha) {
  return forecast.mu_hat + forecast.sigma_hat * econ::normal_quantile(1.0 - alpha);
}

double var_evt(const VolForecast& forecast, const GpdParams& gpd, double alpha) {
  return forecast.mu_hat + forecast.sigma_hat * econ::evt_quantile(gpd, alpha);
}

double target_var_weight(double var_hat, double tvar) {
  if (!(var_hat > 0.0)) return 1.0;
  return std::clamp(tvar / var_hat, 0.0, 1.0);
}

PositionSeries benchmark_target_var(const Aligned<double>& var_hat, const TvarSeries& tvar) {
  const std::size_t begin = std::max(var_hat.first, tvar.first), end = std::min(var_hat.end(), tvar.end());
  if (end <= begin) throw DataError("benchmark_target_var: forecasts and targets do not overlap");
  PositionSeries out;
  out.first = begin;
  for (std::size_t t = begin; t < end; ++t) out.values.push_back(target_var_weight(var_hat.at_return(t), tvar.upper_at(t)));
  return out;
}

PositionSeries benchmark_varspread(const Aligned<double>& var_norm, const Aligned<double>& var_evt,
                                   const VarspreadOptions& options) {
  if (options.window < 2) throw ConfigError("varspread: window must be at least 2");
  const std::size_t begin = std::max(var_norm.first, var_evt.first), end = std::min(var_norm.end(), var_evt.end());
  if (end <= begin) throw DataError("varspread: VaR series do not overlap");
  std::vector<double> spread;
  for (std::size_t t = begin; t < end; ++t) spread.push_back(var_evt.at_return(t) - var_norm.at_return(t));
  PositionSeries out;
  out.first = begin;
  const std::size_t w = options.window;
  for (std::size_t k = 0; k < spread.size(); ++k) {
    if (k + 1 < w) {
      out.values.push_back(1.0);
      continue;
    }
    const auto win = std::span(spread).subspan(k + 1 - w, w);
    const double mean = std::accumulate(win.begin(), win.end(), 0.0) / static_cast<double>(w);
    double ss = 0.0;
    for (double v : win) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(w - 1));
    const double z = sd > 0.0 ? (spread[k] - mean) / sd : 0.0;
    out.values.push_back(z > options.z_crit ? 0.0 : 1.0);
  }
  return out;
}

PositionSeries switch_strategy(const PriceSeries& prices, const PositionSeries& ensemble,
                               const PositionSeries& varspread, std::size_t ma_length) {
  if (ma_length == 0) throw ConfigError("switch_strategy: moving-average length must be positive");
  const std::size_t begin = std::max(ensemble.first, varspread.first);
  const std::size_t end = std::min(ensemble.end(), varspread.end());
  if (end <= begin) throw DataError("switch_strategy: input positions do not overlap");
  if (end > prices.size()) throw DataError("switch_strategy: positions run past the prices");
  const auto& close = prices.closes();
  PositionSeries out;
  out.first = begin;
  for (std::size_t i = begin; i < end; ++i) {
    // Return i runs from close i to close i + 1; decide on closes up to i.
    const double pe = ensemble.at_return(i), pv = varspread.at_return(i);
    if (i + 1 < ma_length) {
      out.values.push_back(pv);
      continue;
    }
    // close_i > mean  <=>  sum of (close_i - close_j) > 0, exact for flat stretches.
    double gap = 0.0;
    for (std::size_t j = i + 1 - ma_length; j <= i; ++j) gap += close[i] - close[j];
    out.values.push_back(gap > 0.0 ? pe : pv);
  }
  return out;
}

void write_report_csv(const BacktestReport& report, std::ostream& out) {
  out << "timestamp,position,strategy_return,equity\n";
  for (std::size_t k = 0; k < report.strategy_returns.size(); ++k)
    out << io::format_timestamp(report.timestamps[k]) << ',' << io::format_double(report.positions[k]) << ','
        << io::format_double(report.strategy_returns[k]) << ',' << io::format_double(report.equity[k]) << '\n';
}

}  // namespace tailrisk::strategy
