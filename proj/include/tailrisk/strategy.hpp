#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "tailrisk/econ.hpp"
#include "tailrisk/error.hpp"
#include "tailrisk/timeseries.hpp"

namespace tailrisk::strategy {

inline constexpr double kFeeRate = 0.001;
inline constexpr double kPeriodsPerYear = 8760.0;

/// Invested fraction in [0, 1] for return first + k, decided one period
/// earlier. 1 is fully invested, 0 is out of the market.
using PositionSeries = Aligned<double>;

struct ThresholdChoice {
  double u_star = 1.0;
  bool feasible = true;        // false: no cutoff met the TPR bound, max-TPR fallback used
  double tpr = 0.0;            // train TPR at u_star
  double required_tpr = 0.0;   // min_tpr(exceedance, alpha)
  double excess_return = 0.0;  // sum of (R_t - r_t) over the train range, no fees
};

/// Hedge iff p >= u. Cutoffs: 0, 1 and midpoints between distinct
/// probabilities. Ties in excess return go to the largest cutoff.
ThresholdChoice threshold_select(const ProbabilitySeries& probs, const ReturnSeries& returns, const TvarSeries& tvar,
                                 double alpha);
/// Same search against an explicit TPR bound.
ThresholdChoice threshold_select_with_bound(const ProbabilitySeries& probs, const ReturnSeries& returns,
                                            const TvarSeries& tvar, double required_tpr);

/// position = 0 where p >= u, else 1.
PositionSeries positions_from_probabilities(const ProbabilitySeries& probs, double u);
/// position = 1 - oracle signal.
PositionSeries oracle_positions(const ReturnSeries& returns, const TvarSeries& tvar);

struct SummaryStats {
  std::size_t periods = 0;
  double total_return = 0.0;    // final equity - 1
  double average_return = 0.0;  // mean per period
  double annual_return = 0.0;   // mean * periods_per_year
  double volatility = 0.0;      // sqrt(periods_per_year) * sample stdev
  double sharpe = 0.0;
  double sortino = 0.0;
  bool sortino_infinite = false;  // no negative returns: sortino is +inf
  double max_drawdown = 0.0;
};

/// Largest peak-to-trough fractional decline along the path.
double max_drawdown(std::span<const double> equity);

SummaryStats summary_stats(std::span<const double> strategy_returns, double periods_per_year = kPeriodsPerYear);

struct BacktestReport {
  std::size_t first = 0;  // return index of the first period
  std::vector<std::int64_t> timestamps;
  std::vector<double> positions;
  std::vector<double> strategy_returns;
  std::vector<double> equity;  // after each period, starting from 1
  std::size_t trades = 0;
  double fees = 0.0;
  SummaryStats stats;
};

/// R_t = pos_t r_t - fee |pos_t - pos_{t-1}|, starting flat, equity compounded.
BacktestReport backtest(const PositionSeries& positions, const ReturnSeries& returns, double fee_rate = kFeeRate);

struct ExceedanceCheck {
  double fraction = 0.0;
  bool pass = true;
};

/// Fraction of periods with -R_t >= upper_t, over the periods the target covers.
ExceedanceCheck strategy_exceedance(const BacktestReport& report, const TvarSeries& tvar, double alpha);
ExceedanceCheck strategy_exceedance(std::span<const double> strategy_returns, std::span<const double> upper,
                                    double alpha);

PositionSeries benchmark_buy_hold(const ReturnSeries& returns, std::size_t first);

/// alpha-level one-step loss quantiles of the fitted loss model.
double var_normal(const VolForecast& forecast, double alpha);
double var_evt(const VolForecast& forecast, const GpdParams& gpd, double alpha);

/// min(1, TVaR / VaR-hat) floored at 0; VaR-hat <= 0 gives 1.
double target_var_weight(double var_hat, double tvar);
PositionSeries benchmark_target_var(const Aligned<double>& var_hat, const TvarSeries& tvar);

struct VarspreadOptions {
  std::size_t window = 240;
  double z_crit = 2.0;
};

/// spread = VaR_evt - VaR_norm; out of the market when its z-score over the
/// trailing window (current point included) exceeds z_crit. Fully invested
/// until a full window is available.
PositionSeries benchmark_varspread(const Aligned<double>& var_norm, const Aligned<double>& var_evt,
                                   const VarspreadOptions& options = {});

/// delta = 1 iff the close at the decision time is above the mean of the last
/// n closes (itself included); position = delta ens + (1 - delta) varspread.
/// Fewer than n closes: varspread.
PositionSeries switch_strategy(const PriceSeries& prices, const PositionSeries& ensemble,
                               const PositionSeries& varspread, std::size_t ma_length = 2880);

/// `timestamp,position,strategy_return,equity`
void write_report_csv(const BacktestReport& report, std::ostream& out);

}  // namespace tailrisk::strategy
