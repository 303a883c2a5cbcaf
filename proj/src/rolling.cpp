#include "tailrisk/rolling.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "tailrisk/parallel.hpp"
#include "tailrisk/strategy.hpp"

namespace tailrisk::rolling {
namespace {

std::vector<double> losses_of(const ReturnSeries& returns) {
  std::vector<double> out(returns.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -returns[i];
  return out;
}

// Runs fit(k) for every refit point k >= 1 (point 0 is the anchor, already
// fitted). Failed refits reuse the previous parameters.
template <class Refit, class Fit>
std::vector<Refit> run_refits(const std::vector<std::size_t>& points, Refit anchor, bool parallel, Fit fit) {
  const std::size_t n = points.size();
  std::vector<std::optional<Refit>> slots(n);
  std::vector<std::string> errors(n);
  slots[0] = std::move(anchor);
  const auto one = [&](std::size_t k) {
    try {
      slots[k] = fit(points[k]);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  };
  const auto count = static_cast<long long>(n);
  if (parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (long long k = 1; k < count; ++k) one(static_cast<std::size_t>(k));
  } else {
    for (long long k = 1; k < count; ++k) one(static_cast<std::size_t>(k));
  }
  std::vector<Refit> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (slots[k]) {
      out.push_back(std::move(*slots[k]));
      continue;
    }
    Refit carried = out.back();
    carried.decision = points[k];
    carried.carried = true;
    out.push_back(std::move(carried));
  }
  return out;
}

template <class Refit>
const Refit& latest(const std::vector<Refit>& refits, std::size_t t) {
  const auto it = std::upper_bound(refits.begin(), refits.end(), t,
                                   [](std::size_t v, const Refit& r) { return v < r.decision; });
  if (it == refits.begin()) throw DataError("no fit precedes return " + std::to_string(t));
  return *(it - 1);
}

void check_forecast_range(std::size_t begin, std::size_t end, const ReturnSeries& returns, const TvarSeries& tvar) {
  if (end > returns.size()) throw DataError("forecast range runs past the returns");
  if (begin < tvar.first || end > tvar.end()) throw DataError("forecast range is not covered by the targets");
}

ArmaGarchParams qmle_or_best(std::span<const double> window, const ArmaGarchOrders& orders,
                             const ArmaGarchParams* init) {
  try {
    return econ::qmle_fit(window, orders, init).params;
  } catch (const FitFailure& e) {
    return ArmaGarchParams::from_vector(orders, e.best());
  }
}

GarchRefit garch_refit(std::span<const double> losses, std::size_t d, std::size_t w, const ArmaGarchOrders& orders,
                       const ArmaGarchParams* init) {
  const auto window = losses.subspan(d - w, w);
  GarchRefit r;
  r.decision = d;
  r.params = qmle_or_best(window, orders, init);
  const auto filtered = econ::garch_filter(r.params, window, econ::sample_variance(window));
  std::vector<double> z(w);
  for (std::size_t i = 0; i < w; ++i) z[i] = filtered.eps[i] / std::sqrt(filtered.sigma2[i]);
  r.gpd = econ::gpd_fit(z);
  return r;
}

GarchPath garch_path(const ReturnSeries& returns, const Schedule& schedule, const ArmaGarchOrders& orders,
                     bool parallel) {
  schedule.validate(returns.size());
  const auto losses = losses_of(returns);
  const std::span<const double> all(losses);
  const auto points = schedule.refit_points();
  const std::size_t w = schedule.fit_window;
  GarchRefit anchor = garch_refit(all, points.front(), w, orders, nullptr);
  const ArmaGarchParams start = anchor.params;
  GarchPath path;
  path.orders = orders;
  path.fit_window = w;
  path.refits = run_refits(points, std::move(anchor), parallel,
                           [&](std::size_t d) { return garch_refit(all, d, w, orders, &start); });
  return path;
}

LpaRefit lpa_refit(std::span<const double> losses, std::size_t d, const econ::LpaOptions& options) {
  const std::size_t span = std::min(d, options.max_length);
  econ::LpaOptions local = options;
  local.seed = derive_seed(options.seed, d);
  const auto interval = econ::lpa_select_interval_serial(losses.subspan(d - span, span), span - 1, local);
  LpaRefit r;
  r.decision = d;
  r.start = d - span + interval.start;
  r.params = interval.params;
  return r;
}

LpaPath lpa_path(const ReturnSeries& returns, const Schedule& schedule, const econ::LpaOptions& options,
                 bool parallel) {
  schedule.validate(returns.size());
  if (schedule.begin < options.min_length)
    throw DataError("lpa: first refit at return " + std::to_string(schedule.begin) + " has fewer than " +
                    std::to_string(options.min_length) + " returns before it");
  const auto losses = losses_of(returns);
  const std::span<const double> all(losses);
  const auto points = schedule.refit_points();
  LpaPath path;
  path.options = options;
  path.refits = run_refits(points, lpa_refit(all, points.front(), options), parallel,
                           [&](std::size_t d) { return lpa_refit(all, d, options); });
  return path;
}

CarlRefit carl_refit(const ReturnSeries& returns, const TvarSeries& tvar, std::size_t d, std::size_t w,
                     const CarlVolParams* init) {
  CarlRefit r;
  r.decision = d;
  r.threshold_q = -tvar.upper_at(d);
  r.params = econ::carlvol_fit(std::span<const double>(returns.values()).subspan(d - w, w), r.threshold_q, init);
  return r;
}

CarlPath carl_path(const ReturnSeries& returns, const TvarSeries& tvar, const Schedule& schedule, bool parallel) {
  schedule.validate(returns.size());
  check_forecast_range(schedule.begin, schedule.end, returns, tvar);
  const auto points = schedule.refit_points();
  const std::size_t w = schedule.fit_window;
  CarlRefit anchor = carl_refit(returns, tvar, points.front(), w, nullptr);
  const CarlVolParams start = anchor.params;
  CarlPath path;
  path.fit_window = w;
  path.refits = run_refits(points, std::move(anchor), parallel,
                           [&](std::size_t d) { return carl_refit(returns, tvar, d, w, &start); });
  return path;
}

}  // namespace

std::vector<std::size_t> Schedule::refit_points() const {
  std::vector<std::size_t> out;
  for (std::size_t t = begin; t < end; t += refit_every) out.push_back(t);
  return out;
}

void Schedule::validate(std::size_t returns) const {
  if (refit_every == 0) throw ConfigError("refit cadence must be positive");
  if (fit_window < 2) throw ConfigError("fit window must hold at least 2 returns");
  if (end <= begin) throw DataError("empty forecast range");
  if (end > returns) throw DataError("forecast range runs past the returns");
  if (begin < fit_window)
    throw DataError("first forecast at return " + std::to_string(begin) + " has fewer than " +
                    std::to_string(fit_window) + " returns before it");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

GarchPath fit_garch_path(const ReturnSeries& returns, const Schedule& schedule, const ArmaGarchOrders& orders) {
  return garch_path(returns, schedule, orders, true);
}

GarchPath fit_garch_path_serial(const ReturnSeries& returns, const Schedule& schedule,
                                const ArmaGarchOrders& orders) {
  return garch_path(returns, schedule, orders, false);
}

GarchForecasts garch_forecasts(const GarchPath& path, const ReturnSeries& returns, const TvarSeries& tvar,
                               double alpha, std::size_t end) {
  if (path.refits.empty()) throw DataError("garch path has no fits");
  const std::size_t begin = path.refits.front().decision, w = path.fit_window;
  check_forecast_range(begin, end, returns, tvar);
  const auto losses = losses_of(returns);
  GarchForecasts out;
  out.p_normal.first = out.p_evt.first = out.var_normal.first = out.var_evt.first = begin;
  for (std::size_t t = begin; t < end; ++t) {
    const GarchRefit& fit = latest(path.refits, t);
    const std::span<const double> history(losses.data() + t - w, w);
    const VolForecast f = econ::forecast(fit.params, history, econ::sample_variance(history));
    out.p_normal.values.push_back(econ::exceedance_prob_normal(f, tvar.upper_at(t)));
    out.p_evt.values.push_back(econ::exceedance_prob_evt(f, fit.gpd, tvar.upper_at(t)));
    out.var_normal.values.push_back(strategy::var_normal(f, alpha));
    out.var_evt.values.push_back(strategy::var_evt(f, fit.gpd, alpha));
  }
  return out;
}

LpaPath fit_lpa_path(const ReturnSeries& returns, const Schedule& schedule, const econ::LpaOptions& options) {
  return lpa_path(returns, schedule, options, true);
}

LpaPath fit_lpa_path_serial(const ReturnSeries& returns, const Schedule& schedule,
                            const econ::LpaOptions& options) {
  return lpa_path(returns, schedule, options, false);
}

ProbabilitySeries lpa_probabilities(const LpaPath& path, const ReturnSeries& returns, const TvarSeries& tvar,
                                    std::size_t end) {
  if (path.refits.empty()) throw DataError("lpa path has no fits");
  const std::size_t begin = path.refits.front().decision;
  check_forecast_range(begin, end, returns, tvar);
  const auto losses = losses_of(returns);
  ProbabilitySeries out;
  out.first = begin;
  for (std::size_t t = begin; t < end; ++t) {
    const LpaRefit& fit = latest(path.refits, t);
    const std::span<const double> interval(losses.data() + fit.start, fit.decision - fit.start);
    const std::span<const double> history(losses.data() + fit.start, t - fit.start);
    const VolForecast f = econ::forecast(fit.params, history, econ::sample_variance(interval));
    out.values.push_back(econ::exceedance_prob_normal(f, tvar.upper_at(t)));
  }
  return out;
}

CarlPath fit_carlvol_path(const ReturnSeries& returns, const TvarSeries& tvar, const Schedule& schedule) {
  return carl_path(returns, tvar, schedule, true);
}

CarlPath fit_carlvol_path_serial(const ReturnSeries& returns, const TvarSeries& tvar, const Schedule& schedule) {
  return carl_path(returns, tvar, schedule, false);
}

ProbabilitySeries carlvol_probabilities(const CarlPath& path, const ReturnSeries& returns, const TvarSeries& tvar,
                                        std::size_t end) {
  if (path.refits.empty()) throw DataError("carl-vol path has no fits");
  const std::size_t begin = path.refits.front().decision, w = path.fit_window;
  check_forecast_range(begin, end, returns, tvar);
  ProbabilitySeries out;
  out.first = begin;
  for (std::size_t t = begin; t < end; ++t) {
    const CarlRefit& fit = latest(path.refits, t);
    const std::span<const double> y(returns.values().data() + t - w, w);
    out.values.push_back(econ::carlvol_forecast(fit.params, y, -tvar.upper_at(t), econ::sample_variance(y)));
  }
  return out;
}

}  // namespace tailrisk::rolling
