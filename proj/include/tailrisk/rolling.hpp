#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tailrisk/econ.hpp"
#include "tailrisk/timeseries.hpp"

namespace tailrisk::rolling {

/// Probabilities are produced for returns [begin, end). A refit happens
/// before returns begin, begin + refit_every, ... using only earlier returns.
struct Schedule {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t refit_every = 1;
  std::size_t fit_window = 1000;

  std::vector<std::size_t> refit_points() const;
  void validate(std::size_t returns) const;
};

/// ARMA-GARCH on the loss series plus a GPD on its standardised residuals.
struct GarchRefit {
  std::size_t decision = 0;  // first return this fit forecasts
  ArmaGarchParams params;
  GpdParams gpd;
  bool carried = false;  // refit failed, previous parameters reused
};

struct GarchPath {
  ArmaGarchOrders orders;
  std::size_t fit_window = 0;
  std::vector<GarchRefit> refits;
};

/// Each refit starts from a fit at `begin`, so refits are independent and the
/// result does not depend on the worker count.
GarchPath fit_garch_path(const ReturnSeries& returns, const Schedule& schedule, const ArmaGarchOrders& orders);
GarchPath fit_garch_path_serial(const ReturnSeries& returns, const Schedule& schedule, const ArmaGarchOrders& orders);

struct GarchForecasts {
  ProbabilitySeries p_normal;
  ProbabilitySeries p_evt;
  Aligned<double> var_normal;  // alpha-level loss quantile forecasts
  Aligned<double> var_evt;
};

/// One-step forecasts for returns [begin, end) from the latest refit at or
/// before each return, filtered over the fit_window losses before it.
GarchForecasts garch_forecasts(const GarchPath& path, const ReturnSeries& returns, const TvarSeries& tvar,
                               double alpha, std::size_t end);

struct LpaRefit {
  std::size_t decision = 0;
  std::size_t start = 0;  // first return of the homogeneity interval
  ArmaGarchParams params;
  bool carried = false;
};

struct LpaPath {
  econ::LpaOptions options;
  std::vector<LpaRefit> refits;
};

/// Interval selection on the losses before each refit point; the bootstrap
/// seed of each refit is derived from (options.seed, decision).
LpaPath fit_lpa_path(const ReturnSeries& returns, const Schedule& schedule, const econ::LpaOptions& options);
LpaPath fit_lpa_path_serial(const ReturnSeries& returns, const Schedule& schedule, const econ::LpaOptions& options);

/// Normal exceedance probability of the GARCH(1,1) fitted on the interval,
/// filtered from the interval start up to the return before t.
ProbabilitySeries lpa_probabilities(const LpaPath& path, const ReturnSeries& returns, const TvarSeries& tvar,
                                    std::size_t end);

struct CarlRefit {
  std::size_t decision = 0;
  double threshold_q = 0.0;  // -upper target of the decision return
  CarlVolParams params;
  bool carried = false;
};

struct CarlPath {
  std::size_t fit_window = 0;
  std::vector<CarlRefit> refits;
};

/// CARL-vol on returns with Q = -TVaR of the decision return, hits r <= Q.
CarlPath fit_carlvol_path(const ReturnSeries& returns, const TvarSeries& tvar, const Schedule& schedule);
CarlPath fit_carlvol_path_serial(const ReturnSeries& returns, const TvarSeries& tvar, const Schedule& schedule);

ProbabilitySeries carlvol_probabilities(const CarlPath& path, const ReturnSeries& returns, const TvarSeries& tvar,
                                        std::size_t end);

/// splitmix64 of seed and index, for per-fit RNG streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace tailrisk::rolling
