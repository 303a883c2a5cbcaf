#include <doctest.h>

#include <cmath>

#include "tailrisk/econ.hpp"
#include "tailrisk/parallel.hpp"
#include "tailrisk/rolling.hpp"
#include "tailrisk/strategy.hpp"
#include "tailrisk/synth.hpp"

using namespace tailrisk;
using namespace tailrisk::rolling;

namespace {

struct Market {
  ReturnSeries returns;
  TvarSeries tvar;
};

Market market(std::size_t n, std::uint64_t seed) {
  Market m{ts::log_returns(synth::regime_prices(n, seed)), {}};
  m.tvar = ts::rolling_hist_var(m.returns, {0.05, 24});
  return m;
}

Market perturbed_after(const Market& m, std::size_t k) {
  std::vector<double> v = m.returns.values();
  for (std::size_t t = k + 1; t < v.size(); ++t) v[t] = -3.0 * v[t] + 0.01;
  Market out{ReturnSeries(m.returns.timestamps(), v), {}};
  out.tvar = ts::rolling_hist_var(out.returns, {0.05, 24});
  return out;
}

}  // namespace

TEST_CASE("schedule") {
  const Schedule s{100, 112, 5, 50};
  CHECK(s.refit_points() == std::vector<std::size_t>{100, 105, 110});
  CHECK_NOTHROW(s.validate(200));
  CHECK_THROWS_AS(s.validate(110), DataError);
  CHECK_THROWS_AS((Schedule{40, 60, 1, 50}.validate(100)), DataError);
  CHECK_THROWS_AS((Schedule{100, 110, 0, 50}.validate(200)), ConfigError);
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("garch path: manual oracle, serial twin and no look-ahead") {
  const Market m = market(1300, 3);
  const Schedule s{1050, 1150, 10, 1000};
  const ArmaGarchOrders orders;
  const ScopedWorkers workers(3);
  const GarchPath path = fit_garch_path(m.returns, s, orders);
  const GarchPath serial = fit_garch_path_serial(m.returns, s, orders);
  REQUIRE(path.refits.size() == 10);
  for (std::size_t k = 0; k < path.refits.size(); ++k) {
    CHECK(path.refits[k].params.to_vector() == serial.refits[k].params.to_vector());
    CHECK(path.refits[k].gpd.xi == serial.refits[k].gpd.xi);
  }

  // Refit 3 by hand: losses of the 1000 returns before its decision.
  const GarchRefit& r = path.refits[3];
  CHECK(r.decision == 1080);
  std::vector<double> window;
  for (std::size_t t = 1080 - 1000; t < 1080; ++t) window.push_back(-m.returns[t]);
  const auto ref = econ::qmle_fit(window, orders, &path.refits[0].params).params;
  CHECK(ref.to_vector() == r.params.to_vector());

  const GarchForecasts f = garch_forecasts(path, m.returns, m.tvar, 0.05, 1150);
  CHECK(f.p_normal.first == 1050);
  CHECK(f.p_normal.size() == 100);
  const std::size_t t = 1087;
  std::vector<double> history;
  for (std::size_t i = t - 1000; i < t; ++i) history.push_back(-m.returns[i]);
  const VolForecast vf = econ::forecast(r.params, history, econ::sample_variance(history));
  CHECK(f.p_normal.at_return(t) == econ::exceedance_prob_normal(vf, m.tvar.upper_at(t)));
  CHECK(f.p_evt.at_return(t) == econ::exceedance_prob_evt(vf, r.gpd, m.tvar.upper_at(t)));
  CHECK(f.var_normal.at_return(t) == strategy::var_normal(vf, 0.05));
  for (double p : f.p_evt.values) CHECK((p >= 0.0 && p <= 1.0));

  const Market moved = perturbed_after(m, 1100);
  const GarchPath path2 = fit_garch_path(moved.returns, s, orders);
  const GarchForecasts f2 = garch_forecasts(path2, moved.returns, moved.tvar, 0.05, 1150);
  for (std::size_t u = 1050; u <= 1100; ++u) {
    CHECK(f2.p_normal.at_return(u) == f.p_normal.at_return(u));
    CHECK(f2.p_evt.at_return(u) == f.p_evt.at_return(u));
  }
  CHECK(f2.p_normal.at_return(1149) != f.p_normal.at_return(1149));
}

TEST_CASE("carl-vol path") {
  const Market m = market(1200, 5);
  const Schedule s{1000, 1060, 3, 800};
  const ScopedWorkers workers(3);
  const CarlPath path = fit_carlvol_path(m.returns, m.tvar, s);
  const CarlPath serial = fit_carlvol_path_serial(m.returns, m.tvar, s);
  REQUIRE(path.refits.size() == 20);
  for (std::size_t k = 0; k < path.refits.size(); ++k) {
    CHECK(path.refits[k].params.phi1 == serial.refits[k].params.phi1);
    CHECK(path.refits[k].threshold_q == -m.tvar.upper_at(path.refits[k].decision));
  }
  const ProbabilitySeries p = carlvol_probabilities(path, m.returns, m.tvar, 1060);
  CHECK(p.size() == 60);
  const std::size_t t = 1031;
  const CarlRefit& fit = path.refits[10];
  CHECK(fit.decision == 1030);
  const std::span<const double> y(m.returns.values().data() + t - 800, 800);
  CHECK(p.at_return(t) == econ::carlvol_forecast(fit.params, y, -m.tvar.upper_at(t), econ::sample_variance(y)));
  for (double v : p.values) CHECK((v >= 0.0 && v <= 1.0));

  const Market moved = perturbed_after(m, 1030);
  const ProbabilitySeries q =
      carlvol_probabilities(fit_carlvol_path(moved.returns, moved.tvar, s), moved.returns, moved.tvar, 1060);
  for (std::size_t u = 1000; u <= 1030; ++u) CHECK(q.at_return(u) == p.at_return(u));
}

TEST_CASE("lpa path") {
  const Market m = market(700, 11);
  econ::LpaOptions opt;
  opt.max_length = 320;
  opt.bootstrap = 30;
  const Schedule s{600, 630, 5, opt.min_length};
  const ScopedWorkers workers(3);
  const LpaPath path = fit_lpa_path(m.returns, s, opt);
  const LpaPath serial = fit_lpa_path_serial(m.returns, s, opt);
  REQUIRE(path.refits.size() == 6);
  for (std::size_t k = 0; k < path.refits.size(); ++k) {
    const auto& r = path.refits[k];
    CHECK(r.start == serial.refits[k].start);
    CHECK(r.params.to_vector() == serial.refits[k].params.to_vector());
    CHECK(r.decision - r.start >= opt.min_length);
    CHECK(r.decision - r.start <= opt.max_length);
  }
  // Refit 2 by hand.
  std::vector<double> losses;
  for (std::size_t t = 610 - 320; t < 610; ++t) losses.push_back(-m.returns[t]);
  econ::LpaOptions local = opt;
  local.seed = derive_seed(opt.seed, 610);
  const auto h = econ::lpa_select_interval_serial(losses, losses.size() - 1, local);
  CHECK(path.refits[2].start == 610 - 320 + h.start);

  const ProbabilitySeries p = lpa_probabilities(path, m.returns, m.tvar, 630);
  CHECK(p.first == 600);
  CHECK(p.size() == 30);
  for (double v : p.values) CHECK((v >= 0.0 && v <= 1.0));
  econ::LpaOptions short_history = opt;
  short_history.min_length = 700;
  short_history.max_length = 700;
  CHECK_THROWS_AS(fit_lpa_path(m.returns, s, short_history), DataError);
}
