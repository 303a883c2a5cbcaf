#include "tailrisk/synth.hpp"

#include <cmath>
#include <random>

namespace tailrisk::synth {

namespace {

double draw(Innovation kind, double dof, std::mt19937_64& rng) {
  if (kind == Innovation::Normal) return std::normal_distribution<double>(0.0, 1.0)(rng);
  const double t = std::student_t_distribution<double>(dof)(rng);
  return t * std::sqrt((dof - 2.0) / dof);
}

}  // namespace

std::vector<double> simulate_arma_garch(const GarchSimSpec& spec, std::size_t n, std::uint64_t seed) {
  const ArmaGarchParams& p = spec.params;
  p.validate();
  if (spec.innovation == Innovation::StudentT && !(spec.dof > 2.0))
    throw ConfigError("simulate: Student-t dof must exceed 2");
  std::mt19937_64 rng(seed);
  const double long_run = p.omega / (1.0 - p.persistence());
  const std::size_t total = n + spec.burn_in;
  std::vector<double> x(total), eps(total), s2(total);
  for (std::size_t t = 0; t < total; ++t) {
    double mu = 0.0;
    for (std::size_t i = 1; i <= p.ar.size(); ++i)
      if (t >= i) mu += p.ar[i - 1] * x[t - i];
    for (std::size_t j = 1; j <= p.ma.size(); ++j)
      if (t >= j) mu += p.ma[j - 1] * eps[t - j];
    double v = p.omega;
    for (std::size_t j = 1; j <= p.arch.size(); ++j) v += p.arch[j - 1] * (t >= j ? eps[t - j] * eps[t - j] : long_run);
    for (std::size_t i = 1; i <= p.garch.size(); ++i) v += p.garch[i - 1] * (t >= i ? s2[t - i] : long_run);
    s2[t] = v;
    eps[t] = std::sqrt(v) * draw(spec.innovation, spec.dof, rng);
    x[t] = mu + eps[t];
  }
  return {x.begin() + static_cast<std::ptrdiff_t>(spec.burn_in), x.end()};
}

std::vector<double> simulate_garch11(double omega, double alpha, double beta, std::size_t n, std::uint64_t seed) {
  GarchSimSpec spec;
  spec.params.omega = omega;
  spec.params.arch = {alpha};
  spec.params.garch = {beta};
  return simulate_arma_garch(spec, n, seed);
}

std::vector<double> simulate_omega_break(double omega, double alpha, double beta, std::size_t n, std::size_t change,
                                         double omega_factor, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double v = omega / (1.0 - alpha - beta);
  double e = 0.0;
  std::vector<double> x(n);
  const std::size_t burn = 500;
  for (std::size_t k = 0; k < n + burn; ++k) {
    const double w = (k >= burn && k - burn >= change) ? omega * omega_factor : omega;
    if (k > 0) v = w + alpha * e * e + beta * v;
    e = std::sqrt(v) * normal(rng);
    if (k >= burn) x[k - burn] = e;
  }
  return x;
}

std::vector<double> sample_gpd(double xi, double beta, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> y(n);
  for (double& v : y) {
    const double u = 1.0 - uniform(rng);  // (0, 1]
    v = xi == 0.0 ? -beta * std::log(u) : beta / xi * std::expm1(-xi * std::log(u));
  }
  return y;
}

PriceSeries regime_prices(std::size_t n, std::uint64_t seed, std::int64_t start_hour) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  struct Regime {
    double drift, omega, alpha, beta;
  };
  // Calm and turbulent regimes, hourly scale.
  const Regime regimes[2] = {{4e-5, 2e-7, 0.06, 0.90}, {-6e-5, 1.5e-6, 0.10, 0.86}};
  const double stay[2] = {0.995, 0.98};
  const double dof = 4.0;
  int state = 0;
  double v = regimes[0].omega / (1.0 - regimes[0].alpha - regimes[0].beta);
  double e = 0.0;
  std::vector<std::int64_t> hours(n);
  std::vector<double> closes(n);
  double price = 10000.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      if (uniform(rng) > stay[state]) state = 1 - state;
      const Regime& g = regimes[state];
      v = g.omega + g.alpha * e * e + g.beta * v;
      e = std::sqrt(v) * draw(Innovation::StudentT, dof, rng);
      price *= std::exp(g.drift + e);
    }
    hours[k] = start_hour + static_cast<std::int64_t>(k);
    closes[k] = price;
  }
  return PriceSeries(std::move(hours), std::move(closes));
}

}  // namespace tailrisk::synth
