#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tailrisk/econ.hpp"
#include "tailrisk/synth.hpp"

using namespace tailrisk;
using econ::normal_cdf;

namespace {

ArmaGarchParams garch11(double omega, double alpha, double beta) {
  ArmaGarchParams p;
  p.omega = omega;
  p.arch = {alpha};
  p.garch = {beta};
  return p;
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

}  // namespace

TEST_CASE("normal helpers") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.6448536269514722) == doctest::Approx(0.95).epsilon(1e-14));
  for (double p : {1e-10, 1e-4, 0.01, 0.3, 0.5, 0.77, 0.99, 1 - 1e-8})
    CHECK(normal_cdf(econ::normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("garch filter: constant variance") {
  const ArmaGarchParams p = garch11(0.3, 0.0, 0.0);
  const auto f = econ::garch_filter(p, std::vector<double>{0.1, -2.0, 0.5, 3.0}, 7.0);
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(f.sigma2[t] == 0.3);
    CHECK(f.mu[t] == 0.0);
  }
  const auto fc = econ::forecast(p, std::vector<double>{0.1, -2.0, 0.5, 3.0}, 7.0);
  CHECK(fc.sigma_hat == doctest::Approx(std::sqrt(0.3)));
  CHECK(fc.mu_hat == 0.0);
}

TEST_CASE("garch filter: three-step unroll") {
  const ArmaGarchParams p = garch11(0.1, 0.2, 0.7);
  const std::vector<double> x = {0.5, -1.0, 0.3};
  const auto f = econ::garch_filter(p, x, 1.0);
  // s0 = 0.1 + 0.2*1 + 0.7*1; s1 = 0.1 + 0.2*0.25 + 0.7*s0; s2 = 0.1 + 0.2*1 + 0.7*s1
  CHECK(f.sigma2[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.sigma2[1] == doctest::Approx(0.85).epsilon(1e-15));
  CHECK(f.sigma2[2] == doctest::Approx(0.895).epsilon(1e-15));
  CHECK(f.eps == x);
  // s3 = 0.1 + 0.2*0.09 + 0.7*0.895
  const auto fc = econ::forecast(p, x, 1.0);
  CHECK(fc.sigma_hat * fc.sigma_hat == doctest::Approx(0.7445).epsilon(1e-14));
}

TEST_CASE("garch filter: ARMA mean terms") {
  ArmaGarchParams p = garch11(0.1, 0.1, 0.8);
  p.ar = {0.5};
  p.ma = {0.25};
  const std::vector<double> x = {1.0, 2.0, -1.0};
  const auto f = econ::garch_filter(p, x, 1.0);
  CHECK(f.mu[0] == 0.0);
  CHECK(f.mu[1] == doctest::Approx(0.5 * 1.0 + 0.25 * 1.0));
  const double e1 = 2.0 - 0.75;
  CHECK(f.mu[2] == doctest::Approx(0.5 * 2.0 + 0.25 * e1));
}

TEST_CASE("garch filter rejects non-stationary parameters") {
  CHECK_THROWS_AS(econ::garch_filter(garch11(0.1, 0.5, 0.6), std::vector<double>{1.0, 2.0}, 1.0), NumericalError);
  CHECK_THROWS_AS(econ::garch_filter(garch11(0.0, 0.1, 0.6), std::vector<double>{1.0, 2.0}, 1.0), NumericalError);
}

TEST_CASE("garch: long-run variance") {
  const double omega = 0.05, alpha = 0.1, beta = 0.85;
  const auto x = synth::simulate_garch11(omega, alpha, beta, 200000, 17);
  const auto f = econ::garch_filter(garch11(omega, alpha, beta), x, omega / (1 - alpha - beta));
  const double mean = std::accumulate(f.sigma2.begin(), f.sigma2.end(), 0.0) / static_cast<double>(x.size());
  CHECK(mean == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("forecast matches the filter one step later") {
  ArmaGarchParams p = garch11(0.02, 0.08, 0.9);
  p.ar = {0.1, -0.05};
  p.ma = {0.2};
  const auto x = synth::simulate_garch11(0.02, 0.08, 0.9, 300, 3);
  const std::vector<double> head(x.begin(), x.end() - 1);
  const auto fc = econ::forecast(p, head, 0.5);
  const auto f = econ::garch_filter(p, x, 0.5);
  CHECK(fc.mu_hat == doctest::Approx(f.mu.back()).epsilon(1e-13));
  CHECK(fc.sigma_hat * fc.sigma_hat == doctest::Approx(f.sigma2.back()).epsilon(1e-13));
  CHECK_THROWS_AS(econ::forecast(p, std::vector<double>{1.0}, 0.5), DataError);
}

TEST_CASE("gaussian log-likelihood gradient matches finite differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ArmaGarchOrders orders{3, 1, 1, 2};
  synth::GarchSimSpec spec;
  spec.params = garch11(0.05, 0.1, 0.85);
  const auto x = synth::simulate_arma_garch(spec, 500, 9);
  for (int trial = 0; trial < 10; ++trial) {
    ArmaGarchParams p;
    p.ar = {0.3 * (u(rng) - 0.5), 0.2 * (u(rng) - 0.5), 0.1 * (u(rng) - 0.5)};
    p.ma = {0.4 * (u(rng) - 0.5)};
    p.omega = 0.02 + 0.1 * u(rng);
    p.arch = {0.02 + 0.15 * u(rng)};
    p.garch = {0.3 * u(rng), 0.3 * u(rng)};
    std::vector<double> g(orders.parameter_count());
    econ::gaussian_loglik(p, x, 1.2, g);
    const auto v = p.to_vector();
    optim::Objective f = [&](std::span<const double> z, std::span<double>) {
      return econ::gaussian_loglik(ArmaGarchParams::from_vector(orders, z), x, 1.2);
    };
    CHECK(relative_error(g, optim::numerical_gradient(f, v, 1e-6)) < 1e-4);
  }
}

TEST_CASE("per-observation scores sum to the gradient") {
  const auto x = synth::simulate_garch11(0.05, 0.1, 0.85, 400, 2);
  const auto p = garch11(0.06, 0.12, 0.8);
  std::vector<double> g(3), scores;
  econ::gaussian_loglik(p, x, 1.0, g, &scores);
  REQUIRE(scores.size() == 3 * x.size());
  for (std::size_t k = 0; k < 3; ++k) {
    double s = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) s += scores[t * 3 + k];
    CHECK(s == doctest::Approx(g[k]).epsilon(1e-10));
  }
}

TEST_CASE("unconstrained mapping round trip") {
  ArmaGarchParams p = garch11(0.03, 0.07, 0.1);
  p.garch.push_back(0.75);
  p.ar = {0.1};
  const auto back = econ::from_unconstrained(p.orders(), econ::to_unconstrained(p));
  const auto a = p.to_vector(), b = back.to_vector();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-10));
  // Any unconstrained point maps to a stationary model.
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> z(8);
    for (double& v : z) v = n(rng);
    CHECK(econ::from_unconstrained({3, 1, 1, 2}, z).is_stationary());
  }
}

TEST_CASE("qmle: i.i.d. Gaussian data") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> normal(0.0, 2.0);
  std::vector<double> x(20000);
  for (double& v : x) v = normal(rng);
  const auto fit = econ::qmle_fit(x, {0, 0, 1, 1});
  const double var = econ::sample_variance(x);
  const double implied = fit.params.omega / (1.0 - fit.params.persistence());
  // Monte Carlo sd of the sample variance is var * sqrt(2/n).
  CHECK(std::abs(implied - var) < 3.0 * var * std::sqrt(2.0 / 20000.0));
  CHECK(fit.params.arch[0] < 3.0 / std::sqrt(20000.0));
  CHECK(fit.params.is_stationary());
}

TEST_CASE("qmle: GARCH(1,1) recovery and monotone trace") {
  const auto x = synth::simulate_garch11(0.05, 0.1, 0.85, 20000, 101);
  const auto fit = econ::qmle_fit(x, {0, 0, 1, 1});
  CHECK(std::abs(fit.params.omega - 0.05) < 0.05);
  CHECK(std::abs(fit.params.arch[0] - 0.1) < 0.05);
  CHECK(std::abs(fit.params.garch[0] - 0.85) < 0.05);
  CHECK(fit.loglik >= fit.init_loglik);
  for (std::size_t i = 1; i < fit.trace.size(); ++i) CHECK(fit.trace[i] >= fit.trace[i - 1]);
}

TEST_CASE("qmle: default ARMA(3,1)-GARCH(1,2) orders") {
  synth::GarchSimSpec spec;
  spec.params = garch11(0.05, 0.1, 0.4);
  spec.params.garch.push_back(0.4);
  spec.params.ar = {0.2, 0.0, 0.0};
  spec.params.ma = {0.1};
  const auto x = synth::simulate_arma_garch(spec, 5000, 8);
  const auto fit = econ::qmle_fit(x, {});
  CHECK(fit.params.ar.size() == 3);
  CHECK(fit.params.garch.size() == 2);
  CHECK(fit.params.is_stationary());
  CHECK(fit.loglik >= fit.init_loglik);
  CHECK(std::abs(fit.params.ar[0] + fit.params.ma[0] - 0.3) < 0.1);
}

TEST_CASE("qmle: degenerate input") {
  CHECK_THROWS_AS(econ::qmle_fit(std::vector<double>(500, 0.01), {0, 0, 1, 1}), DataError);
  CHECK_THROWS_AS(econ::qmle_fit(std::vector<double>{0.1, -0.2, 0.3}, {0, 0, 1, 1}), DataError);
}

TEST_CASE("qmle: non-convergence carries the best iterate") {
  const auto x = synth::simulate_garch11(0.05, 0.1, 0.85, 2000, 4);
  optim::Options opts;
  opts.max_iterations = 1;
  try {
    econ::qmle_fit(x, {0, 0, 1, 1}, nullptr, opts);
    FAIL("expected FitFailure");
  } catch (const FitFailure& e) {
    CHECK(e.best().size() == 3);
    CHECK(e.exit_code() == 4);
  }
}

TEST_CASE("gpd cdf") {
  GpdParams g;
  g.xi = 0.0;
  g.beta = 1.0;
  CHECK(econ::gpd_cdf(g, 0.0) == 0.0);
  CHECK(econ::gpd_cdf(g, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  g.xi = 1.0;
  CHECK(econ::gpd_cdf(g, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  g.xi = -0.5;
  g.beta = 1.0;
  CHECK(econ::gpd_cdf(g, 2.0) == 1.0);
  CHECK(econ::gpd_cdf(g, 3.0) == 1.0);

  for (double xi : {-0.4, 0.0, 0.3, 1.5}) {
    g.xi = xi;
    double prev = 0.0;
    for (double x = 0.0; x < 10.0; x += 0.01) {
      const double c = econ::gpd_cdf(g, x);
      CHECK(c >= prev);
      prev = c;
    }
  }
  GpdParams zero{0.0, 1.3}, plus{1e-6, 1.3}, minus{-1e-6, 1.3};
  for (double x : {0.1, 1.0, 5.0}) {
    CHECK(std::abs(econ::gpd_cdf(plus, x) - econ::gpd_cdf(zero, x)) < 1e-5);
    CHECK(std::abs(econ::gpd_cdf(minus, x) - econ::gpd_cdf(zero, x)) < 1e-5);
  }
}

TEST_CASE("gpd log-likelihood gradient") {
  auto y = synth::sample_gpd(0.2, 1.5, 300, 3);
  for (double& v : y) v = std::min(v, 4.0);
  for (double xi : {-0.2, 1e-12, 0.1, 0.5}) {
    for (double beta : {0.8, 1.5, 3.0}) {
      double g[2];
      if (!std::isfinite(econ::gpd_loglik(xi - 1e-6, beta - 1e-6, y, g))) continue;  // outside the support
      econ::gpd_loglik(xi, beta, y, g);
      optim::Objective f = [&](std::span<const double> z, std::span<double>) {
        return econ::gpd_loglik(z[0], z[1], y);
      };
      const auto fd = optim::numerical_gradient(f, std::vector<double>{xi, beta}, 1e-7);
      CHECK(relative_error({g[0], g[1]}, fd) < 1e-4);
    }
  }
}

TEST_CASE("gpd fit: exponential exceedances") {
  const auto y = synth::sample_gpd(0.0, 1.0, 5000, 77);
  const auto fit = econ::gpd_fit_exceedances(y);
  // Asymptotic sd at xi = 0: sd(xi) = 1/sqrt(n), sd(beta) = sqrt(2/n).
  CHECK(std::abs(fit.xi) < 3.0 / std::sqrt(5000.0));
  CHECK(std::abs(fit.beta - 1.0) < 3.0 * std::sqrt(2.0 / 5000.0));
}

TEST_CASE("gpd fit: recovery and thresholding") {
  const auto y = synth::sample_gpd(0.3, 1.0, 5000, 5);
  const auto fit = econ::gpd_fit_exceedances(y);
  CHECK(std::abs(fit.xi - 0.3) < 0.1);
  CHECK(std::abs(fit.beta - 1.0) < 0.1);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(4000);
  for (double& v : z) v = normal(rng);
  const auto tail = econ::gpd_fit(z);
  std::vector<double> sorted = z;
  std::sort(sorted.begin(), sorted.end());
  CHECK(tail.threshold_g == sorted[3799]);
  CHECK(tail.exceedances == 200);
  CHECK(tail.xi < 0.1);  // Gaussian tails are light

  CHECK_THROWS_AS(econ::gpd_fit(std::vector<double>(z.begin(), z.begin() + 10)), DataError);
  CHECK_THROWS_WITH(econ::gpd_fit(std::vector<double>(z.begin(), z.begin() + 10)), doctest::Contains("exceedances"));
}

TEST_CASE("evt quantile inverts the tail") {
  for (double g0 : {1.645, 1.3, 2.1}) {
    const GpdParams g{0.2, 0.6, g0, 0.05, 100};
    const double mass = econ::evt_tail_mass(g);
    CHECK(mass == normal_cdf(-g0));
    for (double p : {0.9 * mass, 0.01, 0.001}) {
      const double z = econ::evt_quantile(g, p);
      CHECK(z >= g0);
      CHECK(mass * (1.0 - econ::gpd_cdf(g, z - g.threshold_g)) == doctest::Approx(p).epsilon(1e-12));
      CHECK(econ::exceedance_prob_evt({0.0, 1.0}, g, z) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(econ::evt_quantile(g, 0.2) == doctest::Approx(econ::normal_quantile(0.8)));
  }
}

TEST_CASE("normal exceedance probability") {
  CHECK(econ::exceedance_prob_normal({0.3, 2.0}, 0.3) == 0.5);
  CHECK(econ::exceedance_prob_normal({0.0, 1.0}, 1.6449) == doctest::Approx(0.05).epsilon(1e-4));
  CHECK(econ::exceedance_prob_normal({0.0, 1.0}, 1e6) < 1e-300);
  double prev = 1.0;
  for (double tv = -5.0; tv < 5.0; tv += 0.1) {
    const double p = econ::exceedance_prob_normal({0.1, 0.7}, tv);
    CHECK(p <= prev);
    prev = p;
  }
}

TEST_CASE("evt exceedance probability") {
  const VolForecast f{0.1, 0.5};
  for (double g0 : {1.2, 1.645, 1.8, 2.5}) {
    const GpdParams g{0.25, 0.7, g0, 0.05, 120};
    // Below g the normal branch applies.
    for (double z : {-1.0, 0.0, 1.0, g0 - 0.01}) {
      const double tv = f.mu_hat + z * f.sigma_hat;
      CHECK(econ::exceedance_prob_evt(f, g, tv) == econ::exceedance_prob_normal(f, tv));
    }
    CHECK(econ::exceedance_prob_evt(f, g, 1e9) < 1e-10);

    // Continuous at g from both sides and non-increasing everywhere.
    const double eps = 1e-9;
    const double left = econ::exceedance_prob_evt(f, g, f.mu_hat + (g0 - eps) * f.sigma_hat);
    const double right = econ::exceedance_prob_evt(f, g, f.mu_hat + (g0 + eps) * f.sigma_hat);
    CHECK(std::abs(left - normal_cdf(-g0)) < 1e-7);
    CHECK(std::abs(right - normal_cdf(-g0)) < 1e-7);
    double prev = 1.0;
    for (double z = -5.0; z < 20.0; z += 0.01) {
      const double p = econ::exceedance_prob_evt(f, g, f.mu_hat + z * f.sigma_hat);
      CHECK(p <= prev + 1e-15);
      prev = p;
    }
  }
  // A heavier GPD tail puts more mass far out than the normal.
  const GpdParams heavy{0.3, 0.8, 1.5, 0.05, 120};
  CHECK(econ::exceedance_prob_evt(f, heavy, f.mu_hat + 4.0 * f.sigma_hat) >
        econ::exceedance_prob_normal(f, f.mu_hat + 4.0 * f.sigma_hat));
}

TEST_CASE("carl-vol probability link") {
  CarlVolParams p;
  p.phi0 = 0.0;
  p.phi1 = 0.0;
  CHECK(econ::carlvol_prob(p, 1.0, 0.01) == 0.75);
  CHECK(econ::carlvol_prob(p, 1.0, -0.01) == 0.25);
  p.phi0 = -800.0;
  CHECK(econ::carlvol_prob(p, 1.0, 0.01) == 0.5);
  p.phi0 = 800.0;
  CHECK(econ::carlvol_prob(p, 1.0, 0.01) == 1.0);
}

TEST_CASE("carl-vol likelihood") {
  CarlVolParams p;
  p.phi0 = 50.0;  // p = 0.5 when Q <= 0
  const std::vector<double> y = {0.01, -0.02, 0.005, -0.03, 0.0, 0.02, -0.01};
  CHECK(econ::carlvol_nll(p, y, -0.01, 1e-4) == doctest::Approx(7.0 * std::log(2.0)).epsilon(1e-12));

  // Two observations: sigma_0^2 = presample, sigma_1^2 = omega + beta*ps + alpha*(y0 - mu)^2.
  CarlVolParams q;
  q.phi0 = 0.2;
  q.phi1 = 3.0;
  q.omega = 0.01;
  q.alpha1 = 0.1;
  q.beta1 = 0.8;
  q.mu = 0.05;
  const std::vector<double> two = {0.3, -0.4};
  const double ps = 0.04, threshold = -0.1;
  const double s0 = std::sqrt(ps);
  const double s1 = std::sqrt(0.01 + 0.8 * ps + 0.1 * 0.25 * 0.25);
  const double p0 = 0.5 / (1.0 + std::exp(-(0.2 + 3.0 * s0)));
  const double p1 = 0.5 / (1.0 + std::exp(-(0.2 + 3.0 * s1)));
  // y0 = 0.3 > Q is a miss, y1 = -0.4 <= Q is a hit.
  CHECK(econ::carlvol_nll(q, two, threshold, ps) == doctest::Approx(-std::log(1.0 - p0) - std::log(p1)).epsilon(1e-14));
}

TEST_CASE("carl-vol gradient matches finite differences") {
  const auto y = synth::simulate_garch11(1e-5, 0.08, 0.9, 600, 12);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    CarlVolParams p;
    p.phi0 = -2.0 + 2.0 * u(rng);
    p.phi1 = 100.0 * u(rng);
    p.omega = 1e-6 + 1e-5 * u(rng);
    p.alpha1 = 0.02 + 0.1 * u(rng);
    p.beta1 = 0.5 + 0.35 * u(rng);
    p.mu = 0.001 * (u(rng) - 0.5);
    const double threshold = trial % 2 ? 0.002 : -0.004;
    std::vector<double> g(6);
    econ::carlvol_nll(p, y, threshold, 1e-4, g);
    const std::vector<double> v = {p.phi0, p.phi1, p.omega, p.alpha1, p.beta1, p.mu};
    optim::Objective f = [&](std::span<const double> z, std::span<double>) {
      const CarlVolParams c{z[0], z[1], z[2], z[3], z[4], z[5]};
      return econ::carlvol_nll(c, y, threshold, 1e-4);
    };
    // Steps scaled per coordinate since omega and mu are tiny.
    std::vector<double> fd(6);
    for (std::size_t i = 0; i < 6; ++i) {
      const double h = 1e-6 * std::max(std::abs(v[i]), i == 2 ? 1e-6 : (i == 5 ? 1e-4 : 1.0));
      auto up = v, down = v;
      up[i] += h;
      down[i] -= h;
      fd[i] = (f(up, {}) - f(down, {})) / (2.0 * h);
    }
    CHECK(relative_error(g, fd) < 1e-4);
  }
}

TEST_CASE("carl-vol fit: intercept-only data") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal(0.0, 0.01);
  std::vector<double> y(5000);
  for (double& v : y) v = normal(rng);
  const double threshold = 0.01 * 0.6744897501960817;  // P(y <= Q) = 0.75
  const auto fit = econ::carlvol_fit(y, threshold);
  const auto sigma = econ::carlvol_sigma(fit, y, econ::sample_variance(y));
  double mean_p = 0.0;
  for (double s : sigma) mean_p += econ::carlvol_prob(fit, s, threshold);
  mean_p /= static_cast<double>(y.size());
  std::size_t hits = 0;
  for (double v : y) hits += v <= threshold;
  const double rate = static_cast<double>(hits) / 5000.0;
  CHECK(mean_p == doctest::Approx(rate).epsilon(0.01));
  CHECK(std::abs(rate - 0.75) < 3.0 * std::sqrt(0.75 * 0.25 / 5000.0));
  // The volatility term explains nothing: its swing across the sample is small.
  const auto [lo, hi] = std::minmax_element(sigma.begin(), sigma.end());
  CHECK(std::abs(fit.phi1) * (*hi - *lo) < 0.5);
}

TEST_CASE("carl-vol fit: recovery on simulated hits") {
  // Hits drawn from the model itself, with y placed on the matching side of Q.
  const CarlVolParams truth{-1.0, 150.0, 2e-6, 0.08, 0.9, 0.0};
  const double threshold = -0.005;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = 20000;
  std::vector<double> y(n);
  double v = truth.omega / (1.0 - truth.alpha1 - truth.beta1);
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) v = truth.omega + truth.beta1 * v + truth.alpha1 * (y[t - 1] - truth.mu) * (y[t - 1] - truth.mu);
    const double s = std::sqrt(v);
    const bool hit = uniform(rng) < econ::carlvol_prob(truth, s, threshold);
    const double mag = std::abs(normal(rng)) * s;
    y[t] = hit ? threshold - mag : threshold + mag;
  }
  const auto fit = econ::carlvol_fit(y, threshold);
  const double ps = econ::sample_variance(y);
  CHECK(econ::carlvol_nll(fit, y, threshold, ps) <= econ::carlvol_nll(truth, y, threshold, ps) + 1e-9);
  CHECK(fit.phi1 > 0.0);
  CHECK(fit.alpha1 + fit.beta1 < 1.0);
  // Compare fitted and true hit probabilities along the path.
  const auto s_fit = econ::carlvol_sigma(fit, y, ps);
  const auto s_true = econ::carlvol_sigma(truth, y, ps);
  double mad = 0.0;
  for (std::size_t t = 0; t < n; ++t)
    mad += std::abs(econ::carlvol_prob(fit, s_fit[t], threshold) - econ::carlvol_prob(truth, s_true[t], threshold));
  CHECK(mad / static_cast<double>(n) < 0.02);
}

TEST_CASE("carl-vol fit: degenerate samples") {
  const std::vector<double> y(200, 0.01);
  std::vector<double> varied(200);
  for (std::size_t i = 0; i < varied.size(); ++i) varied[i] = 0.01 + 0.001 * static_cast<double>(i % 7);
  CHECK_THROWS_AS(econ::carlvol_fit(varied, 0.0), DataError);  // no hits
  CHECK_THROWS_AS(econ::carlvol_fit(varied, 1.0), DataError);  // all hits
  CHECK_THROWS_AS(econ::carlvol_fit(y, 0.0), DataError);
}
