#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tailrisk/econ.hpp"
#include "tailrisk/timeseries.hpp"

namespace tailrisk::econ {

double gpd_cdf(const GpdParams& params, double x) {
  if (!(x > 0.0)) return 0.0;
  const double u = x / params.beta;
  if (params.xi == 0.0) return -std::expm1(-u);
  const double t = params.xi * u;
  if (t <= -1.0) return 1.0;  // beyond the upper end point when xi < 0
  return -std::expm1(-std::log1p(t) / params.xi);
}

double gpd_loglik(double xi, double beta, std::span<const double> y, std::span<double> grad) {
  const double ninf = -std::numeric_limits<double>::infinity();
  if (!(beta > 0.0) || !std::isfinite(xi)) return ninf;
  const double k = static_cast<double>(y.size());
  double ll = -k * std::log(beta);
  double d_xi = 0.0, d_beta = -k / beta;
  if (std::abs(xi) < 1e-10) {
    for (double v : y) {
      const double u = v / beta;
      ll -= u;
      d_xi += 0.5 * u * u - u;
      d_beta += u / beta;
    }
  } else {
    for (double v : y) {
      const double u = v / beta;
      const double t = xi * u;
      if (!(t > -1.0)) return ninf;
      const double l1p = std::log1p(t);
      ll -= (1.0 + 1.0 / xi) * l1p;
      d_xi += l1p / (xi * xi) - (1.0 + 1.0 / xi) * u / (1.0 + t);
      d_beta += (1.0 + xi) * u / (beta * (1.0 + t));
    }
  }
  if (!grad.empty()) {
    grad[0] = d_xi;
    grad[1] = d_beta;
  }
  return ll;
}

GpdParams gpd_fit_exceedances(std::span<const double> y) {
  if (y.size() < 2) throw DataError("gpd_fit: need at least 2 exceedances");
  for (double v : y)
    if (!(v > 0.0) || !std::isfinite(v)) throw DataError("gpd_fit: exceedances must be positive and finite");

  // Method-of-moments start.
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  const double var = sample_variance(y);
  const double ratio = var > 0.0 ? mean * mean / var : 1.0;
  double xi0 = std::clamp(0.5 * (1.0 - ratio), -0.45, 0.9);
  double beta0 = std::max(0.5 * mean * (ratio + 1.0), 1e-8);
  const double ymax = *std::max_element(y.begin(), y.end());
  if (xi0 < 0.0 && 1.0 + xi0 * ymax / beta0 <= 0.0) xi0 = 0.0;

  const double inv_k = 1.0 / static_cast<double>(y.size());
  optim::Objective objective = [&](std::span<const double> u, std::span<double> g) -> double {
    const double xi = u[0], beta = std::exp(u[1]);
    if (xi <= -1.0) return std::numeric_limits<double>::infinity();
    double dg[2];
    const double ll = gpd_loglik(xi, beta, y, g.empty() ? std::span<double>{} : std::span<double>(dg, 2));
    if (!std::isfinite(ll)) return std::numeric_limits<double>::infinity();
    if (!g.empty()) {
      g[0] = -dg[0] * inv_k;
      g[1] = -dg[1] * beta * inv_k;
    }
    return -ll * inv_k;
  };
  optim::Options options;
  options.max_iterations = 500;
  const auto res = optim::minimize_bfgs(objective, {xi0, std::log(beta0)}, options);
  if (!res.converged)
    throw FitFailure("gpd_fit: no convergence (gradient norm " + std::to_string(res.gradient_norm) + ")",
                     {res.x[0], std::exp(res.x[1])});
  GpdParams out;
  out.xi = res.x[0];
  out.beta = std::exp(res.x[1]);
  out.exceedances = y.size();
  return out;
}

GpdParams gpd_fit(std::span<const double> residuals, double tail_fraction, std::size_t min_exceedances) {
  if (residuals.empty()) throw DataError("gpd_fit: empty residual series");
  std::vector<double> sorted(residuals.begin(), residuals.end());
  std::sort(sorted.begin(), sorted.end());
  const double g = sorted[ts::quantile_rank(1.0 - tail_fraction, sorted.size()) - 1];
  std::vector<double> excess;
  for (double z : residuals)
    if (z > g) excess.push_back(z - g);
  if (excess.size() < min_exceedances)
    throw DataError("gpd_fit: only " + std::to_string(excess.size()) + " exceedances above g (need " +
                    std::to_string(min_exceedances) + ")");
  GpdParams out = gpd_fit_exceedances(excess);
  out.threshold_g = g;
  out.tail_fraction = tail_fraction;
  return out;
}

double evt_tail_mass(const GpdParams& gpd) { return normal_cdf(-gpd.threshold_g); }

double evt_quantile(const GpdParams& gpd, double prob) {
  const double mass = evt_tail_mass(gpd);
  if (prob >= mass) return normal_quantile(1.0 - prob);
  const double ratio = prob / mass;
  if (gpd.xi == 0.0) return gpd.threshold_g - gpd.beta * std::log(ratio);
  return gpd.threshold_g + gpd.beta / gpd.xi * std::expm1(-gpd.xi * std::log(ratio));
}

double exceedance_prob_normal(const VolForecast& f, double tvar) {
  return normal_cdf(-(tvar - f.mu_hat) / f.sigma_hat);
}

double exceedance_prob_evt(const VolForecast& f, const GpdParams& gpd, double tvar) {
  const double z = (tvar - f.mu_hat) / f.sigma_hat;
  if (z < gpd.threshold_g) return normal_cdf(-z);
  return evt_tail_mass(gpd) * (1.0 - gpd_cdf(gpd, z - gpd.threshold_g));
}

}  // namespace tailrisk::econ
