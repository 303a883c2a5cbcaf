#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tailrisk/econ.hpp"

namespace tailrisk {

void CarlVolParams::validate() const {
  if (!(omega > 0.0) || !(alpha1 >= 0.0) || !(beta1 >= 0.0) || !(alpha1 + beta1 < 1.0))
    throw NumericalError("CARL-vol parameters violate omega > 0, alpha1, beta1 >= 0, alpha1 + beta1 < 1");
}

namespace econ {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

double carlvol_prob(const CarlVolParams& params, double sigma, double threshold_q) {
  const double x = params.phi0 + params.phi1 * sigma;
  return 0.5 * sigmoid(x) + (threshold_q > 0.0 ? 0.5 : 0.0);
}

std::vector<double> carlvol_sigma(const CarlVolParams& params, std::span<const double> y, double presample) {
  std::vector<double> sigma(y.size());
  double v = presample;
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (t > 0) {
      const double d = y[t - 1] - params.mu;
      v = params.omega + params.beta1 * v + params.alpha1 * d * d;
    }
    sigma[t] = std::sqrt(v);
  }
  return sigma;
}

double carlvol_nll(const CarlVolParams& params, std::span<const double> y, double threshold_q, double presample,
                   std::span<double> grad) {
  const bool want = !grad.empty();
  if (want) std::fill(grad.begin(), grad.end(), 0.0);
  const double offset = threshold_q > 0.0 ? 0.5 : 0.0;
  double v = presample;
  // d(sigma^2)/d(omega, alpha1, beta1, mu)
  double dv[4] = {0.0, 0.0, 0.0, 0.0};
  double nll = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (t > 0) {
      const double d = y[t - 1] - params.mu;
      const double v_prev = v;
      v = params.omega + params.beta1 * v_prev + params.alpha1 * d * d;
      if (want) {
        dv[0] = 1.0 + params.beta1 * dv[0];
        dv[1] = d * d + params.beta1 * dv[1];
        dv[2] = v_prev + params.beta1 * dv[2];
        dv[3] = -2.0 * params.alpha1 * d + params.beta1 * dv[3];
      }
    }
    if (!(v > 0.0) || !std::isfinite(v)) return std::numeric_limits<double>::infinity();
    const double sigma = std::sqrt(v);
    const double s = sigmoid(params.phi0 + params.phi1 * sigma);
    const double p_raw = 0.5 * s + offset;
    const double p = std::clamp(p_raw, kCarlClamp, 1.0 - kCarlClamp);
    const bool hit = y[t] <= threshold_q;
    nll -= hit ? std::log(p) : std::log1p(-p);
    if (!want || p != p_raw) continue;
    const double dnll_dp = hit ? -1.0 / p : 1.0 / (1.0 - p);
    const double dnll_dx = dnll_dp * 0.5 * s * (1.0 - s);
    grad[0] += dnll_dx;
    grad[1] += dnll_dx * sigma;
    const double dnll_dv = dnll_dx * params.phi1 / (2.0 * sigma);
    for (int k = 0; k < 4; ++k) grad[2 + k] += dnll_dv * dv[k];
  }
  return nll;
}

double carlvol_forecast(const CarlVolParams& params, std::span<const double> y, double threshold_q, double presample) {
  if (y.empty()) throw DataError("carlvol_forecast: empty history");
  const auto sigma = carlvol_sigma(params, y, presample);
  const double d = y.back() - params.mu;
  const double v = params.omega + params.beta1 * sigma.back() * sigma.back() + params.alpha1 * d * d;
  return carlvol_prob(params, std::sqrt(v), threshold_q);
}

CarlVolParams carlvol_fit(std::span<const double> y, double threshold_q, const CarlVolParams* init,
                          const optim::Options& options) {
  const std::size_t n = y.size();
  if (n < 60) throw DataError("carlvol_fit: need at least 60 observations, got " + std::to_string(n));
  std::size_t hits = 0;
  for (double v : y) hits += v <= threshold_q ? 1 : 0;
  if (hits == 0 || hits == n) throw DataError("carlvol_fit: degenerate sample (all hits or no hits)");
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (*lo == *hi) throw DataError("carlvol_fit: constant series");
  const double presample = sample_variance(y);
  const double scale = std::sqrt(presample);

  // Stage 1: volatility recursion by Gaussian QMLE on the demeaned series.
  CarlVolParams fitted;
  fitted.mu = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> centred(y.begin(), y.end());
  for (double& v : centred) v -= fitted.mu;
  ArmaGarchParams warm;
  const ArmaGarchParams* warm_ptr = nullptr;
  if (init && init->omega > 0.0 && init->alpha1 >= 0.0 && init->beta1 >= 0.0 && init->alpha1 + init->beta1 < 1.0) {
    warm.omega = init->omega;
    warm.arch = {init->alpha1};
    warm.garch = {init->beta1};
    warm_ptr = &warm;
  }
  ArmaGarchParams vol;
  try {
    vol = qmle_fit(centred, {0, 0, 1, 1}, warm_ptr, options).params;
  } catch (const FitFailure& e) {
    vol = ArmaGarchParams::from_vector({0, 0, 1, 1}, e.best());
  }
  fitted.omega = vol.omega;
  fitted.alpha1 = vol.arch[0];
  fitted.beta1 = vol.garch[0];

  // Stage 2: logistic link by Bernoulli MLE with the volatility path held fixed.
  // u = [phi0, phi1 * scale]
  std::vector<double> u0(2, 0.0);
  if (init) {
    u0 = {init->phi0, init->phi1 * scale};
  } else {
    const double rate = static_cast<double>(hits) / static_cast<double>(n);
    const double inner = threshold_q > 0.0 ? 2.0 * rate - 1.0 : 2.0 * rate;
    u0[0] = logit(std::clamp(inner, 1e-3, 1.0 - 1e-3));
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  optim::Objective objective = [&](std::span<const double> u, std::span<double> g) -> double {
    CarlVolParams p = fitted;
    p.phi0 = u[0];
    p.phi1 = u[1] / scale;
    double d[6];
    const double f = carlvol_nll(p, y, threshold_q, presample, g.empty() ? std::span<double>{} : std::span<double>(d, 6));
    if (!std::isfinite(f)) return std::numeric_limits<double>::infinity();
    if (!g.empty()) {
      g[0] = d[0] * inv_n;
      g[1] = d[1] / scale * inv_n;
    }
    return f * inv_n;
  };
  const auto res = optim::minimize_bfgs(objective, u0, options);
  fitted.phi0 = res.x[0];
  fitted.phi1 = res.x[1] / scale;
  if (!res.converged)
    throw FitFailure("carlvol_fit: no convergence after " + std::to_string(res.iterations) + " iterations",
                     {fitted.phi0, fitted.phi1, fitted.omega, fitted.alpha1, fitted.beta1, fitted.mu});
  return fitted;
}

}  // namespace econ
}  // namespace tailrisk
