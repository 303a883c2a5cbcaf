#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "tailrisk/econ.hpp"

namespace tailrisk {

std::size_t ArmaGarchOrders::max_lag() const noexcept { return std::max({ar, ma, arch, garch}); }

double ArmaGarchParams::persistence() const noexcept {
  return std::accumulate(arch.begin(), arch.end(), 0.0) + std::accumulate(garch.begin(), garch.end(), 0.0);
}

bool ArmaGarchParams::is_stationary() const noexcept {
  if (!(omega > 0.0) || !std::isfinite(omega)) return false;
  for (double a : arch)
    if (!(a >= 0.0)) return false;
  for (double b : garch)
    if (!(b >= 0.0)) return false;
  return persistence() < 1.0;
}

void ArmaGarchParams::validate() const {
  if (!is_stationary())
    throw NumericalError("ARMA-GARCH parameters violate omega > 0, coefficients >= 0, persistence < 1 (persistence " +
                         std::to_string(persistence()) + ")");
}

std::vector<double> ArmaGarchParams::to_vector() const {
  std::vector<double> v;
  v.insert(v.end(), ar.begin(), ar.end());
  v.insert(v.end(), ma.begin(), ma.end());
  v.push_back(omega);
  v.insert(v.end(), arch.begin(), arch.end());
  v.insert(v.end(), garch.begin(), garch.end());
  return v;
}

ArmaGarchParams ArmaGarchParams::from_vector(const ArmaGarchOrders& o, std::span<const double> v) {
  if (v.size() != o.parameter_count()) throw NumericalError("ARMA-GARCH vector has wrong length");
  ArmaGarchParams p;
  auto it = v.begin();
  p.ar.assign(it, it + o.ar);
  it += o.ar;
  p.ma.assign(it, it + o.ma);
  it += o.ma;
  p.omega = *it++;
  p.arch.assign(it, it + o.arch);
  it += o.arch;
  p.garch.assign(it, it + o.garch);
  return p;
}

namespace econ {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
  if (!(p < 1.0)) return std::numeric_limits<double>::infinity();
  // Acklam's rational approximation, then one Halley refinement.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  const double lo = 0.02425, hi = 1.0 - lo;
  double x;
  if (p < lo) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= hi) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double inv_softplus(double y) { return y > 30.0 ? y : std::log(std::expm1(y)); }

}  // namespace

double gaussian_loglik(const ArmaGarchParams& params, std::span<const double> x, double presample,
                       std::span<double> grad, std::vector<double>* scores) {
  const std::size_t P = params.ar.size(), Q = params.ma.size(), q = params.arch.size(), p = params.garch.size();
  const std::size_t K = P + Q + 1 + q + p;
  const std::size_t i_omega = P + Q, i_arch = P + Q + 1, i_garch = P + Q + 1 + q;
  const std::size_t n = x.size();
  const bool want = !grad.empty() || scores != nullptr;
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  if (scores) scores->assign(want ? n * K : 0, 0.0);

  std::vector<double> eps(n), s2(n);
  std::vector<double> deps(want ? n * K : 0), ds2(want ? n * K : 0);
  std::vector<double> dmu(K), dv(K);
  double ll = 0.0;

  for (std::size_t t = 0; t < n; ++t) {
    double mu = 0.0;
    for (std::size_t i = 1; i <= P; ++i)
      if (t >= i) mu += params.ar[i - 1] * x[t - i];
    for (std::size_t j = 1; j <= Q; ++j)
      if (t >= j) mu += params.ma[j - 1] * eps[t - j];
    const double e = x[t] - mu;
    double v = params.omega;
    for (std::size_t j = 1; j <= q; ++j) v += params.arch[j - 1] * (t >= j ? eps[t - j] * eps[t - j] : presample);
    for (std::size_t i = 1; i <= p; ++i) v += params.garch[i - 1] * (t >= i ? s2[t - i] : presample);
    if (!(v > 0.0) || !std::isfinite(v) || !std::isfinite(e)) return -std::numeric_limits<double>::infinity();
    eps[t] = e;
    s2[t] = v;
    ll += -0.5 * (kLog2Pi + std::log(v) + e * e / v);

    if (!want) continue;
    std::fill(dmu.begin(), dmu.end(), 0.0);
    for (std::size_t i = 1; i <= P; ++i)
      if (t >= i) dmu[i - 1] += x[t - i];
    for (std::size_t j = 1; j <= Q; ++j) {
      if (t < j) continue;
      dmu[P + j - 1] += eps[t - j];
      const double b = params.ma[j - 1];
      const double* de = &deps[(t - j) * K];
      for (std::size_t k = 0; k < K; ++k) dmu[k] += b * de[k];
    }
    double* de_t = &deps[t * K];
    for (std::size_t k = 0; k < K; ++k) de_t[k] = -dmu[k];

    std::fill(dv.begin(), dv.end(), 0.0);
    dv[i_omega] = 1.0;
    for (std::size_t j = 1; j <= q; ++j) {
      if (t >= j) {
        const double el = eps[t - j];
        dv[i_arch + j - 1] += el * el;
        const double coef = 2.0 * params.arch[j - 1] * el;
        const double* de = &deps[(t - j) * K];
        for (std::size_t k = 0; k < K; ++k) dv[k] += coef * de[k];
      } else {
        dv[i_arch + j - 1] += presample;
      }
    }
    for (std::size_t i = 1; i <= p; ++i) {
      if (t >= i) {
        dv[i_garch + i - 1] += s2[t - i];
        const double b = params.garch[i - 1];
        const double* ds = &ds2[(t - i) * K];
        for (std::size_t k = 0; k < K; ++k) dv[k] += b * ds[k];
      } else {
        dv[i_garch + i - 1] += presample;
      }
    }
    std::copy(dv.begin(), dv.end(), ds2.begin() + static_cast<std::ptrdiff_t>(t * K));

    const double a = -0.5 * (1.0 / v - e * e / (v * v));
    const double c = -e / v;
    for (std::size_t k = 0; k < K; ++k) {
      const double dl = a * dv[k] + c * de_t[k];
      if (!grad.empty()) grad[k] += dl;
      if (scores) (*scores)[t * K + k] = dl;
    }
  }
  return ll;
}

GarchFilterResult garch_filter(const ArmaGarchParams& params, std::span<const double> x, double presample) {
  params.validate();
  GarchFilterResult out;
  const std::size_t n = x.size();
  out.mu.resize(n);
  out.sigma2.resize(n);
  out.eps.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    double mu = 0.0;
    for (std::size_t i = 1; i <= params.ar.size(); ++i)
      if (t >= i) mu += params.ar[i - 1] * x[t - i];
    for (std::size_t j = 1; j <= params.ma.size(); ++j)
      if (t >= j) mu += params.ma[j - 1] * out.eps[t - j];
    double v = params.omega;
    for (std::size_t j = 1; j <= params.arch.size(); ++j)
      v += params.arch[j - 1] * (t >= j ? out.eps[t - j] * out.eps[t - j] : presample);
    for (std::size_t i = 1; i <= params.garch.size(); ++i)
      v += params.garch[i - 1] * (t >= i ? out.sigma2[t - i] : presample);
    out.mu[t] = mu;
    out.sigma2[t] = v;
    out.eps[t] = x[t] - mu;
    out.loglik += -0.5 * (kLog2Pi + std::log(v) + out.eps[t] * out.eps[t] / v);
  }
  return out;
}

VolForecast forecast(const ArmaGarchParams& params, std::span<const double> history, double presample) {
  const std::size_t n = history.size();
  if (n <= params.orders().max_lag()) throw DataError("forecast: history shorter than the model's maximum lag");
  const GarchFilterResult f = garch_filter(params, history, presample);
  double mu = 0.0;
  for (std::size_t i = 1; i <= params.ar.size(); ++i) mu += params.ar[i - 1] * history[n - i];
  for (std::size_t j = 1; j <= params.ma.size(); ++j) mu += params.ma[j - 1] * f.eps[n - j];
  double v = params.omega;
  for (std::size_t j = 1; j <= params.arch.size(); ++j) v += params.arch[j - 1] * f.eps[n - j] * f.eps[n - j];
  for (std::size_t i = 1; i <= params.garch.size(); ++i) v += params.garch[i - 1] * f.sigma2[n - i];
  return {mu, std::sqrt(v)};
}

std::vector<double> to_unconstrained(const ArmaGarchParams& params) {
  std::vector<double> u;
  u.insert(u.end(), params.ar.begin(), params.ar.end());
  u.insert(u.end(), params.ma.begin(), params.ma.end());
  u.push_back(std::log(std::max(params.omega, 1e-300)));
  const std::size_t m = params.arch.size() + params.garch.size();
  if (m == 0) return u;
  const double s = std::clamp(params.persistence(), 1e-6, 1.0 - 1e-6);
  u.push_back(std::log(s / (1.0 - s)));
  auto push_share = [&](double c) { u.push_back(inv_softplus(std::max(c / s, 1e-8))); };
  for (double c : params.arch) push_share(c);
  for (double c : params.garch) push_share(c);
  return u;
}

ArmaGarchParams from_unconstrained(const ArmaGarchOrders& o, std::span<const double> u) {
  ArmaGarchParams p;
  auto it = u.begin();
  p.ar.assign(it, it + o.ar);
  it += o.ar;
  p.ma.assign(it, it + o.ma);
  it += o.ma;
  p.omega = std::max(std::exp(*it++), std::numeric_limits<double>::min());
  const std::size_t m = o.arch + o.garch;
  if (m == 0) return p;
  const double s = std::min(sigmoid(*it++), 1.0 - 1e-9);
  double total = 0.0;
  std::vector<double> w(m);
  for (std::size_t k = 0; k < m; ++k) total += (w[k] = softplus(it[k]));
  for (std::size_t k = 0; k < m; ++k) {
    const double c = s * w[k] / total;
    if (k < o.arch)
      p.arch.push_back(c);
    else
      p.garch.push_back(c);
  }
  return p;
}

ArmaGarchParams default_init(const ArmaGarchOrders& o, std::span<const double> series) {
  const double var = sample_variance(series);
  ArmaGarchParams p;
  p.ar.assign(o.ar, 0.0);
  p.ma.assign(o.ma, 0.0);
  const double arch_total = o.arch ? 0.05 : 0.0;
  const double garch_total = o.garch ? 0.85 : 0.0;
  for (std::size_t j = 0; j < o.arch; ++j) p.arch.push_back(arch_total / static_cast<double>(o.arch));
  for (std::size_t i = 0; i < o.garch; ++i) p.garch.push_back(garch_total / static_cast<double>(o.garch));
  p.omega = var * (1.0 - arch_total - garch_total);
  return p;
}

QmleFit qmle_fit(std::span<const double> series, const ArmaGarchOrders& orders, const ArmaGarchParams* init,
                 const optim::Options& options, std::optional<double> presample_override) {
  const std::size_t n = series.size();
  const std::size_t K = orders.parameter_count();
  if (n < 10 * K)
    throw DataError("qmle_fit: " + std::to_string(n) + " observations for " + std::to_string(K) +
                    " parameters (need >= 10x)");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (*lo == *hi) throw DataError("qmle_fit: constant series");
  const double presample = presample_override.value_or(sample_variance(series));
  if (!(presample > 0.0) || !std::isfinite(presample)) throw DataError("qmle_fit: presample variance must be positive");

  ArmaGarchParams start = init ? *init : default_init(orders, series);
  if (start.orders().parameter_count() != K || !start.is_stationary()) start = default_init(orders, series);

  const std::size_t P = orders.ar, Q = orders.ma, q = orders.arch, m = orders.arch + orders.garch;
  const double inv_n = 1.0 / static_cast<double>(n);

  optim::Objective objective = [&](std::span<const double> u, std::span<double> g) -> double {
    const ArmaGarchParams theta = from_unconstrained(orders, u);
    std::vector<double> dl(g.empty() ? 0 : K);
    const double ll = gaussian_loglik(theta, series, presample, dl);
    if (!std::isfinite(ll)) return std::numeric_limits<double>::infinity();
    if (g.empty()) return -ll * inv_n;
    // Chain rule back to u; objective is -ll/n.
    for (std::size_t k = 0; k < P + Q; ++k) g[k] = -dl[k] * inv_n;
    g[P + Q] = -dl[P + Q] * theta.omega * inv_n;
    if (m > 0) {
      const double s = sigmoid(u[P + Q + 1]);
      const auto z = u.subspan(P + Q + 2, m);
      std::vector<double> sp(m), dc(m);
      double total = 0.0;
      for (std::size_t k = 0; k < m; ++k) total += (sp[k] = softplus(z[k]));
      double dv = 0.0, weighted = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        dc[k] = dl[P + Q + 1 + k];
        const double c = s * sp[k] / total;
        dv += dc[k] * c * (1.0 - s);
        weighted += dc[k] * sp[k] / total;
      }
      g[P + Q + 1] = -dv * inv_n;
      for (std::size_t k = 0; k < m; ++k) g[P + Q + 2 + k] = -(s * sigmoid(z[k]) / total * (dc[k] - weighted)) * inv_n;
    }
    (void)q;
    return -ll * inv_n;
  };

  QmleFit fit;
  const std::vector<double> u0 = to_unconstrained(start);
  fit.init_loglik = -objective(u0, {}) * static_cast<double>(n);
  const optim::Result res = optim::minimize_bfgs(objective, u0, options);
  fit.params = from_unconstrained(orders, res.x);
  fit.iterations = res.iterations;
  for (double v : res.trace) fit.trace.push_back(-v * static_cast<double>(n));
  fit.loglik = -res.value * static_cast<double>(n);
  if (!res.converged)
    throw FitFailure("qmle_fit: no convergence after " + std::to_string(res.iterations) +
                         " iterations (gradient norm " + std::to_string(res.gradient_norm) + ")",
                     fit.params.to_vector());
  return fit;
}

}  // namespace econ
}  // namespace tailrisk
