#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tailrisk/error.hpp"
#include "tailrisk/optim.hpp"

namespace tailrisk {

struct ArmaGarchOrders {
  std::size_t ar = 3;
  std::size_t ma = 1;
  std::size_t arch = 1;   // q: lags of eps^2
  std::size_t garch = 2;  // p: lags of sigma^2

  std::size_t parameter_count() const noexcept { return ar + ma + 1 + arch + garch; }
  std::size_t max_lag() const noexcept;
};

/// ARMA(P,Q)-GARCH(q,p) without intercept:
///   x_t = sum a_i x_{t-i} + eps_t + sum b_j eps_{t-j}
///   sigma_t^2 = omega + sum alpha_j eps_{t-j}^2 + sum beta_i sigma_{t-i}^2
struct ArmaGarchParams {
  std::vector<double> ar;
  std::vector<double> ma;
  double omega = 0.0;
  std::vector<double> arch;
  std::vector<double> garch;

  ArmaGarchOrders orders() const noexcept { return {ar.size(), ma.size(), arch.size(), garch.size()}; }
  double persistence() const noexcept;
  bool is_stationary() const noexcept;
  /// Throws NumericalError unless omega > 0, coefficients >= 0 and persistence < 1.
  void validate() const;

  /// Natural ordering: ar, ma, omega, arch, garch.
  std::vector<double> to_vector() const;
  static ArmaGarchParams from_vector(const ArmaGarchOrders& orders, std::span<const double> v);
};

struct GarchFilterResult {
  std::vector<double> mu;      // conditional mean
  std::vector<double> sigma2;  // conditional variance
  std::vector<double> eps;     // x_t - mu_t
  double loglik = 0.0;
};

/// One-step-ahead conditional mean and volatility of the modelled series.
struct VolForecast {
  double mu_hat = 0.0;
  double sigma_hat = 1.0;
};

struct GpdParams {
  double xi = 0.0;
  double beta = 1.0;
  double threshold_g = 0.0;
  double tail_fraction = 0.05;
  std::size_t exceedances = 0;
};

/// p_t = 0.5 / (1 + exp(-(phi0 + phi1 sigma_t))) + 0.5 * 1(Q > 0), with a
/// GARCH(1,1) sigma_t^2 = omega + beta1 sigma_{t-1}^2 + alpha1 (y_{t-1} - mu)^2.
struct CarlVolParams {
  double phi0 = 0.0;
  double phi1 = 0.0;
  double omega = 1e-6;
  double alpha1 = 0.05;
  double beta1 = 0.9;
  double mu = 0.0;

  void validate() const;
};

struct HomogeneityInterval {
  std::size_t start = 0;  // first index of the interval
  std::size_t end = 0;    // last index, inclusive (= t)
  ArmaGarchParams params;
  double critical_value = 0.0;
  double rejected_statistic = 0.0;  // statistic of the first rejected candidate, 0 if none
  std::size_t candidates = 0;

  std::size_t length() const noexcept { return end + 1 - start; }
};

/// A fit that ran out of iterations. `best` holds the best parameters found,
/// in the model's natural vector layout.
class FitFailure : public NumericalError {
 public:
  FitFailure(const std::string& what, std::vector<double> best) : NumericalError(what), best_(std::move(best)) {}
  const std::vector<double>& best() const noexcept { return best_; }

 private:
  std::vector<double> best_;
};

namespace econ {

double normal_cdf(double x);
double normal_quantile(double p);

double sample_variance(std::span<const double> x);

// --- ARMA-GARCH ---------------------------------------------------------

GarchFilterResult garch_filter(const ArmaGarchParams& params, std::span<const double> series, double presample);

/// Gaussian quasi-log-likelihood (sum over t). Fills `grad` (natural layout)
/// when non-empty and per-observation scores (row-major n x K) when `scores`
/// is non-null. Returns -inf for parameters that make a variance non-positive.
double gaussian_loglik(const ArmaGarchParams& params, std::span<const double> series, double presample,
                       std::span<double> grad = {}, std::vector<double>* scores = nullptr);

struct QmleFit {
  ArmaGarchParams params;
  double loglik = 0.0;
  double init_loglik = 0.0;
  int iterations = 0;
  std::vector<double> trace;  // log-likelihood per accepted iteration, non-decreasing
};

ArmaGarchParams default_init(const ArmaGarchOrders& orders, std::span<const double> series);

/// Constrained QMLE through an unconstrained reparameterisation: omega =
/// exp(u), persistence budget s = sigmoid(v), coefficient shares from
/// softplus weights. The presample variance defaults to the sample variance.
QmleFit qmle_fit(std::span<const double> series, const ArmaGarchOrders& orders, const ArmaGarchParams* init = nullptr,
                 const optim::Options& options = {}, std::optional<double> presample = std::nullopt);

/// Maps between natural parameters and the unconstrained search space.
std::vector<double> to_unconstrained(const ArmaGarchParams& params);
ArmaGarchParams from_unconstrained(const ArmaGarchOrders& orders, std::span<const double> u);

VolForecast forecast(const ArmaGarchParams& params, std::span<const double> history, double presample);

// --- GPD tail -----------------------------------------------------------

double gpd_cdf(const GpdParams& params, double x);
double gpd_loglik(double xi, double beta, std::span<const double> exceedances, std::span<double> grad = {});

/// MLE of (xi, beta) on raw exceedance amounts y > 0.
GpdParams gpd_fit_exceedances(std::span<const double> exceedances);

/// Threshold g = empirical (1 - tail_fraction) quantile of the residuals, GPD
/// fitted to the amounts above g. Needs at least `min_exceedances` of them.
GpdParams gpd_fit(std::span<const double> residuals, double tail_fraction = 0.05, std::size_t min_exceedances = 50);

/// Mass the GPD branch carries: the normal tail at g, so the splice is continuous.
double evt_tail_mass(const GpdParams& gpd);

/// Standardised level z with P(Z > z) = prob under the spliced normal/GPD tail.
double evt_quantile(const GpdParams& gpd, double prob);

double exceedance_prob_normal(const VolForecast& f, double tvar);
/// evt_tail_mass * (1 - G(z - g)) for z >= g, the normal tail below g.
double exceedance_prob_evt(const VolForecast& f, const GpdParams& gpd, double tvar);

// --- CARL-vol -----------------------------------------------------------

inline constexpr double kCarlClamp = 1e-9;

double carlvol_prob(const CarlVolParams& params, double sigma, double threshold_q);

/// sigma_t path of the CARL-vol GARCH(1,1) recursion, seeded with `presample`.
std::vector<double> carlvol_sigma(const CarlVolParams& params, std::span<const double> y, double presample);

/// Bernoulli negative log-likelihood with hits 1(y_t <= Q). Gradient layout:
/// phi0, phi1, omega, alpha1, beta1, mu.
double carlvol_nll(const CarlVolParams& params, std::span<const double> y, double threshold_q, double presample,
                   std::span<double> grad = {});

CarlVolParams carlvol_fit(std::span<const double> y, double threshold_q, const CarlVolParams* init = nullptr,
                          const optim::Options& options = {});

/// P(y_{n} <= Q) one step past the sample.
double carlvol_forecast(const CarlVolParams& params, std::span<const double> y, double threshold_q, double presample);

// --- Local parametric approach ------------------------------------------

struct LpaOptions {
  std::size_t step = 5;
  std::size_t min_length = 240;
  std::size_t max_length = 2880;
  std::size_t bootstrap = 100;
  std::size_t min_segment = 20;  // smallest sub-interval a breakpoint may leave on either side
  double level = 0.95;
  std::uint64_t seed = 1;
};

/// Longest trailing interval ending at t on which a constant GARCH(1,1) is not
/// rejected by a sup-score (LM form of the likelihood ratio) test with
/// multiplier-bootstrap critical values.
HomogeneityInterval lpa_select_interval(std::span<const double> series, std::size_t t, const LpaOptions& options);
HomogeneityInterval lpa_select_interval_serial(std::span<const double> series, std::size_t t,
                                               const LpaOptions& options);

}  // namespace econ
}  // namespace tailrisk
