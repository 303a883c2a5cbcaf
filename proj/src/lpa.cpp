#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "tailrisk/econ.hpp"
#include "tailrisk/timeseries.hpp"

namespace tailrisk::econ {

namespace {

constexpr ArmaGarchOrders kGarch11{0, 0, 1, 1};
constexpr std::size_t K = 3;

// Inverse of a K x K symmetric positive definite matrix after scaling to unit
// diagonal. Returns the quadratic-form matrix in original units.
struct QuadForm {
  double m[K][K] = {};

  double operator()(const double* v) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < K; ++j) acc += v[i] * m[i][j] * v[j];
    return acc;
  }
};

QuadForm inverse_form(const double (&cov)[K][K]) {
  double d[K];
  for (std::size_t i = 0; i < K; ++i) d[i] = cov[i][i] > 0.0 ? 1.0 / std::sqrt(cov[i][i]) : 0.0;
  double a[K][K];
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j) a[i][j] = cov[i][j] * d[i] * d[j];
  for (std::size_t i = 0; i < K; ++i) a[i][i] += 1e-10;
  // Cholesky a = L L^T, in place (lower triangle).
  for (std::size_t j = 0; j < K; ++j) {
    double s = a[j][j];
    for (std::size_t k = 0; k < j; ++k) s -= a[j][k] * a[j][k];
    if (!(s > 0.0)) throw NumericalError("lpa: score covariance is not positive definite");
    a[j][j] = std::sqrt(s);
    for (std::size_t i = j + 1; i < K; ++i) {
      double r = a[i][j];
      for (std::size_t k = 0; k < j; ++k) r -= a[i][k] * a[j][k];
      a[i][j] = r / a[j][j];
    }
  }
  QuadForm out;
  for (std::size_t c = 0; c < K; ++c) {
    double x[K] = {};
    for (std::size_t i = 0; i < K; ++i) {
      double r = i == c ? 1.0 : 0.0;
      for (std::size_t k = 0; k < i; ++k) r -= a[i][k] * x[k];
      x[i] = r / a[i][i];
    }
    for (std::size_t ii = K; ii-- > 0;) {
      double r = x[ii];
      for (std::size_t k = ii + 1; k < K; ++k) r -= a[k][ii] * x[k];
      x[ii] = r / a[ii][ii];
    }
    for (std::size_t i = 0; i < K; ++i) out.m[i][c] = x[i] * d[i] * d[c];
  }
  return out;
}

struct Candidate {
  std::size_t length = 0;
  ArmaGarchParams params;
  std::vector<double> scores;  // centred, length x K, oldest first
  QuadForm form;
  std::vector<std::size_t> segments;  // recent-segment lengths tested
  double statistic = 0.0;
  std::size_t argmax_segment = 0;
};

ArmaGarchParams fit_window(std::span<const double> window, const ArmaGarchParams* warm) {
  try {
    return qmle_fit(window, kGarch11, warm).params;
  } catch (const FitFailure& e) {
    return ArmaGarchParams::from_vector(kGarch11, e.best());
  }
}

Candidate build_candidate(std::span<const double> series, std::size_t t, std::size_t length,
                          const ArmaGarchParams* warm, const LpaOptions& options) {
  Candidate c;
  c.length = length;
  const auto window = series.subspan(t + 1 - length, length);
  c.params = fit_window(window, warm);
  gaussian_loglik(c.params, window, sample_variance(window), {}, &c.scores);
  double mean[K] = {};
  for (std::size_t i = 0; i < length; ++i)
    for (std::size_t k = 0; k < K; ++k) mean[k] += c.scores[i * K + k];
  for (double& m : mean) m /= static_cast<double>(length);
  double cov[K][K] = {};
  for (std::size_t i = 0; i < length; ++i) {
    double* s = &c.scores[i * K];
    for (std::size_t k = 0; k < K; ++k) s[k] -= mean[k];
    for (std::size_t a = 0; a < K; ++a)
      for (std::size_t b = 0; b < K; ++b) cov[a][b] += s[a] * s[b];
  }
  c.form = inverse_form(cov);
  for (std::size_t m = options.min_segment; m + options.min_segment <= length; m += options.step)
    c.segments.push_back(m);

  // Observed sup-LM over recent-segment lengths.
  double suffix[K] = {};
  std::size_t next = 0;
  for (std::size_t m = 1; m <= length && next < c.segments.size(); ++m) {
    const double* s = &c.scores[(length - m) * K];
    for (std::size_t k = 0; k < K; ++k) suffix[k] += s[k];
    if (m != c.segments[next]) continue;
    const double lambda = static_cast<double>(m) / static_cast<double>(length);
    const double lm = c.form(suffix) / (lambda * (1.0 - lambda));
    if (lm > c.statistic) {
      c.statistic = lm;
      c.argmax_segment = m;
    }
    ++next;
  }
  return c;
}

ArmaGarchParams fit_window(std::span<const double> window, const ArmaGarchParams* warm, double presample) {
  try {
    return qmle_fit(window, kGarch11, warm, {}, presample).params;
  } catch (const FitFailure& e) {
    return ArmaGarchParams::from_vector(kGarch11, e.best());
  }
}

// Break location inside a rejected candidate: the recent-segment length that
// maximises the two-segment likelihood. The recent segment's variance
// recursion starts from the older segment's one-step forecast.
std::size_t locate_break(std::span<const double> series, std::size_t t, const Candidate& c, std::size_t shortest) {
  const auto window = series.subspan(t + 1 - c.length, c.length);
  ArmaGarchParams head_fit = c.params, tail_fit = c.params;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t where = c.argmax_segment;
  for (std::size_t m : c.segments) {
    if (m < shortest || c.length - m < 10 * K) continue;
    const auto head = window.first(c.length - m), tail = window.last(m);
    const double head_presample = sample_variance(head);
    head_fit = fit_window(head, &head_fit, head_presample);
    const double carry = std::pow(forecast(head_fit, head, head_presample).sigma_hat, 2);
    tail_fit = fit_window(tail, &tail_fit, carry);
    const double ll = gaussian_loglik(head_fit, head, head_presample) + gaussian_loglik(tail_fit, tail, carry);
    if (ll > best) {
      best = ll;
      where = m;
    }
  }
  return where;
}

std::vector<double> draw_weights(std::uint64_t seed, std::size_t b, std::size_t count) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> e(count);
  for (double& v : e) v = normal(rng);
  return e;
}

// max over candidates of the bootstrap sup-LM for draw b.
double bootstrap_max(const std::vector<Candidate>& candidates, std::size_t b, const LpaOptions& options) {
  const std::size_t longest = candidates.back().length;
  const std::vector<double> e = draw_weights(options.seed, b, longest);
  double best = 0.0;
  std::vector<double> partial;
  for (const Candidate& c : candidates) {
    if (c.segments.empty()) continue;
    const std::size_t L = c.length;
    double total[K] = {};
    for (std::size_t i = 0; i < L; ++i) {
      const double w = e[L - 1 - i];
      for (std::size_t k = 0; k < K; ++k) total[k] += w * c.scores[i * K + k];
    }
    double suffix[K] = {}, centred[K];
    std::size_t next = 0;
    for (std::size_t m = 1; m <= L && next < c.segments.size(); ++m) {
      const double w = e[m - 1];
      const double* s = &c.scores[(L - m) * K];
      for (std::size_t k = 0; k < K; ++k) suffix[k] += w * s[k];
      if (m != c.segments[next]) continue;
      const double lambda = static_cast<double>(m) / static_cast<double>(L);
      for (std::size_t k = 0; k < K; ++k) centred[k] = suffix[k] - lambda * total[k];
      best = std::max(best, c.form(centred) / (lambda * (1.0 - lambda)));
      ++next;
    }
  }
  return best;
}

HomogeneityInterval select(std::span<const double> series, std::size_t t, const LpaOptions& options, bool parallel) {
  if (options.step == 0 || options.min_length == 0) throw ConfigError("lpa: step and min_length must be positive");
  if (!(options.level > 0.0 && options.level < 1.0)) throw ConfigError("lpa: level must lie in (0, 1)");
  if (t >= series.size()) throw DataError("lpa: t is past the end of the series");
  if (t + 1 < options.min_length)
    throw DataError("lpa: " + std::to_string(t + 1) + " observations before t, need at least " +
                    std::to_string(options.min_length));
  const std::size_t upper = std::min(options.max_length, t + 1);
  std::vector<std::size_t> lengths;
  for (std::size_t L = options.min_length; L <= upper; L += options.step) lengths.push_back(L);

  HomogeneityInterval out;
  out.end = t;
  out.candidates = lengths.size();
  if (lengths.size() == 1) {
    out.start = t + 1 - lengths[0];
    out.params = fit_window(series.subspan(out.start, lengths[0]), nullptr);
    return out;
  }

  std::vector<Candidate> candidates;
  candidates.reserve(lengths.size());
  const ArmaGarchParams* warm = nullptr;
  for (std::size_t L : lengths) {
    candidates.push_back(build_candidate(series, t, L, warm, options));
    warm = &candidates.back().params;
  }

  std::vector<double> maxima(options.bootstrap);
  const auto draws = static_cast<long long>(options.bootstrap);
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long b = 0; b < draws; ++b)
      maxima[static_cast<std::size_t>(b)] = bootstrap_max(candidates, static_cast<std::size_t>(b), options);
  } else {
    for (long long b = 0; b < draws; ++b)
      maxima[static_cast<std::size_t>(b)] = bootstrap_max(candidates, static_cast<std::size_t>(b), options);
  }
  std::sort(maxima.begin(), maxima.end());
  out.critical_value = maxima.empty() ? 0.0 : maxima[ts::quantile_rank(options.level, maxima.size()) - 1];

  std::size_t chosen = candidates.size() - 1;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (!(candidates[k].statistic > out.critical_value)) continue;
    out.rejected_statistic = candidates[k].statistic;
    std::size_t cap = locate_break(series, t, candidates[k], candidates.front().length);
    if (k > 0) cap = std::min(cap, candidates[k - 1].length);
    chosen = 0;
    for (std::size_t j = 0; j < candidates.size(); ++j)
      if (candidates[j].length <= cap) chosen = j;
    break;
  }
  out.start = t + 1 - candidates[chosen].length;
  out.params = candidates[chosen].params;
  return out;
}

}  // namespace

HomogeneityInterval lpa_select_interval(std::span<const double> series, std::size_t t, const LpaOptions& options) {
  return select(series, t, options, true);
}

HomogeneityInterval lpa_select_interval_serial(std::span<const double> series, std::size_t t,
                                               const LpaOptions& options) {
  return select(series, t, options, false);
}

}  // namespace tailrisk::econ
