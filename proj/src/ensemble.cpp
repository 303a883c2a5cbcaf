#include "tailrisk/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>

#include "tailrisk/io.hpp"
#include "tailrisk/parallel.hpp"

namespace tailrisk::ensemble {

double logit(double p, double eps) {
  if (!(p >= 0.0 && p <= 1.0)) throw DataError("logit: probability outside [0, 1]");
  const double q = std::clamp(p, eps, 1.0 - eps);
  return std::log(q / (1.0 - q));
}

std::vector<double> logit_rescale(std::span<const double> p, double eps) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = logit(p[i], eps);
  if (out.empty()) return out;
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
  const double a = *lo, d = *hi - *lo;
  for (double& v : out) v = d > 0.0 ? (v - a) / d : 0.5;
  return out;
}

std::vector<double> ridge_solve(std::span<const double> gram, std::span<const double> cross, std::size_t k,
                                double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("ridge: lambda must be non-negative");
  std::vector<double> a(gram.begin(), gram.end());
  for (std::size_t i = 0; i < k; ++i) a[i * k + i] += lambda;
  for (std::size_t j = 0; j < k; ++j) {
    double s = a[j * k + j];
    for (std::size_t m = 0; m < j; ++m) s -= a[j * k + m] * a[j * k + m];
    if (!(s > 0.0)) throw NumericalError("ridge: normal equations are singular");
    a[j * k + j] = std::sqrt(s);
    for (std::size_t i = j + 1; i < k; ++i) {
      double r = a[i * k + j];
      for (std::size_t m = 0; m < j; ++m) r -= a[i * k + m] * a[j * k + m];
      a[i * k + j] = r / a[j * k + j];
    }
  }
  std::vector<double> beta(cross.begin(), cross.end());
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t m = 0; m < i; ++m) beta[i] -= a[i * k + m] * beta[m];
    beta[i] /= a[i * k + i];
  }
  for (std::size_t i = k; i-- > 0;) {
    for (std::size_t m = i + 1; m < k; ++m) beta[i] -= a[m * k + i] * beta[m];
    beta[i] /= a[i * k + i];
  }
  return beta;
}

RidgeCoefficients ridge_fit(const StackInput& input, double lambda) {
  const std::size_t k = input.columns, n = input.rows();
  if (k == 0 || input.x.size() != n * k || input.y.size() != n)
    throw DataError("ridge_fit: design matrix and target do not match");
  if (n < k) throw DataError("ridge_fit: need at least as many rows as columns");
  std::vector<double> gram(k * k, 0.0), cross(k, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* x = &input.x[r * k];
    for (std::size_t i = 0; i < k; ++i) {
      cross[i] += x[i] * input.y[r];
      for (std::size_t j = 0; j <= i; ++j) gram[i * k + j] += x[i] * x[j];
    }
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < i; ++j) gram[j * k + i] = gram[i * k + j];
  return {ridge_solve(gram, cross, k, lambda), lambda};
}

double ensemble_predict(const RidgeCoefficients& coeffs, std::span<const double> row) {
  if (row.size() != coeffs.beta.size()) throw DataError("ensemble_predict: row width does not match coefficients");
  double s = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) s += coeffs.beta[j] * row[j];
  return std::clamp(s, 0.0, 1.0);
}

namespace {

// Running sums over rows [begin, begin + k) of the raw log-odds, for rows with a label.
struct Prefix {
  std::vector<double> xx, x, xy, y, n;  // (rows + 1) blocks each
};

StackResult run_stack(std::span<const ProbabilitySeries> level0, const LabelSeries& labels,
                      const StackOptions& options, bool parallel) {
  const std::size_t k = level0.size();
  if (k == 0) throw DataError("stack: no level-0 series");
  if (!(options.lambda > 0.0)) throw ConfigError("stack: lambda must be positive");
  std::size_t begin = 0, end = SIZE_MAX;
  for (const auto& s : level0) {
    begin = std::max(begin, s.first);
    end = std::min(end, s.end());
  }
  if (end <= begin) throw DataError("stack: level-0 series do not overlap");
  const std::size_t rows = end - begin;

  std::vector<double> logits(rows * k);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < k; ++j) logits[r * k + j] = logit(level0[j].at_return(begin + r), options.eps);

  // Prefix sums: block r holds sums over rows [0, r).
  Prefix pre;
  pre.xx.assign((rows + 1) * k * k, 0.0);
  pre.x.assign((rows + 1) * k, 0.0);
  pre.xy.assign((rows + 1) * k, 0.0);
  pre.y.assign(rows + 1, 0.0);
  pre.n.assign(rows + 1, 0.0);
  std::vector<double> lo(rows * k), hi(rows * k);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(&pre.xx[r * k * k], k * k, &pre.xx[(r + 1) * k * k]);
    std::copy_n(&pre.x[r * k], k, &pre.x[(r + 1) * k]);
    std::copy_n(&pre.xy[r * k], k, &pre.xy[(r + 1) * k]);
    pre.y[r + 1] = pre.y[r];
    pre.n[r + 1] = pre.n[r];
    const double* x = &logits[r * k];
    for (std::size_t j = 0; j < k; ++j) {
      lo[r * k + j] = r == 0 ? x[j] : std::min(lo[(r - 1) * k + j], x[j]);
      hi[r * k + j] = r == 0 ? x[j] : std::max(hi[(r - 1) * k + j], x[j]);
    }
    const std::size_t t = begin + r;
    if (!labels.covers(t)) continue;
    const double target = labels.at_return(t) == 2 ? 1.0 : 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      pre.x[(r + 1) * k + i] += x[i];
      pre.xy[(r + 1) * k + i] += x[i] * target;
      for (std::size_t j = 0; j < k; ++j) pre.xx[(r + 1) * k * k + i * k + j] += x[i] * x[j];
    }
    pre.y[r + 1] += target;
    pre.n[r + 1] += 1.0;
  }

  std::vector<std::optional<std::vector<double>>> fits(rows);
  std::vector<double> scores(rows, 0.0);
  auto fit_row = [&](std::size_t r) {
    const std::size_t from = options.window > 0 && r > options.window ? r - options.window : 0;
    const double count = pre.n[r] - pre.n[from];
    if (count < static_cast<double>(std::max<std::size_t>(options.warm_up, 1))) return;
    // Column scaling z = c + s x from the log-odds range of rows [0, r].
    std::vector<double> s(k), c(k), gram(k * k), cross(k);
    for (std::size_t j = 0; j < k; ++j) {
      const double d = hi[r * k + j] - lo[r * k + j];
      s[j] = d > 0.0 ? 1.0 / d : 0.0;
      c[j] = d > 0.0 ? -lo[r * k + j] / d : 0.5;
    }
    auto diff = [&](const std::vector<double>& v, std::size_t width, std::size_t idx) {
      return v[r * width + idx] - v[from * width + idx];
    };
    const double sy = pre.y[r] - pre.y[from];
    for (std::size_t i = 0; i < k; ++i) {
      const double sxi = diff(pre.x, k, i);
      cross[i] = s[i] * diff(pre.xy, k, i) + c[i] * sy;
      for (std::size_t j = 0; j < k; ++j) {
        const double sxj = diff(pre.x, k, j);
        gram[i * k + j] =
            s[i] * s[j] * diff(pre.xx, k * k, i * k + j) + s[i] * c[j] * sxi + c[i] * s[j] * sxj + count * c[i] * c[j];
      }
    }
    RidgeCoefficients coeffs{ridge_solve(gram, cross, k, options.lambda), options.lambda};
    std::vector<double> z(k);
    for (std::size_t j = 0; j < k; ++j) z[j] = c[j] + s[j] * logits[r * k + j];
    scores[r] = ensemble_predict(coeffs, z);
    fits[r] = std::move(coeffs.beta);
  };
  const auto count = static_cast<long long>(rows);
  if (parallel) {
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (long long r = 0; r < count; ++r) fit_row(static_cast<std::size_t>(r));
  } else {
    for (long long r = 0; r < count; ++r) fit_row(static_cast<std::size_t>(r));
  }

  StackResult out;
  std::size_t r0 = 0;
  while (r0 < rows && !fits[r0]) ++r0;
  if (r0 == rows)
    throw DataError("stack: fewer than " + std::to_string(options.warm_up) + " labelled rows for the warm-up");
  out.meta.first = begin + r0;
  for (std::size_t r = r0; r < rows; ++r) {
    if (!fits[r]) throw DataError("stack: labels stop inside the stacking range");
    out.meta.values.push_back(scores[r]);
    out.betas.push_back(std::move(*fits[r]));
  }
  return out;
}

}  // namespace

StackResult stack_online(std::span<const ProbabilitySeries> level0, const LabelSeries& labels,
                         const StackOptions& options) {
  return run_stack(level0, labels, options, true);
}

StackResult stack_online_serial(std::span<const ProbabilitySeries> level0, const LabelSeries& labels,
                                const StackOptions& options) {
  return run_stack(level0, labels, options, false);
}

void write_coefficients_csv(const StackResult& result, const ReturnSeries& returns, std::ostream& out) {
  const std::size_t k = result.betas.empty() ? 0 : result.betas.front().size();
  out << "timestamp";
  for (std::size_t j = 1; j <= k; ++j) out << ",beta_" << j;
  out << '\n';
  for (std::size_t i = 0; i < result.betas.size(); ++i) {
    out << io::format_timestamp(returns.timestamps().at(result.meta.first + i));
    for (double b : result.betas[i]) out << ',' << io::format_double(b);
    out << '\n';
  }
}

}  // namespace tailrisk::ensemble
