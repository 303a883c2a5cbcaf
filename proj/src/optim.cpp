#include "tailrisk/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tailrisk::optim {

namespace {

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double evaluate(const Objective& f, const std::vector<double>& x, std::vector<double>& g) {
  const double value = f(x, g);
  if (std::isfinite(value) && !all_finite(g)) g = numerical_gradient(f, x);
  return value;
}

}  // namespace

std::vector<double> numerical_gradient(const Objective& f, std::span<const double> x, double rel_step) {
  std::vector<double> g(x.size()), probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double up = f(probe, {});
    probe[i] = x[i] - h;
    const double down = f(probe, {});
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

Result minimize_bfgs(const Objective& f, std::vector<double> x0, const Options& options) {
  const std::size_t n = x0.size();
  Result res;
  res.x = std::move(x0);
  std::vector<double> g(n);
  res.value = evaluate(f, res.x, g);
  res.trace.push_back(res.value);
  if (!std::isfinite(res.value)) return res;

  // Inverse Hessian approximation, row-major.
  std::vector<double> h(n * n, 0.0);
  auto reset = [&] {
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) h[i * n + i] = 1.0;
  };
  reset();

  std::vector<double> dir(n), x_new(n), g_new(n), s(n), y(n), hy(n);
  bool just_reset = true;
  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    res.gradient_norm = sup_norm(g);
    if (res.gradient_norm < options.gradient_tolerance) {
      res.converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc -= h[i * n + j] * g[j];
      dir[i] = acc;
    }
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope += dir[i] * g[i];
    if (!(slope < 0.0)) {
      reset();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) slope += dir[i] * g[i];
    }
    // First step from an identity Hessian is scaled to a modest move.
    double step = 1.0;
    if (just_reset) step = std::min(1.0, 1.0 / std::max(1e-12, sup_norm(dir)));

    double value_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = res.x[i] + step * dir[i];
      value_new = evaluate(f, x_new, g_new);
      if (std::isfinite(value_new) && value_new <= res.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (res.gradient_norm < options.stall_tolerance) {
        res.converged = true;
        break;
      }
      if (just_reset) break;
      reset();
      just_reset = true;
      continue;
    }

    double sy = 0.0, yhy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - res.x[i];
      y[i] = g_new[i] - g[i];
      sy += s[i] * y[i];
    }
    const double improvement = res.value - value_new;
    res.x = x_new;
    g = g_new;
    res.value = value_new;
    res.trace.push_back(value_new);
    just_reset = false;

    if (sy > 1e-12 * std::sqrt(std::inner_product(s.begin(), s.end(), s.begin(), 0.0) *
                                std::inner_product(y.begin(), y.end(), y.begin(), 0.0))) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += h[i * n + j] * y[j];
        hy[i] = acc;
      }
      for (std::size_t i = 0; i < n; ++i) yhy += y[i] * hy[i];
      const double rho = 1.0 / sy;
      const double coef = (1.0 + rho * yhy) * rho;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
    }
    if (improvement <= 1e-15 * (1.0 + std::abs(res.value)) && sup_norm(g) < options.stall_tolerance) {
      res.gradient_norm = sup_norm(g);
      res.converged = true;
      break;
    }
  }
  res.gradient_norm = sup_norm(g);
  if (res.gradient_norm < options.gradient_tolerance) res.converged = true;
  return res;
}

}  // namespace tailrisk::optim
