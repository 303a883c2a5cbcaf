#pragma once

#include <functional>
#include <span>
#include <vector>

namespace tailrisk::optim {

/// Returns f(x). When `grad` is non-empty it must also be filled with df/dx.
/// Infeasible points return +infinity.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct Options {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;  // sup-norm
  // Accept a stalled line search as converged if the gradient is at least this small.
  double stall_tolerance = 1e-4;
};

struct Result {
  std::vector<double> x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // accepted objective values, non-increasing
};

/// BFGS with Armijo backtracking. Only decreasing steps are accepted. A
/// non-finite analytic gradient falls back to central differences.
Result minimize_bfgs(const Objective& f, std::vector<double> x0, const Options& options = {});

std::vector<double> numerical_gradient(const Objective& f, std::span<const double> x, double rel_step = 1e-6);

}  // namespace tailrisk::optim
