#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "tailrisk/error.hpp"
#include "tailrisk/timeseries.hpp"

namespace tailrisk::ensemble {

inline constexpr double kLogitClamp = 1e-6;

double logit(double p, double eps = kLogitClamp);

/// Clamp to [eps, 1-eps], log-odds, then min-max to [0, 1]. A constant column
/// maps to 0.5.
std::vector<double> logit_rescale(std::span<const double> p, double eps = kLogitClamp);

/// Row-major design matrix with one column per level-0 model.
struct StackInput {
  std::size_t columns = 0;
  std::vector<double> x;
  std::vector<double> y;

  std::size_t rows() const noexcept { return columns == 0 ? 0 : x.size() / columns; }
};

struct RidgeCoefficients {
  std::vector<double> beta;
  double lambda = 1.0;
};

/// argmin sum (y - x beta)^2 + lambda |beta|^2, no intercept.
RidgeCoefficients ridge_fit(const StackInput& input, double lambda = 1.0);

/// Solves (gram + lambda I) beta = cross by Cholesky; gram is k x k row-major.
std::vector<double> ridge_solve(std::span<const double> gram, std::span<const double> cross, std::size_t k,
                                double lambda);

/// Linear score clipped to [0, 1].
double ensemble_predict(const RidgeCoefficients& coeffs, std::span<const double> row);

struct StackOptions {
  double lambda = 1.0;
  std::size_t warm_up = 200;
  std::size_t window = 0;  // trailing rows per refit, 0 = all available
  double eps = kLogitClamp;
};

/// Meta probability for each return i, fitted on rows j < i of the aligned
/// level-0 predictions with target 1(label_j == 2). Column scaling uses the
/// log-odds range seen up to row i.
struct StackResult {
  ProbabilitySeries meta;
  std::vector<std::vector<double>> betas;  // one per meta entry
};

StackResult stack_online(std::span<const ProbabilitySeries> level0, const LabelSeries& labels,
                         const StackOptions& options = {});
StackResult stack_online_serial(std::span<const ProbabilitySeries> level0, const LabelSeries& labels,
                                const StackOptions& options = {});

/// `timestamp,beta_1..beta_J`, stamped with the return each fit predicts.
void write_coefficients_csv(const StackResult& result, const ReturnSeries& returns, std::ostream& out);

}  // namespace tailrisk::ensemble
