#pragma once

#include <cstdint>
#include <vector>

#include "tailrisk/econ.hpp"
#include "tailrisk/timeseries.hpp"

namespace tailrisk::synth {

enum class Innovation { Normal, StudentT };

struct GarchSimSpec {
  ArmaGarchParams params;
  Innovation innovation = Innovation::Normal;
  double dof = 5.0;          // Student-t, rescaled to unit variance
  std::size_t burn_in = 500;
};

/// ARMA-GARCH path of length n driven by mt19937_64(seed).
std::vector<double> simulate_arma_garch(const GarchSimSpec& spec, std::size_t n, std::uint64_t seed);

/// GARCH(1,1) shorthand with Gaussian innovations.
std::vector<double> simulate_garch11(double omega, double alpha, double beta, std::size_t n, std::uint64_t seed);

/// GARCH(1,1) whose omega is multiplied by `omega_factor` from index `change` on.
std::vector<double> simulate_omega_break(double omega, double alpha, double beta, std::size_t n, std::size_t change,
                                         double omega_factor, std::uint64_t seed);

/// i.i.d. draws from a GPD(xi, beta) by inversion.
std::vector<double> sample_gpd(double xi, double beta, std::size_t n, std::uint64_t seed);

/// Hourly BTC-like price path: two-regime GARCH(1,1) with Student-t
/// innovations, regime switches from a two-state Markov chain.
PriceSeries regime_prices(std::size_t n, std::uint64_t seed, std::int64_t start_hour = 438000);

}  // namespace tailrisk::synth
