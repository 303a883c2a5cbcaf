#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "tailrisk/io.hpp"
#include "tailrisk/nn.hpp"

namespace tailrisk::nn {

std::string_view arch_name(Arch arch) { return arch == Arch::Mlp ? "mlp" : "lstm"; }

Arch parse_arch(std::string_view name) {
  if (name == "mlp") return Arch::Mlp;
  if (name == "lstm") return Arch::Lstm;
  throw ConfigError("unknown network architecture '" + std::string(name) + "' (expected mlp or lstm)");
}

namespace {

constexpr std::size_t kMaxLag = 13;

// One 8-vector at return index s, thresholds taken from the slot of return t.
void feature_vector(std::span<const double> r, std::span<const double> prefix, std::size_t s, double upper,
                    double lower, double* out) {
  for (std::size_t k = 0; k < kLagPeriods.size(); ++k) {
    const std::size_t p = kLagPeriods[k];
    out[k] = std::expm1(prefix[s + 1] - prefix[s - p]);
  }
  out[6] = (r[s] - lower) / lower;
  out[7] = (r[s] - upper) / upper;
}

}  // namespace

FeatureMatrix build_features(const ReturnSeries& returns, const TvarSeries& tvar, Arch arch) {
  const auto& r = returns.values();
  const std::size_t n = r.size();
  const std::size_t history = arch == Arch::Mlp ? kMaxLag : kMaxLag + kSequence - 1;
  FeatureMatrix out;
  out.arch = arch;
  out.width = arch == Arch::Mlp ? kFeatures : kFeatures * kSequence;
  out.first = std::max(history, tvar.first);
  const std::size_t last = std::min(n, tvar.end());
  if (last <= out.first)
    throw DataError("build_features: need at least " + std::to_string(history + 1) +
                    " returns with risk targets, got " + std::to_string(last > tvar.first ? last - tvar.first : 0));

  // prefix[k] = sum of r[0..k), so log(P_{s+1}/P_{s-p}) = prefix[s+1] - prefix[s-p].
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + r[i];

  const std::size_t rows = last - out.first;
  out.data.resize(rows * out.width);
  out.timestamps.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t t = out.first + i;
    const double upper = tvar.upper_at(t), lower = tvar.lower_at(t);
    if (upper == 0.0 || lower == 0.0)
      throw DataError("build_features: zero risk target at timestamp " + io::format_timestamp(returns.timestamps()[t]));
    out.timestamps[i] = returns.timestamps()[t];
    double* row = out.data.data() + i * out.width;
    if (arch == Arch::Mlp) {
      feature_vector(r, prefix, t, upper, lower, row);
    } else {
      for (std::size_t j = 0; j < kSequence; ++j)
        feature_vector(r, prefix, t + 1 + j - kSequence, upper, lower, row + j * kFeatures);
    }
  }
  return out;
}

void write_features_csv(const FeatureMatrix& features, std::ostream& out) {
  static constexpr const char* names[kFeatures] = {"x0", "x1", "x2", "x4", "x6", "x13", "d", "u"};
  out << "timestamp";
  const std::size_t steps = features.width / kFeatures;
  for (std::size_t j = 0; j < steps; ++j)
    for (const char* name : names) {
      out << ',' << name;
      if (steps > 1) out << "_lag" << (steps - 1 - j);
    }
  out << '\n';
  for (std::size_t i = 0; i < features.rows(); ++i) {
    out << io::format_timestamp(features.timestamps[i]);
    for (double v : features.row(i)) out << ',' << io::format_double(v);
    out << '\n';
  }
}

}  // namespace tailrisk::nn
