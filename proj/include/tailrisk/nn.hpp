#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tailrisk/error.hpp"
#include "tailrisk/timeseries.hpp"

namespace tailrisk::nn {

enum class Arch { Mlp, Lstm };

std::string_view arch_name(Arch arch);
Arch parse_arch(std::string_view name);

inline constexpr std::size_t kFeatures = 8;
inline constexpr std::size_t kSequence = 24;
inline constexpr std::size_t kClasses = 3;
inline constexpr std::array<std::size_t, 6> kLagPeriods{0, 1, 2, 4, 6, 13};

using Probabilities = std::array<double, kClasses>;

/// Row-major feature rows. Row i is built at decision index first + i (a
/// return index) from data up to and including that return. MLP rows hold
/// (X^0, X^1, X^2, X^4, X^6, X^13, D, U); LSTM rows hold 24 such vectors,
/// oldest first.
struct FeatureMatrix {
  Arch arch = Arch::Mlp;
  std::size_t first = 0;
  std::size_t width = 0;
  std::vector<std::int64_t> timestamps;
  std::vector<double> data;

  std::size_t rows() const noexcept { return width == 0 ? 0 : data.size() / width; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * width, width}; }
  std::size_t decision(std::size_t i) const noexcept { return first + i; }
};

/// X^p_t = P_t / P_{t-1-p} - 1, U_t = (r_t - upper_t) / upper_t and D_t the same
/// with lower_t, where (upper_t, lower_t) is the target slot of return t.
FeatureMatrix build_features(const ReturnSeries& returns, const TvarSeries& tvar, Arch arch);

void write_features_csv(const FeatureMatrix& features, std::ostream& out);

enum class Mode { Train, Eval };

/// MLP 8-16-4-2-3 or LSTM(16)-LSTM(4)-2-3, tanh hidden units, softmax output,
/// inverted dropout after the first two hidden layers. Weights live in one
/// flat vector.
class Network {
 public:
  explicit Network(Arch arch, double dropout = 0.2);

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases, forget
  /// gate bias 1.
  static Network initialised(Arch arch, std::uint64_t seed, double dropout = 0.2);

  Arch arch() const noexcept { return arch_; }
  double dropout() const noexcept { return dropout_; }
  std::size_t input_width() const noexcept;
  std::size_t parameter_count() const noexcept { return weights_.size(); }
  /// Number of dropout multipliers one training forward pass consumes.
  std::size_t mask_width() const noexcept;

  std::span<double> weights() noexcept { return weights_; }
  std::span<const double> weights() const noexcept { return weights_; }

  Probabilities forward(std::span<const double> x) const;
  Probabilities forward(std::span<const double> x, Mode mode, std::mt19937_64& dropout_rng) const;

  /// Multipliers 0 or 1/(1-rate), one per masked unit.
  std::vector<double> draw_mask(std::mt19937_64& rng) const;

  /// Cross-entropy of one sample under a fixed mask (empty: eval mode). Adds
  /// the gradient into `grad` when non-empty.
  double sample_loss(std::span<const double> x, int label, std::span<const double> mask,
                     std::span<double> grad = {}) const;

 private:
  void check_input(std::span<const double> x) const;

  Arch arch_;
  double dropout_;
  std::vector<double> weights_;
};

struct TrainConfig {
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t epochs = 100;
  std::size_t patience = 10;
  double validation_fraction = 0.1;
  double dropout = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainResult {
  Network network;
  std::vector<double> train_loss;       // mean dropout loss per epoch
  std::vector<double> validation_loss;  // eval-mode loss per epoch, empty without a validation slice
  double initial_loss = 0.0;            // eval-mode training loss before the first update
  double final_loss = 0.0;              // eval-mode training loss of the returned weights
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

/// Row i of `features` is paired with the label of return decision(i) + 1.
/// Rows without such a label are not used.
TrainResult train(const FeatureMatrix& features, const LabelSeries& labels, const TrainConfig& config, Arch arch);
/// Same stream of updates with the batch gradient summed on one thread.
TrainResult train_serial(const FeatureMatrix& features, const LabelSeries& labels, const TrainConfig& config,
                         Arch arch);

/// Mean cross-entropy and its gradient over `rows` with fixed masks, reduced
/// over fixed chunks in order.
double batch_gradient(const Network& net, const FeatureMatrix& features, std::span<const std::size_t> rows,
                      std::span<const int> targets, std::span<const std::vector<double>> masks, std::span<double> grad);
double batch_gradient_serial(const Network& net, const FeatureMatrix& features, std::span<const std::size_t> rows,
                             std::span<const int> targets, std::span<const std::vector<double>> masks,
                             std::span<double> grad);

/// Softmax component 2 per row, aligned to the return each row predicts
/// (first = features.first + 1).
ProbabilitySeries predict_p2(const Network& net, const FeatureMatrix& features);

/// "TRNN", uint32 header length, JSON header, raw doubles.
void save_checkpoint(const Network& net, const TrainConfig& config, const std::string& path);
Network load_checkpoint(const std::string& path, TrainConfig* config = nullptr);

}  // namespace tailrisk::nn
