#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include <json.hpp>

#include "tailrisk/nn.hpp"
#include "tailrisk/parallel.hpp"

namespace tailrisk::nn {

namespace {

constexpr std::size_t kChunk = 16;

double chunked_gradient(const Network& net, const FeatureMatrix& features, std::span<const std::size_t> rows,
                        std::span<const int> targets, std::span<const std::vector<double>> masks,
                        std::span<double> grad, bool parallel) {
  if (rows.size() != targets.size() || (!masks.empty() && masks.size() != rows.size()))
    throw DataError("batch_gradient: rows, targets and masks differ in length");
  if (rows.empty()) throw DataError("batch_gradient: empty batch");
  const auto chunks = fixed_chunks(rows.size(), kChunk);
  const std::size_t P = net.parameter_count();
  std::vector<double> partial(chunks.size() * P, 0.0), losses(chunks.size(), 0.0);
  auto run = [&](std::size_t c) {
    std::span<double> g(partial.data() + c * P, P);
    double loss = 0.0;
    for (std::size_t i = chunks[c].first; i < chunks[c].second; ++i)
      loss += net.sample_loss(features.row(rows[i]), targets[i],
                              masks.empty() ? std::span<const double>{} : std::span<const double>(masks[i]), g);
    losses[c] = loss;
  };
  const auto count = static_cast<long long>(chunks.size());
  if (parallel) {
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (long long c = 0; c < count; ++c) run(static_cast<std::size_t>(c));
  } else {
    for (long long c = 0; c < count; ++c) run(static_cast<std::size_t>(c));
  }
  const double scale = 1.0 / static_cast<double>(rows.size());
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    loss += losses[c];
    const double* g = partial.data() + c * P;
    for (std::size_t k = 0; k < P; ++k) grad[k] += g[k];
  }
  for (double& v : grad) v *= scale;
  return loss * scale;
}

double eval_loss(const Network& net, const FeatureMatrix& features, std::span<const std::size_t> rows,
                 std::span<const int> targets, bool parallel) {
  if (rows.empty()) return 0.0;
  const auto chunks = fixed_chunks(rows.size(), kChunk);
  std::vector<double> losses(chunks.size(), 0.0);
  auto run = [&](std::size_t c) {
    double loss = 0.0;
    for (std::size_t i = chunks[c].first; i < chunks[c].second; ++i)
      loss += net.sample_loss(features.row(rows[i]), targets[i], {});
    losses[c] = loss;
  };
  const auto count = static_cast<long long>(chunks.size());
  if (parallel) {
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (long long c = 0; c < count; ++c) run(static_cast<std::size_t>(c));
  } else {
    for (long long c = 0; c < count; ++c) run(static_cast<std::size_t>(c));
  }
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(rows.size());
}

TrainResult run_training(const FeatureMatrix& features, const LabelSeries& labels, const TrainConfig& config,
                         Arch arch, bool parallel) {
  config.validate();
  if (features.arch != arch) throw ConfigError("train: feature matrix was built for another architecture");
  std::vector<std::size_t> rows;
  std::vector<int> targets;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const std::size_t next = features.decision(i) + 1;
    if (!labels.covers(next)) continue;
    rows.push_back(i);
    targets.push_back(labels.at_return(next));
  }
  if (rows.empty()) throw DataError("train: no feature row has a label for the following return");

  const auto validation = static_cast<std::size_t>(std::floor(config.validation_fraction * rows.size()));
  const std::size_t fit_count = rows.size() - validation;
  if (fit_count == 0) throw DataError("train: validation slice leaves no training rows");
  const std::span<const std::size_t> fit_rows(rows.data(), fit_count), val_rows(rows.data() + fit_count, validation);
  const std::span<const int> fit_targets(targets.data(), fit_count), val_targets(targets.data() + fit_count, validation);

  TrainResult result{Network::initialised(arch, config.seed, config.dropout), {}, {}, 0.0, 0.0, 0, false};
  Network& net = result.network;
  result.initial_loss = eval_loss(net, features, fit_rows, fit_targets, parallel);

  const std::size_t P = net.parameter_count();
  std::vector<double> m(P, 0.0), v(P, 0.0), grad(P), best_weights(net.weights().begin(), net.weights().end());
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0, step = 0;
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(fit_count), batch_rows;
  std::vector<int> batch_targets;
  std::vector<std::vector<double>> masks;
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < fit_count; start += config.batch_size, ++batch_index) {
      const std::size_t stop = std::min(fit_count, start + config.batch_size);
      batch_rows.clear();
      batch_targets.clear();
      masks.clear();
      for (std::size_t k = start; k < stop; ++k) {
        batch_rows.push_back(fit_rows[order[k]]);
        batch_targets.push_back(fit_targets[order[k]]);
        masks.push_back(net.draw_mask(rng));
      }
      const double loss = chunked_gradient(net, features, batch_rows, batch_targets, masks, grad, parallel);
      if (!std::isfinite(loss) || !std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); }))
        throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index));
      epoch_loss += loss * static_cast<double>(stop - start);
      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      auto w = net.weights();
      for (std::size_t k = 0; k < P; ++k) {
        m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * grad[k];
        v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * grad[k] * grad[k];
        w[k] -= config.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + config.epsilon);
      }
    }
    result.train_loss.push_back(epoch_loss / static_cast<double>(fit_count));
    if (validation == 0) {
      result.best_epoch = epoch;
      continue;
    }
    const double val = eval_loss(net, features, val_rows, val_targets, parallel);
    result.validation_loss.push_back(val);
    if (val < best_loss) {
      best_loss = val;
      result.best_epoch = epoch;
      since_best = 0;
      best_weights.assign(net.weights().begin(), net.weights().end());
    } else if (++since_best >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }
  if (validation > 0) std::copy(best_weights.begin(), best_weights.end(), net.weights().begin());
  result.final_loss = eval_loss(net, features, fit_rows, fit_targets, parallel);
  return result;
}

constexpr char kMagic[4] = {'T', 'R', 'N', 'N'};

}  // namespace

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("train: batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0))
    throw ConfigError("train: Adam moments need beta1, beta2 in [0, 1) and epsilon > 0");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw ConfigError("train: validation_fraction must lie in [0, 1)");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("train: dropout must lie in [0, 1)");
}

TrainResult train(const FeatureMatrix& features, const LabelSeries& labels, const TrainConfig& config, Arch arch) {
  return run_training(features, labels, config, arch, true);
}

TrainResult train_serial(const FeatureMatrix& features, const LabelSeries& labels, const TrainConfig& config,
                         Arch arch) {
  return run_training(features, labels, config, arch, false);
}

double batch_gradient(const Network& net, const FeatureMatrix& features, std::span<const std::size_t> rows,
                      std::span<const int> targets, std::span<const std::vector<double>> masks, std::span<double> grad) {
  return chunked_gradient(net, features, rows, targets, masks, grad, true);
}

double batch_gradient_serial(const Network& net, const FeatureMatrix& features, std::span<const std::size_t> rows,
                             std::span<const int> targets, std::span<const std::vector<double>> masks,
                             std::span<double> grad) {
  return chunked_gradient(net, features, rows, targets, masks, grad, false);
}

ProbabilitySeries predict_p2(const Network& net, const FeatureMatrix& features) {
  ProbabilitySeries out;
  out.first = features.first + 1;
  out.values.resize(features.rows());
  const auto count = static_cast<long long>(features.rows());
#pragma omp parallel for schedule(static) num_threads(worker_count())
  for (long long i = 0; i < count; ++i)
    out.values[static_cast<std::size_t>(i)] = net.forward(features.row(static_cast<std::size_t>(i)))[2];
  return out;
}

void save_checkpoint(const Network& net, const TrainConfig& config, const std::string& path) {
  const nlohmann::json header = {
      {"arch", arch_name(net.arch())},
      {"parameters", net.parameter_count()},
      {"input_width", net.input_width()},
      {"dropout", net.dropout()},
      {"seed", config.seed},
      {"config",
       {{"batch_size", config.batch_size},
        {"learning_rate", config.learning_rate},
        {"beta1", config.beta1},
        {"beta2", config.beta2},
        {"epsilon", config.epsilon},
        {"epochs", config.epochs},
        {"patience", config.patience},
        {"validation_fraction", config.validation_fraction},
        {"dropout", config.dropout}}}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path);
  const auto length = static_cast<std::uint32_t>(text.size());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&length), sizeof length);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(net.weights().data()),
            static_cast<std::streamsize>(net.parameter_count() * sizeof(double)));
  if (!out) throw DataError("short write on checkpoint " + path);
}

Network load_checkpoint(const std::string& path, TrainConfig* config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  char magic[4];
  std::uint32_t length = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&length), sizeof length);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw DataError(path + " is not a network checkpoint");
  std::string text(length, '\0');
  in.read(text.data(), length);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": bad checkpoint header: " + e.what());
  }
  Network net(parse_arch(header.at("arch").get<std::string>()), header.at("dropout").get<double>());
  if (header.at("parameters").get<std::size_t>() != net.parameter_count())
    throw DataError(path + ": parameter count does not match the architecture");
  in.read(reinterpret_cast<char*>(net.weights().data()),
          static_cast<std::streamsize>(net.parameter_count() * sizeof(double)));
  if (!in) throw DataError(path + ": truncated weights");
  if (config) {
    const auto& c = header.at("config");
    config->batch_size = c.at("batch_size");
    config->learning_rate = c.at("learning_rate");
    config->beta1 = c.at("beta1");
    config->beta2 = c.at("beta2");
    config->epsilon = c.at("epsilon");
    config->epochs = c.at("epochs");
    config->patience = c.at("patience");
    config->validation_fraction = c.at("validation_fraction");
    config->dropout = c.at("dropout");
    config->seed = header.at("seed");
  }
  return net;
}

}  // namespace tailrisk::nn
