#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "tailrisk/econ.hpp"
#include "tailrisk/ensemble.hpp"
#include "tailrisk/io.hpp"
#include "tailrisk/nn.hpp"
#include "tailrisk/strategy.hpp"
#include "tailrisk/timeseries.hpp"

namespace tailrisk {

enum class Model { Mlp, Lstm, GarchNormal, GarchEvt, LpaGarch, CarlVol };

inline constexpr Model kAllModels[] = {Model::Mlp,      Model::Lstm,     Model::GarchNormal,
                                       Model::GarchEvt, Model::LpaGarch, Model::CarlVol};

std::string_view model_name(Model model);
/// ConfigError for names outside the roster.
Model parse_model(std::string_view name);

struct GarchSettings {
  std::size_t fit_window = 2880;
  std::size_t refit_every = 1;
  ArmaGarchOrders orders;
};

struct LpaSettings {
  std::size_t refit_every = 5;
  econ::LpaOptions options;  // seed comes from RunConfig::lpa_seed
};

struct CarlSettings {
  std::size_t fit_window = 2880;
  std::size_t refit_every = 1;
};

struct NnSettings {
  std::size_t retrain_every = 824;
  nn::TrainConfig train;  // seed comes from RunConfig::nn_seed
};

struct BenchmarkSettings {
  strategy::VarspreadOptions varspread;
  std::size_t switch_ma = 2880;
};

struct RunConfig {
  std::filesystem::path data;
  io::GapPolicy gaps = io::GapPolicy::Error;
  std::filesystem::path output;
  std::int64_t calibration_start = 0;  // epoch hour of the first predicted return
  std::int64_t test_start = 0;         // epoch hour of the first backtested return
  std::vector<RiskTargetSpec> targets;
  std::vector<Model> models;
  double fee = strategy::kFeeRate;
  std::uint64_t nn_seed = 1;
  std::uint64_t lpa_seed = 1;
  int workers = 0;  // 0: OpenMP default
  bool strict = false;
  GarchSettings garch;
  LpaSettings lpa;
  CarlSettings carl;
  NnSettings nn;
  ensemble::StackOptions stack;
  BenchmarkSettings benchmarks;

  bool has(Model m) const;
  /// Checks everything that does not need the data.
  void validate() const;
  /// Canonical form; paths as written, timestamps in ISO form.
  nlohmann::json to_json() const;
  /// FNV-1a of the canonical JSON text.
  std::uint64_t hash() const;
};

/// YAML text with nested tables; unknown keys and model names are ConfigErrors.
/// Relative data paths resolve against `base`.
RunConfig parse_config(std::string_view yaml, const std::filesystem::path& base = {});
RunConfig load_config(const std::filesystem::path& path);

}  // namespace tailrisk
