#include "tailrisk/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace tailrisk {
namespace {

using Keys = std::set<std::string>;

void check_keys(const YAML::Node& node, const Keys& allowed, std::string_view where) {
  if (!node.IsMap()) throw ConfigError(std::string(where) + ": expected a table");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out, std::string_view where) {
  const YAML::Node v = node[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(std::string(where) + "." + key + ": bad value '" + YAML::Dump(v) + "'");
  }
}

std::int64_t read_time(const YAML::Node& node, const char* key) {
  const YAML::Node v = node[key];
  if (!v) throw ConfigError(std::string("split.") + key + " is required");
  try {
    return io::parse_timestamp(v.as<std::string>());
  } catch (const DataError& e) {
    throw ConfigError(std::string("split.") + key + ": " + e.what());
  }
}

}  // namespace

std::string_view model_name(Model model) {
  switch (model) {
    case Model::Mlp: return "mlp";
    case Model::Lstm: return "lstm";
    case Model::GarchNormal: return "garch_normal";
    case Model::GarchEvt: return "garch_evt";
    case Model::LpaGarch: return "lpa_garch";
    case Model::CarlVol: return "carl_vol";
  }
  return "?";
}

Model parse_model(std::string_view name) {
  for (Model m : kAllModels)
    if (model_name(m) == name) return m;
  throw ConfigError("unknown model '" + std::string(name) +
                    "' (expected mlp, lstm, garch_normal, garch_evt, lpa_garch or carl_vol)");
}

bool RunConfig::has(Model m) const { return std::find(models.begin(), models.end(), m) != models.end(); }

void RunConfig::validate() const {
  if (data.empty()) throw ConfigError("config: data path is required");
  if (targets.empty()) throw ConfigError("config: at least one target is required");
  if (models.empty()) throw ConfigError("config: at least one model is required");
  for (std::size_t i = 0; i < models.size(); ++i)
    for (std::size_t j = i + 1; j < models.size(); ++j)
      if (models[i] == models[j]) throw ConfigError("config: model '" + std::string(model_name(models[i])) + "' listed twice");
  for (const auto& t : targets) {
    if (!(t.alpha > 0.0 && t.alpha < 0.5)) throw ConfigError("config: target alpha must lie in (0, 0.5)");
    if (t.window < 2) throw ConfigError("config: target window must be at least 2");
  }
  if (test_start <= calibration_start) throw ConfigError("config: split.test_start must follow split.calibration_start");
  if (!(fee >= 0.0 && fee < 1.0)) throw ConfigError("config: fee must lie in [0, 1)");
  if (workers < 0) throw ConfigError("config: workers must be non-negative");
  if (garch.refit_every == 0 || lpa.refit_every == 0 || carl.refit_every == 0 || nn.retrain_every == 0)
    throw ConfigError("config: refit cadences must be positive");
  if (garch.fit_window < 10 * garch.orders.parameter_count())
    throw ConfigError("config: garch.fit_window must be at least 10x the parameter count");
  if (lpa.options.min_length > lpa.options.max_length)
    throw ConfigError("config: lpa.min_length exceeds lpa.max_length");
  if (benchmarks.switch_ma == 0) throw ConfigError("config: benchmarks.switch_ma must be positive");
  nn.train.validate();
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["data"] = data.filename().string();
  j["gaps"] = gaps == io::GapPolicy::Error ? "error" : "ffill";
  j["split"] = {{"calibration_start", io::format_timestamp(calibration_start)},
                {"test_start", io::format_timestamp(test_start)}};
  for (const auto& t : targets) j["targets"].push_back({{"alpha", t.alpha}, {"window", t.window}});
  for (Model m : models) j["models"].push_back(model_name(m));
  j["fee"] = fee;
  j["seeds"] = {{"nn", nn_seed}, {"lpa", lpa_seed}};
  j["strict"] = strict;
  j["garch"] = {{"fit_window", garch.fit_window},
                {"refit_every", garch.refit_every},
                {"orders",
                 {{"ar", garch.orders.ar}, {"ma", garch.orders.ma}, {"arch", garch.orders.arch},
                  {"garch", garch.orders.garch}}}};
  const auto& lo = lpa.options;
  j["lpa"] = {{"refit_every", lpa.refit_every}, {"step", lo.step},         {"min_length", lo.min_length},
              {"max_length", lo.max_length},    {"bootstrap", lo.bootstrap}, {"min_segment", lo.min_segment},
              {"level", lo.level}};
  j["carl_vol"] = {{"fit_window", carl.fit_window}, {"refit_every", carl.refit_every}};
  const auto& tc = nn.train;
  j["nn"] = {{"retrain_every", nn.retrain_every},
             {"batch_size", tc.batch_size},
             {"learning_rate", tc.learning_rate},
             {"beta1", tc.beta1},
             {"beta2", tc.beta2},
             {"epsilon", tc.epsilon},
             {"epochs", tc.epochs},
             {"patience", tc.patience},
             {"validation_fraction", tc.validation_fraction},
             {"dropout", tc.dropout}};
  j["ensemble"] = {{"lambda", stack.lambda}, {"warm_up", stack.warm_up}, {"window", stack.window}};
  j["benchmarks"] = {{"varspread_window", benchmarks.varspread.window},
                     {"z_crit", benchmarks.varspread.z_crit},
                     {"switch_ma", benchmarks.switch_ma}};
  return j;
}

std::uint64_t RunConfig::hash() const { return io::fnv1a(to_json().dump()); }

RunConfig parse_config(std::string_view text, const std::filesystem::path& base) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  check_keys(root,
             {"data", "gaps", "output", "split", "targets", "models", "fee", "seeds", "workers", "strict", "garch",
              "lpa", "carl_vol", "nn", "ensemble", "benchmarks"},
             "config");
  RunConfig c;
  std::string data, gaps = "error", output;
  read(root, "data", data, "config");
  if (!data.empty()) {
    c.data = data;
    if (c.data.is_relative() && !base.empty()) c.data = base / c.data;
  }
  read(root, "gaps", gaps, "config");
  c.gaps = io::parse_gap_policy(gaps);
  read(root, "output", output, "config");
  c.output = output;

  const YAML::Node split = root["split"];
  if (!split) throw ConfigError("config: split table is required");
  check_keys(split, {"calibration_start", "test_start"}, "split");
  c.calibration_start = read_time(split, "calibration_start");
  c.test_start = read_time(split, "test_start");

  const YAML::Node targets = root["targets"];
  if (targets) {
    if (!targets.IsSequence()) throw ConfigError("targets: expected a list");
    for (const auto& t : targets) {
      check_keys(t, {"alpha", "window"}, "targets");
      RiskTargetSpec spec;
      read(t, "alpha", spec.alpha, "targets");
      read(t, "window", spec.window, "targets");
      c.targets.push_back(spec);
    }
  }
  const YAML::Node models = root["models"];
  if (models) {
    if (!models.IsSequence()) throw ConfigError("models: expected a list");
    for (const auto& m : models) c.models.push_back(parse_model(m.as<std::string>()));
  }
  read(root, "fee", c.fee, "config");
  if (const YAML::Node s = root["seeds"]) {
    check_keys(s, {"nn", "lpa"}, "seeds");
    read(s, "nn", c.nn_seed, "seeds");
    read(s, "lpa", c.lpa_seed, "seeds");
  }
  read(root, "workers", c.workers, "config");
  read(root, "strict", c.strict, "config");

  if (const YAML::Node g = root["garch"]) {
    check_keys(g, {"fit_window", "refit_every", "orders"}, "garch");
    read(g, "fit_window", c.garch.fit_window, "garch");
    read(g, "refit_every", c.garch.refit_every, "garch");
    if (const YAML::Node o = g["orders"]) {
      check_keys(o, {"ar", "ma", "arch", "garch"}, "garch.orders");
      read(o, "ar", c.garch.orders.ar, "garch.orders");
      read(o, "ma", c.garch.orders.ma, "garch.orders");
      read(o, "arch", c.garch.orders.arch, "garch.orders");
      read(o, "garch", c.garch.orders.garch, "garch.orders");
    }
  }
  if (const YAML::Node l = root["lpa"]) {
    check_keys(l, {"refit_every", "step", "min_length", "max_length", "bootstrap", "min_segment", "level"}, "lpa");
    auto& o = c.lpa.options;
    read(l, "refit_every", c.lpa.refit_every, "lpa");
    read(l, "step", o.step, "lpa");
    read(l, "min_length", o.min_length, "lpa");
    read(l, "max_length", o.max_length, "lpa");
    read(l, "bootstrap", o.bootstrap, "lpa");
    read(l, "min_segment", o.min_segment, "lpa");
    read(l, "level", o.level, "lpa");
  }
  if (const YAML::Node cv = root["carl_vol"]) {
    check_keys(cv, {"fit_window", "refit_every"}, "carl_vol");
    read(cv, "fit_window", c.carl.fit_window, "carl_vol");
    read(cv, "refit_every", c.carl.refit_every, "carl_vol");
  }
  if (const YAML::Node n = root["nn"]) {
    check_keys(n,
               {"retrain_every", "batch_size", "learning_rate", "beta1", "beta2", "epsilon", "epochs", "patience",
                "validation_fraction", "dropout"},
               "nn");
    auto& t = c.nn.train;
    read(n, "retrain_every", c.nn.retrain_every, "nn");
    read(n, "batch_size", t.batch_size, "nn");
    read(n, "learning_rate", t.learning_rate, "nn");
    read(n, "beta1", t.beta1, "nn");
    read(n, "beta2", t.beta2, "nn");
    read(n, "epsilon", t.epsilon, "nn");
    read(n, "epochs", t.epochs, "nn");
    read(n, "patience", t.patience, "nn");
    read(n, "validation_fraction", t.validation_fraction, "nn");
    read(n, "dropout", t.dropout, "nn");
  }
  if (const YAML::Node e = root["ensemble"]) {
    check_keys(e, {"lambda", "warm_up", "window"}, "ensemble");
    read(e, "lambda", c.stack.lambda, "ensemble");
    read(e, "warm_up", c.stack.warm_up, "ensemble");
    read(e, "window", c.stack.window, "ensemble");
  }
  if (const YAML::Node b = root["benchmarks"]) {
    check_keys(b, {"varspread_window", "z_crit", "switch_ma"}, "benchmarks");
    read(b, "varspread_window", c.benchmarks.varspread.window, "benchmarks");
    read(b, "z_crit", c.benchmarks.varspread.z_crit, "benchmarks");
    read(b, "switch_ma", c.benchmarks.switch_ma, "benchmarks");
  }
  c.nn.train.seed = c.nn_seed;
  c.lpa.options.seed = c.lpa_seed;
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

}  // namespace tailrisk
