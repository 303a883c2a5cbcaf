#include "tailrisk/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "tailrisk/ensemble.hpp"
#include "tailrisk/io.hpp"
#include "tailrisk/metrics.hpp"
#include "tailrisk/nn.hpp"
#include "tailrisk/parallel.hpp"
#include "tailrisk/rolling.hpp"
#include "tailrisk/strategy.hpp"

namespace tailrisk::pipeline {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kPrices = "prices.csv";
constexpr const char* kTargets = "targets.csv";
constexpr const char* kManifest = "manifest.json";

// Inputs every stage after ingest starts from.
struct Market {
  PriceSeries prices;
  ReturnSeries returns;
  std::size_t calibration = 0;  // first predicted return
  std::size_t test = 0;         // first backtested return
};

Market load_market(const RunConfig& config) {
  auto prices = io::read_prices_csv(config.output / kPrices);
  auto returns = ts::log_returns(prices);
  Market m{std::move(prices), std::move(returns)};
  m.calibration = io::return_index(m.returns, config.calibration_start);
  m.test = io::return_index(m.returns, config.test_start);
  return m;
}

fs::path cell_dir(const RunConfig& config, const RiskTargetSpec& spec) { return config.output / cell_name(spec); }

io::TargetTable load_targets(const fs::path& dir, const ReturnSeries& returns) {
  auto in = io::open_input(dir / kTargets);
  return io::read_targets_csv(in, returns);
}

json load_json(const fs::path& path) {
  auto in = io::open_input(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_json(const fs::path& path, const json& j) { io::write_text_file(path, j.dump(2) + "\n"); }

template <class Write>
void save_csv(const fs::path& path, Write write) {
  io::AtomicFile f(path);
  write(f.stream());
  f.commit();
}

Aligned<double> load_series(const fs::path& path, const ReturnSeries& returns, std::string_view column) {
  auto in = io::open_input(path);
  return io::read_series_csv(in, returns, column);
}

template <class T>
Aligned<T> slice(const Aligned<T>& s, std::size_t begin, std::size_t end) {
  begin = std::max(begin, s.first);
  end = std::min(end, s.end());
  if (end <= begin) throw DataError("series does not cover the requested range");
  return {begin, std::vector<T>(s.values.begin() + static_cast<std::ptrdiff_t>(begin - s.first),
                                s.values.begin() + static_cast<std::ptrdiff_t>(end - s.first))};
}

std::string stamp(const ReturnSeries& returns, std::size_t t) { return io::format_timestamp(returns.timestamps()[t]); }

std::size_t index_of(const ReturnSeries& returns, const json& j) {
  return io::return_index(returns, io::parse_timestamp(j.get<std::string>()));
}

std::string prob_file(std::string_view model) { return "prob_" + std::string(model) + ".csv"; }

// --- ingest -------------------------------------------------------------

void ingest(const RunConfig& config) {
  const PriceSeries prices = io::read_prices_csv(config.data, config.gaps);
  const auto& hours = prices.timestamps();
  // Returns are stamped from the second close on.
  for (auto [name, hour] : {std::pair{"calibration_start", config.calibration_start},
                            std::pair{"test_start", config.test_start}})
    if (hour <= hours.front() || hour > hours.back())
      throw ConfigError(std::string("split.") + name + " " + io::format_timestamp(hour) + " is outside the data (" +
                        io::format_timestamp(hours.front()) + " to " + io::format_timestamp(hours.back()) + ")");
  spdlog::info("ingest: {} closes from {}", prices.size(), config.data.string());
  save_csv(config.output / kPrices, [&](std::ostream& out) { io::write_prices_csv(prices, out); });
}

// --- label --------------------------------------------------------------

void label(const RunConfig& config) {
  const Market m = load_market(config);
  for (const auto& spec : config.targets) {
    spec.validate(m.returns.size());
    const TvarSeries tvar = ts::rolling_hist_var(m.returns, spec);
    const LabelSeries labels = ts::make_labels(m.returns, tvar);
    if (tvar.first > m.calibration)
      throw DataError("target window " + std::to_string(spec.window) + " leaves no target at calibration_start");
    spdlog::info("label {}: {} targets", cell_name(spec), tvar.size());
    save_csv(cell_dir(config, spec) / kTargets,
             [&](std::ostream& out) { io::write_targets_csv(m.returns, tvar, labels, out); });
  }
}

// --- fit ----------------------------------------------------------------

nn::FeatureMatrix head_rows(const nn::FeatureMatrix& f, std::size_t rows) {
  nn::FeatureMatrix out;
  out.arch = f.arch;
  out.first = f.first;
  out.width = f.width;
  out.timestamps.assign(f.timestamps.begin(), f.timestamps.begin() + static_cast<std::ptrdiff_t>(rows));
  out.data.assign(f.data.begin(), f.data.begin() + static_cast<std::ptrdiff_t>(rows * f.width));
  return out;
}

void fit_nn(const RunConfig& config, const Market& m, const io::TargetTable& targets, Model model,
            const fs::path& dir) {
  const nn::Arch arch = model == Model::Mlp ? nn::Arch::Mlp : nn::Arch::Lstm;
  const nn::FeatureMatrix features = nn::build_features(m.returns, targets.tvar, arch);
  json index;
  index["arch"] = nn::arch_name(arch);
  std::size_t block = 0;
  for (std::size_t b = m.calibration; b < m.returns.size(); b += config.nn.retrain_every, ++block) {
    // The network predicting return b is built at decision b - 1, from rows
    // whose next return is at most b - 1.
    if (b < features.first + 2) throw DataError("too few feature rows before return " + stamp(m.returns, b));
    const std::size_t rows = b - 1 - features.first;
    nn::TrainConfig tc = config.nn.train;
    tc.seed = rolling::derive_seed(config.nn_seed, block);
    const nn::TrainResult result = nn::train(head_rows(features, rows), targets.labels, tc, arch);
    const std::string file = std::string(nn::arch_name(arch)) + "_" + std::to_string(block) + ".trnn";
    const fs::path path = dir / file;
    fs::path partial = path;
    partial += ".partial";
    nn::save_checkpoint(result.network, tc, partial.string());
    fs::rename(partial, path);
    const std::size_t end = std::min(b + config.nn.retrain_every, m.returns.size());
    index["blocks"].push_back({{"begin", stamp(m.returns, b)},
                               {"end", stamp(m.returns, end - 1)},
                               {"checkpoint", file},
                               {"seed", tc.seed},
                               {"training_rows", rows},
                               {"best_epoch", result.best_epoch},
                               {"stopped_early", result.stopped_early},
                               {"final_loss", result.final_loss}});
    spdlog::info("fit {}: block {} trained on {} rows, best epoch {}", nn::arch_name(arch), block, rows,
                 result.best_epoch);
  }
  save_json(dir / (std::string(model_name(model)) + ".json"), index);
}

void fit_cell(const RunConfig& config, const Market& m, const RiskTargetSpec& spec) {
  const fs::path cell = cell_dir(config, spec), dir = cell / "models";
  fs::create_directories(dir);
  const io::TargetTable targets = load_targets(cell, m.returns);
  const std::size_t end = m.returns.size();

  // The ARMA-GARCH path also feeds the VaR benchmarks, so it is always fitted.
  {
    const rolling::Schedule s{m.calibration, end, config.garch.refit_every, config.garch.fit_window};
    const auto path = rolling::fit_garch_path(m.returns, s, config.garch.orders);
    json j;
    const auto& o = config.garch.orders;
    j["orders"] = {{"ar", o.ar}, {"ma", o.ma}, {"arch", o.arch}, {"garch", o.garch}};
    j["fit_window"] = path.fit_window;
    j["refits"] = json::array();
    for (const auto& r : path.refits)
      j["refits"].push_back({{"timestamp", stamp(m.returns, r.decision)},
                             {"params", io::to_json(r.params)},
                             {"gpd", io::to_json(r.gpd)},
                             {"carried", r.carried}});
    spdlog::info("fit garch {}: {} refits", cell_name(spec), path.refits.size());
    save_json(dir / "garch.json", j);
  }
  if (config.has(Model::LpaGarch)) {
    const rolling::Schedule s{m.calibration, end, config.lpa.refit_every, config.lpa.options.min_length};
    const auto path = rolling::fit_lpa_path(m.returns, s, config.lpa.options);
    json j;
    j["seed"] = config.lpa.options.seed;
    j["refits"] = json::array();
    for (const auto& r : path.refits)
      j["refits"].push_back({{"timestamp", stamp(m.returns, r.decision)},
                             {"start", stamp(m.returns, r.start)},
                             {"params", io::to_json(r.params)},
                             {"carried", r.carried}});
    spdlog::info("fit lpa_garch {}: {} refits", cell_name(spec), path.refits.size());
    save_json(dir / "lpa_garch.json", j);
  }
  if (config.has(Model::CarlVol)) {
    const rolling::Schedule s{m.calibration, end, config.carl.refit_every, config.carl.fit_window};
    const auto path = rolling::fit_carlvol_path(m.returns, targets.tvar, s);
    json j;
    j["fit_window"] = path.fit_window;
    j["refits"] = json::array();
    for (const auto& r : path.refits)
      j["refits"].push_back({{"timestamp", stamp(m.returns, r.decision)},
                             {"threshold_q", r.threshold_q},
                             {"params", io::to_json(r.params)},
                             {"carried", r.carried}});
    spdlog::info("fit carl_vol {}: {} refits", cell_name(spec), path.refits.size());
    save_json(dir / "carl_vol.json", j);
  }
  for (Model model : {Model::Mlp, Model::Lstm})
    if (config.has(model)) fit_nn(config, m, targets, model, dir);
}

void fit(const RunConfig& config) {
  const Market m = load_market(config);
  for (const auto& spec : config.targets) fit_cell(config, m, spec);
}

// --- predict ------------------------------------------------------------

rolling::GarchPath load_garch(const fs::path& path, const ReturnSeries& returns) {
  const json j = load_json(path);
  rolling::GarchPath out;
  try {
    const auto& o = j.at("orders");
    out.orders = {o.at("ar").get<std::size_t>(), o.at("ma").get<std::size_t>(), o.at("arch").get<std::size_t>(),
                  o.at("garch").get<std::size_t>()};
    out.fit_window = j.at("fit_window").get<std::size_t>();
    for (const auto& r : j.at("refits"))
      out.refits.push_back({index_of(returns, r.at("timestamp")), io::arma_garch_from_json(r.at("params")),
                            io::gpd_from_json(r.at("gpd")), r.at("carried").get<bool>()});
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return out;
}

rolling::LpaPath load_lpa(const fs::path& path, const ReturnSeries& returns) {
  const json j = load_json(path);
  rolling::LpaPath out;
  try {
    for (const auto& r : j.at("refits"))
      out.refits.push_back({index_of(returns, r.at("timestamp")), index_of(returns, r.at("start")),
                            io::arma_garch_from_json(r.at("params")), r.at("carried").get<bool>()});
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return out;
}

rolling::CarlPath load_carl(const fs::path& path, const ReturnSeries& returns) {
  const json j = load_json(path);
  rolling::CarlPath out;
  try {
    out.fit_window = j.at("fit_window").get<std::size_t>();
    for (const auto& r : j.at("refits"))
      out.refits.push_back({index_of(returns, r.at("timestamp")), r.at("threshold_q").get<double>(),
                            io::carlvol_from_json(r.at("params")), r.at("carried").get<bool>()});
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return out;
}

ProbabilitySeries predict_nn(const Market& m, const io::TargetTable& targets, Model model, const fs::path& dir) {
  const json index = load_json(dir / (std::string(model_name(model)) + ".json"));
  const nn::Arch arch = model == Model::Mlp ? nn::Arch::Mlp : nn::Arch::Lstm;
  const nn::FeatureMatrix features = nn::build_features(m.returns, targets.tvar, arch);
  ProbabilitySeries out;
  try {
    for (const auto& block : index.at("blocks")) {
      const std::size_t begin = index_of(m.returns, block.at("begin")), last = index_of(m.returns, block.at("end"));
      const nn::Network net = nn::load_checkpoint((dir / block.at("checkpoint").get<std::string>()).string());
      if (net.arch() != arch) throw DataError("checkpoint architecture does not match " + std::string(model_name(model)));
      if (out.values.empty()) out.first = begin;
      if (begin != out.end()) throw DataError(std::string(model_name(model)) + ".json: blocks are not contiguous");
      for (std::size_t t = begin; t <= last; ++t) {
        const std::size_t row = t - 1 - features.first;
        out.values.push_back(net.forward(features.row(row))[2]);
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string(model_name(model)) + ".json: " + e.what());
  }
  return out;
}

void predict(const RunConfig& config) {
  const Market m = load_market(config);
  const std::size_t end = m.returns.size();
  for (const auto& spec : config.targets) {
    const fs::path cell = cell_dir(config, spec), dir = cell / "models";
    const io::TargetTable targets = load_targets(cell, m.returns);
    const auto write = [&](std::string_view name, const Aligned<double>& s, std::string_view column) {
      save_csv(cell / name, [&](std::ostream& out) { io::write_series_csv(s, m.returns, column, out); });
    };
    const auto garch = rolling::garch_forecasts(load_garch(dir / "garch.json", m.returns), m.returns, targets.tvar,
                                                spec.alpha, end);
    write("var_normal.csv", garch.var_normal, "var");
    write("var_evt.csv", garch.var_evt, "var");
    for (Model model : config.models) {
      ProbabilitySeries p;
      switch (model) {
        case Model::GarchNormal: p = garch.p_normal; break;
        case Model::GarchEvt: p = garch.p_evt; break;
        case Model::LpaGarch:
          p = rolling::lpa_probabilities(load_lpa(dir / "lpa_garch.json", m.returns), m.returns, targets.tvar, end);
          break;
        case Model::CarlVol:
          p = rolling::carlvol_probabilities(load_carl(dir / "carl_vol.json", m.returns), m.returns, targets.tvar,
                                             end);
          break;
        case Model::Mlp:
        case Model::Lstm: p = predict_nn(m, targets, model, dir); break;
      }
      spdlog::info("predict {} {}: {} probabilities", cell_name(spec), model_name(model), p.size());
      write(prob_file(model_name(model)), p, "p");
    }
  }
}

// --- stack --------------------------------------------------------------

void stack(const RunConfig& config) {
  const Market m = load_market(config);
  for (const auto& spec : config.targets) {
    const fs::path cell = cell_dir(config, spec);
    const io::TargetTable targets = load_targets(cell, m.returns);
    std::vector<ProbabilitySeries> level0;
    for (Model model : config.models) level0.push_back(load_series(cell / prob_file(model_name(model)), m.returns, "p"));
    const ensemble::StackResult result = ensemble::stack_online(level0, targets.labels, config.stack);
    spdlog::info("stack {}: {} meta predictions from {} models", cell_name(spec), result.meta.size(), level0.size());
    save_csv(cell / prob_file("ensemble"),
             [&](std::ostream& out) { io::write_probability_csv(result.meta, m.returns, out); });
    save_csv(cell / "ensemble_coefficients.csv",
             [&](std::ostream& out) { ensemble::write_coefficients_csv(result, m.returns, out); });
  }
}

// --- backtest -----------------------------------------------------------

json choice_json(const strategy::ThresholdChoice& c) {
  return {{"u_star", c.u_star},
          {"feasible", c.feasible},
          {"tpr", c.tpr},
          {"required_tpr", c.required_tpr},
          {"excess_return", c.excess_return}};
}

void backtest(const RunConfig& config) {
  const Market m = load_market(config);
  const std::size_t end = m.returns.size();
  for (const auto& spec : config.targets) {
    const fs::path cell = cell_dir(config, spec);
    const io::TargetTable targets = load_targets(cell, m.returns);
    json thresholds;
    std::map<std::string, strategy::PositionSeries> positions;

    std::vector<std::string> classifiers;
    for (Model model : config.models) classifiers.emplace_back(model_name(model));
    classifiers.emplace_back("ensemble");
    for (const auto& name : classifiers) {
      const ProbabilitySeries p = load_series(cell / prob_file(name), m.returns, "p");
      if (p.first >= m.test)
        throw DataError(name + ": no probabilities before test_start to choose a threshold on");
      const auto choice =
          strategy::threshold_select(slice(p, p.first, m.test), m.returns, targets.tvar, spec.alpha);
      thresholds[name] = choice_json(choice);
      positions[name] = strategy::positions_from_probabilities(slice(p, m.test, end), choice.u_star);
    }
    const auto var_norm = load_series(cell / "var_normal.csv", m.returns, "var");
    const auto var_evt = load_series(cell / "var_evt.csv", m.returns, "var");
    positions["buy_hold"] = strategy::benchmark_buy_hold(m.returns, m.test);
    positions["target_var_normal"] = strategy::benchmark_target_var(slice(var_norm, m.test, end), targets.tvar);
    positions["target_var_evt"] = strategy::benchmark_target_var(slice(var_evt, m.test, end), targets.tvar);
    const auto spread = strategy::benchmark_varspread(var_norm, var_evt, config.benchmarks.varspread);
    positions["varspread"] = slice(spread, m.test, end);
    positions["switch"] =
        strategy::switch_strategy(m.prices, positions["ensemble"], positions["varspread"], config.benchmarks.switch_ma);

    for (const auto& name : strategy_names(config)) {
      const auto report = strategy::backtest(positions.at(name), m.returns, config.fee);
      save_csv(cell / ("backtest_" + name + ".csv"), [&](std::ostream& out) { strategy::write_report_csv(report, out); });
    }
    save_json(cell / "thresholds.json", thresholds);
    spdlog::info("backtest {}: {} strategies", cell_name(spec), positions.size());
  }
}

// --- report -------------------------------------------------------------

json stats_json(const strategy::BacktestReport& r, const strategy::ExceedanceCheck& e) {
  const auto& s = r.stats;
  json j = {{"exceedance", e.fraction},
            {"pass", e.pass},
            {"periods", s.periods},
            {"total_return", s.total_return},
            {"average_return", s.average_return},
            {"annual_return", s.annual_return},
            {"volatility", s.volatility},
            {"sharpe", s.sharpe},
            {"max_drawdown", s.max_drawdown},
            {"trades", r.trades},
            {"fees", r.fees}};
  j["sortino"] = s.sortino_infinite ? json("inf") : json(s.sortino);
  return j;
}

std::string csv_value(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return io::format_double(v.get<double>());
  return v.dump();
}

void write_table(const fs::path& path, const std::vector<std::string>& columns, const json& rows) {
  save_csv(path, [&](std::ostream& out) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < columns.size(); ++c)
        out << (c ? "," : "") << (c == 0 ? row.at("name").get<std::string>() : csv_value(row.value(columns[c], json())));
      out << '\n';
    }
  });
}

json report_cell(const RunConfig& config, const Market& m, const RiskTargetSpec& spec) {
  const fs::path cell = cell_dir(config, spec);
  const std::size_t end = m.returns.size();
  const io::TargetTable targets = load_targets(cell, m.returns);
  const json thresholds = load_json(cell / "thresholds.json");

  json out;
  const auto calibration_labels = slice(targets.labels, m.calibration, m.test);
  const CostMatrix costs = ts::class_costs(m.returns, calibration_labels);
  const TvarSeries& tvar = targets.tvar;
  std::vector<double> r, upper;
  for (std::size_t t = m.calibration; t < m.test; ++t) {
    r.push_back(m.returns[t]);
    upper.push_back(tvar.upper_at(t));
  }
  const double exceedance = ts::exceedance_rate(r, upper);
  out["calibration"] = {{"exceedance", exceedance},
                        {"min_tpr", ts::min_tpr(exceedance, spec.alpha)},
                        {"cost_false_positive", costs.cost_false_positive},
                        {"cost_true_positive", costs.cost_true_positive},
                        {"empty_class", costs.any_empty()}};

  json metric_rows = json::array();
  std::vector<std::string> classifiers;
  for (Model model : config.models) classifiers.emplace_back(model_name(model));
  classifiers.emplace_back("ensemble");
  for (const auto& name : classifiers) {
    const auto p = slice(load_series(cell / prob_file(name), m.returns, "p"), m.test, end);
    std::vector<int> positives;
    for (std::size_t t = p.first; t < p.end(); ++t) positives.push_back(targets.labels.at_return(t) == 2 ? 1 : 0);
    json row = {{"name", name}};
    try {
      const auto a = metrics::risk_adjusted_auc(p.values, positives, costs);
      row["auc"] = a.auc;
      row["aauc"] = a.aauc;
    } catch (const DataError& e) {
      row["note"] = e.what();
    }
    if (!thresholds.contains(name)) throw DataError("thresholds.json: no entry for " + name);
    const json& th = thresholds.at(name);
    row["u_star"] = th.at("u_star");
    row["feasible"] = th.at("feasible");
    row["calibration_tpr"] = th.at("tpr");
    row["required_tpr"] = th.at("required_tpr");
    metric_rows.push_back(row);
  }
  write_table(cell / "metrics.csv",
              {"model", "auc", "aauc", "u_star", "feasible", "calibration_tpr", "required_tpr", "note"}, metric_rows);
  out["classifiers"] = metric_rows;

  json summary_rows = json::array();
  for (const auto& name : strategy_names(config)) {
    const auto positions = load_series(cell / ("backtest_" + name + ".csv"), m.returns, "position");
    const auto report = strategy::backtest(positions, m.returns, config.fee);
    json row = stats_json(report, strategy::strategy_exceedance(report, tvar, spec.alpha));
    row["name"] = name;
    summary_rows.push_back(row);
  }
  write_table(cell / "summary.csv",
              {"strategy", "exceedance", "pass", "total_return", "average_return", "annual_return", "volatility",
               "sharpe", "sortino", "max_drawdown", "trades", "fees"},
              summary_rows);
  out["strategies"] = summary_rows;
  return out;
}

void write_manifest(const RunConfig& config) {
  json artifacts = json::object();
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(config.output))
    if (entry.is_regular_file() && entry.path().filename() != kManifest && entry.path().extension() != ".partial")
      files.push_back(fs::relative(entry.path(), config.output));
  std::sort(files.begin(), files.end());
  for (const auto& f : files) artifacts[f.generic_string()] = io::hex64(io::fnv1a_file(config.output / f));
  json manifest;
  manifest["config"] = config.to_json();
  manifest["config_hash"] = io::hex64(config.hash());
  manifest["seeds"] = {{"nn", config.nn_seed}, {"lpa", config.lpa_seed}};
  manifest["strict"] = config.strict;
  manifest["artifacts"] = artifacts;
  save_json(config.output / kManifest, manifest);
}

void report(const RunConfig& config) {
  const Market m = load_market(config);
  json all;
  for (const auto& spec : config.targets) all[cell_name(spec)] = report_cell(config, m, spec);
  save_json(config.output / "report.json", all);
  write_manifest(config);
  spdlog::info("report: {} target(s) written to {}", config.targets.size(), config.output.string());
}

}  // namespace

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Label: return "label";
    case Stage::Fit: return "fit";
    case Stage::Predict: return "predict";
    case Stage::Stack: return "stack";
    case Stage::Backtest: return "backtest";
    case Stage::Report: return "report";
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : kStages)
    if (stage_name(s) == name) return s;
  throw ConfigError("unknown stage '" + std::string(name) + "'");
}

std::string cell_name(const RiskTargetSpec& spec) {
  return "a" + io::format_double(spec.alpha) + "_w" + std::to_string(spec.window);
}

std::vector<std::string> strategy_names(const RunConfig& config) {
  std::vector<std::string> out;
  for (Model model : config.models) out.emplace_back(model_name(model));
  for (const char* name : {"ensemble", "buy_hold", "target_var_normal", "target_var_evt", "varspread", "switch"})
    out.emplace_back(name);
  return out;
}

void run_stage(Stage stage, const RunConfig& config) {
  config.validate();
  if (config.output.empty()) throw ConfigError("no output directory");
  std::optional<ScopedWorkers> workers;
  if (config.strict)
    workers.emplace(1);
  else if (config.workers > 0)
    workers.emplace(config.workers);
  try {
    if (stage != Stage::Report) fs::create_directories(config.output);
    switch (stage) {
      case Stage::Ingest: ingest(config); break;
      case Stage::Label: label(config); break;
      case Stage::Fit: fit(config); break;
      case Stage::Predict: predict(config); break;
      case Stage::Stack: stack(config); break;
      case Stage::Backtest: backtest(config); break;
      case Stage::Report: report(config); break;
    }
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(stage_name(stage)) + ": " + e.what());
  } catch (const fs::filesystem_error& e) {
    throw DataError(std::string(stage_name(stage)) + ": " + e.what());
  }
}

void run_pipeline(const RunConfig& config) {
  for (Stage s : kStages) run_stage(s, config);
}

}  // namespace tailrisk::pipeline
