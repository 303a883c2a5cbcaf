#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tailrisk/config.hpp"

namespace tailrisk::pipeline {

enum class Stage { Ingest, Label, Fit, Predict, Stack, Backtest, Report };

inline constexpr Stage kStages[] = {Stage::Ingest, Stage::Label,    Stage::Fit,   Stage::Predict,
                                    Stage::Stack,  Stage::Backtest, Stage::Report};

std::string_view stage_name(Stage stage);
Stage parse_stage(std::string_view name);

/// Directory of one (alpha, window) target, e.g. `a0.05_w24`.
std::string cell_name(const RiskTargetSpec& spec);

/// Runs one stage against config.output. Stages read only the artifacts of
/// earlier stages; a missing one is a DataError naming the file. Failures are
/// rethrown with the stage name prefixed and the same exit category.
void run_stage(Stage stage, const RunConfig& config);

/// ingest, label, fit, predict, stack, backtest, report in order.
void run_pipeline(const RunConfig& config);

/// Strategy names of a backtest, in report order.
std::vector<std::string> strategy_names(const RunConfig& config);

}  // namespace tailrisk::pipeline
