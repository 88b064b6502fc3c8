#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dsnt/config.hpp"

namespace dsnt {

/// Per-invocation settings that are not part of the experiment config.
struct CommandOptions {
  std::optional<std::filesystem::path> out;          // primary output of the command
  std::optional<std::filesystem::path> predictions;  // input of evaluate/report-bins
  std::optional<std::filesystem::path> rule;         // evaluate an ensemble instead of one model
};

const std::vector<std::string>& command_names();

// Each stage reads its inputs from the paths in `cfg` and writes one artifact
// atomically. The returned path is the artifact written.
std::filesystem::path run_score(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
std::filesystem::path run_build_treebank(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
std::filesystem::path run_train_parser(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
std::filesystem::path run_parse(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
std::filesystem::path run_train(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
std::filesystem::path run_predict(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
std::filesystem::path run_tune_ensemble(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
std::filesystem::path run_evaluate(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
std::filesystem::path run_report_bins(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);

/// score, build-treebank, train-parser, parse, train (DAH), then predict,
/// evaluate and report-bins on the evaluation split. A failure names its stage.
void run_pipeline(ExperimentConfig cfg, std::ostream& log);

/// Dispatches by name; returns the process exit code and prints errors to `log`.
int run_command(const std::string& name, ExperimentConfig cfg, const CommandOptions& opt, std::ostream& log);

}  // namespace dsnt
