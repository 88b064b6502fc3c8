#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dsnt/corpus.hpp"
#include "dsnt/edu_scorer.hpp"
#include "dsnt/eval.hpp"
#include "dsnt/nnet.hpp"
#include "dsnt/parser.hpp"
#include "dsnt/treegen.hpp"

namespace dsnt {

/// Everything one experiment needs. Artifact paths may contain `{model}`,
/// `{split}` and `{metric}` placeholders, filled in when a command runs.
struct ExperimentConfig {
  std::optional<std::uint64_t> seed;

  std::filesystem::path work_dir = ".";
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> lexicon;
  std::string scores = "scores.jsonl";
  std::string scorer = "scorer.ckpt";
  std::string treebank = "treebank.tsv";
  std::string parser = "parser.ckpt";
  std::string parsed = "parsed.tsv";
  std::string dependencies = "dependencies.tsv";
  std::string checkpoint = "model_{model}.ckpt";
  std::string predictions = "predictions_{model}_{split}.jsonl";
  std::string rule = "ensemble_{metric}.json";
  std::string report = "report_{model}_{split}.json";
  std::string bins_csv = "bins_{model}_{split}.csv";

  SplitSpec split;
  std::string scorer_kind = "mil";  // mil | lexicon
  MilConfig mil;
  CkyConfig cky;
  ParserConfig parser_cfg;
  TrainConfig train;
  std::size_t bins = 5;
  Metric metric = Metric::Acc;
  std::string eval_split = "test";

  std::string short_model = "han";
  std::string long_model = "dah";
  std::vector<std::filesystem::path> short_preds;
  std::vector<std::filesystem::path> long_preds;
};

/// Reads the JSON config. Relative paths inside it are resolved against the
/// config file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir);

/// Checks required fields and copies the seed into every stage config.
void finalize_config(ExperimentConfig& cfg);

/// `work_dir / name` with placeholders substituted.
std::filesystem::path artifact_path(const ExperimentConfig& cfg, const std::string& name, const std::string& model = "",
                                    const std::string& split = "");

}  // namespace dsnt
