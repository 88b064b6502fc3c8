// Command-line driver for the discourse-augmented sentiment pipeline.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dsnt/commands.hpp"
#include "dsnt/common.hpp"

namespace {

struct Flags {
  std::optional<std::string> config, corpus, lexicon, work_dir, out, predictions, rule, audit_log;
  std::optional<std::string> model, metric, split, scorer;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> beam, bins, batch;
  std::optional<double> temperature, lr, dropout;
  std::optional<int> max_epochs, parser_epochs;
  std::vector<std::string> short_preds, long_preds;
};

void add_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "experiment config (JSON)");
  cmd.add_option("--seed", f.seed, "random seed");
  cmd.add_option("--model", f.model, "han or dah")->check(CLI::IsMember({"han", "dah"}));
  cmd.add_option("--metric", f.metric, "acc, f1, mse or mae")->check(CLI::IsMember({"acc", "f1", "mse", "mae"}));
  cmd.add_option("--beam", f.beam, "CKY beam width");
  cmd.add_option("--temperature", f.temperature, "CKY sampling temperature");
  cmd.add_option("--bins", f.bins, "number of length bins");
  cmd.add_option("--out", f.out, "output path (work directory for pipeline)");
  cmd.add_option("--corpus", f.corpus, "corpus JSONL");
  cmd.add_option("--lexicon", f.lexicon, "polarity lexicon TSV");
  cmd.add_option("--scorer", f.scorer, "EDU scorer: mil or lexicon")->check(CLI::IsMember({"mil", "lexicon"}));
  cmd.add_option("--work-dir", f.work_dir, "directory for artifacts");
  cmd.add_option("--split", f.split, "split to predict or evaluate")->check(CLI::IsMember({"train", "dev", "test"}));
  cmd.add_option("--predictions", f.predictions, "prediction JSONL to evaluate");
  cmd.add_option("--rule", f.rule, "evaluate the ensemble described by this rule file");
  cmd.add_option("--short-preds", f.short_preds, "dev predictions of the short-document model, one per run");
  cmd.add_option("--long-preds", f.long_preds, "dev predictions of the long-document model, one per run");
  cmd.add_option("--lr", f.lr, "learning rate");
  cmd.add_option("--batch", f.batch, "mini-batch size");
  cmd.add_option("--dropout", f.dropout, "dropout rate");
  cmd.add_option("--max-epochs", f.max_epochs, "training epoch limit");
  cmd.add_option("--parser-epochs", f.parser_epochs, "perceptron epochs");
  cmd.add_option("--audit-log", f.audit_log, "write the list of files read to this path");
}

dsnt::ExperimentConfig build_config(const Flags& f) {
  dsnt::ExperimentConfig cfg = f.config ? dsnt::load_config(*f.config) : dsnt::ExperimentConfig{};
  if (f.seed) cfg.seed = *f.seed;
  if (f.corpus) cfg.corpus = *f.corpus;
  if (f.lexicon) cfg.lexicon = *f.lexicon;
  if (f.scorer) cfg.scorer_kind = *f.scorer;
  if (f.work_dir) cfg.work_dir = *f.work_dir;
  if (f.model) cfg.train.kind = dsnt::parse_model_kind(*f.model);
  if (f.metric) cfg.metric = dsnt::parse_metric(*f.metric);
  if (f.split) cfg.eval_split = *f.split;
  if (f.beam) cfg.cky.beam = *f.beam;
  if (f.temperature) cfg.cky.temperature = *f.temperature;
  if (f.bins) cfg.bins = *f.bins;
  if (f.lr) cfg.train.optimizer.lr = *f.lr;
  if (f.batch) cfg.train.batch = *f.batch;
  if (f.dropout) cfg.train.dropout = *f.dropout;
  if (f.max_epochs) cfg.train.max_epochs = *f.max_epochs;
  if (f.parser_epochs) cfg.parser_cfg.epochs = *f.parser_epochs;
  if (!f.short_preds.empty()) cfg.short_preds.assign(f.short_preds.begin(), f.short_preds.end());
  if (!f.long_preds.empty()) cfg.long_preds.assign(f.long_preds.begin(), f.long_preds.end());
  return cfg;
}

const std::map<std::string, std::string> kDescriptions{
    {"score", "score every EDU with the lexicon or a trained MIL-lite model"},
    {"build-treebank", "induce silver trees for the train split with beam CKY"},
    {"train-parser", "train the shift-reduce parser on the silver treebank"},
    {"parse", "parse every document and write constituency and dependency trees"},
    {"train", "train a HAN or DAH sentiment model"},
    {"predict", "write star predictions for one split"},
    {"tune-ensemble", "pick the length threshold between a short and a long model"},
    {"evaluate", "write accuracy, macro-F1, MSE, MAE and length bins as JSON"},
    {"report-bins", "write per-length-bin metrics as CSV"},
    {"pipeline", "run score through report-bins in one go"},
};

void write_audit_log(const std::string& path) {
  std::ofstream out(path);
  for (const auto& p : dsnt::io::accessed_paths()) out << p << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discourse-augmented sentiment analysis pipeline"};
  app.require_subcommand(1);
  Flags flags;
  for (const auto& name : dsnt::command_names()) add_flags(*app.add_subcommand(name, kDescriptions.at(name)), flags);
  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  int code = 1;
  try {
    dsnt::CommandOptions opt;
    if (flags.out) opt.out = *flags.out;
    if (flags.predictions) opt.predictions = *flags.predictions;
    if (flags.rule) opt.rule = *flags.rule;
    code = dsnt::run_command(name, build_config(flags), opt, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "dsnt " << name << ": error: " << e.what() << "\n";
  }
  if (flags.audit_log) write_audit_log(*flags.audit_log);
  return code;
}
