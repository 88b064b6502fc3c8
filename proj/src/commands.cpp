#include "dsnt/commands.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>

#include "dsnt/common.hpp"
#include "dsnt/ensemble.hpp"
#include "dsnt/rstdep.hpp"
#include "json.hpp"

namespace dsnt {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"score",   "build-treebank", "train-parser", "parse",       "train",
                                              "predict", "tune-ensemble",  "evaluate",     "report-bins", "pipeline"};
  return names;
}

namespace {

std::vector<const Document*> pointers(const std::vector<Document>& docs) {
  std::vector<const Document*> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(&d);
  return out;
}

CorpusSplits load_splits(const ExperimentConfig& cfg) {
  if (cfg.corpus.empty()) throw Error("no corpus configured");
  return load_corpus(cfg.corpus, cfg.split);
}

const std::vector<Document>& split_by_name(const CorpusSplits& s, const std::string& name) {
  if (name == "train") return s.train;
  if (name == "dev") return s.dev;
  if (name == "test") return s.test;
  throw Error("unknown split '" + name + "'");
}

fs::path output_or(const CommandOptions& opt, fs::path fallback) { return opt.out ? *opt.out : std::move(fallback); }

/// Scores for `docs`, in order. Entries for documents outside the corpus are
/// reported once; entries for other splits are silently skipped.
std::vector<std::vector<EduScore>> scores_for(const ExperimentConfig& cfg, const CorpusSplits& splits,
                                              const std::vector<const Document*>& docs) {
  auto table = load_scores(artifact_path(cfg, cfg.scores));
  std::set<std::string> corpus_ids, wanted;
  for (const auto* d : splits.all()) corpus_ids.insert(d->id);
  for (const auto* d : docs) wanted.insert(d->id);
  ScoreTable subset;
  for (auto& [id, s] : table)
    if (wanted.count(id) || !corpus_ids.count(id)) subset.emplace(id, std::move(s));
  return align_scores(subset, docs);
}

TreeMap dependency_trees(const ExperimentConfig& cfg, const std::vector<const Document*>& docs) {
  const auto path = artifact_path(cfg, cfg.parsed);
  std::map<std::string, ConstituencyTree> parsed;
  for (auto& e : read_treebank(path)) parsed.emplace(e.id, std::move(e.tree));
  TreeMap trees;
  for (const auto* d : docs) {
    auto it = parsed.find(d->id);
    if (it == parsed.end()) throw Error(path.string() + ": no tree for document '" + d->id + "'");
    if (it->second.num_edus() != d->edus.size())
      throw Error(path.string() + ": tree for '" + d->id + "' does not match its EDU count");
    trees.emplace(d->id, to_dependency(it->second));
  }
  return trees;
}

/// Predictions reordered to match `docs`; missing or unknown ids are errors.
std::vector<Prediction> align_predictions(std::vector<Prediction> preds, const std::vector<Document>& docs,
                                          const fs::path& source) {
  std::map<std::string, Prediction> by_id;
  for (auto& p : preds) {
    auto id = p.id;
    if (!by_id.emplace(id, std::move(p)).second) throw Error(source.string() + ": duplicate prediction for '" + id + "'");
  }
  std::vector<Prediction> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    auto it = by_id.find(d.id);
    if (it == by_id.end()) throw Error(source.string() + ": no prediction for document '" + d.id + "'");
    out.push_back(std::move(it->second));
    by_id.erase(it);
  }
  if (!by_id.empty())
    throw Error(source.string() + ": prediction for unknown document '" + by_id.begin()->first + "'");
  return out;
}

std::vector<int> stars(const std::vector<Prediction>& preds) {
  std::vector<int> out;
  for (const auto& p : preds) out.push_back(p.pred);
  return out;
}

struct EvalInputs {
  std::string name;
  std::vector<int> preds, golds;
  std::vector<std::size_t> lengths;
};

EvalInputs evaluation_inputs(const ExperimentConfig& cfg, const CommandOptions& opt) {
  auto splits = load_splits(cfg);
  const auto& docs = split_by_name(splits, cfg.eval_split);
  if (docs.empty()) throw Error("split '" + cfg.eval_split + "' is empty");
  EvalInputs in;
  for (const auto& d : docs) {
    in.golds.push_back(d.label);
    in.lengths.push_back(word_count(d));
  }
  if (opt.rule) {
    auto rule = load_rule(*opt.rule);
    auto path_s = artifact_path(cfg, cfg.predictions, rule.short_model, cfg.eval_split);
    auto path_l = artifact_path(cfg, cfg.predictions, rule.long_model, cfg.eval_split);
    auto ps = align_predictions(read_predictions(path_s), docs, path_s);
    auto pl = align_predictions(read_predictions(path_l), docs, path_l);
    for (std::size_t i = 0; i < docs.size(); ++i) in.preds.push_back(ensemble_predict(rule, in.lengths[i], ps[i], pl[i]).pred);
    in.name = "ensemble(" + rule.short_model + "+" + rule.long_model + ")";
  } else {
    const auto model = to_string(cfg.train.kind);
    auto path = opt.predictions ? *opt.predictions : artifact_path(cfg, cfg.predictions, model, cfg.eval_split);
    in.preds = stars(align_predictions(read_predictions(path), docs, path));
    in.name = model;
  }
  return in;
}

std::string report_stem(const EvalInputs& in, const CommandOptions& opt) {
  return opt.rule ? "ensemble" : in.name;
}

json metrics_json(const MetricsReport& r) {
  auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  return {{"support", r.support},
          {"acc", num(100.0 * r.accuracy)},
          {"f1", num(100.0 * r.macro_f1)},
          {"mse", num(r.mse)},
          {"mae", num(r.mae)}};
}

}  // namespace

fs::path run_score(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  auto splits = load_splits(cfg);
  auto all = splits.all();
  ScoreTable table;
  if (cfg.scorer_kind == "lexicon") {
    auto lexicon = read_lexicon(*cfg.lexicon);
    for (const auto* d : all) table.emplace(d->id, score_lexicon(*d, lexicon));
  } else {
    auto result = train_mil_lite(pointers(splits.train), pointers(splits.dev), cfg.mil);
    log << "[score] MIL-lite dev loss " << result.initial_dev_loss;
    if (!result.curve.empty()) log << " -> " << result.curve.back().dev_loss;
    log << " after " << result.curve.size() << " epochs\n";
    save_scorer(artifact_path(cfg, cfg.scorer), result.model);
    table = score_documents(result.model, all);
  }
  auto out = output_or(opt, artifact_path(cfg, cfg.scores));
  save_scores(out, table);
  log << "[score] " << table.size() << " documents -> " << out.string() << "\n";
  return out;
}

fs::path run_build_treebank(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  auto splits = load_splits(cfg);
  auto train = pointers(splits.train);
  auto entries = build_treebank(train, scores_for(cfg, splits, train), cfg.cky);
  auto out = output_or(opt, artifact_path(cfg, cfg.treebank));
  write_treebank(out, entries);
  log << "[build-treebank] " << entries.size() << " trees (beam " << cfg.cky.beam << ", T " << cfg.cky.temperature
      << ") -> " << out.string() << "\n";
  return out;
}

fs::path run_train_parser(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  auto splits = load_splits(cfg);
  const auto treebank_path = artifact_path(cfg, cfg.treebank);
  auto entries = read_treebank(treebank_path);
  std::map<std::string, const Document*> train_by_id;
  for (const auto& d : splits.train) train_by_id.emplace(d.id, &d);

  std::vector<const Document*> docs;
  for (const auto& e : entries) {
    auto it = train_by_id.find(e.id);
    if (it == train_by_id.end())
      throw Error(treebank_path.string() + ": tree for '" + e.id + "' has no document in the training split");
    docs.push_back(it->second);
  }
  auto scores = scores_for(cfg, splits, docs);
  std::vector<ParserExample> examples;
  for (std::size_t i = 0; i < docs.size(); ++i) examples.push_back({docs[i], &scores[i], &entries[i].tree});

  auto model = train_parser(examples, cfg.parser_cfg, [&](const ParserEpoch& e) {
    log << "[train-parser] epoch " << e.epoch << " oracle accuracy " << std::fixed << std::setprecision(4)
        << e.oracle_accuracy << std::defaultfloat << "\n";
  });
  auto out = output_or(opt, artifact_path(cfg, cfg.parser));
  save_parser(out, model);
  log << "[train-parser] averaged model oracle accuracy " << oracle_accuracy(model, examples) << " -> " << out.string()
      << "\n";
  return out;
}

fs::path run_parse(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  auto splits = load_splits(cfg);
  auto all = splits.all();
  auto model = load_parser(artifact_path(cfg, cfg.parser));
  auto trees = parse_all(model, all, scores_for(cfg, splits, all));
  std::vector<TreebankEntry> entries;
  std::vector<std::pair<std::string, DependencyTree>> deps;
  for (std::size_t i = 0; i < all.size(); ++i) {
    deps.emplace_back(all[i]->id, to_dependency(trees[i]));
    entries.push_back({all[i]->id, std::move(trees[i])});
  }
  auto out = output_or(opt, artifact_path(cfg, cfg.parsed));
  write_treebank(out, entries);
  write_dependency_file(artifact_path(cfg, cfg.dependencies), deps);
  log << "[parse] " << entries.size() << " documents -> " << out.string() << "\n";
  return out;
}

fs::path run_train(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  auto splits = load_splits(cfg);
  auto train_docs = pointers(splits.train);
  auto dev_docs = pointers(splits.dev);
  TreeMap trees;
  if (cfg.train.kind == ModelKind::Dah) {
    auto needed = train_docs;
    needed.insert(needed.end(), dev_docs.begin(), dev_docs.end());
    trees = dependency_trees(cfg, needed);
  }
  const auto model_name = to_string(cfg.train.kind);
  auto result = train(cfg.train, train_docs, dev_docs, trees, [&](const EpochRecord& e) {
    log << "[train " << model_name << "] epoch " << e.epoch << " loss " << std::fixed << std::setprecision(4)
        << e.train_loss << " dev acc " << e.dev_accuracy << std::defaultfloat << "\n";
  });
  std::map<std::string, std::string> hyper{{"optimizer", ad::to_string(cfg.train.optimizer.kind)},
                                           {"lr", std::to_string(cfg.train.optimizer.lr)},
                                           {"batch", std::to_string(cfg.train.batch)},
                                           {"dropout", std::to_string(cfg.train.dropout)},
                                           {"seed", std::to_string(cfg.train.seed)},
                                           {"best_epoch", std::to_string(result.best_epoch)}};
  auto out = output_or(opt, artifact_path(cfg, cfg.checkpoint, model_name));
  result.model.save(out, hyper);
  log << "[train " << model_name << "] best dev accuracy " << result.best_dev_accuracy << " at epoch "
      << result.best_epoch << " -> " << out.string() << "\n";
  return out;
}

fs::path run_predict(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  const auto model_name = to_string(cfg.train.kind);
  auto model = SentimentModel::load(artifact_path(cfg, cfg.checkpoint, model_name));
  auto splits = load_splits(cfg);
  auto docs = pointers(split_by_name(splits, cfg.eval_split));
  TreeMap trees;
  if (model.kind() == ModelKind::Dah) trees = dependency_trees(cfg, docs);
  auto preds = predict_all(model, docs, trees);
  auto out = output_or(opt, artifact_path(cfg, cfg.predictions, to_string(model.kind()), cfg.eval_split));
  write_predictions(out, preds);
  log << "[predict " << model_name << "] " << preds.size() << " " << cfg.eval_split << " documents -> " << out.string()
      << "\n";
  return out;
}

fs::path run_tune_ensemble(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  auto splits = load_splits(cfg);
  const auto& dev = splits.dev.empty() ? splits.train : splits.dev;
  auto short_paths = cfg.short_preds, long_paths = cfg.long_preds;
  if (short_paths.empty()) short_paths.push_back(artifact_path(cfg, cfg.predictions, cfg.short_model, "dev"));
  if (long_paths.empty()) long_paths.push_back(artifact_path(cfg, cfg.predictions, cfg.long_model, "dev"));
  if (short_paths.size() != long_paths.size())
    throw Error("tune-ensemble: " + std::to_string(short_paths.size()) + " short runs but " +
                std::to_string(long_paths.size()) + " long runs");

  std::vector<int> golds;
  std::vector<std::size_t> lengths;
  for (const auto& d : dev) {
    golds.push_back(d.label);
    lengths.push_back(word_count(d));
  }
  std::vector<TuningRun> runs;
  for (std::size_t r = 0; r < short_paths.size(); ++r)
    runs.push_back({stars(align_predictions(read_predictions(short_paths[r]), dev, short_paths[r])),
                    stars(align_predictions(read_predictions(long_paths[r]), dev, long_paths[r]))});
  auto result = tune_threshold(runs, golds, lengths, cfg.metric, cfg.short_model, cfg.long_model);
  for (std::size_t r = 0; r < runs.size(); ++r)
    log << "[tune-ensemble] run " << r + 1 << " threshold " << result.run_thresholds[r] << " "
        << to_string(cfg.metric) << " " << result.run_scores[r] << "\n";
  auto out = output_or(opt, artifact_path(cfg, cfg.rule));
  save_rule(out, result.rule);
  log << "[tune-ensemble] threshold " << result.rule.threshold << " -> " << out.string() << "\n";
  return out;
}

fs::path run_evaluate(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  auto in = evaluation_inputs(cfg, opt);
  auto metrics = compute_metrics(in.preds, in.golds);
  auto bins = binned_report(in.preds, in.golds, in.lengths, cfg.bins);
  json report = metrics_json(metrics);
  report["model"] = in.name;
  report["split"] = cfg.eval_split;
  json jb = json::array();
  for (const auto& b : bins.bins) {
    auto entry = metrics_json(b.metrics);
    entry["label"] = b.label();
    entry["lo"] = b.lo;
    entry["hi"] = b.hi;
    jb.push_back(entry);
  }
  report["bins"] = jb;
  auto out = output_or(opt, artifact_path(cfg, cfg.report, report_stem(in, opt), cfg.eval_split));
  io::write_atomic(out, report.dump(1) + "\n");
  log << "[evaluate " << in.name << "] acc " << 100.0 * metrics.accuracy << " f1 " << 100.0 * metrics.macro_f1
      << " mse " << metrics.mse << " mae " << metrics.mae << " (n=" << metrics.support << ") -> " << out.string()
      << "\n";
  return out;
}

fs::path run_report_bins(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  auto in = evaluation_inputs(cfg, opt);
  auto report = binned_report(in.preds, in.golds, in.lengths, cfg.bins);
  auto out = output_or(opt, artifact_path(cfg, cfg.bins_csv, report_stem(in, opt), cfg.eval_split));
  emit_csv(report, out);
  for (const auto& b : report.bins) log << "[report-bins " << in.name << "] " << b.label() << "\n";
  log << "[report-bins " << in.name << "] -> " << out.string() << "\n";
  return out;
}

void run_pipeline(ExperimentConfig cfg, std::ostream& log) {
  cfg.train.kind = ModelKind::Dah;
  const CommandOptions none;
  using Stage = fs::path (*)(const ExperimentConfig&, const CommandOptions&, std::ostream&);
  const std::vector<std::pair<const char*, Stage>> stages{
      {"score", run_score},     {"build-treebank", run_build_treebank},
      {"train-parser", run_train_parser}, {"parse", run_parse},
      {"train", run_train},     {"predict", run_predict},
      {"evaluate", run_evaluate}, {"report-bins", run_report_bins}};
  for (const auto& [name, stage] : stages) {
    try {
      stage(cfg, none, log);
    } catch (const std::exception& e) {
      throw Error(std::string("pipeline failed at stage '") + name + "': " + e.what());
    }
  }
}

int run_command(const std::string& name, ExperimentConfig cfg, const CommandOptions& opt, std::ostream& log) {
  try {
    finalize_config(cfg);
    if (name == "score") run_score(cfg, opt, log);
    else if (name == "build-treebank") run_build_treebank(cfg, opt, log);
    else if (name == "train-parser") run_train_parser(cfg, opt, log);
    else if (name == "parse") run_parse(cfg, opt, log);
    else if (name == "train") run_train(cfg, opt, log);
    else if (name == "predict") run_predict(cfg, opt, log);
    else if (name == "tune-ensemble") run_tune_ensemble(cfg, opt, log);
    else if (name == "evaluate") run_evaluate(cfg, opt, log);
    else if (name == "report-bins") run_report_bins(cfg, opt, log);
    else if (name == "pipeline") {
      if (opt.out) cfg.work_dir = *opt.out;
      run_pipeline(cfg, log);
    } else throw Error("unknown command '" + name + "'");
  } catch (const std::exception& e) {
    log << "dsnt " << name << ": error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace dsnt
