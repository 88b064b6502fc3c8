#include "dsnt/config.hpp"

#include "dsnt/common.hpp"
#include "json.hpp"

namespace dsnt {

using nlohmann::json;

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void read_optimizer(const json& j, ad::OptimizerConfig& opt) {
  if (j.contains("optimizer")) opt.kind = ad::parse_optimizer(j.at("optimizer").get<std::string>());
  get_if(j, "lr", opt.lr);
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("work_dir")) cfg.work_dir = resolve(base_dir, j.at("work_dir").get<std::string>());
    else cfg.work_dir = base_dir;
    if (j.contains("corpus")) cfg.corpus = resolve(base_dir, j.at("corpus").get<std::string>());
    if (j.contains("lexicon")) cfg.lexicon = resolve(base_dir, j.at("lexicon").get<std::string>());
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      get_if(p, "scores", cfg.scores);
      get_if(p, "scorer", cfg.scorer);
      get_if(p, "treebank", cfg.treebank);
      get_if(p, "parser", cfg.parser);
      get_if(p, "parsed", cfg.parsed);
      get_if(p, "dependencies", cfg.dependencies);
      get_if(p, "checkpoint", cfg.checkpoint);
      get_if(p, "predictions", cfg.predictions);
      get_if(p, "rule", cfg.rule);
      get_if(p, "report", cfg.report);
      get_if(p, "bins_csv", cfg.bins_csv);
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      get_if(s, "train", cfg.split.train);
      get_if(s, "dev", cfg.split.dev);
      get_if(s, "test", cfg.split.test);
      if (s.contains("train_ids")) cfg.split.train_ids = resolve(base_dir, s.at("train_ids").get<std::string>());
      if (s.contains("dev_ids")) cfg.split.dev_ids = resolve(base_dir, s.at("dev_ids").get<std::string>());
      if (s.contains("test_ids")) cfg.split.test_ids = resolve(base_dir, s.at("test_ids").get<std::string>());
    }
    if (j.contains("scorer")) {
      const auto& s = j.at("scorer");
      get_if(s, "kind", cfg.scorer_kind);
      get_if(s, "embed_dim", cfg.mil.embed_dim);
      get_if(s, "hidden", cfg.mil.hidden);
      get_if(s, "epochs", cfg.mil.epochs);
      get_if(s, "batch", cfg.mil.batch);
      get_if(s, "clip", cfg.mil.clip);
      read_optimizer(s, cfg.mil.optimizer);
    }
    if (j.contains("treegen")) {
      const auto& t = j.at("treegen");
      get_if(t, "beam", cfg.cky.beam);
      get_if(t, "temperature", cfg.cky.temperature);
      get_if(t, "eps", cfg.cky.eps);
    }
    if (j.contains("parser")) {
      const auto& p = j.at("parser");
      get_if(p, "epochs", cfg.parser_cfg.epochs);
      get_if(p, "feature_dim", cfg.parser_cfg.feature_dim);
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      if (m.contains("kind")) cfg.train.kind = parse_model_kind(m.at("kind").get<std::string>());
      get_if(m, "embed", cfg.train.dims.embed);
      get_if(m, "word_hidden", cfg.train.dims.word_hidden);
      get_if(m, "edu_hidden", cfg.train.dims.edu_hidden);
      get_if(m, "tree_hidden", cfg.train.dims.tree_hidden);
      read_optimizer(m, cfg.train.optimizer);
      get_if(m, "batch", cfg.train.batch);
      get_if(m, "dropout", cfg.train.dropout);
      get_if(m, "max_epochs", cfg.train.max_epochs);
      get_if(m, "patience", cfg.train.patience);
      get_if(m, "clip", cfg.train.clip);
      if (m.contains("embeddings") && !m.at("embeddings").is_null())
        cfg.train.embeddings = resolve(base_dir, m.at("embeddings").get<std::string>());
    }
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      get_if(e, "bins", cfg.bins);
      if (e.contains("metric")) cfg.metric = parse_metric(e.at("metric").get<std::string>());
      get_if(e, "split", cfg.eval_split);
    }
    if (j.contains("ensemble")) {
      const auto& e = j.at("ensemble");
      get_if(e, "short", cfg.short_model);
      get_if(e, "long", cfg.long_model);
      if (e.contains("short_preds"))
        for (const auto& p : e.at("short_preds")) cfg.short_preds.push_back(resolve(base_dir, p.get<std::string>()));
      if (e.contains("long_preds"))
        for (const auto& p : e.at("long_preds")) cfg.long_preds.push_back(resolve(base_dir, p.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return config_from_json(io::read_file(path), base);
}

void finalize_config(ExperimentConfig& cfg) {
  if (!cfg.seed) throw Error("config: a seed is required (set \"seed\" or pass --seed)");
  const auto seed = *cfg.seed;
  cfg.split.seed = seed;
  cfg.mil.seed = seed;
  cfg.cky.seed = seed;
  cfg.parser_cfg.seed = seed;
  cfg.train.seed = seed;
  if (cfg.scorer_kind != "mil" && cfg.scorer_kind != "lexicon")
    throw Error("config: scorer kind must be mil or lexicon, got '" + cfg.scorer_kind + "'");
  if (cfg.scorer_kind == "lexicon" && !cfg.lexicon) throw Error("config: the lexicon scorer needs a lexicon path");
  if (cfg.eval_split != "train" && cfg.eval_split != "dev" && cfg.eval_split != "test")
    throw Error("config: split must be train, dev or test, got '" + cfg.eval_split + "'");
  if (cfg.bins == 0) throw Error("config: bins must be positive");
  if (cfg.cky.beam == 0) throw Error("config: beam must be positive");
  if (cfg.cky.temperature < 0) throw Error("config: temperature must be >= 0");
}

std::filesystem::path artifact_path(const ExperimentConfig& cfg, const std::string& name, const std::string& model,
                                    const std::string& split) {
  std::string out = name;
  auto substitute = [&](const std::string& key, const std::string& value) {
    for (std::size_t pos; (pos = out.find(key)) != std::string::npos;) out.replace(pos, key.size(), value);
  };
  substitute("{model}", model);
  substitute("{split}", split);
  substitute("{metric}", to_string(cfg.metric));
  std::filesystem::path p(out);
  return p.is_absolute() ? p : cfg.work_dir / p;
}

}  // namespace dsnt
