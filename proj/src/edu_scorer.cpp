#include "dsnt/edu_scorer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>

#include "dsnt/ad/checkpoint.hpp"
#include "dsnt/ad/ops.hpp"
#include "dsnt/common.hpp"
#include "json.hpp"

namespace dsnt {

using nlohmann::json;
namespace ad = dsnt::ad;

Lexicon read_lexicon(const std::filesystem::path& path) {
  Lexicon lex;
  io::for_each_line(path, [&](const std::string& line, std::size_t no) {
    if (line.empty() || line[0] == '#') return;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(path.string() + ":" + std::to_string(no) + ": expected word<TAB>polarity");
    double p = 0.0;
    try {
      p = std::stod(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw Error(path.string() + ":" + std::to_string(no) + ": bad polarity value");
    }
    if (!(p >= -1.0 && p <= 1.0)) throw Error(path.string() + ":" + std::to_string(no) + ": polarity outside [-1, 1]");
    lex[line.substr(0, tab)] = p;
  });
  return lex;
}

std::vector<EduScore> score_lexicon(const Document& doc, const Lexicon& lexicon) {
  std::vector<EduScore> out;
  const double a = 1.0 / static_cast<double>(doc.edus.size());
  for (const auto& edu : doc.edus) {
    double total = 0.0;
    std::size_t hits = 0;
    for (const auto& tok : edu) {
      auto it = lexicon.find(tok);
      if (it == lexicon.end()) continue;
      total += it->second;
      ++hits;
    }
    out.push_back({hits ? total / static_cast<double>(hits) : 0.0, a});
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct MilIds {
  ad::ParamId embed, hidden_w, hidden_b, class_w, class_b, attention;
  explicit MilIds(const ad::ParameterSet& p)
      : embed(p.at("embed")),
        hidden_w(p.at("hidden.W")),
        hidden_b(p.at("hidden.b")),
        class_w(p.at("class.W")),
        class_b(p.at("class.b")),
        attention(p.at("attention.u")) {}
};

struct MilForward {
  std::vector<ad::Var> edu_dists;  // softmax over classes per EDU
  ad::Var attention;               // softmax over EDUs
  ad::Var doc_dist;
};

MilForward mil_forward(ad::Tape& tape, const ScorerModel& m, const Document& doc) {
  MilIds ids(m.params);
  auto E = tape.param(ids.embed);
  MilForward f;
  std::vector<ad::Var> logits;
  for (const auto& edu : doc.edus) {
    std::vector<ad::Var> rows;
    for (const auto& tok : edu) rows.push_back(ad::lookup(E, m.vocab.index(tok)));
    auto avg = ad::scale(ad::add_n(rows), 1.0 / static_cast<double>(rows.size()));
    auto h = ad::tanh(ad::affine(tape.param(ids.hidden_w), avg, tape.param(ids.hidden_b)));
    f.edu_dists.push_back(ad::softmax(ad::affine(tape.param(ids.class_w), h, tape.param(ids.class_b))));
    logits.push_back(ad::dot(tape.param(ids.attention), h));
  }
  f.attention = ad::softmax(ad::concat(logits));
  std::vector<ad::Var> mix;
  for (std::size_t e = 0; e < f.edu_dists.size(); ++e)
    mix.push_back(ad::mul_scalar(f.edu_dists[e], ad::slice(f.attention, e, 1)));
  f.doc_dist = ad::add_n(mix);
  return f;
}

ad::Var mil_doc_loss(ad::Tape& tape, const ScorerModel& m, const Document& doc) {
  auto f = mil_forward(tape, m, doc);
  return ad::scale(ad::log(ad::slice(f.doc_dist, static_cast<std::size_t>(doc.class_index()), 1)), -1.0);
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

ScorerModel init_mil_lite(const std::vector<const Document*>& train, const MilConfig& cfg) {
  ScorerModel m;
  m.vocab = Vocabulary::build(train);
  m.config = cfg;
  Rng rng(cfg.seed);
  auto& p = m.params;
  auto E = p.add("embed", ad::Tensor({m.vocab.size(), cfg.embed_dim}));
  auto W = p.add("hidden.W", ad::Tensor({cfg.hidden, cfg.embed_dim}));
  p.add("hidden.b", ad::Tensor({cfg.hidden}));
  auto C = p.add("class.W", ad::Tensor({5, cfg.hidden}));
  p.add("class.b", ad::Tensor({5}));
  auto u = p.add("attention.u", ad::Tensor({cfg.hidden}));
  for (auto id : {E, W, C, u}) p.init_uniform(id, 0.1, rng);
  return m;
}

double mil_loss(const ScorerModel& model, const std::vector<const Document*>& docs) {
  if (docs.empty()) return 0.0;
  double total = 0.0;
  for (const auto* d : docs) {
    ad::Tape tape(&model.params);
    total += mil_doc_loss(tape, model, *d).value()[0];
  }
  return total / static_cast<double>(docs.size());
}

MilTrainResult train_mil_lite(const std::vector<const Document*>& train, const std::vector<const Document*>& dev,
                              const MilConfig& cfg) {
  if (train.empty()) throw Error("MIL-lite training needs at least one document");
  if (cfg.batch == 0) throw Error("batch size must be positive");
  MilTrainResult result;
  result.model = init_mil_lite(train, cfg);
  auto& model = result.model;
  const auto& monitor = dev.empty() ? train : dev;
  result.initial_dev_loss = mil_loss(model, monitor);

  ad::Optimizer opt(cfg.optimizer);
  Rng rng(cfg.seed ^ 0x5bd1e995ULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  ad::Gradients grads(model.params);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      grads.zero();
      for (std::size_t k = start; k < end; ++k) {
        ad::Tape tape(&model.params);
        auto loss = mil_doc_loss(tape, model, *train[order[k]]);
        loss_sum += loss.value()[0];
        tape.backward(loss, &grads);
      }
      grads.scale(1.0 / static_cast<double>(end - start));
      grads.clip_global_norm(cfg.clip);
      opt.step(model.params, grads);
    }
    MilEpoch stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(train.size());
    std::size_t correct = 0;
    for (const auto* d : train) {
      auto dist = mil_document_distribution(model, *d);
      if (static_cast<int>(argmax(dist)) == d->class_index()) ++correct;
    }
    stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
    stats.dev_loss = mil_loss(model, monitor);
    if (!std::isfinite(stats.train_loss) || !std::isfinite(stats.dev_loss))
      throw Error("MIL-lite training diverged at epoch " + std::to_string(epoch));
    result.curve.push_back(stats);
  }
  // scores must not change across a checkpoint round trip
  ad::round_to_f32(model.params);
  return result;
}

std::vector<EduScore> score_mil(const ScorerModel& model, const Document& doc) {
  ad::Tape tape(&model.params);
  auto f = mil_forward(tape, model, doc);
  std::vector<EduScore> out;
  const auto& att = f.attention.value();
  for (std::size_t e = 0; e < f.edu_dists.size(); ++e) {
    const auto& dist = f.edu_dists[e].value();
    double p = 0.0;
    for (std::size_t k = 0; k < 5; ++k) p += kClassPolarity[k] * dist[k];
    out.push_back({std::clamp(p, -1.0, 1.0), std::clamp(att[e], 0.0, 1.0)});
  }
  return out;
}

std::array<double, 5> mil_document_distribution(const ScorerModel& model, const Document& doc) {
  ad::Tape tape(&model.params);
  auto f = mil_forward(tape, model, doc);
  std::array<double, 5> out{};
  for (std::size_t k = 0; k < 5; ++k) out[k] = f.doc_dist.value()[k];
  return out;
}

void save_scorer(const std::filesystem::path& path, const ScorerModel& model) {
  ad::write_tensors(path, model.params);
  json meta;
  meta["kind"] = "mil-lite";
  meta["embed_dim"] = model.config.embed_dim;
  meta["hidden"] = model.config.hidden;
  meta["epochs"] = model.config.epochs;
  meta["batch"] = model.config.batch;
  meta["optimizer"] = ad::to_string(model.config.optimizer.kind);
  meta["lr"] = model.config.optimizer.lr;
  meta["seed"] = model.config.seed;
  meta["vocab"] = model.vocab.words();
  auto sidecar = path;
  sidecar += ".json";
  io::write_atomic(sidecar, meta.dump(1) + "\n");
}

ScorerModel load_scorer(const std::filesystem::path& path) {
  auto sidecar = path;
  sidecar += ".json";
  json meta = json::parse(io::read_file(sidecar));
  if (meta.value("kind", "") != "mil-lite") throw Error(sidecar.string() + ": not a MIL-lite scorer");
  ScorerModel m;
  m.vocab = Vocabulary(meta.at("vocab").get<std::vector<std::string>>());
  m.config.embed_dim = meta.at("embed_dim").get<std::size_t>();
  m.config.hidden = meta.at("hidden").get<std::size_t>();
  m.config.epochs = meta.value("epochs", 0);
  m.config.batch = meta.value("batch", std::size_t{8});
  m.config.optimizer.kind = ad::parse_optimizer(meta.value("optimizer", "adam"));
  m.config.optimizer.lr = meta.value("lr", 0.02);
  m.config.seed = meta.value("seed", std::uint64_t{0});
  m.params = ad::read_tensors(path);
  for (const char* name : {"embed", "hidden.W", "hidden.b", "class.W", "class.b", "attention.u"}) m.params.at(name);
  if (m.params.value(m.params.at("embed")).rows() != m.vocab.size())
    throw Error(path.string() + ": embedding rows do not match the vocabulary");
  if (!m.params.all_finite()) throw Error(path.string() + ": non-finite parameters");
  return m;
}

// ---------------------------------------------------------------------------

void save_scores(const std::filesystem::path& path, const ScoreTable& scores) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [id, edus] : scores) {
    json j;
    j["id"] = id;
    j["edus"] = json::array();
    for (const auto& s : edus) j["edus"].push_back({{"p", s.p}, {"a", s.a}});
    out << j.dump() << '\n';
  }
  io::write_atomic(path, out.str());
}

ScoreTable load_scores(const std::filesystem::path& path) {
  ScoreTable table;
  io::for_each_line(path, [&](const std::string& line, std::size_t no) {
    if (line.find_first_not_of(" \t") == std::string::npos) return;
    auto where = [&] { return path.string() + ":" + std::to_string(no) + ": "; };
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw Error(where() + "malformed JSON");
    }
    if (!j.contains("id") || !j["id"].is_string() || !j.contains("edus") || !j["edus"].is_array())
      throw Error(where() + "expected {\"id\": str, \"edus\": [...]}");
    std::vector<EduScore> edus;
    for (const auto& e : j["edus"]) {
      if (!e.contains("p") || !e.contains("a") || !e["p"].is_number() || !e["a"].is_number())
        throw Error(where() + "EDU score needs numeric p and a");
      EduScore s{e["p"].get<double>(), e["a"].get<double>()};
      if (!(s.p >= -1.0 && s.p <= 1.0) || !(s.a >= 0.0 && s.a <= 1.0)) throw Error(where() + "score out of range");
      edus.push_back(s);
    }
    auto id = j["id"].get<std::string>();
    if (!table.emplace(id, std::move(edus)).second) throw Error(where() + "duplicate id '" + id + "'");
  });
  return table;
}

std::vector<std::vector<EduScore>> align_scores(const ScoreTable& table, const std::vector<const Document*>& docs) {
  std::vector<std::vector<EduScore>> out;
  out.reserve(docs.size());
  std::size_t matched = 0;
  for (const auto* d : docs) {
    auto it = table.find(d->id);
    if (it == table.end()) throw Error("scores file has no entry for document id '" + d->id + "'");
    if (it->second.size() != d->edus.size())
      throw Error("scores for document '" + d->id + "' cover " + std::to_string(it->second.size()) + " EDUs, document has " +
                  std::to_string(d->edus.size()));
    out.push_back(it->second);
    ++matched;
  }
  if (table.size() > matched)
    std::cerr << "warning: scores file has " << (table.size() - matched) << " ids not in the requested documents; ignored\n";
  return out;
}

ScoreTable score_documents(const ScorerModel& model, const std::vector<const Document*>& docs) {
  std::vector<std::vector<EduScore>> scores(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) { scores[i] = score_mil(model, *docs[i]); });
  ScoreTable table;
  for (std::size_t i = 0; i < docs.size(); ++i) table.emplace(docs[i]->id, std::move(scores[i]));
  return table;
}

ScoreTable score_documents_serial(const ScorerModel& model, const std::vector<const Document*>& docs) {
  ScoreTable table;
  for (const auto* d : docs) table.emplace(d->id, score_mil(model, *d));
  return table;
}

}  // namespace dsnt
