#include "dsnt/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dsnt/ad/checkpoint.hpp"
#include "dsnt/common.hpp"
#include "json.hpp"

namespace dsnt {

using nlohmann::json;
using ad::Var;

ModelKind parse_model_kind(const std::string& s) {
  if (s == "han") return ModelKind::Han;
  if (s == "dah") return ModelKind::Dah;
  throw Error("unknown model kind '" + s + "' (expected han or dah)");
}

std::string to_string(ModelKind kind) { return kind == ModelKind::Han ? "han" : "dah"; }

// ---------------------------------------------------------------------------
// Parameters

namespace {

void add_lstm(ad::ParameterSet& p, const std::string& prefix, std::size_t in, std::size_t hidden) {
  p.add(prefix + ".W", ad::Tensor({4 * hidden, in}));
  p.add(prefix + ".U", ad::Tensor({4 * hidden, hidden}));
  p.add(prefix + ".b", ad::Tensor({4 * hidden}));
}

void add_attention(ad::ParameterSet& p, const std::string& prefix, std::size_t dim) {
  p.add(prefix + ".W", ad::Tensor({dim, dim}));
  p.add(prefix + ".b", ad::Tensor({dim}));
  p.add(prefix + ".c", ad::Tensor({dim}));
}

bool is_bias(const std::string& name) { return name.size() >= 2 && name.compare(name.size() - 2, 2, ".b") == 0; }
bool is_tree_bias(const std::string& name) { return name == "tree.b_iou" || name == "tree.b_f"; }

}  // namespace

SentimentModel SentimentModel::create(ModelKind kind, const ModelDims& dims, Vocabulary vocab, std::uint64_t seed) {
  if (dims.embed == 0 || dims.word_hidden == 0 || dims.edu_hidden == 0 || dims.tree_hidden == 0)
    throw Error("model dimensions must be positive");
  SentimentModel m;
  m.kind_ = kind;
  m.dims_ = dims;
  m.vocab_ = std::move(vocab);
  auto& p = m.params_;
  p.add("embed", ad::Tensor({m.vocab_.size(), dims.embed}));
  add_lstm(p, "word.fwd", dims.embed, dims.word_hidden);
  add_lstm(p, "word.bwd", dims.embed, dims.word_hidden);
  add_attention(p, "word.att", dims.edu_dim());
  add_lstm(p, "edu.fwd", dims.edu_dim(), dims.edu_hidden);
  add_lstm(p, "edu.bwd", dims.edu_dim(), dims.edu_hidden);
  add_attention(p, "edu.att", dims.doc_dim());
  if (kind == ModelKind::Han) {
    p.add("han.out.W", ad::Tensor({5, dims.doc_dim()}));
    p.add("han.out.b", ad::Tensor({5}));
  } else {
    const std::size_t T = dims.tree_hidden, X = dims.doc_dim();
    p.add("tree.W_iou", ad::Tensor({3 * T, X}));
    p.add("tree.U_iou", ad::Tensor({3 * T, T}));
    p.add("tree.b_iou", ad::Tensor({3 * T}));
    p.add("tree.W_f", ad::Tensor({T, X}));
    p.add("tree.U_f", ad::Tensor({T, T}));
    p.add("tree.b_f", ad::Tensor({T}));
    p.add("tree.query", ad::Tensor({T, X}));
    p.add("tree.attention", ad::Tensor({T, T}));
    p.add("dah.out.W", ad::Tensor({5, T}));
    p.add("dah.out.b", ad::Tensor({5}));
  }
  Rng rng(seed);
  for (ad::ParamId id = 0; id < p.size(); ++id)
    if (!is_bias(p.name(id)) && !is_tree_bias(p.name(id))) p.init_uniform(id, 0.1, rng);
  return m;
}

std::size_t SentimentModel::load_embeddings(const std::filesystem::path& path) {
  auto& E = params_.value(params_.at("embed"));
  std::size_t loaded = 0;
  io::for_each_line(path, [&](const std::string& line, std::size_t no) {
    std::istringstream in(line);
    std::string word;
    if (!(in >> word)) return;
    std::vector<double> v;
    double x;
    while (in >> x) v.push_back(x);
    if (v.size() != dims_.embed)
      throw Error(path.string() + ":" + std::to_string(no) + ": expected " + std::to_string(dims_.embed) +
                  " values, got " + std::to_string(v.size()));
    auto row = vocab_.index(word);
    if (row == Vocabulary::kUnknown) return;
    std::copy(v.begin(), v.end(), E.ptr() + row * dims_.embed);
    ++loaded;
  });
  return loaded;
}

void SentimentModel::save(const std::filesystem::path& path, const std::map<std::string, std::string>& hyper) const {
  ad::write_tensors(path, params_);
  json meta;
  meta["kind"] = to_string(kind_);
  meta["dims"] = {{"embed", dims_.embed},
                  {"word_hidden", dims_.word_hidden},
                  {"edu_hidden", dims_.edu_hidden},
                  {"tree_hidden", dims_.tree_hidden}};
  meta["hyper"] = hyper;
  meta["vocab"] = vocab_.words();
  auto sidecar = path;
  sidecar += ".json";
  io::write_atomic(sidecar, meta.dump(1) + "\n");
}

SentimentModel SentimentModel::load(const std::filesystem::path& path) {
  auto sidecar = path;
  sidecar += ".json";
  json meta = json::parse(io::read_file(sidecar));
  ModelDims dims;
  const auto& d = meta.at("dims");
  dims.embed = d.at("embed").get<std::size_t>();
  dims.word_hidden = d.at("word_hidden").get<std::size_t>();
  dims.edu_hidden = d.at("edu_hidden").get<std::size_t>();
  dims.tree_hidden = d.at("tree_hidden").get<std::size_t>();
  auto m = create(parse_model_kind(meta.at("kind").get<std::string>()), dims,
                  Vocabulary(meta.at("vocab").get<std::vector<std::string>>()), 0);
  auto loaded = ad::read_tensors(path);
  for (ad::ParamId id = 0; id < m.params_.size(); ++id) {
    const auto& name = m.params_.name(id);
    auto src = loaded.find(name);
    if (!src) throw Error(path.string() + ": missing tensor " + name);
    if (loaded.value(*src).shape() != m.params_.value(id).shape())
      throw Error(path.string() + ": shape mismatch for " + name);
    m.params_.value(id) = loaded.value(*src);
  }
  if (loaded.size() != m.params_.size()) throw Error(path.string() + ": unexpected extra tensors");
  return m;
}

// ---------------------------------------------------------------------------
// Forward pass

namespace {

struct LstmWeights {
  Var W, U, b;
  std::size_t hidden;
};

LstmWeights lstm_weights(ad::Tape& tape, const SentimentModel& m, const std::string& prefix, std::size_t hidden) {
  const auto& p = m.params();
  return {tape.param(p.at(prefix + ".W")), tape.param(p.at(prefix + ".U")), tape.param(p.at(prefix + ".b")), hidden};
}

struct LstmState {
  Var h, c;
  bool zero = true;
};

LstmState lstm_step(const LstmWeights& w, Var x, const LstmState& prev) {
  const std::size_t H = w.hidden;
  Var gates = ad::affine(w.W, x, w.b);
  if (!prev.zero) gates = ad::add(gates, ad::matvec(w.U, prev.h));
  Var i = ad::sigmoid(ad::slice(gates, 0, H));
  Var o = ad::sigmoid(ad::slice(gates, 2 * H, H));
  Var u = ad::tanh(ad::slice(gates, 3 * H, H));
  Var c = ad::mul(i, u);
  if (!prev.zero) c = ad::add(c, ad::mul(ad::sigmoid(ad::slice(gates, H, H)), prev.c));
  return {ad::mul(o, ad::tanh(c)), c, false};
}

std::vector<Var> bilstm(ad::Tape& tape, const SentimentModel& m, const std::string& prefix, std::size_t hidden,
                        const std::vector<Var>& inputs) {
  auto fw = lstm_weights(tape, m, prefix + ".fwd", hidden);
  auto bw = lstm_weights(tape, m, prefix + ".bwd", hidden);
  const std::size_t n = inputs.size();
  std::vector<Var> fwd(n), bwd(n);
  LstmState s;
  for (std::size_t t = 0; t < n; ++t) fwd[t] = (s = lstm_step(fw, inputs[t], s)).h;
  s = LstmState{};
  for (std::size_t t = n; t-- > 0;) bwd[t] = (s = lstm_step(bw, inputs[t], s)).h;
  std::vector<Var> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = ad::concat({fwd[t], bwd[t]});
  return out;
}

/// alpha = softmax_t(tanh(W h_t + b) . c)
Var attention_weights(ad::Tape& tape, const SentimentModel& m, const std::string& prefix, const std::vector<Var>& hs) {
  const auto& p = m.params();
  Var W = tape.param(p.at(prefix + ".W"));
  Var b = tape.param(p.at(prefix + ".b"));
  Var c = tape.param(p.at(prefix + ".c"));
  std::vector<Var> scores;
  scores.reserve(hs.size());
  for (const auto& h : hs) scores.push_back(ad::dot(ad::tanh(ad::affine(W, h, b)), c));
  return ad::softmax(ad::concat(scores));
}

Var weighted_sum(const std::vector<Var>& hs, Var alpha) {
  std::vector<Var> terms;
  terms.reserve(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) terms.push_back(ad::mul_scalar(hs[i], ad::slice(alpha, i, 1)));
  return ad::add_n(terms);
}

}  // namespace

Var encode_edu(ad::Tape& tape, const SentimentModel& m, const Edu& tokens, std::vector<double>* attention) {
  if (tokens.empty()) throw Error("encode_edu: empty EDU");
  Var E = tape.param(m.params().at("embed"));
  std::vector<Var> xs;
  xs.reserve(tokens.size());
  for (const auto& tok : tokens) xs.push_back(ad::lookup(E, m.vocab().index(tok)));
  auto hs = bilstm(tape, m, "word", m.dims().word_hidden, xs);
  Var alpha = attention_weights(tape, m, "word.att", hs);
  if (attention) {
    auto v = alpha.value().data();
    attention->assign(v.begin(), v.end());
  }
  return weighted_sum(hs, alpha);
}

DocumentEncoding encode_document(ad::Tape& tape, const SentimentModel& m, const std::vector<Var>& edu_vectors) {
  if (edu_vectors.empty()) throw Error("encode_document: no EDUs");
  DocumentEncoding enc;
  enc.hidden = bilstm(tape, m, "edu", m.dims().edu_hidden, edu_vectors);
  enc.attention = attention_weights(tape, m, "edu.att", enc.hidden);
  return enc;
}

Var han_document_vector(const DocumentEncoding& enc) { return weighted_sum(enc.hidden, enc.attention); }

Var dah_document_vector(ad::Tape& tape, const SentimentModel& m, const DocumentEncoding& enc, const DependencyTree& dep) {
  if (dep.size() != enc.hidden.size())
    throw Error("dependency tree has " + std::to_string(dep.size()) + " nodes for " +
                std::to_string(enc.hidden.size()) + " EDUs");
  if (auto v = validate(dep); !v.empty()) throw Error("invalid dependency tree: " + v.front());
  std::vector<std::vector<int>> children(dep.size());
  for (std::size_t i = 0; i < dep.size(); ++i) children[i] = dep.children(i);
  return tree_lstm(tape, m, enc, children, dep.root());
}

Var tree_lstm(ad::Tape& tape, const SentimentModel& m, const DocumentEncoding& enc,
              const std::vector<std::vector<int>>& children, int root) {
  if (m.kind() != ModelKind::Dah) throw Error("tree_lstm: model has no TreeLSTM parameters");
  const auto& p = m.params();
  const std::size_t T = m.dims().tree_hidden;
  Var W_iou = tape.param(p.at("tree.W_iou"));
  Var U_iou = tape.param(p.at("tree.U_iou"));
  Var b_iou = tape.param(p.at("tree.b_iou"));
  Var W_f = tape.param(p.at("tree.W_f"));
  Var U_f = tape.param(p.at("tree.U_f"));
  Var b_f = tape.param(p.at("tree.b_f"));
  Var P = tape.param(p.at("tree.query"));
  Var C = tape.param(p.at("tree.attention"));

  std::vector<Var> h(children.size()), c(children.size());
  std::vector<bool> done(children.size(), false);
  // iterative post-order from the root
  std::vector<std::pair<int, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [node, expanded] = stack.back();
    stack.pop_back();
    const auto i = static_cast<std::size_t>(node);
    if (!expanded) {
      stack.push_back({node, true});
      for (int k : children[i]) stack.push_back({k, false});
      continue;
    }
    Var x = ad::mul_scalar(enc.hidden[i], ad::slice(enc.attention, i, 1));
    Var iou = ad::affine(W_iou, x, b_iou);
    std::vector<Var> cell_terms;
    if (!children[i].empty()) {
      Var query = ad::matvec(P, x);
      Var fx = ad::affine(W_f, x, b_f);
      std::vector<Var> gated;
      for (int k : children[i]) {
        const auto j = static_cast<std::size_t>(k);
        if (!done[j]) throw Error("tree_lstm: child visited before it was computed");
        Var beta = ad::sigmoid(ad::dot(query, ad::matvec(C, h[j])));
        gated.push_back(ad::mul_scalar(h[j], beta));
        Var f = ad::sigmoid(ad::add(fx, ad::matvec(U_f, h[j])));
        cell_terms.push_back(ad::mul(f, c[j]));
      }
      iou = ad::add(iou, ad::matvec(U_iou, ad::add_n(gated)));
    }
    Var in_gate = ad::sigmoid(ad::slice(iou, 0, T));
    Var out_gate = ad::sigmoid(ad::slice(iou, T, T));
    Var update = ad::tanh(ad::slice(iou, 2 * T, T));
    cell_terms.insert(cell_terms.begin(), ad::mul(in_gate, update));
    c[i] = ad::add_n(cell_terms);
    h[i] = ad::mul(out_gate, ad::tanh(c[i]));
    done[i] = true;
  }
  return h[static_cast<std::size_t>(root)];
}

Var classify_logits(ad::Tape& tape, const SentimentModel& m, Var doc_vector) {
  const auto& p = m.params();
  const char* w = m.kind() == ModelKind::Han ? "han.out.W" : "dah.out.W";
  const char* b = m.kind() == ModelKind::Han ? "han.out.b" : "dah.out.b";
  return ad::affine(tape.param(p.at(w)), doc_vector, tape.param(p.at(b)));
}

Var document_logits(ad::Tape& tape, const SentimentModel& m, const Document& doc, const DependencyTree* dep,
                    const ForwardOptions& opts) {
  if (m.kind() == ModelKind::Dah && dep == nullptr) throw Error("DAH needs a dependency tree for document '" + doc.id + "'");
  const bool drop = opts.keep < 1.0;
  Rng rng(opts.dropout_seed);
  std::vector<Var> edus;
  edus.reserve(doc.edus.size());
  for (const auto& edu : doc.edus) {
    Var v = encode_edu(tape, m, edu);
    if (drop) v = ad::dropout(v, ad::dropout_mask(v.size(), opts.keep, rng));
    edus.push_back(v);
  }
  auto enc = encode_document(tape, m, edus);
  Var hd = m.kind() == ModelKind::Han ? han_document_vector(enc) : dah_document_vector(tape, m, enc, *dep);
  if (drop) hd = ad::dropout(hd, ad::dropout_mask(hd.size(), opts.keep, rng));
  return classify_logits(tape, m, hd);
}

// ---------------------------------------------------------------------------
// Prediction

namespace {

const DependencyTree* tree_for(const SentimentModel& m, const TreeMap& trees, const Document& doc) {
  if (m.kind() == ModelKind::Han) return nullptr;
  auto it = trees.find(doc.id);
  if (it == trees.end()) throw Error("no dependency tree for document '" + doc.id + "'");
  return &it->second;
}

std::array<double, 5> softmax5(std::span<const double> logits) {
  std::array<double, 5> out{};
  double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t k = 0; k < 5; ++k) z += (out[k] = std::exp(logits[k] - mx));
  for (auto& v : out) v /= z;
  return out;
}

}  // namespace

Prediction predict(const SentimentModel& m, const Document& doc, const DependencyTree* dep) {
  ad::Tape tape(&m.params());
  Var logits = document_logits(tape, m, doc, dep);
  Prediction p;
  p.id = doc.id;
  p.probs = softmax5(logits.value().data());
  p.pred = static_cast<int>(std::max_element(p.probs.begin(), p.probs.end()) - p.probs.begin()) + 1;
  p.length = word_count(doc);
  return p;
}

std::vector<Prediction> predict_all(const SentimentModel& m, const std::vector<const Document*>& docs,
                                    const TreeMap& trees) {
  std::vector<Prediction> out(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) { out[i] = predict(m, *docs[i], tree_for(m, trees, *docs[i])); });
  return out;
}

std::vector<Prediction> predict_all_serial(const SentimentModel& m, const std::vector<const Document*>& docs,
                                           const TreeMap& trees) {
  std::vector<Prediction> out;
  out.reserve(docs.size());
  for (const auto* d : docs) out.push_back(predict(m, *d, tree_for(m, trees, *d)));
  return out;
}

EvalStats evaluate_model(const SentimentModel& m, const std::vector<const Document*>& docs, const TreeMap& trees) {
  EvalStats s;
  if (docs.empty()) return s;
  std::vector<double> losses(docs.size());
  std::vector<int> hits(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) {
    ad::Tape tape(&m.params());
    Var logits = document_logits(tape, m, *docs[i], tree_for(m, trees, *docs[i]));
    losses[i] = ad::cross_entropy(logits, static_cast<std::size_t>(docs[i]->class_index())).value()[0];
    auto v = logits.value().data();
    hits[i] = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin()) == docs[i]->class_index();
  });
  for (std::size_t i = 0; i < docs.size(); ++i) {
    s.loss += losses[i];
    s.accuracy += hits[i];
  }
  s.loss /= static_cast<double>(docs.size());
  s.accuracy /= static_cast<double>(docs.size());
  return s;
}

// ---------------------------------------------------------------------------
// Gradients

std::uint64_t document_dropout_seed(std::uint64_t batch_seed, const Document& doc) {
  return fnv1a(doc.id, batch_seed);
}

namespace {

constexpr std::size_t kGradientChunks = 8;

void accumulate_document(const SentimentModel& m, const Document& doc, const TreeMap& trees, double keep,
                         std::uint64_t batch_seed, ad::Gradients& out, BatchStats& stats) {
  ad::Tape tape(&m.params());
  ForwardOptions opts{keep, document_dropout_seed(batch_seed, doc)};
  Var logits = document_logits(tape, m, doc, tree_for(m, trees, doc), opts);
  Var loss = ad::cross_entropy(logits, static_cast<std::size_t>(doc.class_index()));
  auto v = logits.value().data();
  if (static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin()) == doc.class_index()) ++stats.correct;
  stats.loss_sum += loss.value()[0];
  tape.backward(loss, &out);
}

}  // namespace

BatchStats batch_gradients(const SentimentModel& m, const std::vector<const Document*>& docs, const TreeMap& trees,
                           double keep, std::uint64_t batch_seed, ad::Gradients& out) {
  const std::size_t n = docs.size();
  const std::size_t chunks = std::min(n, kGradientChunks);
  if (chunks <= 1) return batch_gradients_serial(m, docs, trees, keep, batch_seed, out);

  std::vector<ad::Gradients> partial(chunks);
  std::vector<BatchStats> stats(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    partial[c] = ad::Gradients(m.params());
    const std::size_t begin = c * n / chunks, end = (c + 1) * n / chunks;
    for (std::size_t i = begin; i < end; ++i) accumulate_document(m, *docs[i], trees, keep, batch_seed, partial[c], stats[c]);
  });
  BatchStats total;
  for (std::size_t c = 0; c < chunks; ++c) {
    out.add(partial[c]);
    total.loss_sum += stats[c].loss_sum;
    total.correct += stats[c].correct;
  }
  return total;
}

BatchStats batch_gradients_serial(const SentimentModel& m, const std::vector<const Document*>& docs,
                                  const TreeMap& trees, double keep, std::uint64_t batch_seed, ad::Gradients& out) {
  BatchStats stats;
  for (const auto* d : docs) accumulate_document(m, *d, trees, keep, batch_seed, out, stats);
  return stats;
}

// ---------------------------------------------------------------------------
// Training

TrainResult train(const TrainConfig& cfg, const std::vector<const Document*>& train_docs,
                  const std::vector<const Document*>& dev_docs, const TreeMap& trees,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  if (train_docs.empty()) throw Error("training needs at least one document");
  if (cfg.batch == 0) throw Error("batch size must be positive");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw Error("dropout rate must be in [0, 1)");
  if (cfg.kind == ModelKind::Dah) {
    for (const auto* list : {&train_docs, &dev_docs})
      for (const auto* d : *list)
        if (!trees.count(d->id)) throw Error("no dependency tree for document '" + d->id + "'");
  }

  auto model = SentimentModel::create(cfg.kind, cfg.dims, Vocabulary::build(train_docs), cfg.seed);
  if (cfg.embeddings) model.load_embeddings(*cfg.embeddings);
  const auto& dev = dev_docs.empty() ? train_docs : dev_docs;

  TrainResult result{model, {}, 0, -1.0};
  ad::Optimizer opt(cfg.optimizer);
  ad::Gradients grads(model.params());
  Rng rng(cfg.seed ^ 0x2545f4914f6cdd1dULL);
  std::vector<const Document*> order = train_docs;
  const double keep = 1.0 - cfg.dropout;
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      std::vector<const Document*> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
      grads.zero();
      auto stats = batch_gradients(model, batch, trees, keep, rng(), grads);
      if (!std::isfinite(stats.loss_sum)) throw Error("non-finite training loss at epoch " + std::to_string(epoch));
      loss_sum += stats.loss_sum;
      grads.scale(1.0 / static_cast<double>(batch.size()));
      grads.clip_global_norm(cfg.clip);
      opt.step(model.params(), grads);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.dev_accuracy = evaluate_model(model, dev, trees).accuracy;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.dev_accuracy > result.best_dev_accuracy) {
      result.best_dev_accuracy = rec.dev_accuracy;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
      if (rec.dev_accuracy >= 1.0) break;  // nothing can beat it
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  ad::round_to_f32(result.model.params());
  return result;
}

// ---------------------------------------------------------------------------

void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& preds) {
  std::string out;
  for (const auto& p : preds) {
    json j;
    j["id"] = p.id;
    j["probs"] = p.probs;
    j["pred"] = p.pred;
    j["len"] = p.length;
    out += j.dump();
    out += '\n';
  }
  io::write_atomic(path, out);
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> preds;
  io::for_each_line(path, [&](const std::string& line, std::size_t no) {
    if (line.find_first_not_of(" \t") == std::string::npos) return;
    try {
      json j = json::parse(line);
      Prediction p;
      p.id = j.at("id").get<std::string>();
      p.probs = j.at("probs").get<std::array<double, 5>>();
      p.pred = j.at("pred").get<int>();
      p.length = j.at("len").get<std::size_t>();
      if (p.pred < 1 || p.pred > 5) throw Error("pred out of range");
      preds.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw Error(path.string() + ":" + std::to_string(no) + ": bad prediction record (" + e.what() + ")");
    }
  });
  return preds;
}

}  // namespace dsnt
