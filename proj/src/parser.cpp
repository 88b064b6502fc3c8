#include "dsnt/parser.hpp"

#include <algorithm>
#include <cmath>

#include "dsnt/ad/checkpoint.hpp"
#include "dsnt/common.hpp"
#include "dsnt/treegen.hpp"

namespace dsnt {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Shift: return "SHIFT";
    case Action::ReduceNN: return "REDUCE-NN";
    case Action::ReduceNS: return "REDUCE-NS";
    case Action::ReduceSN: return "REDUCE-SN";
  }
  return "?";
}

namespace {

Nuclearity reduce_label(Action a) {
  switch (a) {
    case Action::ReduceNS: return Nuclearity::NS;
    case Action::ReduceSN: return Nuclearity::SN;
    default: return Nuclearity::NN;
  }
}

Action reduce_action(Nuclearity n) {
  switch (n) {
    case Nuclearity::NS: return Action::ReduceNS;
    case Nuclearity::SN: return Action::ReduceSN;
    default: return Action::ReduceNN;
  }
}

}  // namespace

ParserState::ParserState(std::span<const EduScore> scores) : scores_(scores) {
  if (scores.empty()) throw Error("parser: document has no EDUs");
}

bool ParserState::legal(Action a) const {
  return a == Action::Shift ? next_ < scores_.size() : stack_.size() >= 2;
}

void ParserState::apply(Action a) {
  if (!legal(a)) throw Error("parser: illegal action " + std::string(to_string(a)));
  if (a == Action::Shift) {
    stack_.push_back(ConstituencyTree::leaf(static_cast<int>(next_), scores_[next_]));
    ++next_;
    return;
  }
  ConstituencyTree right = std::move(stack_.back());
  stack_.pop_back();
  ConstituencyTree left = std::move(stack_.back());
  stack_.pop_back();
  auto score = aggregate(left.root_node().score, right.root_node().score);
  stack_.push_back(ConstituencyTree::join(left, right, reduce_label(a), score));
}

const ConstituencyTree& ParserState::result() const {
  if (!done()) throw Error("parser: state is not final");
  return stack_.back();
}

std::vector<Action> oracle_actions(const ConstituencyTree& tree) {
  std::vector<Action> out;
  out.reserve(tree.nodes().size());
  for (const auto& node : tree.nodes()) out.push_back(node.is_leaf() ? Action::Shift : reduce_action(node.nuclearity));
  return out;
}

ConstituencyTree replay(const std::vector<Action>& actions, std::size_t n, std::span<const EduScore> scores) {
  std::vector<EduScore> zeros;
  if (scores.empty()) {
    zeros.assign(n, EduScore{});
    scores = zeros;
  }
  if (scores.size() != n) throw Error("replay: score count does not match EDU count");
  ParserState state(scores);
  for (Action a : actions) state.apply(a);
  return state.result();
}

// ---------------------------------------------------------------------------
// Features

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kHashSeed = 0x5eed0f5eed0f5eedULL;

int bucket(double v, double lo, double hi, int n) {
  int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * n));
  return std::clamp(b, 0, n - 1);
}

int size_bucket(std::size_t n) {
  if (n <= 4) return static_cast<int>(n);
  if (n <= 7) return 5;
  if (n <= 12) return 6;
  if (n <= 20) return 7;
  return 8;
}

class FeatureSink {
 public:
  FeatureSink(std::size_t dim, std::vector<std::uint32_t>& out) : dim_(dim), out_(out) {}

  void num(std::uint32_t tmpl, std::int64_t value) {
    put(mix(kHashSeed ^ (static_cast<std::uint64_t>(tmpl) << 40) ^ static_cast<std::uint64_t>(value)));
  }
  void word(std::uint32_t tmpl, const std::string& w) { put(fnv1a(w, mix(kHashSeed + tmpl))); }

 private:
  void put(std::uint64_t h) { out_.push_back(static_cast<std::uint32_t>(h % dim_)); }

  std::size_t dim_;
  std::vector<std::uint32_t>& out_;
};

const std::string& first_token(const Document& doc, int edu) { return doc.edus[static_cast<std::size_t>(edu)].front(); }
const std::string& last_token(const Document& doc, int edu) { return doc.edus[static_cast<std::size_t>(edu)].back(); }

}  // namespace

std::vector<std::uint32_t> extract_features(const ParserState& state, const Document& doc, std::size_t dim) {
  if (dim == 0) throw Error("feature dimension must be positive");
  std::vector<std::uint32_t> out;
  out.reserve(kMaxFeatures);
  FeatureSink f(dim, out);
  const auto& stack = state.stack();
  const auto n = static_cast<int>(state.num_edus());

  f.num(0, 0);  // bias
  f.num(1, size_bucket(stack.size()));
  f.num(2, size_bucket(state.queue_size()));
  f.num(3, std::min<std::size_t>(stack.size(), 2) * 2 + (state.queue_size() > 0));

  for (std::uint32_t k = 0; k < 2; ++k) {
    const std::uint32_t t = 10 + 10 * k;
    if (stack.size() <= k) {
      f.num(t, -1);
      continue;
    }
    const auto& node = stack[stack.size() - 1 - k].root_node();
    f.num(t + 1, bucket(node.score.p, -1.0, 1.0, 10));
    f.num(t + 2, bucket(node.score.a, 0.0, 1.0, 10));
    f.num(t + 3, size_bucket(static_cast<std::size_t>(node.hi - node.lo + 1)));
    f.word(t + 4, first_token(doc, node.lo));
    f.word(t + 5, last_token(doc, node.hi));
    f.num(t + 6, size_bucket(static_cast<std::size_t>(node.lo)));
    f.num(t + 7, size_bucket(static_cast<std::size_t>(n - 1 - node.hi)));
  }

  if (state.queue_size() > 0) {
    const int q = static_cast<int>(state.next());
    const auto& edu = doc.edus[static_cast<std::size_t>(q)];
    f.word(31, edu.front());
    f.word(32, edu.back());
    f.num(33, size_bucket(edu.size()));
  } else {
    f.num(30, -1);
  }

  if (stack.size() >= 2) {
    const auto& s0 = stack.back().root_node();
    const auto& s1 = stack[stack.size() - 2].root_node();
    const double da = s1.score.a - s0.score.a;  // left minus right
    f.num(40, bucket(da, -0.5, 0.5, 20));
    f.num(41, da > 0.05 ? 2 : (da < -0.05 ? 0 : 1));
    f.num(42, bucket(s1.score.p, -1.0, 1.0, 5) * 5 + bucket(s0.score.p, -1.0, 1.0, 5));
    f.num(43, size_bucket(static_cast<std::size_t>(s1.hi - s1.lo + 1)) * 16 +
                  size_bucket(static_cast<std::size_t>(s0.hi - s0.lo + 1)));
    f.num(44, (s1.lo == 0) * 2 + (s0.hi == n - 1));
    f.word(45, last_token(doc, s1.hi) + "|" + first_token(doc, s0.lo));
    f.word(46, first_token(doc, s1.lo) + "|" + first_token(doc, s0.lo) + "|" +
                   (state.queue_size() > 0 ? first_token(doc, static_cast<int>(state.next())) : std::string("</s>")));
  }
  return out;
}

std::array<double, kNumActions> ParserModel::scores(const std::vector<std::uint32_t>& features) const {
  std::array<double, kNumActions> s{};
  for (std::size_t a = 0; a < kNumActions; ++a)
    for (auto idx : features) s[a] += weights[a][idx];
  return s;
}

namespace {

Action best_legal(const ParserState& state, const std::array<double, kNumActions>& s) {
  int best = -1;
  for (std::size_t a = 0; a < kNumActions; ++a) {
    if (!state.legal(kAllActions[a])) continue;
    if (best < 0 || s[a] > s[static_cast<std::size_t>(best)]) best = static_cast<int>(a);
  }
  return kAllActions[static_cast<std::size_t>(best)];
}

void check_example(const ParserExample& ex) {
  const std::size_t n = ex.doc->edus.size();
  if (ex.scores->size() != n)
    throw Error("parser: scores for '" + ex.doc->id + "' cover " + std::to_string(ex.scores->size()) + " of " +
                std::to_string(n) + " EDUs");
  if (ex.tree->num_edus() != n)
    throw Error("parser: tree for '" + ex.doc->id + "' covers " + std::to_string(ex.tree->num_edus()) + " of " +
                std::to_string(n) + " EDUs");
}

}  // namespace

ParserModel train_parser(const std::vector<ParserExample>& examples, const ParserConfig& cfg,
                         const std::function<void(const ParserEpoch&)>& on_epoch) {
  if (cfg.feature_dim == 0) throw Error("feature dimension must be positive");
  for (const auto& ex : examples) check_example(ex);

  ParserModel model;
  model.feature_dim = cfg.feature_dim;
  model.epochs = cfg.epochs;
  // Averaged perceptron via the lazy trick: avg = w - u / c.
  std::array<std::vector<double>, kNumActions> u;
  for (std::size_t a = 0; a < kNumActions; ++a) {
    model.weights[a].assign(cfg.feature_dim, 0.0);
    u[a].assign(cfg.feature_dim, 0.0);
  }
  double c = 1.0;

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(order, rng);
    std::size_t correct = 0, total = 0;
    for (std::size_t idx : order) {
      const auto& ex = examples[idx];
      ParserState state(*ex.scores);
      for (Action gold : oracle_actions(*ex.tree)) {
        auto feats = extract_features(state, *ex.doc, cfg.feature_dim);
        Action guess = best_legal(state, model.scores(feats));
        if (guess == gold) {
          ++correct;
        } else {
          auto g = static_cast<std::size_t>(gold), p = static_cast<std::size_t>(guess);
          for (auto fi : feats) {
            model.weights[g][fi] += 1.0;
            u[g][fi] += c;
            model.weights[p][fi] -= 1.0;
            u[p][fi] -= c;
          }
        }
        ++total;
        c += 1.0;
        state.apply(gold);
      }
    }
    if (on_epoch) on_epoch({epoch, total ? static_cast<double>(correct) / static_cast<double>(total) : 1.0});
  }

  for (std::size_t a = 0; a < kNumActions; ++a)
    for (std::size_t i = 0; i < cfg.feature_dim; ++i) {
      double v = model.weights[a][i] - u[a][i] / c;
      model.weights[a][i] = static_cast<double>(static_cast<float>(v));
    }
  return model;
}

double oracle_accuracy(const ParserModel& model, const std::vector<ParserExample>& examples) {
  std::size_t correct = 0, total = 0;
  for (const auto& ex : examples) {
    check_example(ex);
    ParserState state(*ex.scores);
    for (Action gold : oracle_actions(*ex.tree)) {
      auto feats = extract_features(state, *ex.doc, model.feature_dim);
      correct += best_legal(state, model.scores(feats)) == gold;
      ++total;
      state.apply(gold);
    }
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 1.0;
}

ConstituencyTree parse(const ParserModel& model, const Document& doc, std::span<const EduScore> scores,
                       std::vector<Action>* actions) {
  if (scores.size() != doc.edus.size())
    throw Error("parser: scores for '" + doc.id + "' do not match its EDU count");
  ParserState state(scores);
  if (actions) actions->clear();
  while (!state.done()) {
    Action a = best_legal(state, model.scores(extract_features(state, doc, model.feature_dim)));
    state.apply(a);
    if (actions) actions->push_back(a);
  }
  return state.result();
}

std::vector<ConstituencyTree> parse_all(const ParserModel& model, const std::vector<const Document*>& docs,
                                        const std::vector<std::vector<EduScore>>& scores) {
  if (scores.size() != docs.size()) throw Error("parse_all: scores and documents are not aligned");
  std::vector<ConstituencyTree> out(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) { out[i] = parse(model, *docs[i], scores[i]); });
  return out;
}

std::vector<ConstituencyTree> parse_all_serial(const ParserModel& model, const std::vector<const Document*>& docs,
                                               const std::vector<std::vector<EduScore>>& scores) {
  if (scores.size() != docs.size()) throw Error("parse_all: scores and documents are not aligned");
  std::vector<ConstituencyTree> out;
  out.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) out.push_back(parse(model, *docs[i], scores[i]));
  return out;
}

void save_parser(const std::filesystem::path& path, const ParserModel& model) {
  ad::ParameterSet p;
  p.add("feature_dim", ad::Tensor::scalar(static_cast<double>(model.feature_dim)));
  p.add("epochs", ad::Tensor::scalar(static_cast<double>(model.epochs)));
  for (std::size_t a = 0; a < kNumActions; ++a)
    p.add("weights." + std::string(to_string(kAllActions[a])), ad::Tensor({model.feature_dim}, model.weights[a]));
  ad::write_tensors(path, p);
}

ParserModel load_parser(const std::filesystem::path& path) {
  auto p = ad::read_tensors(path);
  ParserModel model;
  model.feature_dim = static_cast<std::size_t>(p.value(p.at("feature_dim"))[0]);
  model.epochs = static_cast<int>(p.value(p.at("epochs"))[0]);
  for (std::size_t a = 0; a < kNumActions; ++a) {
    const auto name = "weights." + std::string(to_string(kAllActions[a]));
    auto id = p.find(name);
    if (!id) throw Error(path.string() + ": missing tensor " + name);
    const auto& t = p.value(*id);
    if (t.size() != model.feature_dim) throw Error(path.string() + ": " + name + " has the wrong size");
    model.weights[a].assign(t.data().begin(), t.data().end());
  }
  return model;
}

}  // namespace dsnt
