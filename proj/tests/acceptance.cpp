// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: dsnt_acceptance [--expect-red N]...
// The exit status is 0 when the set of failing criteria equals the set given
// with --expect-red, so a known, analysed failure stays visible without
// breaking the build.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>
#include <tuple>

#include "dsnt/ad/grad_check.hpp"
#include "dsnt/ad/ops.hpp"
#include "dsnt/config.hpp"
#include "dsnt/edu_scorer.hpp"
#include "dsnt/ensemble.hpp"
#include "dsnt/eval.hpp"
#include "dsnt/nnet.hpp"
#include "dsnt/parser.hpp"
#include "dsnt/rstdep.hpp"
#include "dsnt/treegen.hpp"
#include "json.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace dsnt;
using ad::Tape;
using ad::Tensor;
using ad::Var;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Fails the outcome with a message; only the first message is kept.
void require(Outcome& o, bool ok, const std::string& what) {
  if (ok) return;
  if (o.pass) o.detail = what;
  o.pass = false;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << v;
  return ss.str();
}

// ---- 1 --------------------------------------------------------------------

Outcome aggregate_suite() {
  Outcome o;
  struct Case {
    SpanScore l, r;
    double p, a;
  };
  const Case cases[] = {{{1.0, 0.5}, {-1.0, 0.5}, 0.0, 0.5},
                        {{0.8, 1.0}, {0.8, 0.2}, 0.8, 0.6},
                        {{0.5, 0.8}, {-0.2, 0.4}, 4.0 / 15.0, 0.6},
                        {{0.6, 0.0}, {-0.2, 0.0}, 0.2, 0.0}};
  for (const auto& c : cases) {
    auto s = aggregate(c.l, c.r);
    require(o, std::abs(s.p - c.p) <= 1e-12 && std::abs(s.a - c.a) <= 1e-12, "hand value mismatch");
  }
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    auto s = testkit::random_scores(2, rng);
    auto out = aggregate(s[0], s[1]);
    require(o, out.p >= -1.0 && out.p <= 1.0 && out.a >= 0.0 && out.a <= 1.0, "output left [-1,1]x[0,1]");
  }
  if (o.pass) o.detail = "4 hand values, 1e5 random pairs";
  return o;
}

// ---- 2 --------------------------------------------------------------------

Outcome cky_matches_brute_force() {
  Outcome o;
  Rng rng(2);
  std::size_t checked = 0;
  for (unsigned n = 1; n <= 8; ++n) {
    for (int i = 0; i < 200; ++i) {
      auto s = testkit::random_scores(n, rng);
      double gold = gold_polarity(1 + static_cast<int>(uniform_index(rng, 5)));
      auto cky = build_tree_cky(s, gold, {static_cast<std::size_t>(catalan(n - 1)), 0.0, 0, 0.05});
      auto brute = brute_force_best_tree(s, gold);
      double dc = std::abs(cky.root_node().score.p - gold), db = std::abs(brute.root_node().score.p - gold);
      require(o, dc == db, "root divergence differs at n=" + std::to_string(n));
      require(o, cky.to_bracket() == brute.to_bracket(), "structure differs at n=" + std::to_string(n));
      ++checked;
    }
  }
  if (o.pass) o.detail = std::to_string(checked) + " instances, n=1..8";
  return o;
}

// ---- 3 --------------------------------------------------------------------

Outcome beam_monotonicity() {
  Outcome o;
  Rng rng(3);
  int violations = 0;
  for (int i = 0; i < 100; ++i) {
    auto s = testkit::random_scores(10, rng);
    double gold = gold_polarity(1 + static_cast<int>(uniform_index(rng, 5)));
    double prev = INFINITY;
    bool ok = true;
    for (std::size_t b : {1, 2, 4, 8, 16}) {
      double d = std::abs(build_tree_cky(s, gold, {b, 0.0, 0, 0.05}).root_node().score.p - gold);
      if (d > prev) ok = false;
      prev = d;
    }
    violations += !ok;
  }
  require(o, violations == 0,
          std::to_string(violations) + "/100 instances where a wider beam gave a worse root divergence");
  if (o.pass) o.detail = "100 instances at n=10";
  return o;
}

// ---- 4 --------------------------------------------------------------------

Outcome dependency_conversion() {
  Outcome o;
  constexpr int R = DependencyTree::kRoot;
  using H = std::vector<int>;
  require(o, to_dependency(ConstituencyTree::leaf(0)).heads() == H{R}, "leaf example");
  require(o, to_dependency(ConstituencyTree::from_bracket("(0 1 NS)")).heads() == H{R, 0}, "NS example");
  require(o, to_dependency(ConstituencyTree::from_bracket("(0 1 SN)")).heads() == H{1, R}, "SN example");
  require(o, to_dependency(ConstituencyTree::from_bracket("((0 1 NS) 2 SN)")).heads() == H{2, 0, R}, "nested example");
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    int n = 1 + static_cast<int>(uniform_index(rng, 30));
    auto d = to_dependency(testkit::random_tree(0, n - 1, rng));
    require(o, d.size() == static_cast<std::size_t>(n) && validate(d).empty(), "random tree failed validation");
  }
  if (o.pass) o.detail = "hand examples exact, 1000 random trees valid";
  return o;
}

// ---- 5 --------------------------------------------------------------------

Tensor random_tensor(ad::Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& x : t.data()) x = lo + (hi - lo) * uniform01(rng);
  return t;
}

Var project(Tape& tape, Var v) {
  Rng rng(99);
  auto w = random_tensor({v.size()}, rng);
  return ad::sum(ad::mul(v, tape.constant(Tensor(v.shape(), std::vector<double>(w.data().begin(), w.data().end())))));
}

Outcome gradient_checks() {
  Outcome o;
  using namespace dsnt::ad;
  using F = std::function<Var(Tape&, const std::vector<Var>&)>;
  Rng rng(42);
  auto vec = [&](std::size_t n) { return random_tensor({n}, rng); };
  Tensor mask({5}, std::vector<double>{2.0, 0.0, 2.0, 2.0, 0.0});
  const std::vector<std::tuple<std::string, std::vector<Tensor>, F>> cases{
      {"add", {vec(5), vec(5)}, [](Tape&, auto& v) { return add(v[0], v[1]); }},
      {"sub", {vec(5), vec(5)}, [](Tape&, auto& v) { return sub(v[0], v[1]); }},
      {"mul", {vec(5), vec(5)}, [](Tape&, auto& v) { return mul(v[0], v[1]); }},
      {"scale", {vec(5)}, [](Tape&, auto& v) { return scale(v[0], -1.7); }},
      {"mul_scalar", {vec(5), vec(1)}, [](Tape&, auto& v) { return mul_scalar(v[0], v[1]); }},
      {"dot", {vec(5), vec(5)}, [](Tape&, auto& v) { return dot(v[0], v[1]); }},
      {"matmul", {random_tensor({2, 3}, rng), random_tensor({3, 4}, rng)},
       [](Tape&, auto& v) { return matmul(v[0], v[1]); }},
      {"matvec", {random_tensor({4, 3}, rng), vec(3)}, [](Tape&, auto& v) { return matvec(v[0], v[1]); }},
      {"affine", {random_tensor({4, 3}, rng), vec(3), vec(4)},
       [](Tape&, auto& v) { return affine(v[0], v[1], v[2]); }},
      {"concat", {vec(2), vec(3), vec(1)}, [](Tape&, auto& v) { return concat({v[0], v[1], v[2]}); }},
      {"slice", {vec(7)}, [](Tape&, auto& v) { return slice(v[0], 2, 3); }},
      {"tanh", {vec(6)}, [](Tape&, auto& v) { return ad::tanh(v[0]); }},
      {"sigmoid", {vec(6)}, [](Tape&, auto& v) { return sigmoid(v[0]); }},
      {"relu", {vec(6)}, [](Tape&, auto& v) { return relu(v[0]); }},
      {"log", {random_tensor({6}, rng, 0.5, 2.0)}, [](Tape&, auto& v) { return ad::log(v[0]); }},
      {"softmax", {vec(6)}, [](Tape&, auto& v) { return softmax(v[0]); }},
      {"sum", {vec(6)}, [](Tape&, auto& v) { return sum(v[0]); }},
      {"mean", {vec(6)}, [](Tape&, auto& v) { return mean(v[0]); }},
      {"dropout", {vec(5)}, [&](Tape&, auto& v) { return dropout(v[0], mask); }},
      {"lookup", {random_tensor({4, 3}, rng)}, [](Tape&, auto& v) { return lookup(v[0], 2); }},
      {"cross_entropy", {vec(5)}, [](Tape&, auto& v) { return cross_entropy(v[0], 3); }},
      {"add_n", {vec(4), vec(4), vec(4)}, [](Tape&, auto& v) { return add_n({v[0], v[1], v[2]}); }},
  };
  double worst_primitive = 0.0;
  for (const auto& [name, inputs, f] : cases) {
    double err = grad_check_inputs(inputs, [&](Tape& t, const std::vector<Var>& v) { return project(t, f(t, v)); })
                     .max_rel_error;
    worst_primitive = std::max(worst_primitive, err);
    require(o, err < 1e-6, name + " rel err " + fmt(err));
  }

  Document d{"toy", 4, {{"the", "food", "was", "great"}, {"but", "slow"}, {"service"}}};
  auto m = SentimentModel::create(ModelKind::Dah, {4, 6, 6, 6}, Vocabulary::build({&d}), 1);
  Rng prng(101);
  for (ParamId id = 0; id < m.params().size(); ++id) m.params().init_uniform(id, 0.5, prng);
  DependencyTree dep({2, 0, DependencyTree::kRoot});
  auto full = grad_check(m.params(), [&](Tape& tape) {
    return cross_entropy(document_logits(tape, m, d, &dep), static_cast<std::size_t>(d.class_index()));
  });
  require(o, full.max_rel_error < 1e-4, "DAH loss rel err " + fmt(full.max_rel_error) + " at " + full.worst);
  if (o.pass)
    o.detail = std::to_string(cases.size()) + " primitives max " + fmt(worst_primitive) + "; DAH loss max " +
               fmt(full.max_rel_error) + " over " + std::to_string(full.coords_checked) + " coords";
  return o;
}

// ---- 6 --------------------------------------------------------------------

double distance(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

Outcome tree_lstm_properties() {
  Outcome o;
  Rng rng(6);
  double worst_perm = 0.0, min_topo = INFINITY;
  for (int trial = 0; trial < 20; ++trial) {
    auto doc = testkit::synthetic_document("t", 3, 5, rng);
    auto m = SentimentModel::create(ModelKind::Dah, {6, 5, 5, 7}, Vocabulary::build({&doc}), trial);
    for (ad::ParamId id = 0; id < m.params().size(); ++id) m.params().init_uniform(id, 0.5, rng);
    Tape tape(&m.params());
    std::vector<Var> edus;
    for (const auto& e : doc.edus) edus.push_back(encode_edu(tape, m, e));
    auto enc = encode_document(tape, m, edus);

    std::vector<int> kids{1, 2, 3, 4};
    auto ref = tree_lstm(tape, m, enc, {kids, {}, {}, {}, {}}, 0).value();
    for (int p = 0; p < 5; ++p) {
      shuffle(kids, rng);
      auto other = tree_lstm(tape, m, enc, {kids, {}, {}, {}, {}}, 0).value();
      worst_perm = std::max(worst_perm, distance(ref, other));
    }

    Tape t3(&m.params());
    std::vector<Var> e3;
    for (std::size_t i = 0; i < 3; ++i) e3.push_back(encode_edu(t3, m, doc.edus[i]));
    auto enc3 = encode_document(t3, m, e3);
    constexpr int R = DependencyTree::kRoot;
    auto chain = dah_document_vector(t3, m, enc3, DependencyTree({R, 0, 1})).value();
    auto star = dah_document_vector(t3, m, enc3, DependencyTree({R, 0, 0})).value();
    min_topo = std::min(min_topo, distance(chain, star));
  }
  require(o, worst_perm <= 1e-12, "permutation changed output by " + fmt(worst_perm));
  require(o, min_topo > 1e-6, "two topologies differ by only " + fmt(min_topo));
  if (o.pass) o.detail = "permutation diff " + fmt(worst_perm) + ", min topology diff " + fmt(min_topo);
  return o;
}

// ---- 7 --------------------------------------------------------------------

Outcome parser_round_trip() {
  Outcome o;
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    int n = 1 + static_cast<int>(uniform_index(rng, 20));
    auto t = testkit::random_tree(0, n - 1, rng);
    require(o, replay(oracle_actions(t), static_cast<std::size_t>(n)) == t, "replay mismatch");
  }
  std::vector<Document> docs;
  std::vector<std::vector<EduScore>> scores;
  std::vector<ConstituencyTree> trees;
  for (int i = 0; i < 50; ++i) {
    int label = 1 + static_cast<int>(uniform_index(rng, 5));
    docs.push_back(testkit::synthetic_document("toy" + std::to_string(i), label, 2 + uniform_index(rng, 8), rng));
    scores.push_back(testkit::random_scores(docs.back().edus.size(), rng));
    trees.push_back(build_tree_cky(scores.back(), gold_polarity(label), {8, 0.0, 7, 0.05}));
  }
  std::vector<ParserExample> ex;
  for (std::size_t i = 0; i < docs.size(); ++i) ex.push_back({&docs[i], &scores[i], &trees[i]});
  auto model = train_parser(ex, {15, 1 << 18, 7});
  double acc = oracle_accuracy(model, ex);
  std::size_t exact = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) exact += parse(model, docs[i], scores[i]) == trees[i];
  double match = static_cast<double>(exact) / static_cast<double>(docs.size());
  require(o, acc >= 0.99, "oracle-action accuracy " + fmt(acc));
  require(o, match >= 0.9, "exact-tree match " + fmt(match));
  if (o.pass) o.detail = "1000 replays exact; oracle acc " + fmt(acc) + ", exact match " + fmt(match);
  return o;
}

// ---- 8 --------------------------------------------------------------------

Outcome overfit_capacity() {
  Outcome o;
  auto docs = read_documents(testkit::fixture_path());
  docs.resize(32);
  auto ptrs = testkit::pointers(docs);
  auto lexicon = read_lexicon(testkit::lexicon_path());
  TreeMap trees;
  for (const auto& d : docs) {
    auto t = build_tree_cky(score_lexicon(d, lexicon), gold_polarity(d.label), {16, 0.0, 7, 0.05});
    trees.emplace(d.id, to_dependency(t));
  }
  std::string detail;
  for (auto kind : {ModelKind::Dah, ModelKind::Han}) {
    TrainConfig cfg;
    cfg.kind = kind;
    cfg.optimizer = {ad::OptimizerKind::Adam, 0.005};
    cfg.batch = 8;
    cfg.dropout = 0.0;
    cfg.max_epochs = 200;
    cfg.patience = 200;
    cfg.seed = 7;
    auto r = train(cfg, ptrs, ptrs, trees);
    double acc = evaluate_model(r.model, ptrs, trees).accuracy;
    require(o, acc == 1.0, to_string(kind) + " reached only " + fmt(acc));
    detail += (detail.empty() ? "" : ", ") + to_string(kind) + " 100% at epoch " + std::to_string(r.best_epoch);
  }
  if (o.pass) o.detail = detail;
  return o;
}

// ---- 9 --------------------------------------------------------------------

Outcome metrics_oracle() {
  Outcome o;
  auto close = [](const MetricsReport& r, double acc, double f1, double mse, double mae) {
    return std::abs(r.accuracy - acc) <= 1e-12 && std::abs(r.macro_f1 - f1) <= 1e-12 &&
           std::abs(r.mse - mse) <= 1e-12 && std::abs(r.mae - mae) <= 1e-12;
  };
  require(o, close(compute_metrics({1, 2, 3}, {1, 2, 3}), 1, 1, 0, 0), "perfect fixture");
  require(o, close(compute_metrics({5, 1}, {1, 5}), 0, 0, 16, 4), "opposite fixture");
  require(o, close(compute_metrics({1, 1, 2}, {1, 2, 2}), 2.0 / 3, 2.0 / 3, 1.0 / 3, 1.0 / 3), "mixed fixture");
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    std::size_t n = 1 + uniform_index(rng, 40);
    std::vector<int> p(n), g(n);
    for (std::size_t k = 0; k < n; ++k) {
      p[k] = 1 + static_cast<int>(uniform_index(rng, 5));
      g[k] = 1 + static_cast<int>(uniform_index(rng, 5));
    }
    auto r = compute_metrics(p, g);
    require(o, r.mae <= std::sqrt(r.mse) + 1e-12, "MAE above sqrt(MSE)");
  }
  if (o.pass) o.detail = "3 fixtures exact, 1e4 random sets";
  return o;
}

// ---- 10 -------------------------------------------------------------------

Outcome ensemble_property() {
  Outcome o;
  Rng rng(10);
  std::vector<int> golds, a, b;
  std::vector<std::size_t> lengths;
  for (int i = 0; i < 60; ++i) {
    std::size_t len = 1 + uniform_index(rng, 250);
    if (i == 0) len = 100;
    if (i == 1) len = 101;
    int gold = 1 + static_cast<int>(uniform_index(rng, 5));
    int wrong = gold % 5 + 1;
    golds.push_back(gold);
    lengths.push_back(len);
    a.push_back(len <= 100 ? gold : wrong);
    b.push_back(len > 100 ? gold : wrong);
  }
  auto r = tune_threshold({{a, b}}, golds, lengths, Metric::Acc);
  double ens = compute_metrics(ensemble_stars(r.rule.threshold, lengths, a, b), golds).accuracy;
  double best = std::max(compute_metrics(a, golds).accuracy, compute_metrics(b, golds).accuracy);
  require(o, r.rule.threshold == 100.0, "threshold " + fmt(r.rule.threshold));
  require(o, ens == 1.0 && ens > best, "ensemble accuracy " + fmt(ens) + " vs best single " + fmt(best));
  if (o.pass) o.detail = "t=100, ensemble 1.0 vs best single " + fmt(best);
  return o;
}

// ---- 11 -------------------------------------------------------------------

Outcome pipeline_smoke() {
  Outcome o;
  auto work = testkit::scratch_dir("acceptance_pipeline");
  auto config = testkit::data_dir() / "pipeline.json";
  std::string cmd = std::string(DSNT_CLI_PATH) + " pipeline --config '" + config.string() + "' --out '" +
                    work.string() + "' > '" + (work / "log.txt").string() + "' 2>&1";
  int status = std::system(cmd.c_str());
  require(o, status == 0, "pipeline exited with status " + std::to_string(status));
  if (!o.pass) return o;

  auto cfg = load_config(config);
  finalize_config(cfg);
  auto splits = load_corpus(cfg.corpus, cfg.split);
  std::set<std::string> want, have;
  for (const auto& d : splits.train) want.insert(d.id);
  for (const auto& e : read_treebank(work / "treebank.tsv")) have.insert(e.id);
  require(o, want == have, "treebank does not cover exactly the train documents");
  require(o, fs::exists(work / "parser.ckpt") && load_parser(work / "parser.ckpt").feature_dim > 0, "parser missing");
  require(o, SentimentModel::load(work / "model_dah.ckpt").kind() == ModelKind::Dah, "DAH checkpoint missing");

  std::ifstream in(work / "report_dah_test.json");
  auto report = nlohmann::json::parse(in);
  for (const char* k : {"acc", "f1", "mse", "mae"})
    require(o, report.contains(k) && report[k].is_number() && std::isfinite(report[k].get<double>()),
            std::string("metric ") + k + " not populated");
  std::regex label(R"(\d+-\d+ \(\d+\))");
  for (const auto& b : report["bins"])
    require(o, std::regex_match(b["label"].get<std::string>(), label), "bin label " + b["label"].dump());
  if (o.pass)
    o.detail = "train ids " + std::to_string(want.size()) + ", acc " + fmt(report["acc"].get<double>()) +
               ", first bin " + report["bins"][0]["label"].get<std::string>();
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expect_red;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--expect-red" && i + 1 < argc) {
      expect_red.insert(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: dsnt_acceptance [--expect-red N]...\n";
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"span aggregation unit suite", aggregate_suite},
      {"CKY equals brute force at full beam", cky_matches_brute_force},
      {"beam monotonicity", beam_monotonicity},
      {"dependency conversion", dependency_conversion},
      {"gradient checks", gradient_checks},
      {"TreeLSTM permutation and topology", tree_lstm_properties},
      {"parser round trip and toy treebank", parser_round_trip},
      {"overfit capacity", overfit_capacity},
      {"metrics oracle", metrics_oracle},
      {"ensemble threshold construction", ensemble_property},
      {"end-to-end pipeline smoke", pipeline_smoke},
  };

  std::set<int> red;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) red.insert(id);
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << " ("
              << o.detail << "; " << fmt(seconds_since(t0)) << " s)" << (o.pass || !expect_red.count(id) ? "" : " [known]")
              << std::endl;
  }
  std::cout << (criteria.size() - red.size()) << "/" << criteria.size() << " criteria pass\n";
  if (red != expect_red) {
    std::cout << "failing set differs from the expected red set\n";
    return 1;
  }
  return 0;
}
