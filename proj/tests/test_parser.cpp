#include <gtest/gtest.h>

#include "dsnt/parser.hpp"
#include "support.hpp"

using namespace dsnt;

namespace {

using A = Action;

struct ToyTreebank {
  std::vector<Document> docs;
  std::vector<std::vector<EduScore>> scores;
  std::vector<ConstituencyTree> trees;

  std::vector<ParserExample> examples() const {
    std::vector<ParserExample> out;
    for (std::size_t i = 0; i < docs.size(); ++i) out.push_back({&docs[i], &scores[i], &trees[i]});
    return out;
  }
};

ToyTreebank toy_treebank(std::size_t n_docs, std::uint64_t seed) {
  ToyTreebank tb;
  Rng rng(seed);
  for (std::size_t i = 0; i < n_docs; ++i) {
    int label = 1 + static_cast<int>(uniform_index(rng, 5));
    auto doc = testkit::synthetic_document("t" + std::to_string(i), label, 2 + uniform_index(rng, 8), rng);
    auto s = testkit::random_scores(doc.edus.size(), rng);
    tb.trees.push_back(build_tree_cky(s, gold_polarity(label), {8, 0.0, seed, 0.05}));
    tb.docs.push_back(std::move(doc));
    tb.scores.push_back(std::move(s));
  }
  return tb;
}

}  // namespace

TEST(ParserTest, OracleActionsHandExamples) {
  EXPECT_EQ(oracle_actions(ConstituencyTree::leaf(0)), (std::vector<A>{A::Shift}));
  EXPECT_EQ(oracle_actions(ConstituencyTree::from_bracket("(0 1 NS)")),
            (std::vector<A>{A::Shift, A::Shift, A::ReduceNS}));
  EXPECT_EQ(oracle_actions(ConstituencyTree::from_bracket("((0 1 NS) 2 SN)")),
            (std::vector<A>{A::Shift, A::Shift, A::ReduceNS, A::Shift, A::ReduceSN}));
}

TEST(ParserTest, ReplayReconstructsRandomTrees) {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    int n = 1 + static_cast<int>(uniform_index(rng, 20));
    auto t = testkit::random_tree(0, n - 1, rng);
    auto actions = oracle_actions(t);
    ASSERT_EQ(actions.size(), static_cast<std::size_t>(2 * n - 1));
    EXPECT_EQ(std::count(actions.begin(), actions.end(), A::Shift), n);
    EXPECT_EQ(replay(actions, static_cast<std::size_t>(n)).to_bracket(), t.to_bracket());
  }
}

TEST(ParserTest, IllegalActionsRejected) {
  std::vector<EduScore> s{{0, 0.5}, {0, 0.5}};
  ParserState st(s);
  EXPECT_FALSE(st.legal(A::ReduceNN));
  EXPECT_THROW(st.apply(A::ReduceNN), Error);
  st.apply(A::Shift);
  st.apply(A::Shift);
  EXPECT_FALSE(st.legal(A::Shift));
  st.apply(A::ReduceSN);
  EXPECT_TRUE(st.done());
  EXPECT_EQ(st.result().to_bracket(), "(0 1 SN)");
}

TEST(ParserTest, ReduceRecomputesSpanScores) {
  std::vector<EduScore> s{{0.5, 0.8}, {-0.2, 0.4}};
  auto t = replay({A::Shift, A::Shift, A::ReduceNS}, 2, s);
  EXPECT_NEAR(t.root_node().score.p, 4.0 / 15.0, 1e-12);
  EXPECT_NEAR(t.root_node().score.a, 0.6, 1e-12);
}

TEST(ParserTest, FeaturesAreDeterministicAndBounded) {
  auto tb = toy_treebank(20, 3);
  for (std::size_t i = 0; i < tb.docs.size(); ++i) {
    ParserState st(tb.scores[i]);
    for (A a : oracle_actions(tb.trees[i])) {
      auto f1 = extract_features(st, tb.docs[i], 1 << 18);
      auto f2 = extract_features(st, tb.docs[i], 1 << 18);
      EXPECT_EQ(f1, f2);
      EXPECT_LE(f1.size(), kMaxFeatures);
      st.apply(a);
    }
  }
}

TEST(ParserTest, QueueFrontTokenChangesFeatures) {
  std::vector<EduScore> s{{0.1, 0.5}, {0.2, 0.5}};
  Document a{"a", 3, {{"good"}, {"food"}}};
  Document b{"b", 3, {{"good"}, {"rude"}}};
  ParserState st(s);
  st.apply(A::Shift);
  auto fa = extract_features(st, a, 1 << 18), fb = extract_features(st, b, 1 << 18);
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  EXPECT_NE(fa, fb);
}

TEST(ParserTest, ZeroEpochsStillParsesValidTrees) {
  auto tb = toy_treebank(10, 4);
  auto model = train_parser(tb.examples(), {0, 1 << 12, 1});
  for (std::size_t i = 0; i < tb.docs.size(); ++i) {
    std::vector<A> actions;
    auto t = parse(model, tb.docs[i], tb.scores[i], &actions);
    t.validate();
    EXPECT_EQ(t.num_edus(), tb.docs[i].edus.size());
    EXPECT_EQ(actions.size(), 2 * tb.docs[i].edus.size() - 1);
  }
}

TEST(ParserTest, SmallInputs) {
  auto tb = toy_treebank(10, 4);
  auto model = train_parser(tb.examples(), {3, 1 << 12, 1});
  Document one{"o", 3, {{"x"}}};
  std::vector<EduScore> s1{{0.0, 1.0}};
  EXPECT_EQ(parse(model, one, s1).to_bracket(), "0");
  Document two{"t", 3, {{"x"}, {"y"}}};
  std::vector<EduScore> s2{{0.0, 0.5}, {0.1, 0.5}};
  auto t = parse(model, two, s2);
  EXPECT_EQ(t.num_edus(), 2u);
  EXPECT_EQ(t.height(), 1);
}

TEST(ParserTest, LearnsToyTreebank) {
  auto tb = toy_treebank(50, 9);
  auto examples = tb.examples();
  std::vector<ParserEpoch> curve;
  auto model = train_parser(examples, {15, 1 << 18, 5}, [&](const ParserEpoch& e) { curve.push_back(e); });
  ASSERT_EQ(curve.size(), 15u);
  EXPECT_GE(oracle_accuracy(model, examples), 0.99);
  std::size_t exact = 0;
  for (std::size_t i = 0; i < tb.docs.size(); ++i) exact += parse(model, tb.docs[i], tb.scores[i]) == tb.trees[i];
  EXPECT_GE(static_cast<double>(exact) / static_cast<double>(tb.docs.size()), 0.9);
}

TEST(ParserTest, SeededTrainingIsReproducibleAndSaves) {
  auto tb = toy_treebank(15, 2);
  auto a = train_parser(tb.examples(), {4, 1 << 12, 8});
  auto b = train_parser(tb.examples(), {4, 1 << 12, 8});
  EXPECT_EQ(a.weights, b.weights);
  auto path = testkit::scratch_dir("parser") / "p.ckpt";
  save_parser(path, a);
  auto back = load_parser(path);
  EXPECT_EQ(back.feature_dim, a.feature_dim);
  EXPECT_EQ(back.weights, a.weights);
}

TEST(ParserTest, MismatchedExampleRejected) {
  auto tb = toy_treebank(3, 2);
  tb.scores[1].pop_back();
  EXPECT_THROW(train_parser(tb.examples(), {1, 1 << 10, 0}), Error);
}
