// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "dsnt/edu_scorer.hpp"
#include "dsnt/nnet.hpp"
#include "dsnt/parser.hpp"
#include "dsnt/treegen.hpp"
#include "support.hpp"

using namespace dsnt;

namespace {

struct Workload {
  std::vector<Document> docs;
  std::vector<const Document*> ptrs;
  std::vector<std::vector<EduScore>> scores;
  std::vector<ConstituencyTree> trees;
  TreeMap deps;
  ParserModel parser;
  SentimentModel model;
  ScorerModel scorer;
};

const Workload& workload() {
  static const Workload w = [] {
    Workload w;
    Rng rng(1);
    for (int i = 0; i < 128; ++i)
      w.docs.push_back(testkit::synthetic_document("b" + std::to_string(i), 1 + i % 5, 4 + uniform_index(rng, 12), rng));
    w.ptrs = testkit::pointers(w.docs);
    for (const auto& d : w.docs) {
      w.scores.push_back(testkit::random_scores(d.edus.size(), rng));
      w.trees.push_back(build_tree_cky(w.scores.back(), gold_polarity(d.label), {8, 0.0, 1, 0.05}));
      w.deps.emplace(d.id, to_dependency(w.trees.back()));
    }
    std::vector<ParserExample> ex;
    for (std::size_t i = 0; i < w.docs.size(); ++i) ex.push_back({&w.docs[i], &w.scores[i], &w.trees[i]});
    w.parser = train_parser(ex, {2, 1 << 16, 1});
    w.model = SentimentModel::create(ModelKind::Dah, {32, 16, 16, 32}, Vocabulary::build(w.ptrs), 1);
    MilConfig mil;
    mil.epochs = 0;
    w.scorer = train_mil_lite(w.ptrs, {}, mil).model;
    return w;
  }();
  return w;
}

const CkyConfig kCky{16, 0.0, 1, 0.05};

void BM_Treebank(benchmark::State& s) {
  const auto& w = workload();
  for (auto _ : s) benchmark::DoNotOptimize(build_treebank(w.ptrs, w.scores, kCky));
}
void BM_TreebankSerial(benchmark::State& s) {
  const auto& w = workload();
  for (auto _ : s) benchmark::DoNotOptimize(build_treebank_serial(w.ptrs, w.scores, kCky));
}
void BM_Score(benchmark::State& s) {
  const auto& w = workload();
  for (auto _ : s) benchmark::DoNotOptimize(score_documents(w.scorer, w.ptrs));
}
void BM_ScoreSerial(benchmark::State& s) {
  const auto& w = workload();
  for (auto _ : s) benchmark::DoNotOptimize(score_documents_serial(w.scorer, w.ptrs));
}
void BM_Parse(benchmark::State& s) {
  const auto& w = workload();
  for (auto _ : s) benchmark::DoNotOptimize(parse_all(w.parser, w.ptrs, w.scores));
}
void BM_ParseSerial(benchmark::State& s) {
  const auto& w = workload();
  for (auto _ : s) benchmark::DoNotOptimize(parse_all_serial(w.parser, w.ptrs, w.scores));
}
void BM_Predict(benchmark::State& s) {
  const auto& w = workload();
  for (auto _ : s) benchmark::DoNotOptimize(predict_all(w.model, w.ptrs, w.deps));
}
void BM_PredictSerial(benchmark::State& s) {
  const auto& w = workload();
  for (auto _ : s) benchmark::DoNotOptimize(predict_all_serial(w.model, w.ptrs, w.deps));
}
void BM_BatchGradients(benchmark::State& s) {
  const auto& w = workload();
  ad::Gradients g(w.model.params());
  for (auto _ : s) benchmark::DoNotOptimize(batch_gradients(w.model, w.ptrs, w.deps, 0.5, 3, g));
}
void BM_BatchGradientsSerial(benchmark::State& s) {
  const auto& w = workload();
  ad::Gradients g(w.model.params());
  for (auto _ : s) benchmark::DoNotOptimize(batch_gradients_serial(w.model, w.ptrs, w.deps, 0.5, 3, g));
}

}  // namespace

BENCHMARK(BM_Treebank)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TreebankSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Score)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Parse)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ParseSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Predict)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchGradients)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchGradientsSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
