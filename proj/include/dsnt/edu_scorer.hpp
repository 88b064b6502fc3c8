#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "dsnt/ad/optim.hpp"
#include "dsnt/ad/tape.hpp"
#include "dsnt/constituency_tree.hpp"
#include "dsnt/corpus.hpp"
#include "dsnt/vocab.hpp"

namespace dsnt {

/// Polarity weights of the five star classes, centred on neutral.
inline constexpr std::array<double, 5> kClassPolarity{-1.0, -0.5, 0.0, 0.5, 1.0};

using Lexicon = std::unordered_map<std::string, double>;

/// `word<TAB>polarity` per line; polarities must lie in [-1, 1].
Lexicon read_lexicon(const std::filesystem::path& path);

/// p = mean polarity of the lexicon hits in each EDU (0 without hits),
/// a = 1 / number of EDUs.
std::vector<EduScore> score_lexicon(const Document& doc, const Lexicon& lexicon);

// ---- MIL-lite -------------------------------------------------------------
//
// Each EDU is the average of its word embeddings, passed through one tanh
// layer. From the hidden state the model reads a 5-class sentiment
// distribution and an attention logit. The document distribution is the
// attention-weighted mixture of EDU distributions and is trained against the
// document's star label only.

struct MilConfig {
  std::size_t embed_dim = 32;
  std::size_t hidden = 32;
  int epochs = 30;
  std::size_t batch = 8;
  ad::OptimizerConfig optimizer{ad::OptimizerKind::Adam, 0.02};
  double clip = 5.0;
  std::uint64_t seed = 0;
};

struct ScorerModel {
  Vocabulary vocab;
  ad::ParameterSet params;
  MilConfig config;
};

struct MilEpoch {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double dev_loss = 0.0;
};

struct MilTrainResult {
  ScorerModel model;
  double initial_dev_loss = 0.0;
  std::vector<MilEpoch> curve;
};

ScorerModel init_mil_lite(const std::vector<const Document*>& train, const MilConfig& cfg);
MilTrainResult train_mil_lite(const std::vector<const Document*>& train, const std::vector<const Document*>& dev,
                              const MilConfig& cfg);

/// Per-EDU (p, a): p is the class-polarity expectation of the EDU's
/// distribution, a its attention weight within the document.
std::vector<EduScore> score_mil(const ScorerModel& model, const Document& doc);

/// Attention-weighted document distribution over the five classes.
std::array<double, 5> mil_document_distribution(const ScorerModel& model, const Document& doc);

/// Mean document-level cross-entropy.
double mil_loss(const ScorerModel& model, const std::vector<const Document*>& docs);

void save_scorer(const std::filesystem::path& path, const ScorerModel& model);
ScorerModel load_scorer(const std::filesystem::path& path);

// ---- score files ----------------------------------------------------------

using ScoreTable = std::map<std::string, std::vector<EduScore>>;

/// JSONL, one `{"id": ..., "edus": [{"p": ..., "a": ...}, ...]}` per document.
void save_scores(const std::filesystem::path& path, const ScoreTable& scores);
ScoreTable load_scores(const std::filesystem::path& path);

/// Scores for `docs` in order. A missing id or an EDU count mismatch is an
/// error; ids not in `docs` produce one warning and are ignored.
std::vector<std::vector<EduScore>> align_scores(const ScoreTable& table, const std::vector<const Document*>& docs);

/// Lexicon or MIL-lite scores for many documents, in parallel and serially.
ScoreTable score_documents(const ScorerModel& model, const std::vector<const Document*>& docs);
ScoreTable score_documents_serial(const ScorerModel& model, const std::vector<const Document*>& docs);

}  // namespace dsnt
