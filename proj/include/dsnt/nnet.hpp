#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsnt/ad/ops.hpp"
#include "dsnt/ad/optim.hpp"
#include "dsnt/ad/tape.hpp"
#include "dsnt/corpus.hpp"
#include "dsnt/rstdep.hpp"
#include "dsnt/vocab.hpp"

namespace dsnt {

enum class ModelKind { Han, Dah };

ModelKind parse_model_kind(const std::string& s);
std::string to_string(ModelKind kind);

/// Layer widths. The BiLSTM sizes are per direction, so EDU and document
/// vectors are 2 * hidden wide.
struct ModelDims {
  std::size_t embed = 100;
  std::size_t word_hidden = 50;
  std::size_t edu_hidden = 50;
  std::size_t tree_hidden = 512;

  std::size_t edu_dim() const { return 2 * word_hidden; }
  std::size_t doc_dim() const { return 2 * edu_hidden; }
};

/// Parameters of the hierarchical attention encoder shared by both models,
/// plus the kind-specific aggregation and readout.
class SentimentModel {
 public:
  static SentimentModel create(ModelKind kind, const ModelDims& dims, Vocabulary vocab, std::uint64_t seed);

  ModelKind kind() const { return kind_; }
  const ModelDims& dims() const { return dims_; }
  const Vocabulary& vocab() const { return vocab_; }
  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }

  /// Overwrites embedding rows of known words from a `word v1 ... vd` text file.
  std::size_t load_embeddings(const std::filesystem::path& path);

  void save(const std::filesystem::path& path, const std::map<std::string, std::string>& hyper = {}) const;
  static SentimentModel load(const std::filesystem::path& path);

 private:
  ModelKind kind_ = ModelKind::Han;
  ModelDims dims_;
  Vocabulary vocab_;
  ad::ParameterSet params_;
};

// ---- forward pieces, exposed for tests -------------------------------------

/// Word embeddings -> BiLSTM -> word attention -> weighted sum.
/// `attention` receives the word attention weights when non-null.
ad::Var encode_edu(ad::Tape& tape, const SentimentModel& m, const Edu& tokens, std::vector<double>* attention = nullptr);

struct DocumentEncoding {
  std::vector<ad::Var> hidden;  // h_i, one per EDU
  ad::Var attention;            // alpha, softmax over EDUs
};

/// EDU-level BiLSTM followed by u_i = tanh(W h_i + b), alpha = softmax(u_i . c).
DocumentEncoding encode_document(ad::Tape& tape, const SentimentModel& m, const std::vector<ad::Var>& edu_vectors);

/// sum_i alpha_i h_i
ad::Var han_document_vector(const DocumentEncoding& enc);

/// Child-sum TreeLSTM over the dependency tree with sigmoid-gated child
/// attention. Node i reads x_i = alpha_i h_i; its query q_i = P x_i scores
/// each child j as sigmoid(q_i . C h_j). Returns the root hidden state.
ad::Var dah_document_vector(ad::Tape& tape, const SentimentModel& m, const DocumentEncoding& enc,
                            const DependencyTree& dep);

/// The TreeLSTM itself over explicit dependent lists, visited in the given
/// order. dah_document_vector passes them in ascending EDU order.
ad::Var tree_lstm(ad::Tape& tape, const SentimentModel& m, const DocumentEncoding& enc,
                  const std::vector<std::vector<int>>& children, int root);

/// Unnormalised class scores from a document vector.
ad::Var classify_logits(ad::Tape& tape, const SentimentModel& m, ad::Var doc_vector);

/// Dropout is applied to EDU vectors and to the document vector when `keep` < 1.
struct ForwardOptions {
  double keep = 1.0;
  std::uint64_t dropout_seed = 0;
};

/// Logits for a whole document. `dep` is required for DAH and ignored for HAN.
ad::Var document_logits(ad::Tape& tape, const SentimentModel& m, const Document& doc, const DependencyTree* dep,
                        const ForwardOptions& opts = {});

struct Prediction {
  std::string id;
  std::array<double, 5> probs{};
  int pred = 0;  // star value 1..5
  std::size_t length = 0;
};

/// Trees by document id, only consulted for DAH.
using TreeMap = std::map<std::string, DependencyTree>;

Prediction predict(const SentimentModel& m, const Document& doc, const DependencyTree* dep);
std::vector<Prediction> predict_all(const SentimentModel& m, const std::vector<const Document*>& docs,
                                    const TreeMap& trees);
std::vector<Prediction> predict_all_serial(const SentimentModel& m, const std::vector<const Document*>& docs,
                                           const TreeMap& trees);

/// Mean cross-entropy and accuracy in evaluation mode.
struct EvalStats {
  double loss = 0.0;
  double accuracy = 0.0;
};
EvalStats evaluate_model(const SentimentModel& m, const std::vector<const Document*>& docs, const TreeMap& trees);

// ---- batched gradients -------------------------------------------------------

struct BatchStats {
  double loss_sum = 0.0;
  std::size_t correct = 0;
};

/// Per-document dropout seed: a function of the batch seed and the document id.
std::uint64_t document_dropout_seed(std::uint64_t batch_seed, const Document& doc);

/// Sums per-document loss gradients into `out`. Documents are split into a
/// fixed number of contiguous chunks processed on worker threads; chunk
/// results are reduced in order, so the sum is independent of thread count.
BatchStats batch_gradients(const SentimentModel& m, const std::vector<const Document*>& docs, const TreeMap& trees,
                           double keep, std::uint64_t batch_seed, ad::Gradients& out);
/// Plain in-order accumulation on one thread; reference for batch_gradients.
BatchStats batch_gradients_serial(const SentimentModel& m, const std::vector<const Document*>& docs,
                                  const TreeMap& trees, double keep, std::uint64_t batch_seed, ad::Gradients& out);

// ---- training ------------------------------------------------------------------

struct TrainConfig {
  ModelKind kind = ModelKind::Dah;
  ModelDims dims;
  ad::OptimizerConfig optimizer{ad::OptimizerKind::Sgd, 0.01};
  std::size_t batch = 64;
  double dropout = 0.5;
  int max_epochs = 20;
  int patience = 5;
  double clip = 5.0;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> embeddings;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // running loss with dropout
  double dev_accuracy = 0.0;
};

struct TrainResult {
  SentimentModel model;  // best-dev parameters, rounded to float32
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_dev_accuracy = 0.0;
};

/// Seeded shuffling, mini-batches, mean cross-entropy, global-norm clipping,
/// one optimizer step per batch and early stopping on dev accuracy. An empty
/// dev set falls back to the training set. Stops early once dev accuracy
/// reaches 1, since no later epoch can improve on it.
TrainResult train(const TrainConfig& cfg, const std::vector<const Document*>& train_docs,
                  const std::vector<const Document*>& dev_docs, const TreeMap& trees,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Prediction JSONL: {"id": str, "probs": [5 floats], "pred": int, "len": int}
void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& preds);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

}  // namespace dsnt
