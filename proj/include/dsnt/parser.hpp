#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "dsnt/constituency_tree.hpp"
#include "dsnt/corpus.hpp"

namespace dsnt {

enum class Action : std::uint8_t { Shift, ReduceNN, ReduceNS, ReduceSN };
inline constexpr std::size_t kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kAllActions{Action::Shift, Action::ReduceNN, Action::ReduceNS,
                                                             Action::ReduceSN};

std::string_view to_string(Action a);

/// Shift-reduce configuration over one document's EDUs.
class ParserState {
 public:
  explicit ParserState(std::span<const EduScore> scores);

  std::size_t num_edus() const { return scores_.size(); }
  const std::vector<ConstituencyTree>& stack() const { return stack_; }
  std::size_t next() const { return next_; }
  std::size_t queue_size() const { return scores_.size() - next_; }

  bool legal(Action a) const;
  void apply(Action a);
  bool done() const { return next_ == scores_.size() && stack_.size() == 1; }
  /// The finished tree; throws unless done().
  const ConstituencyTree& result() const;

 private:
  std::span<const EduScore> scores_;
  std::vector<ConstituencyTree> stack_;
  std::size_t next_ = 0;
};

/// SHIFT for every leaf and REDUCE-<nuclearity> for every internal node, in post-order.
std::vector<Action> oracle_actions(const ConstituencyTree& tree);

/// Runs an action sequence from the initial state. Span scores come from
/// `scores` (zeros when empty).
ConstituencyTree replay(const std::vector<Action>& actions, std::size_t n, std::span<const EduScore> scores = {});

/// Hashed indicator features of a state, at most kMaxFeatures of them.
inline constexpr std::size_t kMaxFeatures = 40;
std::vector<std::uint32_t> extract_features(const ParserState& state, const Document& doc, std::size_t dim);

struct ParserModel {
  std::size_t feature_dim = 0;
  std::array<std::vector<double>, kNumActions> weights;
  int epochs = 0;

  std::array<double, kNumActions> scores(const std::vector<std::uint32_t>& features) const;
};

struct ParserConfig {
  int epochs = 15;
  std::size_t feature_dim = std::size_t{1} << 18;
  std::uint64_t seed = 0;
};

/// One training document with its scores and silver tree.
struct ParserExample {
  const Document* doc = nullptr;
  const std::vector<EduScore>* scores = nullptr;
  const ConstituencyTree* tree = nullptr;
};

struct ParserEpoch {
  int epoch = 0;
  double oracle_accuracy = 0.0;  // online, before the update on each state
};

/// Averaged multi-class perceptron over oracle state/action pairs.
ParserModel train_parser(const std::vector<ParserExample>& examples, const ParserConfig& cfg,
                         const std::function<void(const ParserEpoch&)>& on_epoch = {});

/// Fraction of oracle states on which the model picks the oracle action.
double oracle_accuracy(const ParserModel& model, const std::vector<ParserExample>& examples);

/// Greedy decoding with illegal actions masked; ties go to the earlier action.
ConstituencyTree parse(const ParserModel& model, const Document& doc, std::span<const EduScore> scores,
                       std::vector<Action>* actions = nullptr);

std::vector<ConstituencyTree> parse_all(const ParserModel& model, const std::vector<const Document*>& docs,
                                        const std::vector<std::vector<EduScore>>& scores);
std::vector<ConstituencyTree> parse_all_serial(const ParserModel& model, const std::vector<const Document*>& docs,
                                               const std::vector<std::vector<EduScore>>& scores);

void save_parser(const std::filesystem::path& path, const ParserModel& model);
ParserModel load_parser(const std::filesystem::path& path);

}  // namespace dsnt
