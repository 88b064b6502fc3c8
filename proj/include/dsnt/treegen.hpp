#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dsnt/constituency_tree.hpp"
#include "dsnt/corpus.hpp"

namespace dsnt {

/// Parent score of two adjacent spans: attention-weighted polarity and mean
/// attention. When both attentions vanish the polarity falls back to the
/// unweighted mean.
SpanScore aggregate(const SpanScore& left, const SpanScore& right);

/// NS when the left attention exceeds the right by more than `eps`, SN for
/// the mirror case, NN inside the tie band.
Nuclearity assign_nuclearity(double a_left, double a_right, double eps = 0.05);

/// Star label 1..5 mapped linearly onto [-1, 1].
double gold_polarity(int label);

/// Recomputes every span score bottom-up from the leaf scores.
ConstituencyTree rescore(const ConstituencyTree& tree, std::span<const EduScore> scores);

struct CkyConfig {
  std::size_t beam = 16;
  double temperature = 0.0;
  std::uint64_t seed = 0;
  double eps = 0.05;
};

/// Bottom-up CKY over all spans keeping at most `beam` candidates per span.
///
/// Candidates are ranked by |p - gold_p|, then lower height, then structure
/// (leftmost split first, recursively left then right subtree). With a zero
/// temperature each span keeps its best `beam` candidates; otherwise `beam`
/// candidates are drawn without replacement with probability proportional to
/// softmax(-|p - gold_p| / T). The root candidate ranked first wins.
ConstituencyTree build_tree_cky(std::span<const EduScore> scores, double gold_p, const CkyConfig& cfg);

/// Exhaustive search with the same objective and ranking. Limited to 12 EDUs.
ConstituencyTree brute_force_best_tree(std::span<const EduScore> scores, double gold_p, double eps = 0.05);
inline constexpr std::size_t kBruteForceMaxEdus = 12;

std::uint64_t catalan(unsigned n);

struct TreebankEntry {
  std::string id;
  ConstituencyTree tree;
};

/// One `id<TAB>(bracketed tree)` line per document.
void write_treebank(const std::filesystem::path& path, const std::vector<TreebankEntry>& entries);
std::vector<TreebankEntry> read_treebank(const std::filesystem::path& path);

/// Silver trees for a set of documents. Each document gets its own seed
/// derived from `cfg.seed` and its id, so the result does not depend on the
/// iteration order or on the number of threads.
std::vector<TreebankEntry> build_treebank(const std::vector<const Document*>& docs,
                                          const std::vector<std::vector<EduScore>>& scores, const CkyConfig& cfg);
/// Single-threaded reference for build_treebank.
std::vector<TreebankEntry> build_treebank_serial(const std::vector<const Document*>& docs,
                                                 const std::vector<std::vector<EduScore>>& scores,
                                                 const CkyConfig& cfg);

}  // namespace dsnt
