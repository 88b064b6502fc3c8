#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dsnt {

/// Polarity in [-1, 1] and importance in [0, 1] of an EDU or a span.
struct SpanScore {
  double p = 0.0;
  double a = 0.0;

  friend bool operator==(const SpanScore&, const SpanScore&) = default;
};

using EduScore = SpanScore;

enum class Nuclearity : std::uint8_t { NN, NS, SN };

std::string_view to_string(Nuclearity n);
Nuclearity parse_nuclearity(std::string_view s);

/// Binary discourse tree over EDUs 0..n-1. Nodes are stored in post-order,
/// so the root is the last node and children always precede their parent.
class ConstituencyTree {
 public:
  struct Node {
    int left = -1;
    int right = -1;
    int edu = -1;  // >= 0 only for leaves
    int lo = 0;    // first EDU covered
    int hi = 0;    // last EDU covered
    int height = 0;
    Nuclearity nuclearity = Nuclearity::NN;
    SpanScore score;

    bool is_leaf() const { return edu >= 0; }
  };

  ConstituencyTree() = default;

  static ConstituencyTree leaf(int edu, SpanScore score = {});
  static ConstituencyTree join(const ConstituencyTree& left, const ConstituencyTree& right, Nuclearity nuc,
                               SpanScore score = {});

  bool empty() const { return nodes_.empty(); }
  int root() const { return static_cast<int>(nodes_.size()) - 1; }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const Node& root_node() const { return nodes_.back(); }
  std::span<const Node> nodes() const { return nodes_; }
  std::size_t num_edus() const { return empty() ? 0 : static_cast<std::size_t>(root_node().hi - root_node().lo + 1); }
  int height() const { return empty() ? 0 : root_node().height; }

  /// Throws unless leaves are exactly 0..n-1 left to right and every internal
  /// node has two children covering adjacent spans.
  void validate() const;

  /// `(l r NS)` bracket form; leaves are bare EDU indices.
  std::string to_bracket() const;
  static ConstituencyTree from_bracket(std::string_view text);

  /// Same shape and nuclearity labels; span scores are ignored.
  bool same_structure(const ConstituencyTree& other) const;
  friend bool operator==(const ConstituencyTree& a, const ConstituencyTree& b) { return a.same_structure(b); }

 private:
  std::vector<Node> nodes_;
};

}  // namespace dsnt
