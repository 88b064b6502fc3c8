#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dsnt/constituency_tree.hpp"

namespace dsnt {

/// One node per EDU; head[i] is the parent EDU of i, or kRoot.
class DependencyTree {
 public:
  static constexpr int kRoot = -1;

  DependencyTree() = default;
  explicit DependencyTree(std::vector<int> heads);

  std::size_t size() const { return head_.size(); }
  int head(std::size_t i) const { return head_[i]; }
  const std::vector<int>& heads() const { return head_; }
  /// Index of the (first) root node, or -1 if there is none.
  int root() const;
  /// Dependents of node i in ascending EDU order.
  const std::vector<int>& children(std::size_t i) const { return children_[i]; }
  /// Nodes ordered so that every dependent precedes its head. Requires a valid tree.
  std::vector<int> post_order() const;

  friend bool operator==(const DependencyTree& a, const DependencyTree& b) { return a.head_ == b.head_; }

 private:
  std::vector<int> head_;
  std::vector<std::vector<int>> children_;
};

/// Nucleus head percolation: a leaf heads itself; an internal node takes the
/// head of its nucleus child (left for NS and NN, right for SN) and the other
/// child's head becomes its dependent.
DependencyTree to_dependency(const ConstituencyTree& tree);

/// Structural violations ("no root", "multiple roots", "edge count",
/// "head out of range", "cycle", "unreachable"); empty when the tree is valid.
std::vector<std::string> validate(const DependencyTree& dep);

/// `id<TAB>h0,h1,...` with -1 for the root.
std::string format_dependency_line(const std::string& id, const DependencyTree& dep);
void write_dependency_file(const std::filesystem::path& path,
                           const std::vector<std::pair<std::string, DependencyTree>>& trees);

}  // namespace dsnt
