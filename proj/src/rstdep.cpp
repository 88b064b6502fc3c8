#include "dsnt/rstdep.hpp"

#include <algorithm>

#include "dsnt/common.hpp"

namespace dsnt {

DependencyTree::DependencyTree(std::vector<int> heads) : head_(std::move(heads)), children_(head_.size()) {
  for (std::size_t i = 0; i < head_.size(); ++i) {
    int h = head_[i];
    if (h >= 0 && static_cast<std::size_t>(h) < head_.size()) children_[static_cast<std::size_t>(h)].push_back(static_cast<int>(i));
  }
}

int DependencyTree::root() const {
  for (std::size_t i = 0; i < head_.size(); ++i)
    if (head_[i] == kRoot) return static_cast<int>(i);
  return -1;
}

std::vector<int> DependencyTree::post_order() const {
  std::vector<int> order;
  order.reserve(size());
  int r = root();
  if (r < 0) throw Error("dependency tree has no root");
  // Iterative DFS; children are emitted before their head.
  std::vector<std::pair<int, std::size_t>> stack{{r, 0}};
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    const auto& kids = children_[static_cast<std::size_t>(node)];
    if (next < kids.size()) {
      int child = kids[next++];
      stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  if (order.size() != size()) throw Error("dependency tree is not connected");
  return order;
}

namespace {
int percolate(const ConstituencyTree& t, int i, std::vector<int>& head) {
  const auto& n = t.node(i);
  if (n.is_leaf()) return n.edu;
  int lh = percolate(t, n.left, head);
  int rh = percolate(t, n.right, head);
  if (n.nuclearity == Nuclearity::SN) {
    head[static_cast<std::size_t>(lh)] = rh;
    return rh;
  }
  head[static_cast<std::size_t>(rh)] = lh;
  return lh;
}
}  // namespace

DependencyTree to_dependency(const ConstituencyTree& tree) {
  tree.validate();
  std::vector<int> head(tree.num_edus(), DependencyTree::kRoot);
  percolate(tree, tree.root(), head);
  return DependencyTree(std::move(head));
}

std::vector<std::string> validate(const DependencyTree& dep) {
  std::vector<std::string> violations;
  const std::size_t n = dep.size();
  if (n == 0) return {"empty tree"};
  std::size_t roots = 0, edges = 0;
  bool range_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    int h = dep.head(i);
    if (h == DependencyTree::kRoot) {
      ++roots;
    } else if (h < 0 || static_cast<std::size_t>(h) >= n || static_cast<std::size_t>(h) == i) {
      range_ok = false;
    } else {
      ++edges;
    }
  }
  if (roots == 0) violations.emplace_back("no root");
  if (roots > 1) violations.emplace_back("multiple roots");
  if (!range_ok) violations.emplace_back("head out of range");
  if (edges != n - 1) violations.emplace_back("edge count");
  if (!range_ok) return violations;

  // Walk up from every node; revisiting a node on the current path is a cycle.
  std::vector<int> state(n, 0);  // 0 unseen, 1 on path, 2 done
  bool cycle = false;
  for (std::size_t s = 0; s < n && !cycle; ++s) {
    std::vector<std::size_t> path;
    std::size_t v = s;
    while (true) {
      if (state[v] == 2) break;
      if (state[v] == 1) {
        cycle = true;
        break;
      }
      state[v] = 1;
      path.push_back(v);
      int h = dep.head(v);
      if (h == DependencyTree::kRoot) break;
      v = static_cast<std::size_t>(h);
    }
    for (auto p : path) state[p] = 2;
  }
  if (cycle) violations.emplace_back("cycle");

  if (roots == 1 && !cycle) {
    std::vector<bool> seen(n, false);
    std::vector<int> stack{dep.root()};
    std::size_t reached = 0;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      if (seen[static_cast<std::size_t>(v)]) continue;
      seen[static_cast<std::size_t>(v)] = true;
      ++reached;
      for (int c : dep.children(static_cast<std::size_t>(v))) stack.push_back(c);
    }
    if (reached != n) violations.emplace_back("unreachable");
  }
  return violations;
}

std::string format_dependency_line(const std::string& id, const DependencyTree& dep) {
  std::string out = id + '\t';
  for (std::size_t i = 0; i < dep.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(dep.head(i));
  }
  return out;
}

void write_dependency_file(const std::filesystem::path& path,
                           const std::vector<std::pair<std::string, DependencyTree>>& trees) {
  std::string out;
  for (const auto& [id, dep] : trees) {
    out += format_dependency_line(id, dep);
    out += '\n';
  }
  io::write_atomic(path, out);
}

}  // namespace dsnt
