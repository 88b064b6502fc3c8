#include "dsnt/constituency_tree.hpp"

#include <algorithm>
#include <cctype>

#include "dsnt/common.hpp"

namespace dsnt {

std::string_view to_string(Nuclearity n) {
  switch (n) {
    case Nuclearity::NN: return "NN";
    case Nuclearity::NS: return "NS";
    case Nuclearity::SN: return "SN";
  }
  return "NN";
}

Nuclearity parse_nuclearity(std::string_view s) {
  if (s == "NN") return Nuclearity::NN;
  if (s == "NS") return Nuclearity::NS;
  if (s == "SN") return Nuclearity::SN;
  throw Error("unknown nuclearity tag '" + std::string(s) + "'");
}

ConstituencyTree ConstituencyTree::leaf(int edu, SpanScore score) {
  if (edu < 0) throw Error("leaf EDU index must be non-negative");
  ConstituencyTree t;
  Node n;
  n.edu = edu;
  n.lo = n.hi = edu;
  n.score = score;
  t.nodes_.push_back(n);
  return t;
}

ConstituencyTree ConstituencyTree::join(const ConstituencyTree& left, const ConstituencyTree& right, Nuclearity nuc,
                                        SpanScore score) {
  if (left.empty() || right.empty()) throw Error("join: empty subtree");
  ConstituencyTree t;
  t.nodes_.reserve(left.nodes_.size() + right.nodes_.size() + 1);
  t.nodes_ = left.nodes_;
  const int offset = static_cast<int>(left.nodes_.size());
  for (Node n : right.nodes_) {
    if (!n.is_leaf()) {
      n.left += offset;
      n.right += offset;
    }
    t.nodes_.push_back(n);
  }
  Node parent;
  parent.left = left.root();
  parent.right = offset + right.root();
  parent.lo = left.root_node().lo;
  parent.hi = right.root_node().hi;
  parent.height = 1 + std::max(left.height(), right.height());
  parent.nuclearity = nuc;
  parent.score = score;
  t.nodes_.push_back(parent);
  return t;
}

void ConstituencyTree::validate() const {
  if (empty()) throw Error("tree is empty");
  int next_leaf = 0;
  // Post-order: leaves appear left to right.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.is_leaf()) {
      if (n.edu != next_leaf)
        throw Error("leaf index gap: expected EDU " + std::to_string(next_leaf) + ", found " + std::to_string(n.edu));
      ++next_leaf;
      continue;
    }
    if (n.left < 0 || n.right < 0 || n.left >= static_cast<int>(i) || n.right >= static_cast<int>(i))
      throw Error("internal node without two earlier children");
    const Node& l = nodes_[static_cast<std::size_t>(n.left)];
    const Node& r = nodes_[static_cast<std::size_t>(n.right)];
    if (l.hi + 1 != r.lo || n.lo != l.lo || n.hi != r.hi) throw Error("children do not cover adjacent spans");
  }
  if (root_node().lo != 0 || root_node().hi != next_leaf - 1) throw Error("root does not span all leaves");
}

namespace {
void bracket(const ConstituencyTree& t, int i, std::string& out) {
  const auto& n = t.node(i);
  if (n.is_leaf()) {
    out += std::to_string(n.edu);
    return;
  }
  out += '(';
  bracket(t, n.left, out);
  out += ' ';
  bracket(t, n.right, out);
  out += ' ';
  out += to_string(n.nuclearity);
  out += ')';
}

class BracketParser {
 public:
  explicit BracketParser(std::string_view s) : s_(s) {}

  ConstituencyTree parse() {
    auto t = node();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    return t;
  }

 private:
  ConstituencyTree node() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unbalanced brackets: unexpected end of input");
    if (s_[pos_] == '(') {
      ++pos_;
      auto left = node();
      auto right = node();
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("missing nuclearity tag");
      auto nuc = parse_nuclearity(s_.substr(start, pos_ - start));
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("unbalanced brackets: expected ')'");
      ++pos_;
      return ConstituencyTree::join(left, right, nuc);
    }
    if (s_[pos_] == ')') fail("unbalanced brackets: unexpected ')'");
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a leaf index or '('");
    return ConstituencyTree::leaf(std::stoi(std::string(s_.substr(start, pos_ - start))));
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error("bracketed tree, offset " + std::to_string(pos_) + ": " + what);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

bool same_subtree(const ConstituencyTree& a, int i, const ConstituencyTree& b, int j) {
  const auto& x = a.node(i);
  const auto& y = b.node(j);
  if (x.is_leaf() || y.is_leaf()) return x.is_leaf() && y.is_leaf() && x.edu == y.edu;
  return x.nuclearity == y.nuclearity && same_subtree(a, x.left, b, y.left) && same_subtree(a, x.right, b, y.right);
}
}  // namespace

std::string ConstituencyTree::to_bracket() const {
  if (empty()) throw Error("cannot write an empty tree");
  std::string out;
  bracket(*this, root(), out);
  return out;
}

ConstituencyTree ConstituencyTree::from_bracket(std::string_view text) {
  auto t = BracketParser(text).parse();
  t.validate();
  return t;
}

bool ConstituencyTree::same_structure(const ConstituencyTree& other) const {
  if (empty() || other.empty()) return empty() && other.empty();
  if (nodes_.size() != other.nodes_.size()) return false;
  return same_subtree(*this, root(), other, other.root());
}

}  // namespace dsnt
