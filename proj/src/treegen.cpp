#include "dsnt/treegen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "dsnt/common.hpp"

namespace dsnt {

SpanScore aggregate(const SpanScore& left, const SpanScore& right) {
  const double total = left.a + right.a;
  SpanScore out;
  out.p = total < 1e-9 ? 0.5 * (left.p + right.p) : (left.p * left.a + right.p * right.a) / total;
  out.a = 0.5 * total;
  return out;
}

Nuclearity assign_nuclearity(double a_left, double a_right, double eps) {
  if (a_left - a_right > eps) return Nuclearity::NS;
  if (a_right - a_left > eps) return Nuclearity::SN;
  return Nuclearity::NN;
}

double gold_polarity(int label) {
  if (label < 1 || label > 5) throw Error("star label out of range 1..5: " + std::to_string(label));
  return (label - 3) / 2.0;
}

namespace {
ConstituencyTree rescore_node(const ConstituencyTree& t, int i, std::span<const EduScore> scores) {
  const auto& n = t.node(i);
  if (n.is_leaf()) {
    if (static_cast<std::size_t>(n.edu) >= scores.size()) throw Error("rescore: fewer scores than EDUs");
    return ConstituencyTree::leaf(n.edu, scores[static_cast<std::size_t>(n.edu)]);
  }
  auto l = rescore_node(t, n.left, scores);
  auto r = rescore_node(t, n.right, scores);
  auto s = aggregate(l.root_node().score, r.root_node().score);
  return ConstituencyTree::join(l, r, n.nuclearity, s);
}
}  // namespace

ConstituencyTree rescore(const ConstituencyTree& tree, std::span<const EduScore> scores) {
  if (tree.num_edus() != scores.size())
    throw Error("rescore: tree has " + std::to_string(tree.num_edus()) + " EDUs, got " +
                std::to_string(scores.size()) + " scores");
  return rescore_node(tree, tree.root(), scores);
}

std::uint64_t catalan(unsigned n) {
  std::uint64_t c = 1;
  for (unsigned k = 0; k < n; ++k) c = c * 2 * (2 * k + 1) / (k + 2);
  return c;
}

// ---------------------------------------------------------------------------
// Beam CKY

namespace {

struct Candidate {
  SpanScore score;
  double divergence = 0.0;
  int height = 0;
  int split = -1;  // last EDU of the left child
  int left = -1;   // index into the left cell's beam
  int right = -1;  // index into the right cell's beam
};

class Chart {
 public:
  explicit Chart(int n) : n_(n), cells_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {}

  std::vector<Candidate>& cell(int i, int j) { return cells_[static_cast<std::size_t>(i * n_ + j)]; }
  const std::vector<Candidate>& cell(int i, int j) const { return cells_[static_cast<std::size_t>(i * n_ + j)]; }

  int structure_cmp(int i, int j, const Candidate& a, const Candidate& b) const {
    if (i == j) return 0;
    if (a.split != b.split) return a.split < b.split ? -1 : 1;
    if (a.left != b.left) {
      const auto& lc = cell(i, a.split);
      int c = structure_cmp(i, a.split, lc[static_cast<std::size_t>(a.left)], lc[static_cast<std::size_t>(b.left)]);
      if (c) return c;
    }
    if (a.right != b.right) {
      const auto& rc = cell(a.split + 1, j);
      return structure_cmp(a.split + 1, j, rc[static_cast<std::size_t>(a.right)], rc[static_cast<std::size_t>(b.right)]);
    }
    return 0;
  }

  bool better(int i, int j, const Candidate& a, const Candidate& b) const {
    if (a.divergence != b.divergence) return a.divergence < b.divergence;
    if (a.height != b.height) return a.height < b.height;
    return structure_cmp(i, j, a, b) < 0;
  }

  ConstituencyTree materialize(int i, int j, int index, std::span<const EduScore> scores, double eps) const {
    if (i == j) return ConstituencyTree::leaf(i, scores[static_cast<std::size_t>(i)]);
    const Candidate& c = cell(i, j)[static_cast<std::size_t>(index)];
    auto l = materialize(i, c.split, c.left, scores, eps);
    auto r = materialize(c.split + 1, j, c.right, scores, eps);
    auto nuc = assign_nuclearity(l.root_node().score.a, r.root_node().score.a, eps);
    return ConstituencyTree::join(l, r, nuc, c.score);
  }

 private:
  int n_;
  std::vector<std::vector<Candidate>> cells_;
};

void check_scores(std::span<const EduScore> scores, double gold_p) {
  if (scores.empty()) throw Error("tree building needs at least one EDU");
  if (!(gold_p >= -1.0 && gold_p <= 1.0)) throw Error("gold polarity outside [-1, 1]");
}

}  // namespace

ConstituencyTree build_tree_cky(std::span<const EduScore> scores, double gold_p, const CkyConfig& cfg) {
  check_scores(scores, gold_p);
  if (cfg.beam < 1) throw Error("beam width must be at least 1");
  if (!(cfg.temperature >= 0.0)) throw Error("temperature must be non-negative");

  const int n = static_cast<int>(scores.size());
  Chart chart(n);
  for (int i = 0; i < n; ++i) {
    Candidate c;
    c.score = scores[static_cast<std::size_t>(i)];
    c.divergence = std::abs(c.score.p - gold_p);
    chart.cell(i, i).push_back(c);
  }

  Rng rng(cfg.seed);
  std::vector<Candidate> pool;
  std::vector<double> keys;
  std::vector<std::size_t> order;
  for (int len = 2; len <= n; ++len) {
    for (int i = 0; i + len - 1 < n; ++i) {
      const int j = i + len - 1;
      pool.clear();
      for (int k = i; k < j; ++k) {
        const auto& lc = chart.cell(i, k);
        const auto& rc = chart.cell(k + 1, j);
        for (std::size_t l = 0; l < lc.size(); ++l) {
          for (std::size_t r = 0; r < rc.size(); ++r) {
            Candidate c;
            c.score = aggregate(lc[l].score, rc[r].score);
            c.divergence = std::abs(c.score.p - gold_p);
            c.height = 1 + std::max(lc[l].height, rc[r].height);
            c.split = k;
            c.left = static_cast<int>(l);
            c.right = static_cast<int>(r);
            pool.push_back(c);
          }
        }
      }

      auto better = [&](const Candidate& a, const Candidate& b) { return chart.better(i, j, a, b); };
      auto& beam = chart.cell(i, j);
      const std::size_t keep = std::min(cfg.beam, pool.size());
      // The root span is always ranked exhaustively; sampling only diversifies
      // the lower levels.
      if (cfg.temperature == 0.0 || keep == pool.size() || len == n) {
        std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), better);
        beam.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep));
      } else {
        // Gumbel-top-k: the top `keep` perturbed log-weights form a sample
        // without replacement from softmax(-divergence / T).
        keys.resize(pool.size());
        for (std::size_t c = 0; c < pool.size(); ++c) {
          double u = uniform01(rng);
          while (u == 0.0) u = uniform01(rng);
          keys[c] = -pool[c].divergence / cfg.temperature - std::log(-std::log(u));
        }
        order.resize(pool.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                          [&](std::size_t a, std::size_t b) {
                            if (keys[a] != keys[b]) return keys[a] > keys[b];
                            return better(pool[a], pool[b]);
                          });
        beam.clear();
        for (std::size_t c = 0; c < keep; ++c) beam.push_back(pool[order[c]]);
        std::sort(beam.begin(), beam.end(), better);
      }
    }
  }
  return chart.materialize(0, n - 1, 0, scores, cfg.eps);
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

namespace {

struct BruteNode {
  std::shared_ptr<const BruteNode> left, right;
  int lo = 0, hi = 0, split = -1, height = 0;
  SpanScore score;
};
using BrutePtr = std::shared_ptr<const BruteNode>;

int brute_structure_cmp(const BruteNode& a, const BruteNode& b) {
  if (a.lo == a.hi) return 0;
  if (a.split != b.split) return a.split < b.split ? -1 : 1;
  if (int c = brute_structure_cmp(*a.left, *b.left)) return c;
  return brute_structure_cmp(*a.right, *b.right);
}

class Enumerator {
 public:
  Enumerator(std::span<const EduScore> scores) : scores_(scores), n_(static_cast<int>(scores.size())) {
    memo_.resize(static_cast<std::size_t>(n_ * n_));
  }

  const std::vector<BrutePtr>& trees(int i, int j) {
    auto& slot = memo_[static_cast<std::size_t>(i * n_ + j)];
    if (!slot.empty()) return slot;
    if (i == j) {
      auto leaf = std::make_shared<BruteNode>();
      leaf->lo = leaf->hi = i;
      leaf->score = scores_[static_cast<std::size_t>(i)];
      slot.push_back(std::move(leaf));
      return slot;
    }
    std::vector<BrutePtr> out;
    for (int k = i; k < j; ++k) {
      const auto& ls = trees(i, k);
      const auto& rs = trees(k + 1, j);
      for (const auto& l : ls) {
        for (const auto& r : rs) {
          auto node = std::make_shared<BruteNode>();
          node->left = l;
          node->right = r;
          node->lo = i;
          node->hi = j;
          node->split = k;
          node->height = 1 + std::max(l->height, r->height);
          node->score = aggregate(l->score, r->score);
          out.push_back(std::move(node));
        }
      }
    }
    auto& dst = memo_[static_cast<std::size_t>(i * n_ + j)];
    dst = std::move(out);
    return dst;
  }

 private:
  std::span<const EduScore> scores_;
  int n_;
  std::vector<std::vector<BrutePtr>> memo_;
};

ConstituencyTree to_tree(const BruteNode& node, double eps) {
  if (node.lo == node.hi) return ConstituencyTree::leaf(node.lo, node.score);
  auto l = to_tree(*node.left, eps);
  auto r = to_tree(*node.right, eps);
  return ConstituencyTree::join(l, r, assign_nuclearity(node.left->score.a, node.right->score.a, eps), node.score);
}

}  // namespace

ConstituencyTree brute_force_best_tree(std::span<const EduScore> scores, double gold_p, double eps) {
  check_scores(scores, gold_p);
  if (scores.size() > kBruteForceMaxEdus)
    throw Error("brute force search is limited to " + std::to_string(kBruteForceMaxEdus) + " EDUs, got " +
                std::to_string(scores.size()));
  Enumerator en(scores);
  const auto& all = en.trees(0, static_cast<int>(scores.size()) - 1);
  const BruteNode* best = nullptr;
  double best_div = 0.0;
  for (const auto& t : all) {
    double div = std::abs(t->score.p - gold_p);
    bool take = best == nullptr;
    if (!take) {
      if (div != best_div) take = div < best_div;
      else if (t->height != best->height) take = t->height < best->height;
      else take = brute_structure_cmp(*t, *best) < 0;
    }
    if (take) {
      best = t.get();
      best_div = div;
    }
  }
  return to_tree(*best, eps);
}

// ---------------------------------------------------------------------------
// Treebank files

void write_treebank(const std::filesystem::path& path, const std::vector<TreebankEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    if (e.id.find('\t') != std::string::npos) throw Error("treebank id contains a tab: " + e.id);
    out += e.id;
    out += '\t';
    out += e.tree.to_bracket();
    out += '\n';
  }
  io::write_atomic(path, out);
}

std::vector<TreebankEntry> read_treebank(const std::filesystem::path& path) {
  std::vector<TreebankEntry> entries;
  io::for_each_line(path, [&](const std::string& line, std::size_t no) {
    if (line.empty()) return;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw Error(path.string() + ":" + std::to_string(no) + ": expected 'id<TAB>tree'");
    try {
      entries.push_back({line.substr(0, tab), ConstituencyTree::from_bracket(std::string_view(line).substr(tab + 1))});
    } catch (const Error& e) {
      throw Error(path.string() + ":" + std::to_string(no) + ": " + e.what());
    }
  });
  return entries;
}

namespace {
TreebankEntry build_one(const Document& doc, const std::vector<EduScore>& scores, const CkyConfig& cfg) {
  if (scores.size() != doc.edus.size())
    throw Error("document '" + doc.id + "' has " + std::to_string(doc.edus.size()) + " EDUs but " +
                std::to_string(scores.size()) + " scores");
  CkyConfig local = cfg;
  local.seed = fnv1a(doc.id, cfg.seed);
  return {doc.id, build_tree_cky(scores, gold_polarity(doc.label), local)};
}

void check_aligned(const std::vector<const Document*>& docs, const std::vector<std::vector<EduScore>>& scores) {
  if (docs.size() != scores.size()) throw Error("build_treebank: documents and scores differ in count");
}
}  // namespace

std::vector<TreebankEntry> build_treebank(const std::vector<const Document*>& docs,
                                          const std::vector<std::vector<EduScore>>& scores, const CkyConfig& cfg) {
  check_aligned(docs, scores);
  std::vector<TreebankEntry> out(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) { out[i] = build_one(*docs[i], scores[i], cfg); });
  return out;
}

std::vector<TreebankEntry> build_treebank_serial(const std::vector<const Document*>& docs,
                                                 const std::vector<std::vector<EduScore>>& scores,
                                                 const CkyConfig& cfg) {
  check_aligned(docs, scores);
  std::vector<TreebankEntry> out;
  out.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) out.push_back(build_one(*docs[i], scores[i], cfg));
  return out;
}

}  // namespace dsnt
