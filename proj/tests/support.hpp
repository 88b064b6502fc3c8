#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dsnt/common.hpp"
#include "dsnt/constituency_tree.hpp"
#include "dsnt/corpus.hpp"
#include "dsnt/treegen.hpp"

namespace dsnt::testkit {

inline std::filesystem::path data_dir() { return DSNT_TEST_DATA_DIR; }
inline std::filesystem::path fixture_path() { return data_dir() / "fixture.jsonl"; }
inline std::filesystem::path lexicon_path() { return data_dir() / "lexicon.tsv"; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dsnt_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<EduScore> random_scores(std::size_t n, Rng& rng) {
  std::vector<EduScore> s(n);
  for (auto& e : s) e = {2.0 * uniform01(rng) - 1.0, uniform01(rng)};
  return s;
}

/// Uniform-ish random binary tree over EDUs [lo, hi] with random nuclearity.
inline ConstituencyTree random_tree(int lo, int hi, Rng& rng) {
  if (lo == hi) return ConstituencyTree::leaf(lo);
  int split = lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo)));
  auto left = random_tree(lo, split, rng);
  auto right = random_tree(split + 1, hi, rng);
  return ConstituencyTree::join(left, right, static_cast<Nuclearity>(uniform_index(rng, 3)));
}

inline std::vector<const Document*> pointers(const std::vector<Document>& docs) {
  std::vector<const Document*> out;
  for (const auto& d : docs) out.push_back(&d);
  return out;
}

/// A document with `n` EDUs of a few tokens each.
inline Document synthetic_document(const std::string& id, int label, std::size_t n, Rng& rng) {
  static const std::vector<std::string> words{"good", "bad", "food", "service", "the", "was", "slow", "great",
                                              "and", "but", "cold", "tasty", "staff", "rude", "nice"};
  Document d{id, label, {}};
  for (std::size_t i = 0; i < n; ++i) {
    Edu edu;
    std::size_t len = 1 + uniform_index(rng, 4);
    for (std::size_t t = 0; t < len; ++t) edu.push_back(words[uniform_index(rng, words.size())]);
    d.edus.push_back(edu);
  }
  return d;
}

}  // namespace dsnt::testkit
