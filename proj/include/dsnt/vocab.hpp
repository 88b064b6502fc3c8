#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "dsnt/corpus.hpp"

namespace dsnt {

/// Word to row mapping; row 0 is the shared unknown-word entry.
class Vocabulary {
 public:
  static constexpr std::size_t kUnknown = 0;
  static constexpr const char* kUnknownToken = "<unk>";

  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& words);  // words[0] must be <unk>

  /// Every token of the documents, in first-seen order.
  static Vocabulary build(const std::vector<const Document*>& docs);

  std::size_t size() const { return words_.size(); }
  std::size_t index(const std::string& word) const;
  const std::string& word(std::size_t i) const { return words_[i]; }
  const std::vector<std::string>& words() const { return words_; }
  void add(const std::string& word);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace dsnt
