#include "dsnt/vocab.hpp"

#include "dsnt/common.hpp"

namespace dsnt {

Vocabulary::Vocabulary() { add(kUnknownToken); }

Vocabulary::Vocabulary(const std::vector<std::string>& words) {
  if (words.empty() || words.front() != kUnknownToken) throw Error("vocabulary must start with <unk>");
  for (const auto& w : words) {
    if (index_.count(w)) throw Error("duplicate vocabulary entry: " + w);
    add(w);
  }
}

Vocabulary Vocabulary::build(const std::vector<const Document*>& docs) {
  Vocabulary v;
  for (const auto* d : docs)
    for (const auto& edu : d->edus)
      for (const auto& tok : edu) v.add(tok);
  return v;
}

std::size_t Vocabulary::index(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnknown : it->second;
}

void Vocabulary::add(const std::string& word) {
  if (index_.emplace(word, words_.size()).second) words_.push_back(word);
}

}  // namespace dsnt
