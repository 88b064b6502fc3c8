#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dsnt {

using Edu = std::vector<std::string>;

/// A review: EDU-segmented, lowercased tokens and a 1..5 star label.
struct Document {
  std::string id;
  int label = 0;
  std::vector<Edu> edus;

  /// Zero-based class index used by the classifiers.
  int class_index() const { return label - 1; }

  friend bool operator==(const Document&, const Document&) = default;
};

struct CorpusSplits {
  std::vector<Document> train;
  std::vector<Document> dev;
  std::vector<Document> test;

  std::vector<const Document*> all() const;
};

/// Either ratios (shuffled with `seed`) or three explicit id-list files.
struct SplitSpec {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> train_ids;
  std::optional<std::filesystem::path> dev_ids;
  std::optional<std::filesystem::path> test_ids;
};

/// Parses and validates one JSONL record. `line_no` only feeds diagnostics.
Document parse_document(const std::string& line, std::size_t line_no);

std::string serialize_document(const Document& doc);

/// Reads every record of a JSONL corpus, rejecting duplicates.
std::vector<Document> read_documents(const std::filesystem::path& path);
void write_documents(const std::filesystem::path& path, const std::vector<Document>& docs);

CorpusSplits split_documents(std::vector<Document> docs, const SplitSpec& spec);

CorpusSplits load_corpus(const std::filesystem::path& path, const SplitSpec& spec);

/// Total token count over all EDUs.
std::size_t word_count(const Document& doc);

}  // namespace dsnt
