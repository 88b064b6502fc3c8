#include "dsnt/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "dsnt/common.hpp"
#include "json.hpp"

namespace dsnt {

using nlohmann::json;

std::vector<const Document*> CorpusSplits::all() const {
  std::vector<const Document*> out;
  out.reserve(train.size() + dev.size() + test.size());
  for (const auto* part : {&train, &dev, &test})
    for (const auto& d : *part) out.push_back(&d);
  return out;
}

namespace {
[[noreturn]] void reject(std::size_t line_no, const std::string& what) {
  throw Error("corpus line " + std::to_string(line_no) + ": " + what);
}
}  // namespace

Document parse_document(const std::string& line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    reject(line_no, std::string("malformed JSON (") + e.what() + ")");
  }
  if (!j.is_object()) reject(line_no, "record is not an object");

  Document doc;
  if (!j.contains("id") || !j["id"].is_string()) reject(line_no, "field 'id' missing or not a string");
  doc.id = j["id"].get<std::string>();
  if (doc.id.empty()) reject(line_no, "field 'id' is empty");

  if (!j.contains("label") || !j["label"].is_number_integer())
    reject(line_no, "field 'label' missing or not an integer");
  doc.label = j["label"].get<int>();
  if (doc.label < 1 || doc.label > 5)
    reject(line_no, "field 'label' out of range 1..5: " + std::to_string(doc.label));

  if (!j.contains("edus") || !j["edus"].is_array()) reject(line_no, "field 'edus' missing or not an array");
  const auto& edus = j["edus"];
  if (edus.empty()) reject(line_no, "field 'edus' has no EDUs");
  for (std::size_t e = 0; e < edus.size(); ++e) {
    if (!edus[e].is_array()) reject(line_no, "field 'edus' element " + std::to_string(e) + " is not an array");
    Edu edu;
    for (const auto& tok : edus[e]) {
      if (!tok.is_string()) reject(line_no, "field 'edus' element " + std::to_string(e) + " has a non-string token");
      auto s = tok.get<std::string>();
      if (s.empty()) continue;
      std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      edu.push_back(std::move(s));
    }
    if (edu.empty()) reject(line_no, "field 'edus' element " + std::to_string(e) + " is an empty EDU");
    doc.edus.push_back(std::move(edu));
  }
  return doc;
}

std::string serialize_document(const Document& doc) {
  json j;
  j["id"] = doc.id;
  j["label"] = doc.label;
  j["edus"] = doc.edus;
  return j.dump();
}

std::vector<Document> read_documents(const std::filesystem::path& path) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  io::for_each_line(path, [&](const std::string& line, std::size_t no) {
    if (line.find_first_not_of(" \t") == std::string::npos) return;
    auto doc = parse_document(line, no);
    if (!seen.insert(doc.id).second) reject(no, "duplicate id '" + doc.id + "'");
    docs.push_back(std::move(doc));
  });
  return docs;
}

void write_documents(const std::filesystem::path& path, const std::vector<Document>& docs) {
  std::string out;
  for (const auto& d : docs) {
    out += serialize_document(d);
    out += '\n';
  }
  io::write_atomic(path, out);
}

namespace {
std::vector<std::string> read_id_list(const std::filesystem::path& path) {
  std::vector<std::string> ids;
  io::for_each_line(path, [&](const std::string& line, std::size_t) {
    auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) return;
    auto e = line.find_last_not_of(" \t");
    ids.push_back(line.substr(b, e - b + 1));
  });
  return ids;
}
}  // namespace

CorpusSplits split_documents(std::vector<Document> docs, const SplitSpec& spec) {
  CorpusSplits splits;
  const bool explicit_split = spec.train_ids || spec.dev_ids || spec.test_ids;
  if (explicit_split) {
    if (!spec.train_ids || !spec.dev_ids || !spec.test_ids)
      throw Error("explicit split needs train, dev and test id files");
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < docs.size(); ++i) by_id.emplace(docs[i].id, i);
    std::unordered_set<std::string> used;
    auto take = [&](const std::filesystem::path& file, std::vector<Document>& dst) {
      for (const auto& id : read_id_list(file)) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw Error("split file " + file.string() + ": unknown id '" + id + "'");
        if (!used.insert(id).second) throw Error("split files: id '" + id + "' listed twice");
        dst.push_back(docs[it->second]);
      }
    };
    take(*spec.train_ids, splits.train);
    take(*spec.dev_ids, splits.dev);
    take(*spec.test_ids, splits.test);
    return splits;
  }

  if (spec.train < 0 || spec.dev < 0 || spec.test < 0 || spec.train + spec.dev + spec.test <= 0)
    throw Error("split ratios must be non-negative with a positive sum");
  const double total = spec.train + spec.dev + spec.test;
  const std::size_t n = docs.size();
  auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.train / total));
  auto n_dev = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.dev / total));
  n_train = std::min(n_train, n);
  n_dev = std::min(n_dev, n - n_train);

  // Sort first so the split depends only on content, not on line order.
  std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) { return a.id < b.id; });
  Rng rng(spec.seed);
  shuffle(docs, rng);
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = i < n_train ? splits.train : (i < n_train + n_dev ? splits.dev : splits.test);
    dst.push_back(std::move(docs[i]));
  }
  return splits;
}

CorpusSplits load_corpus(const std::filesystem::path& path, const SplitSpec& spec) {
  return split_documents(read_documents(path), spec);
}

std::size_t word_count(const Document& doc) {
  std::size_t n = 0;
  for (const auto& e : doc.edus) n += e.size();
  return n;
}

}  // namespace dsnt
