#include "evanno/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>
#include <unordered_set>

#include "evanno/error.hpp"
#include "evanno/text.hpp"

namespace evanno {

namespace {

std::string optional_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw InputError("line " + std::to_string(line) + ": field " + key + " must be a string");
  }
  return it->get<std::string>();
}

bool contains_sequence(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

nlohmann::json to_json(const Document& doc) {
  nlohmann::json j;
  j["id"] = doc.id;
  if (!doc.source.empty()) j["source"] = doc.source;
  if (doc.published_at) j["published_at"] = *doc.published_at;
  if (!doc.title.empty()) j["title"] = doc.title;
  j["body"] = doc.body;
  if (!doc.tags.empty()) j["tags"] = doc.tags;
  return j;
}

Document document_from_json(const nlohmann::json& obj, std::size_t line) {
  const auto where = "line " + std::to_string(line) + ": ";
  if (!obj.is_object()) throw InputError(where + "expected a JSON object");
  for (const char* key : {"id", "body"}) {
    if (!obj.contains(key)) throw InputError(where + "missing field " + key);
  }
  Document doc;
  doc.id = optional_string(obj, "id", line);
  if (doc.id.empty()) throw InputError(where + "empty id");
  doc.body = std::string(trim(optional_string(obj, "body", line)));
  if (doc.body.empty()) throw InputError(where + "empty body");
  doc.title = optional_string(obj, "title", line);
  doc.source = optional_string(obj, "source", line);
  if (auto date = optional_string(obj, "published_at", line); !date.empty()) {
    static const std::regex iso(R"(\d{4}-\d{2}-\d{2}(T.*)?)");
    if (!std::regex_match(date, iso)) {
      throw InputError(where + "published_at is not an ISO-8601 date: " + date);
    }
    doc.published_at = date.substr(0, 10);
  }
  if (const auto it = obj.find("tags"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw InputError(where + "tags must be an array of strings");
    for (const auto& t : *it) {
      if (!t.is_string()) throw InputError(where + "tags must be an array of strings");
      doc.tags.push_back(t.get<std::string>());
    }
  }
  return doc;
}

std::vector<Document> parse_jsonl(std::istream& in) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError("line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
    }
    auto doc = document_from_json(obj, line);
    if (!seen.insert(doc.id).second) {
      throw InputError("line " + std::to_string(line) + ": duplicate id " + doc.id);
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> ingest_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus file " + path.string());
  return parse_jsonl(in);
}

void write_jsonl(const std::filesystem::path& path, std::span<const Document> docs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& d : docs) out << to_json(d).dump() << '\n';
}

std::vector<Document> dedupe_exact(std::span<const Document> docs) {
  std::vector<Document> out;
  std::unordered_set<std::string> bodies;
  for (const auto& d : docs) {
    if (bodies.insert(collapse_whitespace(d.body)).second) out.push_back(d);
  }
  return out;
}

bool contains_keyword(const Document& doc, std::span<const std::string> keywords) {
  const auto title = tokenize(doc.title);
  const auto body = tokenize(doc.body);
  for (const auto& kw : keywords) {
    const auto needle = tokenize(kw);
    if (contains_sequence(title, needle) || contains_sequence(body, needle)) return true;
  }
  return false;
}

std::vector<Document> keyword_filter(std::span<const Document> docs,
                                     std::span<const std::string> keywords) {
  if (keywords.empty()) throw InputError("keyword list is empty");
  std::vector<Document> out;
  for (const auto& d : docs) {
    if (contains_keyword(d, keywords)) out.push_back(d);
  }
  return out;
}

std::vector<std::string> load_keywords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open keyword file " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto kw = trim(line);
    if (!kw.empty()) out.emplace_back(kw);
  }
  return out;
}

const Document* find_document(std::span<const Document> docs, std::string_view id) {
  for (const auto& d : docs) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

}  // namespace evanno
