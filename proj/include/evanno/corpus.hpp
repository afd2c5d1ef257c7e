#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace evanno {

// One ingested news item.
struct Document {
  std::string id;
  std::string source;
  std::optional<std::string> published_at;  // ISO-8601 date, YYYY-MM-DD
  std::string title;
  std::string body;
  // Hidden event labels; only fixtures set these.
  std::vector<std::string> tags;

  friend bool operator==(const Document&, const Document&) = default;
};

nlohmann::json to_json(const Document& doc);

// Parses one JSONL object. `line` is used in error messages only.
Document document_from_json(const nlohmann::json& obj, std::size_t line);

// Reads a corpus JSONL file. Errors name the 1-based line ("line 2: missing
// field body") or the duplicated id.
std::vector<Document> ingest_jsonl(const std::filesystem::path& path);
std::vector<Document> parse_jsonl(std::istream& in);

void write_jsonl(const std::filesystem::path& path, std::span<const Document> docs);

// Drops documents whose whitespace-normalized body equals an earlier one.
std::vector<Document> dedupe_exact(std::span<const Document> docs);

// Keeps documents whose title or body contains at least one keyword as a
// whole word (or whole token sequence for multi-word keywords), compared after
// fold_text. Order is preserved.
std::vector<Document> keyword_filter(std::span<const Document> docs,
                                     std::span<const std::string> keywords);

bool contains_keyword(const Document& doc, std::span<const std::string> keywords);

// Loads a keyword list: one keyword per line, '#' starts a comment.
std::vector<std::string> load_keywords(const std::filesystem::path& path);

const Document* find_document(std::span<const Document> docs, std::string_view id);

}  // namespace evanno
