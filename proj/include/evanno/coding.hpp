#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evanno/corpus.hpp"
#include "evanno/event_set.hpp"
#include "evanno/oracle.hpp"
#include "evanno/schema.hpp"

namespace evanno {

// Disagreement seen while coding one variable: the competing raw values, or
// a single raw value that failed validation (note says why).
struct Conflict {
  std::string variable;
  std::vector<std::string> values;  // sorted, distinct
  std::string note;

  auto operator<=>(const Conflict&) const = default;
};

struct ExtractedEvent {
  std::string event_id;
  std::vector<VariableValue> values;  // one per schema variable, schema order
  // Raw model answer per variable name (string form), for the chosen value.
  std::map<std::string, std::string> raw;
  std::vector<Conflict> conflicts;  // sorted, distinct
  // Member keys that supplied a non-NA value, per variable name.
  std::map<std::string, std::vector<std::string>> provenance;
  std::vector<std::string> warnings;  // sorted, distinct

  bool operator==(const ExtractedEvent&) const = default;

  const VariableValue& value(const VariableSchema& schema, std::string_view name) const {
    return values[schema.index_of(name)];
  }
};

struct MemberText {
  MemberRef ref;
  std::string text;
};

inline constexpr std::string_view kExtractionRetry = "Return only a JSON object keyed by variable name.";

// Fallback template; projects normally carry their own in config.json.
// Placeholders: {variables} and {documents}.
inline constexpr std::string_view kDefaultExtractionPrompt =
    "The following documents describe one incident. Extract the variables below and return a JSON "
    "object keyed by variable name. Use \"NA\" when a value is not stated. If the documents give "
    "conflicting values for a variable, return {\"candidates\": [...]} with each distinct value.\n"
    "Variables:\n{variables}\nDocuments:\n{documents}";

struct ExtractionOptions {
  std::string prompt_template = std::string(kDefaultExtractionPrompt);
  // Prompt once per member and merge, instead of one prompt per event set.
  bool per_document = false;
};

// Texts for each member of `set`: the whole document, or the stored segment.
// Throws InputError when a document or segment cannot be found.
std::vector<MemberText> resolve_member_texts(const EventSet& set, std::span<const Document> docs,
                                             const std::map<std::string, std::vector<std::string>>& segments = {});

std::string render_variable_list(const VariableSchema& schema);
std::string render_extraction_prompt(const VariableSchema& schema, std::span<const MemberText> members,
                                     std::string_view prompt_template);

// Builds an ExtractedEvent from a parsed answer object. Values that fail
// validation become NA with a conflict note; {"candidates": [...]} answers
// are merged as in merge_extractions.
ExtractedEvent interpret_extraction(const VariableSchema& schema, const std::string& event_id,
                                    const nlohmann::json& answer, std::span<const std::string> sources);

ExtractedEvent extract_variables(Oracle& oracle, const VariableSchema& schema, const EventSet& set,
                                 std::span<const MemberText> members, const ExtractionOptions& options = {});

// Extracts every set, concurrently within the oracle's in-flight bound.
std::vector<ExtractedEvent> extract_all(Oracle& oracle, const VariableSchema& schema, std::span<const EventSet> sets,
                                        std::span<const Document> docs,
                                        const std::map<std::string, std::vector<std::string>>& segments,
                                        const ExtractionOptions& options = {});

// Combines fragments of one event:
//   text   most frequent normalized value; ties -> longest, then smallest
//   enum   union
//   count  largest n; at_least beats exact at equal n
// Any disagreement between non-NA values is recorded as a conflict. NA never
// conflicts. Idempotent and order-independent.
ExtractedEvent merge_extractions(const VariableSchema& schema, std::span<const ExtractedEvent> fragments);

nlohmann::json to_json(const VariableSchema& schema, const ExtractedEvent& event);
ExtractedEvent extracted_event_from_json(const VariableSchema& schema, const nlohmann::json& j);

std::vector<ExtractedEvent> load_extracted(const VariableSchema& schema, const std::filesystem::path& path);
void save_extracted(const VariableSchema& schema, const std::filesystem::path& path,
                    std::span<const ExtractedEvent> events);

}  // namespace evanno
