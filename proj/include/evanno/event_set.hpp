#pragma once

#include <compare>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace evanno {

enum class Method { tfidf, embedding, llm_cls, llm_cls_seg, gold };

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);  // accepts "llm-cls" spellings too

// A document, or one segment of it (0-based, in segmentation order).
struct MemberRef {
  std::string doc;
  std::optional<std::size_t> segment;

  auto operator<=>(const MemberRef&) const = default;
  bool operator==(const MemberRef&) const = default;

  // "doc" or "doc#segment".
  std::string key() const;
};

// Documents (or segments) claimed to describe one event.
struct EventSet {
  std::string id;
  Method method = Method::gold;
  std::vector<MemberRef> members;  // sorted, no duplicates

  bool operator==(const EventSet&) const = default;

  std::vector<std::string> doc_ids() const;  // distinct, sorted
};

// Builds an EventSet with sorted, de-duplicated members; throws InputError on
// an empty member list.
EventSet make_event_set(std::string id, Method method, std::vector<MemberRef> members);

// Checks EventSet invariants: nonempty, no duplicates, and segment indices
// present exactly for llm_cls_seg (gold sets may use either form).
void validate_event_set(const EventSet& set);

// Orders sets by their smallest member and names them "<method>-0001", ...
std::vector<EventSet> canonicalize(std::vector<std::vector<MemberRef>> clusters, Method method);

nlohmann::json to_json(const EventSet& set);
EventSet event_set_from_json(const nlohmann::json& j);
nlohmann::json to_json(std::span<const EventSet> sets);
std::vector<EventSet> event_sets_from_json(const nlohmann::json& j);

std::vector<EventSet> load_event_sets(const std::filesystem::path& path);
void save_event_sets(const std::filesystem::path& path, std::span<const EventSet> sets);

}  // namespace evanno
