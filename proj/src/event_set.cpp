#include "evanno/event_set.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "evanno/error.hpp"
#include "evanno/io.hpp"

namespace evanno {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::tfidf: return "tfidf";
    case Method::embedding: return "embedding";
    case Method::llm_cls: return "llm_cls";
    case Method::llm_cls_seg: return "llm_cls_seg";
    case Method::gold: return "gold";
  }
  return "?";
}

Method method_from_string(std::string_view name) {
  std::string n(name);
  std::replace(n.begin(), n.end(), '-', '_');
  for (auto m : {Method::tfidf, Method::embedding, Method::llm_cls, Method::llm_cls_seg, Method::gold}) {
    if (to_string(m) == n) return m;
  }
  throw InputError("unknown method: " + std::string(name));
}

std::string MemberRef::key() const {
  return segment ? doc + "#" + std::to_string(*segment) : doc;
}

std::vector<std::string> EventSet::doc_ids() const {
  std::vector<std::string> out;
  for (const auto& m : members) {
    if (out.empty() || out.back() != m.doc) out.push_back(m.doc);
  }
  return out;
}

EventSet make_event_set(std::string id, Method method, std::vector<MemberRef> members) {
  if (members.empty()) throw InputError("event set " + id + " has no members");
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  return EventSet{std::move(id), method, std::move(members)};
}

void validate_event_set(const EventSet& set) {
  if (set.members.empty()) throw InputError("event set " + set.id + " has no members");
  for (std::size_t i = 1; i < set.members.size(); ++i) {
    if (!(set.members[i - 1] < set.members[i])) {
      throw InputError("event set " + set.id + " has duplicate or unsorted members");
    }
  }
  if (set.method == Method::gold) return;
  const bool segmented = set.method == Method::llm_cls_seg;
  for (const auto& m : set.members) {
    if (m.segment.has_value() != segmented) {
      throw InputError("event set " + set.id + ": segment index must be present iff method is llm_cls_seg");
    }
  }
}

std::vector<EventSet> canonicalize(std::vector<std::vector<MemberRef>> clusters, Method method) {
  for (auto& c : clusters) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  std::erase_if(clusters, [](const auto& c) { return c.empty(); });
  std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  std::vector<EventSet> out;
  out.reserve(clusters.size());
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    char id[64];
    std::snprintf(id, sizeof id, "%s-%04zu", std::string(to_string(method)).c_str(), i + 1);
    out.push_back(EventSet{id, method, std::move(clusters[i])});
  }
  return out;
}

nlohmann::json to_json(const EventSet& set) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : set.members) {
    nlohmann::json mj{{"doc", m.doc}};
    if (m.segment) mj["segment"] = *m.segment;
    members.push_back(std::move(mj));
  }
  return {{"id", set.id}, {"method", to_string(set.method)}, {"members", std::move(members)}};
}

EventSet event_set_from_json(const nlohmann::json& j) {
  try {
    std::vector<MemberRef> members;
    for (const auto& mj : j.at("members")) {
      MemberRef m{mj.at("doc").get<std::string>(), std::nullopt};
      if (mj.contains("segment") && !mj["segment"].is_null()) m.segment = mj["segment"].get<std::size_t>();
      members.push_back(std::move(m));
    }
    auto set = make_event_set(j.at("id").get<std::string>(), method_from_string(j.at("method").get<std::string>()),
                              std::move(members));
    validate_event_set(set);
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("event set: ") + e.what());
  }
}

nlohmann::json to_json(std::span<const EventSet> sets) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : sets) arr.push_back(to_json(s));
  return arr;
}

std::vector<EventSet> event_sets_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InputError("event set file must hold a JSON array");
  std::vector<EventSet> out;
  std::set<std::string> ids;
  for (const auto& item : j) {
    out.push_back(event_set_from_json(item));
    if (!ids.insert(out.back().id).second) throw InputError("duplicate event set id " + out.back().id);
  }
  return out;
}

std::vector<EventSet> load_event_sets(const std::filesystem::path& path) {
  return event_sets_from_json(read_json_file(path));
}

void save_event_sets(const std::filesystem::path& path, std::span<const EventSet> sets) {
  write_json_file(path, to_json(sets));
}

}  // namespace evanno
