#include "evanno/workitems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>

#include "evanno/io.hpp"
#include "evanno/seteval.hpp"

namespace evanno {

namespace {

std::string item_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "item-%04zu", index);
  return buf;
}

nlohmann::json member_json(const MemberRef& m) {
  nlohmann::json j{{"doc", m.doc}};
  if (m.segment) j["segment"] = *m.segment;
  return j;
}

}  // namespace

std::vector<WorkItem> assign_workitems(std::span<const EventSet> gold, std::span<const EventSet> lm,
                                       const AssignOptions& options) {
  if (gold.empty() || lm.empty()) throw InputError("assign_workitems: both partitions must be nonempty");
  if (options.teams.empty()) throw InputError("assign_workitems: no teams");
  std::set<std::string> ids;
  for (const auto& s : gold) ids.insert(s.id);
  for (const auto& s : lm) {
    if (!ids.insert(s.id).second) throw InputError("assign_workitems: event set id " + s.id + " appears twice");
  }

  const auto report = evaluate_partition(gold, lm);
  std::map<std::string, const SetMatch*> gold_match;
  std::map<std::string, const SetMatch*> lm_match;
  for (const auto& m : report.matches) {
    gold_match.emplace(m.gold_id, &m);
    lm_match.emplace(m.pred_id, &m);
  }

  std::vector<WorkItem> base;
  for (const auto& g : gold) {
    WorkItem item;
    item.event_set = g.id;
    item.members = g.members;
    if (const auto it = gold_match.find(g.id); it != gold_match.end()) {
      item.partner = it->second->pred_id;
      item.subset = it->second->f1 == 1.0 ? Subset::overlap : Subset::human;
    }
    base.push_back(std::move(item));
  }
  for (const auto& s : lm) {
    const auto it = lm_match.find(s.id);
    if (it != lm_match.end() && it->second->f1 == 1.0) continue;  // covered by its overlap item
    WorkItem item;
    item.event_set = s.id;
    item.subset = Subset::lm;
    item.members = s.members;
    if (it != lm_match.end()) item.partner = it->second->gold_id;
    base.push_back(std::move(item));
  }
  std::sort(base.begin(), base.end(), [](const WorkItem& a, const WorkItem& b) { return a.event_set < b.event_set; });

  // Written-out Fisher-Yates so the order only depends on mt19937_64.
  std::mt19937_64 rng(options.seed);
  for (std::size_t i = base.size(); i > 1; --i) std::swap(base[i - 1], base[rng() % i]);

  std::map<Subset, std::size_t> seen;
  const auto k = options.teams.size();
  const auto n_dup = static_cast<std::size_t>(std::llround(options.duplicate_fraction * static_cast<double>(base.size())));
  std::vector<WorkItem> out;
  for (std::size_t pos = 0; pos < base.size(); ++pos) {
    auto& item = base[pos];
    item.setting = seen[item.subset]++ % 2 == 0 ? Setting::manual : Setting::hybrid;
    item.id = item_id(pos + 1);
    if (pos < n_dup && k > 1) {
      for (const auto& team : options.teams) {
        WorkItem copy = item;
        copy.id += "-" + team;
        copy.team = team;
        out.push_back(std::move(copy));
      }
    } else {
      item.team = options.teams[pos % k];
      out.push_back(std::move(item));
    }
  }
  return out;
}

nlohmann::json to_json(const WorkItem& item) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : item.members) members.push_back(member_json(m));
  return {{"id", item.id},
          {"event_set", item.event_set},
          {"partner", item.partner},
          {"team", item.team},
          {"setting", to_string(item.setting)},
          {"subset", to_string(item.subset)},
          {"members", std::move(members)}};
}

WorkItem workitem_from_json(const nlohmann::json& j) {
  try {
    WorkItem item;
    item.id = j.at("id").get<std::string>();
    item.event_set = j.at("event_set").get<std::string>();
    item.partner = j.value("partner", std::string());
    item.team = j.value("team", std::string());
    item.setting = setting_from_string(j.at("setting").get<std::string>());
    if (item.setting == Setting::automated) throw InputError("work item " + item.id + " cannot be automated");
    item.subset = subset_from_string(j.at("subset").get<std::string>());
    for (const auto& m : j.at("members")) {
      MemberRef ref{m.at("doc").get<std::string>(), std::nullopt};
      if (m.contains("segment") && !m["segment"].is_null()) ref.segment = m["segment"].get<std::size_t>();
      item.members.push_back(std::move(ref));
    }
    return item;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("work item: ") + e.what());
  }
}

std::vector<WorkItem> load_workitems(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  std::vector<WorkItem> out;
  std::set<std::string> ids;
  for (const auto& item : j.at("items")) {
    out.push_back(workitem_from_json(item));
    if (!ids.insert(out.back().id).second) throw InputError(path.string() + ": duplicate work item " + out.back().id);
  }
  return out;
}

void save_workitems(const std::filesystem::path& path, std::span<const WorkItem> items) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& item : items) arr.push_back(to_json(item));
  write_json_file(path, {{"items", std::move(arr)}});
}

}  // namespace evanno
