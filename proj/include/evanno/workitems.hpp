#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "evanno/agreement.hpp"
#include "evanno/event_set.hpp"

namespace evanno {

// One event set to be coded by one team.
struct WorkItem {
  std::string id;
  std::string event_set;
  std::string partner;  // assignment partner in the other partition, if any
  std::string team;
  Setting setting = Setting::manual;
  Subset subset = Subset::human;
  std::vector<MemberRef> members;

  bool operator==(const WorkItem&) const = default;
};

struct AssignOptions {
  std::uint64_t seed = 7;
  std::vector<std::string> teams{"team-1"};
  // Share of items issued to every team instead of one, for inter-team
  // agreement. Copies get ids like item-0003-team-2.
  double duplicate_fraction = 0.0;
};

// Splits the events of a gold and an LM partition into subsets:
//   overlap  gold sets with an identical LM set (assignment partner, F1 = 1)
//   human    remaining gold sets
//   lm       remaining LM sets
// Items are shuffled with the seed, then alternate manual/hybrid within each
// subset and go round-robin to teams. Every event appears in exactly one
// subset. Throws InputError if either partition is empty.
std::vector<WorkItem> assign_workitems(std::span<const EventSet> gold, std::span<const EventSet> lm,
                                       const AssignOptions& options = {});

nlohmann::json to_json(const WorkItem& item);
WorkItem workitem_from_json(const nlohmann::json& j);

std::vector<WorkItem> load_workitems(const std::filesystem::path& path);
void save_workitems(const std::filesystem::path& path, std::span<const WorkItem> items);

}  // namespace evanno
