#include "evanno/reports.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "evanno/table.hpp"

namespace evanno {

namespace {

constexpr std::array<Setting, 2> kTimedSettings{Setting::manual, Setting::hybrid};
constexpr std::array<Subset, 3> kSubsets{Subset::human, Subset::lm, Subset::overlap};

bool is_human(const AnnotationRecord& r) { return r.setting != Setting::automated; }

// Earliest finished record per event set; ties broken by annotator.
std::vector<AnnotationRecord> one_per_event(std::vector<AnnotationRecord> records) {
  std::sort(records.begin(), records.end(), [](const AnnotationRecord& a, const AnnotationRecord& b) {
    return std::tie(a.event_set, a.ended_at, a.annotator, a.item) < std::tie(b.event_set, b.ended_at, b.annotator, b.item);
  });
  std::vector<AnnotationRecord> out;
  for (auto& r : records) {
    if (out.empty() || out.back().event_set != r.event_set) out.push_back(std::move(r));
  }
  return out;
}

template <typename Pred>
std::vector<AnnotationRecord> select(std::span<const AnnotationRecord> records, Pred pred) {
  std::vector<AnnotationRecord> out;
  for (const auto& r : records) {
    if (pred(r)) out.push_back(r);
  }
  return out;
}

std::string percent(double rate) { return format_fixed(100.0 * rate, 1); }

}  // namespace

std::vector<AgreementRow> agreement_breakdown(const VariableSchema& schema, std::span<const AnnotationRecord> records,
                                              const MetricConfig& config) {
  std::set<std::string> teams;
  for (const auto& r : records) {
    if (is_human(r)) teams.insert(r.team);
  }
  const auto automated = one_per_event(select(records, [](const auto& r) { return !is_human(r); }));
  std::vector<AgreementRow> rows;

  auto add = [&](std::string comparison, std::string setting, std::string subset, const auto& pairs) {
    AgreementReport total;
    for (const auto& [a, b] : pairs) {
      try {
        accumulate(total, pairwise_agreement(schema, a, b, config));
      } catch (const InputError&) {
        // no shared events in this pairing
      }
    }
    if (total.n_events > 0) rows.push_back({std::move(comparison), std::move(setting), std::move(subset), total});
  };

  using Pairing = std::pair<std::vector<AnnotationRecord>, std::vector<AnnotationRecord>>;
  if (!automated.empty()) {
    for (const auto setting : kTimedSettings) {
      for (const auto subset : kSubsets) {
        std::vector<Pairing> pairs;
        for (const auto& team : teams) {
          pairs.emplace_back(one_per_event(select(records,
                                                  [&](const auto& r) {
                                                    return is_human(r) && r.team == team && r.setting == setting &&
                                                           r.subset == subset;
                                                  })),
                             automated);
        }
        add("human-lm", std::string(to_string(setting)), std::string(to_string(subset)), pairs);
      }
    }
    std::vector<Pairing> all;
    for (const auto& team : teams) {
      all.emplace_back(one_per_event(select(records, [&](const auto& r) { return is_human(r) && r.team == team; })),
                       automated);
    }
    add("human-lm", "all", "all", all);
  }

  const std::vector<std::string> team_list(teams.begin(), teams.end());
  auto team_pairs = [&](auto pred) {
    std::vector<Pairing> pairs;
    for (std::size_t i = 0; i < team_list.size(); ++i) {
      for (std::size_t j = i + 1; j < team_list.size(); ++j) {
        pairs.emplace_back(
            one_per_event(select(records, [&](const auto& r) { return is_human(r) && r.team == team_list[i] && pred(r); })),
            one_per_event(select(records, [&](const auto& r) { return is_human(r) && r.team == team_list[j] && pred(r); })));
      }
    }
    return pairs;
  };
  for (const auto subset : kSubsets) {
    add("human-human", "all", std::string(to_string(subset)), team_pairs([&](const auto& r) { return r.subset == subset; }));
  }
  add("human-human", "all", "all", team_pairs([](const auto&) { return true; }));
  return rows;
}

nlohmann::json to_json(std::span<const AgreementRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    auto j = to_json(r.report);
    j["comparison"] = r.comparison;
    j["setting"] = r.setting;
    j["subset"] = r.subset;
    out.push_back(std::move(j));
  }
  return out;
}

std::string format_agreement_table(const VariableSchema& schema, std::span<const AgreementRow> rows) {
  std::vector<std::string> headers{"Comparison", "Setting", "Subset", "Events"};
  for (const auto& d : schema.variables()) headers.push_back(d.name);
  headers.emplace_back("Overall");
  TextTable table(headers);
  for (const auto& r : rows) {
    std::vector<std::string> cells{r.comparison, r.setting, r.subset, std::to_string(r.report.n_events)};
    for (const auto& v : r.report.variables) cells.push_back(percent(v.rate()));
    cells.push_back(percent(r.report.rate()));
    table.add_row(std::move(cells));
  }
  return "Agreement (" + std::string(rows.empty() ? "-" : to_string(rows.front().report.metric)) + ", %)\n" +
         table.render();
}

SelectionReport selection_frequency(const VariableSchema& schema, std::span<const AnnotationRecord> records,
                                    std::span<const ExtractedEvent> extracted) {
  std::map<std::string, const ExtractedEvent*> by_id;
  for (const auto& e : extracted) by_id.emplace(e.event_id, &e);
  std::vector<SelectionRow> rows;
  for (const auto& d : schema.variables()) rows.push_back({d.name, 0, 0});
  SelectionReport report;
  for (const auto& r : records) {
    if (r.setting != Setting::hybrid) {
      throw InputError("selection_frequency: record for " + r.event_set + " is not from the hybrid setting");
    }
    const auto it = by_id.find(r.event_set);
    if (it == by_id.end()) {
      ++report.skipped_records;
      continue;
    }
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const auto& model = it->second->values.at(i);
      if (is_na(model)) continue;
      ++rows[i].count;
      if (r.prepopulated.at(i) && normalized_match(r.values.at(i), model).equivalent) ++rows[i].selected;
    }
  }
  for (auto& row : rows) {
    if (row.count == 0) continue;
    report.overall.count += row.count;
    report.overall.selected += row.selected;
    report.rows.push_back(std::move(row));
  }
  return report;
}

nlohmann::json to_json(const SelectionReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  auto row = [](const SelectionRow& r) {
    return nlohmann::json{
        {"variable", r.variable}, {"selected", r.selected}, {"count", r.count}, {"frequency", r.frequency()}};
  };
  for (const auto& r : report.rows) rows.push_back(row(r));
  return {{"rows", std::move(rows)}, {"overall", row(report.overall)}, {"skipped_records", report.skipped_records}};
}

std::string format_selection_table(const SelectionReport& report) {
  TextTable table({"Variable", "Frequency (%)", "Count"});
  for (const auto& r : report.rows) table.add_row({r.variable, format_fixed(r.frequency(), 1), std::to_string(r.count)});
  table.add_rule();
  table.add_row(
      {report.overall.variable, format_fixed(report.overall.frequency(), 1), std::to_string(report.overall.count)});
  return table.render();
}

TimingCell timing_cell(std::span<const double> seconds) {
  TimingCell c;
  c.n = seconds.size();
  if (c.n == 0) return c;
  double sum = 0;
  for (const double s : seconds) sum += s;
  c.mean = sum / static_cast<double>(c.n);
  double ss = 0;
  for (const double s : seconds) ss += (s - c.mean) * (s - c.mean);
  c.sd = std::sqrt(ss / static_cast<double>(c.n));
  return c;
}

TimingSummary timing_summary(std::span<const AnnotationRecord> records) {
  std::array<std::array<std::vector<double>, 3>, 2> buckets;
  std::size_t used = 0;
  for (const auto& r : records) {
    if (r.setting == Setting::automated) continue;
    if (r.ended_at < r.started_at) {
      throw InputError("timing_summary: record for " + r.event_set + " ends before it starts");
    }
    const auto s = static_cast<std::size_t>(r.setting == Setting::hybrid);
    buckets[s][static_cast<std::size_t>(r.subset)].push_back(r.seconds());
    ++used;
  }
  if (used == 0) throw InputError("timing_summary: no manual or hybrid records");
  TimingSummary t;
  std::vector<double> all;
  std::array<std::vector<double>, 3> by_subset;
  for (std::size_t s = 0; s < 2; ++s) {
    std::vector<double> row;
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& b = buckets[s][k];
      t.cells[s][k] = timing_cell(b);
      row.insert(row.end(), b.begin(), b.end());
      by_subset[k].insert(by_subset[k].end(), b.begin(), b.end());
    }
    t.setting_average[s] = timing_cell(row);
    all.insert(all.end(), row.begin(), row.end());
  }
  for (std::size_t k = 0; k < 3; ++k) t.subset_average[k] = timing_cell(by_subset[k]);
  t.overall = timing_cell(all);
  return t;
}

nlohmann::json to_json(const TimingSummary& t) {
  auto cell = [](const TimingCell& c) { return nlohmann::json{{"n", c.n}, {"mean", c.mean}, {"sd", c.sd}}; };
  nlohmann::json rows = nlohmann::json::object();
  for (std::size_t s = 0; s < 2; ++s) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t k = 0; k < 3; ++k) row[std::string(to_string(kSubsets[k]))] = cell(t.cells[s][k]);
    row["average"] = cell(t.setting_average[s]);
    rows[std::string(to_string(kTimedSettings[s]))] = std::move(row);
  }
  nlohmann::json avg = nlohmann::json::object();
  for (std::size_t k = 0; k < 3; ++k) avg[std::string(to_string(kSubsets[k]))] = cell(t.subset_average[k]);
  avg["average"] = cell(t.overall);
  rows["average"] = std::move(avg);
  return rows;
}

std::string format_timing_table(const TimingSummary& t) {
  auto cell = [](const TimingCell& c) {
    return c.n == 0 ? std::string("-") : format_fixed(c.mean, 0) + " (" + format_fixed(c.sd, 0) + ")";
  };
  TextTable table({"", "Human", "LM", "Overlap", "Average"});
  const std::array<std::string, 2> names{"Manual", "Hybrid"};
  for (std::size_t s = 0; s < 2; ++s) {
    table.add_row({names[s], cell(t.cells[s][0]), cell(t.cells[s][1]), cell(t.cells[s][2]), cell(t.setting_average[s])});
  }
  table.add_rule();
  table.add_row({"Average", cell(t.subset_average[0]), cell(t.subset_average[1]), cell(t.subset_average[2]),
                 cell(t.overall)});
  return table.render();
}

}  // namespace evanno
