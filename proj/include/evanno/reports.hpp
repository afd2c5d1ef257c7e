#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "evanno/agreement.hpp"
#include "evanno/coding.hpp"

namespace evanno {

// One line of the grouped agreement report. comparison is "human-lm" or
// "human-human"; setting and subset are "all" when not split on.
struct AgreementRow {
  std::string comparison;
  std::string setting;
  std::string subset;
  AgreementReport report;
};

// Human-LM agreement per (setting, subset) and per team, summed over teams,
// and human-human agreement between every pair of teams per subset. When one
// team coded an event set more than once, its earliest finished record is
// used. Groups with no shared events are omitted.
std::vector<AgreementRow> agreement_breakdown(const VariableSchema& schema, std::span<const AnnotationRecord> records,
                                              const MetricConfig& config);

nlohmann::json to_json(std::span<const AgreementRow> rows);
// Rows: groups. Columns: events, per-variable rate (%), overall rate (%).
std::string format_agreement_table(const VariableSchema& schema, std::span<const AgreementRow> rows);

struct SelectionRow {
  std::string variable;
  std::size_t selected = 0;
  std::size_t count = 0;  // non-NA extracted variable instances seen by annotators
  double frequency() const { return count == 0 ? 0.0 : 100.0 * static_cast<double>(selected) / static_cast<double>(count); }
};

struct SelectionReport {
  std::vector<SelectionRow> rows;  // schema order, variables with count 0 left out
  SelectionRow overall{"Overall", 0, 0};
  std::size_t skipped_records = 0;  // records with no extraction for their event set
};

// How often annotators keep a prepopulated model value: per variable, over
// (record, variable) pairs whose extracted value is non-NA, the share where the
// field was left prepopulated and still normalized-matches the extraction.
// Throws InputError on non-hybrid records.
SelectionReport selection_frequency(const VariableSchema& schema, std::span<const AnnotationRecord> records,
                                    std::span<const ExtractedEvent> extracted);

nlohmann::json to_json(const SelectionReport& report);
std::string format_selection_table(const SelectionReport& report);

struct TimingCell {
  std::size_t n = 0;
  double mean = 0;
  double sd = 0;  // population standard deviation
};

// Coding seconds by setting (manual, hybrid) and subset (human, lm, overlap),
// with pooled row, column and overall averages. Automated records are not
// timed.
struct TimingSummary {
  std::array<std::array<TimingCell, 3>, 2> cells{};
  std::array<TimingCell, 2> setting_average{};
  std::array<TimingCell, 3> subset_average{};
  TimingCell overall;
};

TimingCell timing_cell(std::span<const double> seconds);

// Throws InputError when no manual or hybrid record is given or a record ends
// before it starts.
TimingSummary timing_summary(std::span<const AnnotationRecord> records);

nlohmann::json to_json(const TimingSummary& summary);
// Rows Manual, Hybrid, Average; columns Human, LM, Overlap, Average; cells
// "mean (sd)" in whole seconds.
std::string format_timing_table(const TimingSummary& summary);

}  // namespace evanno
