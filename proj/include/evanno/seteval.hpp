#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "evanno/assignment.hpp"
#include "evanno/event_set.hpp"

namespace evanno {

// Unit of comparison between event sets. Document granularity collapses the
// segments of one document to the document id.
enum class Granularity { document, segment };

// How report means are taken. Over gold sets (the default) unmatched gold
// sets count as zero; over matched pairs only assigned pairs contribute.
enum class Averaging { gold_sets, matched_pairs };

std::vector<std::string> member_keys(const EventSet& set, Granularity granularity);

struct SetMatch {
  std::string gold_id;
  std::string pred_id;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// precision = |g n p| / |p| (0 for empty p), recall = |g n p| / |g|, f1 their
// harmonic mean (0 when both are 0). Inputs need not be sorted.
SetMatch set_f1(std::span<const std::string> gold, std::span<const std::string> pred);

// Entry (i, j) = -F1(gold i, pred j); rectangular, not yet padded.
Eigen::MatrixXd cost_matrix(std::span<const EventSet> gold, std::span<const EventSet> pred,
                            Granularity granularity = Granularity::document);

struct CurationReport {
  double mean_precision = 0;
  double mean_recall = 0;
  double mean_f1 = 0;
  std::size_t identical_count = 0;
  std::size_t n_gold = 0;
  std::size_t n_pred = 0;
  std::vector<SetMatch> matches;  // assigned pairs with nonzero F1, in gold order
};

struct EvalOptions {
  Granularity granularity = Granularity::document;
  Averaging averaging = Averaging::gold_sets;
};

// Aligns pred to gold by minimum-cost assignment over -F1 and averages the
// matched precision/recall/F1. Gold and pred are put in a canonical order
// first, so the result does not depend on list order.
CurationReport evaluate_partition(std::span<const EventSet> gold, std::span<const EventSet> pred,
                                  const EvalOptions& options = {});

nlohmann::json to_json(const CurationReport& report);

// Aligned table with columns Precision, Recall, F1, Identical Sets; one row
// per (label, report).
std::string format_curation_table(std::span<const std::pair<std::string, CurationReport>> rows);

}  // namespace evanno
