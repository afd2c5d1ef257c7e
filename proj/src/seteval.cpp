#include "evanno/seteval.hpp"

#include <algorithm>
#include <numeric>

#include "evanno/error.hpp"
#include "evanno/table.hpp"

namespace evanno {

namespace {

std::vector<std::string> sorted_unique(std::span<const std::string> in) {
  std::vector<std::string> out(in.begin(), in.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct KeyedSet {
  const EventSet* set;
  std::vector<std::string> keys;
};

std::vector<KeyedSet> canonical_order(std::span<const EventSet> sets, Granularity g) {
  std::vector<KeyedSet> out;
  out.reserve(sets.size());
  for (const auto& s : sets) out.push_back({&s, member_keys(s, g)});
  std::sort(out.begin(), out.end(), [](const KeyedSet& a, const KeyedSet& b) {
    if (a.keys != b.keys) return a.keys < b.keys;
    return a.set->id < b.set->id;
  });
  return out;
}

}  // namespace

std::vector<std::string> member_keys(const EventSet& set, Granularity granularity) {
  std::vector<std::string> out;
  out.reserve(set.members.size());
  for (const auto& m : set.members) out.push_back(granularity == Granularity::document ? m.doc : m.key());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SetMatch set_f1(std::span<const std::string> gold, std::span<const std::string> pred) {
  if (gold.empty()) throw InputError("set_f1: gold set is empty");
  const auto g = sorted_unique(gold);
  const auto p = sorted_unique(pred);
  std::vector<std::string> common;
  std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(common));
  const auto inter = static_cast<double>(common.size());
  SetMatch m;
  m.precision = p.empty() ? 0.0 : inter / static_cast<double>(p.size());
  m.recall = inter / static_cast<double>(g.size());
  m.f1 = (m.precision + m.recall) == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

Eigen::MatrixXd cost_matrix(std::span<const EventSet> gold, std::span<const EventSet> pred,
                            Granularity granularity) {
  Eigen::MatrixXd c(static_cast<Eigen::Index>(gold.size()), static_cast<Eigen::Index>(pred.size()));
  std::vector<std::vector<std::string>> pred_keys;
  pred_keys.reserve(pred.size());
  for (const auto& p : pred) pred_keys.push_back(member_keys(p, granularity));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto g = member_keys(gold[i], granularity);
    for (std::size_t j = 0; j < pred.size(); ++j) {
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = -set_f1(g, pred_keys[j]).f1;
    }
  }
  return c;
}

CurationReport evaluate_partition(std::span<const EventSet> gold, std::span<const EventSet> pred,
                                  const EvalOptions& options) {
  if (gold.empty()) throw InputError("evaluate_partition: gold partition is empty");
  const auto g = canonical_order(gold, options.granularity);
  const auto p = canonical_order(pred, options.granularity);

  CurationReport report;
  report.n_gold = g.size();
  report.n_pred = p.size();
  if (p.empty()) return report;

  Eigen::MatrixXd costs(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(p.size()));
  std::vector<std::vector<SetMatch>> cells(g.size(), std::vector<SetMatch>(p.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      auto m = set_f1(g[i].keys, p[j].keys);
      m.gold_id = g[i].set->id;
      m.pred_id = p[j].set->id;
      costs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = -m.f1;
      cells[i][j] = std::move(m);
    }
  }

  double sum_p = 0, sum_r = 0, sum_f = 0;
  std::size_t assigned = 0;
  for (const auto& [i, j] : solve_assignment(costs)) {
    const auto& m = cells[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    ++assigned;
    sum_p += m.precision;
    sum_r += m.recall;
    sum_f += m.f1;
    if (g[static_cast<std::size_t>(i)].keys == p[static_cast<std::size_t>(j)].keys) ++report.identical_count;
    if (m.f1 > 0.0) report.matches.push_back(m);
  }
  const double denom = options.averaging == Averaging::gold_sets ? static_cast<double>(g.size())
                                                                 : static_cast<double>(std::max<std::size_t>(assigned, 1));
  report.mean_precision = sum_p / denom;
  report.mean_recall = sum_r / denom;
  report.mean_f1 = sum_f / denom;
  return report;
}

nlohmann::json to_json(const CurationReport& r) {
  nlohmann::json matches = nlohmann::json::array();
  for (const auto& m : r.matches) {
    matches.push_back({{"gold", m.gold_id}, {"pred", m.pred_id}, {"precision", m.precision},
                       {"recall", m.recall}, {"f1", m.f1}});
  }
  return {{"precision", r.mean_precision}, {"recall", r.mean_recall}, {"f1", r.mean_f1},
          {"identical_sets", r.identical_count}, {"n_gold", r.n_gold}, {"n_pred", r.n_pred},
          {"matches", std::move(matches)}};
}

std::string format_curation_table(std::span<const std::pair<std::string, CurationReport>> rows) {
  TextTable table({"", "Precision", "Recall", "F1", "Identical Sets"});
  for (const auto& [label, r] : rows) {
    table.add_row({label, format_fixed(r.mean_precision, 2), format_fixed(r.mean_recall, 2),
                   format_fixed(r.mean_f1, 2), std::to_string(r.identical_count)});
  }
  return table.render();
}

}  // namespace evanno
