#include "evanno/curation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include "evanno/parallel.hpp"
#include "evanno/text.hpp"

namespace evanno {

namespace {

struct Item {
  MemberRef ref;
  std::string text;
};

// Asks the oracle about each index pair concurrently, then unions positives
// in the given (sorted) pair order.
std::vector<std::vector<std::size_t>> classify_and_close(Oracle& oracle, const std::vector<Item>& items,
                                                         const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<char> verdicts(pairs.size(), 0);
  const auto workers = static_cast<std::size_t>(std::max(1, oracle.config().max_in_flight));
  parallel_for(pairs.size(), workers, [&](std::size_t k) {
    const auto& [i, j] = pairs[k];
    try {
      verdicts[k] = oracle.same_event(items[i].text, items[j].text) ? 1 : 0;
    } catch (const std::exception&) {
      std::throw_with_nested(
          CurationError("same_event failed for pair (" + items[i].ref.key() + ", " + items[j].ref.key() + ")"));
    }
  });
  UnionFind uf(items.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (verdicts[k]) uf.unite(pairs[k].first, pairs[k].second);
  }
  return uf.components();
}

std::vector<EventSet> to_sets(const std::vector<std::vector<std::size_t>>& components,
                              const std::vector<MemberRef>& refs, Method method) {
  std::vector<std::vector<MemberRef>> clusters;
  clusters.reserve(components.size());
  for (const auto& comp : components) {
    std::vector<MemberRef> members;
    members.reserve(comp.size());
    for (const auto i : comp) members.push_back(refs[i]);
    clusters.push_back(std::move(members));
  }
  return canonicalize(std::move(clusters), method);
}

std::vector<const Document*> sorted_docs(std::span<const Document> docs) {
  std::vector<const Document*> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(&d);
  std::sort(out.begin(), out.end(), [](const Document* a, const Document* b) { return a->id < b->id; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i - 1]->id == out[i]->id) throw InputError("duplicate document id " + out[i]->id);
  }
  return out;
}

// Doc-id pairs allowed by the prefilter, or nullopt when every pair is allowed.
std::optional<std::set<DocPair>> allowed_doc_pairs(std::span<const Document> docs, double prefilter) {
  if (prefilter <= 0.0) return std::nullopt;
  const auto model = build_tfidf(docs);
  const auto pairs = candidate_pairs(model, model.doc_ids(), prefilter);
  return std::set<DocPair>(pairs.begin(), pairs.end());
}

}  // namespace

std::string prompt_text(const Document& doc) { return collapse_whitespace(document_text(doc)); }

std::vector<EventSet> cluster_by_threshold(const SimilarityMatrix& matrix, double threshold, Method method) {
  std::vector<MemberRef> refs;
  refs.reserve(matrix.ids.size());
  for (const auto& id : matrix.ids) refs.push_back(MemberRef{id, std::nullopt});
  return to_sets(threshold_components(matrix.values, threshold), refs, method);
}

std::vector<EventSet> cluster_tfidf(const TfidfModel& model, std::span<const std::string> ids, double threshold) {
  SimilarityMatrix m;
  m.ids.assign(ids.begin(), ids.end());
  const auto n = static_cast<Eigen::Index>(ids.size());
  m.values = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      m.values(i, j) = m.values(j, i) =
          tfidf_similarity(model, ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
    }
  }
  return cluster_by_threshold(m, threshold, Method::tfidf);
}

SimilarityMatrix embed_matrix(Oracle& oracle, std::span<const Document> docs, EmbedStats* stats) {
  if (docs.empty()) throw InputError("embed_matrix: no documents");
  SimilarityMatrix m;
  std::vector<std::string> texts;
  for (const auto& d : docs) {
    m.ids.push_back(d.id);
    texts.push_back(prompt_text(d));
  }
  std::vector<Eigen::VectorXd> vecs;
  try {
    vecs = oracle.embed(texts);
  } catch (const std::exception&) {
    std::throw_with_nested(CurationError("embedding request failed for " + std::to_string(docs.size()) + " documents"));
  }
  const auto n = static_cast<Eigen::Index>(docs.size());
  m.values = Eigen::MatrixXd::Identity(n, n);
  std::size_t computed = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dot = vecs[static_cast<std::size_t>(i)].dot(vecs[static_cast<std::size_t>(j)]);
      m.values(i, j) = m.values(j, i) = std::clamp(dot, -1.0, 1.0);
      ++computed;
    }
  }
  if (stats) stats->pair_computations = computed;
  return m;
}

double grid_threshold(double min, double max, int steps, int i) {
  return min + (max - min) * static_cast<double>(i) / static_cast<double>(steps);
}

ThresholdSearch grid_search_threshold(const SimilarityMatrix& matrix, std::span<const EventSet> gold, double min,
                                      double max, int steps, const EvalOptions& options) {
  if (gold.empty()) throw InputError("grid_search_threshold: gold partition is empty");
  if (steps < 1) throw InputError("grid_search_threshold: steps must be at least 1");
  if (!(min < max)) throw InputError("grid_search_threshold: min must be below max");
  ThresholdSearch search;
  search.min = min;
  search.max = max;
  search.steps = steps;
  search.best_f1 = -1.0;
  for (int i = 1; i <= steps; ++i) {
    const double t = grid_threshold(min, max, steps, i);
    const auto sets = cluster_by_threshold(matrix, t, Method::embedding);
    const auto report = evaluate_partition(gold, sets, options);
    search.trace.push_back({t, report.mean_precision, report.mean_recall, report.mean_f1, sets.size()});
    if (report.mean_f1 > search.best_f1) {
      search.best_f1 = report.mean_f1;
      search.best_precision = report.mean_precision;
      search.best_recall = report.mean_recall;
      search.best_threshold = t;
    }
  }
  return search;
}

std::vector<DocPair> candidate_pairs(const TfidfModel& model, std::span<const std::string> ids, double prefilter) {
  if (prefilter < 0.0 || prefilter > 1.0) throw InputError("candidate_pairs: prefilter must be in [0, 1]");
  std::vector<std::string> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<DocPair> out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (prefilter == 0.0 || tfidf_similarity(model, sorted[i], sorted[j]) >= prefilter) {
        out.emplace_back(sorted[i], sorted[j]);
      }
    }
  }
  return out;
}

std::vector<EventSet> cluster_llm_cls(Oracle& oracle, std::span<const Document> docs,
                                      const LlmClusterOptions& options) {
  if (docs.empty()) throw InputError("cluster_llm_cls: no documents");
  const auto ordered = sorted_docs(docs);
  std::vector<Item> items;
  std::vector<MemberRef> refs;
  for (const auto* d : ordered) {
    items.push_back({MemberRef{d->id, std::nullopt}, prompt_text(*d)});
    refs.push_back(items.back().ref);
  }
  const auto allowed = allowed_doc_pairs(docs, options.prefilter);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      if (!allowed || allowed->contains({items[i].ref.doc, items[j].ref.doc})) pairs.emplace_back(i, j);
    }
  }
  return to_sets(classify_and_close(oracle, items, pairs), refs, Method::llm_cls);
}

SegmentedClustering cluster_llm_cls_seg(Oracle& oracle, std::span<const Document> docs,
                                        const LlmClusterOptions& options) {
  if (docs.empty()) throw InputError("cluster_llm_cls_seg: no documents");
  const auto ordered = sorted_docs(docs);
  std::vector<std::vector<std::string>> segments(ordered.size());
  const auto workers = static_cast<std::size_t>(std::max(1, oracle.config().max_in_flight));
  parallel_for(ordered.size(), workers, [&](std::size_t k) {
    try {
      segments[k] = oracle.segment(prompt_text(*ordered[k]));
    } catch (const std::exception&) {
      std::throw_with_nested(CurationError("segmentation failed for document " + ordered[k]->id));
    }
  });

  SegmentedClustering result;
  std::vector<Item> items;
  std::vector<MemberRef> refs;
  for (std::size_t k = 0; k < ordered.size(); ++k) {
    if (segments[k].empty()) continue;
    for (std::size_t s = 0; s < segments[k].size(); ++s) {
      items.push_back({MemberRef{ordered[k]->id, s}, collapse_whitespace(segments[k][s])});
      refs.push_back(items.back().ref);
    }
    result.segments.emplace(ordered[k]->id, std::move(segments[k]));
  }
  if (items.empty()) return result;

  const auto allowed = allowed_doc_pairs(docs, options.prefilter);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      const auto& a = items[i].ref.doc;
      const auto& b = items[j].ref.doc;
      if (!allowed || a == b || allowed->contains({std::min(a, b), std::max(a, b)})) pairs.emplace_back(i, j);
    }
  }
  result.sets = to_sets(classify_and_close(oracle, items, pairs), refs, Method::llm_cls_seg);
  return result;
}

}  // namespace evanno
