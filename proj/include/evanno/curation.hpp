#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "evanno/corpus.hpp"
#include "evanno/event_set.hpp"
#include "evanno/oracle.hpp"
#include "evanno/seteval.hpp"
#include "evanno/tfidf.hpp"
#include "evanno/union_find.hpp"

namespace evanno {

// Pairwise similarities between documents. Symmetric with unit diagonal.
template <typename Scalar>
struct BasicSimilarityMatrix {
  std::vector<std::string> ids;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> values;
};

using SimilarityMatrix = BasicSimilarityMatrix<double>;

// Connected components of the graph linking i and j when sim(i, j) >= threshold.
template <typename Derived>
std::vector<std::vector<std::size_t>> threshold_components(const Eigen::MatrixBase<Derived>& sim,
                                                           typename Derived::Scalar threshold) {
  const auto n = static_cast<std::size_t>(sim.rows());
  UnionFind uf(n);
  for (Eigen::Index i = 0; i < sim.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < sim.cols(); ++j) {
      if (sim(i, j) >= threshold) uf.unite(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  return uf.components();
}

// Single-line title + body as sent to the oracle.
std::string prompt_text(const Document& doc);

// Threshold-link + transitive-closure clustering of a similarity matrix.
std::vector<EventSet> cluster_by_threshold(const SimilarityMatrix& matrix, double threshold, Method method);

// Tf-idf baseline: link documents with cosine >= threshold, take components.
std::vector<EventSet> cluster_tfidf(const TfidfModel& model, std::span<const std::string> ids, double threshold);

struct EmbedStats {
  std::size_t pair_computations = 0;
};

// Cosine similarities of oracle embeddings (one batch call for all docs).
SimilarityMatrix embed_matrix(Oracle& oracle, std::span<const Document> docs, EmbedStats* stats = nullptr);

struct ThresholdPoint {
  double threshold = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t n_sets = 0;
};

struct ThresholdSearch {
  double min = 0;
  double max = 0;
  int steps = 0;
  double best_threshold = 0;
  double best_precision = 0;
  double best_recall = 0;
  double best_f1 = 0;
  std::vector<ThresholdPoint> trace;  // one point per evaluated threshold
};

// i-th grid threshold, i in 1..steps: min + (max - min) * i / steps.
double grid_threshold(double min, double max, int steps, int i);

// Evaluates every grid threshold against gold with evaluate_partition and
// keeps the best F1; ties go to the lowest threshold.
ThresholdSearch grid_search_threshold(const SimilarityMatrix& matrix, std::span<const EventSet> gold, double min,
                                      double max, int steps, const EvalOptions& options = {});

using DocPair = std::pair<std::string, std::string>;

// Unordered document pairs (smaller id first, sorted) whose tf-idf cosine is
// at least `prefilter`. prefilter == 0 yields every pair.
std::vector<DocPair> candidate_pairs(const TfidfModel& model, std::span<const std::string> ids, double prefilter);

struct LlmClusterOptions {
  // Tf-idf cosine a pair must reach before the oracle is asked; 0 asks all.
  double prefilter = 0.0;
};

// Pairwise same-event classification of whole documents, then transitive
// closure. Pairs are queried concurrently (bounded by the oracle) and merged
// in sorted pair order.
std::vector<EventSet> cluster_llm_cls(Oracle& oracle, std::span<const Document> docs,
                                      const LlmClusterOptions& options = {});

struct SegmentedClustering {
  std::vector<EventSet> sets;
  // Segment texts by document id, in segmentation order.
  std::map<std::string, std::vector<std::string>> segments;
};

// Segments each document, drops documents with no segments, classifies
// segment pairs and clusters segments. Members are (doc, segment) refs, so a
// multi-incident document can appear in several sets.
SegmentedClustering cluster_llm_cls_seg(Oracle& oracle, std::span<const Document> docs,
                                        const LlmClusterOptions& options = {});

// Raised when an oracle call fails inside a clustering run; the original
// exception is nested.
class CurationError : public Error {
 public:
  using Error::Error;
};

}  // namespace evanno
