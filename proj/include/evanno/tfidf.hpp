#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "evanno/corpus.hpp"

namespace evanno {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseVector = Eigen::SparseVector<double>;

// Term weights for idf-weighted token metrics. Terms missing from the table get
// `fallback`.
class IdfTable {
 public:
  IdfTable() = default;
  IdfTable(std::map<std::string, double, std::less<>> weights, double fallback)
      : weights_(std::move(weights)), fallback_(fallback) {}

  double operator()(std::string_view term) const {
    const auto it = weights_.find(term);
    return it == weights_.end() ? fallback_ : it->second;
  }

  double fallback() const noexcept { return fallback_; }

 private:
  std::map<std::string, double, std::less<>> weights_;
  double fallback_ = 1.0;
};

// Smoothed inverse document frequency: ln((1 + n_docs) / (1 + df)) + 1.
double smoothed_idf(std::size_t n_docs, std::size_t df);

// Vocabulary and idf of a fitted corpus. Columns follow lexicographic term
// order so the model does not depend on document order.
class FeatureSpace {
 public:
  FeatureSpace() = default;
  FeatureSpace(std::vector<std::string> terms, Eigen::VectorXd idf, std::size_t n_docs);

  std::size_t dimension() const noexcept { return terms_.size(); }
  std::size_t n_docs() const noexcept { return n_docs_; }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const Eigen::VectorXd& idf() const noexcept { return idf_; }

  // Column of `term`, or -1 when out of vocabulary.
  Eigen::Index column(std::string_view term) const;
  double idf(std::string_view term) const;

  // L2-normalized tf-idf vector of `text`; out-of-vocabulary terms are
  // dropped. Returns the zero vector for texts with no known terms.
  SparseVector vectorize(std::string_view text) const;

  IdfTable idf_table() const;

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, Eigen::Index> index_;
  Eigen::VectorXd idf_;
  std::size_t n_docs_ = 0;
};

// Tf-idf representation of a corpus: raw term counts times smoothed idf, each
// row L2-normalized. Immutable once built.
class TfidfModel {
 public:
  TfidfModel(FeatureSpace features, std::vector<std::string> doc_ids, SparseRowMatrix rows);

  const FeatureSpace& features() const noexcept { return features_; }
  const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
  const SparseRowMatrix& rows() const noexcept { return rows_; }

  std::size_t size() const noexcept { return doc_ids_.size(); }
  bool contains(std::string_view id) const;
  std::size_t row_of(std::string_view id) const;  // throws InputError on unknown id

  SparseVector vector(std::string_view id) const;
  std::size_t document_frequency(std::string_view term) const;

  // Ids of documents whose vector is empty (no terms after tokenization).
  const std::vector<std::string>& empty_documents() const noexcept { return empty_; }

 private:
  FeatureSpace features_;
  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, std::size_t> row_index_;
  SparseRowMatrix rows_;
  std::vector<std::size_t> df_;
  std::vector<std::string> empty_;
};

// Fits a model over title + body of `docs`. Throws when every document is
// empty after tokenization.
TfidfModel build_tfidf(std::span<const Document> docs);

// Fits over raw texts; ids are the positions as decimal strings unless given.
TfidfModel build_tfidf(std::span<const std::string> texts, std::span<const std::string> ids = {});

// Cosine of the two document vectors, clamped to [0, 1]. Zero for empty
// documents, exactly 1 for i == j when the document is nonempty.
double tfidf_similarity(const TfidfModel& model, std::string_view i, std::string_view j);

// All pairwise similarities, rows and columns in model.doc_ids() order.
Eigen::MatrixXd tfidf_similarity_matrix(const TfidfModel& model);

// Text fed to the vectorizer for a document.
std::string document_text(const Document& doc);

}  // namespace evanno
