#include "evanno/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "evanno/error.hpp"
#include "evanno/text.hpp"

namespace evanno {

namespace {

// Sorted (column, count) pairs for a token list.
std::vector<std::pair<Eigen::Index, double>> term_counts(const FeatureSpace& space,
                                                         const std::vector<std::string>& tokens) {
  std::map<Eigen::Index, double> counts;
  for (const auto& t : tokens) {
    if (const auto c = space.column(t); c >= 0) counts[c] += 1.0;
  }
  return {counts.begin(), counts.end()};
}

SparseVector weighted_unit_vector(const FeatureSpace& space,
                                  const std::vector<std::pair<Eigen::Index, double>>& counts) {
  SparseVector v(static_cast<Eigen::Index>(space.dimension()));
  double norm2 = 0.0;
  for (const auto& [col, tf] : counts) {
    const double w = tf * space.idf()(col);
    norm2 += w * w;
  }
  if (norm2 == 0.0) return v;
  const double inv = 1.0 / std::sqrt(norm2);
  v.reserve(static_cast<Eigen::Index>(counts.size()));
  for (const auto& [col, tf] : counts) v.insert(col) = tf * space.idf()(col) * inv;
  return v;
}

}  // namespace

double smoothed_idf(std::size_t n_docs, std::size_t df) {
  return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df))) + 1.0;
}

FeatureSpace::FeatureSpace(std::vector<std::string> terms, Eigen::VectorXd idf, std::size_t n_docs)
    : terms_(std::move(terms)), idf_(std::move(idf)), n_docs_(n_docs) {
  if (static_cast<Eigen::Index>(terms_.size()) != idf_.size()) {
    throw InputError("feature space: term and idf sizes differ");
  }
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    index_.emplace(terms_[i], static_cast<Eigen::Index>(i));
  }
}

Eigen::Index FeatureSpace::column(std::string_view term) const {
  const auto it = index_.find(std::string(term));
  return it == index_.end() ? -1 : it->second;
}

double FeatureSpace::idf(std::string_view term) const {
  const auto c = column(term);
  return c < 0 ? smoothed_idf(n_docs_, 0) : idf_(c);
}

SparseVector FeatureSpace::vectorize(std::string_view text) const {
  return weighted_unit_vector(*this, term_counts(*this, tokenize(text)));
}

IdfTable FeatureSpace::idf_table() const {
  std::map<std::string, double, std::less<>> weights;
  for (std::size_t i = 0; i < terms_.size(); ++i) weights.emplace(terms_[i], idf_(static_cast<Eigen::Index>(i)));
  return IdfTable(std::move(weights), smoothed_idf(n_docs_, 0));
}

TfidfModel::TfidfModel(FeatureSpace features, std::vector<std::string> doc_ids, SparseRowMatrix rows)
    : features_(std::move(features)), doc_ids_(std::move(doc_ids)), rows_(std::move(rows)) {
  if (static_cast<Eigen::Index>(doc_ids_.size()) != rows_.rows()) {
    throw InputError("tf-idf model: id count does not match row count");
  }
  for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
    if (!row_index_.emplace(doc_ids_[i], i).second) {
      throw InputError("tf-idf model: duplicate document id " + doc_ids_[i]);
    }
    if (rows_.row(static_cast<Eigen::Index>(i)).nonZeros() == 0) empty_.push_back(doc_ids_[i]);
  }
  df_.assign(features_.dimension(), 0);
  for (Eigen::Index r = 0; r < rows_.outerSize(); ++r) {
    for (SparseRowMatrix::InnerIterator it(rows_, r); it; ++it) ++df_[static_cast<std::size_t>(it.col())];
  }
}

bool TfidfModel::contains(std::string_view id) const {
  return row_index_.contains(std::string(id));
}

std::size_t TfidfModel::row_of(std::string_view id) const {
  const auto it = row_index_.find(std::string(id));
  if (it == row_index_.end()) throw InputError("unknown document id " + std::string(id));
  return it->second;
}

SparseVector TfidfModel::vector(std::string_view id) const {
  return rows_.row(static_cast<Eigen::Index>(row_of(id))).transpose();
}

std::size_t TfidfModel::document_frequency(std::string_view term) const {
  const auto c = features_.column(term);
  return c < 0 ? 0 : df_[static_cast<std::size_t>(c)];
}

std::string document_text(const Document& doc) {
  if (doc.title.empty()) return doc.body;
  return doc.title + "\n" + doc.body;
}

TfidfModel build_tfidf(std::span<const std::string> texts, std::span<const std::string> ids) {
  if (texts.empty()) throw InputError("build_tfidf: corpus is empty");
  if (!ids.empty() && ids.size() != texts.size()) {
    throw InputError("build_tfidf: id count does not match text count");
  }
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(texts.size());
  std::map<std::string, std::size_t> df;
  for (const auto& t : texts) {
    tokens.push_back(tokenize(t));
    const std::set<std::string> unique(tokens.back().begin(), tokens.back().end());
    for (const auto& term : unique) ++df[term];
  }
  if (df.empty()) throw InputError("build_tfidf: every document is empty after tokenization");

  const std::size_t n = texts.size();
  std::vector<std::string> terms;
  Eigen::VectorXd idf(static_cast<Eigen::Index>(df.size()));
  terms.reserve(df.size());
  for (const auto& [term, count] : df) {
    idf(static_cast<Eigen::Index>(terms.size())) = smoothed_idf(n, count);
    terms.push_back(term);
  }
  FeatureSpace space(std::move(terms), std::move(idf), n);

  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < n; ++r) {
    const auto v = weighted_unit_vector(space, term_counts(space, tokens[r]));
    for (SparseVector::InnerIterator it(v); it; ++it) {
      triplets.emplace_back(static_cast<Eigen::Index>(r), it.index(), it.value());
    }
  }
  SparseRowMatrix rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(space.dimension()));
  rows.setFromTriplets(triplets.begin(), triplets.end());
  rows.makeCompressed();

  std::vector<std::string> doc_ids;
  doc_ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) doc_ids.push_back(ids.empty() ? std::to_string(i) : ids[i]);
  return TfidfModel(std::move(space), std::move(doc_ids), std::move(rows));
}

TfidfModel build_tfidf(std::span<const Document> docs) {
  std::vector<std::string> texts;
  std::vector<std::string> ids;
  texts.reserve(docs.size());
  ids.reserve(docs.size());
  for (const auto& d : docs) {
    texts.push_back(document_text(d));
    ids.push_back(d.id);
  }
  return build_tfidf(texts, ids);
}

double tfidf_similarity(const TfidfModel& model, std::string_view i, std::string_view j) {
  const auto ri = static_cast<Eigen::Index>(model.row_of(i));
  const auto rj = static_cast<Eigen::Index>(model.row_of(j));
  const auto& rows = model.rows();
  if (rows.row(ri).nonZeros() == 0 || rows.row(rj).nonZeros() == 0) return 0.0;
  if (ri == rj) return 1.0;
  const double dot = rows.row(ri).dot(rows.row(rj));
  return std::clamp(dot, 0.0, 1.0);
}

Eigen::MatrixXd tfidf_similarity_matrix(const TfidfModel& model) {
  const auto n = static_cast<Eigen::Index>(model.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  const auto& ids = model.doc_ids();
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, i) = tfidf_similarity(model, ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      out(i, j) = out(j, i) =
          tfidf_similarity(model, ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

}  // namespace evanno
