#include "evanno/relevance.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "evanno/error.hpp"

namespace evanno {

RelevanceModel train_relevance(std::span<const LabeledDocument> labeled,
                               const RelevanceTrainOptions& options) {
  if (labeled.empty()) throw InputError("train_relevance: no training documents");
  const bool has_pos = std::any_of(labeled.begin(), labeled.end(), [](const auto& p) { return p.second; });
  const bool has_neg = std::any_of(labeled.begin(), labeled.end(), [](const auto& p) { return !p.second; });
  if (!has_pos || !has_neg) throw InputError("train_relevance: training data must contain both classes");
  if (options.epochs < 1 || options.lambda <= 0.0 || options.eta0 <= 0.0) {
    throw InputError("train_relevance: epochs, lambda and eta0 must be positive");
  }

  std::vector<Document> docs;
  docs.reserve(labeled.size());
  for (const auto& [doc, label] : labeled) docs.push_back(doc);
  const auto tfidf = build_tfidf(docs);

  const auto n = labeled.size();
  std::vector<SparseVector> x;
  x.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    x.emplace_back(tfidf.rows().row(static_cast<Eigen::Index>(i)).transpose());
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(tfidf.features().dimension()));
  double b = 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // mt19937_64's output sequence is fixed by the standard; the shuffle is
  // written out so it does not depend on the library's distributions.
  std::mt19937_64 rng(options.seed);
  double t = 0.0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    for (const auto k : order) {
      const double eta = options.eta0 / (1.0 + options.lambda * options.eta0 * t);
      const double y = labeled[k].second ? 1.0 : -1.0;
      const double margin = y * (x[k].dot(w) + b);
      w *= 1.0 - eta * options.lambda;
      if (margin < 1.0) {
        for (SparseVector::InnerIterator it(x[k]); it; ++it) w(it.index()) += eta * y * it.value();
        b += eta * y;
      }
      t += 1.0;
    }
  }
  return RelevanceModel{tfidf.features(), std::move(w), b, options.threshold};
}

RelevanceScore score_relevance(const RelevanceModel& model, const Document& doc) {
  const auto v = model.features.vectorize(document_text(doc));
  const double score = v.dot(model.weights) + model.bias;
  return {score, score >= model.threshold};
}

nlohmann::json to_json(const RelevanceModel& model) {
  nlohmann::json j;
  j["terms"] = model.features.terms();
  j["idf"] = std::vector<double>(model.features.idf().data(),
                                 model.features.idf().data() + model.features.idf().size());
  j["n_docs"] = model.features.n_docs();
  j["weights"] = std::vector<double>(model.weights.data(), model.weights.data() + model.weights.size());
  j["bias"] = model.bias;
  j["threshold"] = model.threshold;
  return j;
}

RelevanceModel relevance_model_from_json(const nlohmann::json& j) {
  try {
    auto terms = j.at("terms").get<std::vector<std::string>>();
    const auto idf = j.at("idf").get<std::vector<double>>();
    const auto weights = j.at("weights").get<std::vector<double>>();
    if (weights.size() != terms.size()) throw InputError("relevance model: weight count mismatch");
    RelevanceModel m;
    m.features = FeatureSpace(std::move(terms), Eigen::Map<const Eigen::VectorXd>(idf.data(), static_cast<Eigen::Index>(idf.size())),
                              j.at("n_docs").get<std::size_t>());
    m.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    m.bias = j.at("bias").get<double>();
    m.threshold = j.at("threshold").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("relevance model: ") + e.what());
  }
}

}  // namespace evanno
