#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "evanno/corpus.hpp"
#include "evanno/tfidf.hpp"

namespace evanno {

// Linear triage classifier over tf-idf features: score = w.x + b, and a
// document is flagged relevant when score >= threshold.
struct RelevanceModel {
  FeatureSpace features;
  Eigen::VectorXd weights;
  double bias = 0.0;
  double threshold = 0.0;
};

struct RelevanceTrainOptions {
  double lambda = 1e-4;  // L2 regularization strength
  int epochs = 50;
  double eta0 = 0.5;     // initial step size
  std::uint64_t seed = 1;
  double threshold = 0.0;
};

using LabeledDocument = std::pair<Document, bool>;

// Hinge-loss stochastic subgradient descent with step eta0 / (1 + lambda*eta0*t)
// and seed-controlled per-epoch shuffling. Bit-reproducible for a fixed seed.
RelevanceModel train_relevance(std::span<const LabeledDocument> labeled,
                               const RelevanceTrainOptions& options = {});

struct RelevanceScore {
  double score;
  bool relevant;
};

RelevanceScore score_relevance(const RelevanceModel& model, const Document& doc);

nlohmann::json to_json(const RelevanceModel& model);
RelevanceModel relevance_model_from_json(const nlohmann::json& j);

}  // namespace evanno
