#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evanno/agreement.hpp"
#include "evanno/coding.hpp"
#include "evanno/corpus.hpp"
#include "evanno/event_set.hpp"
#include "evanno/oracle.hpp"
#include "evanno/relevance.hpp"
#include "evanno/schema.hpp"

namespace evanno {

struct ProjectConfig {
  std::string keywords_file = "keywords.txt";
  std::string schema_file;  // empty: built-in nine-variable schema

  double tfidf_threshold = 0.5;
  double embedding_threshold = 0.8;
  double grid_min = 0.5;
  double grid_max = 0.95;
  int grid_steps = 45;
  double prefilter = 0.0;
  Method lm_method = Method::llm_cls_seg;  // source of LM event sets for assignment

  ProviderConfig provider;
  CacheMode cache_mode = CacheMode::record;

  RelevanceTrainOptions relevance;

  ExtractionOptions extraction;

  Metric agreement_metric = Metric::nm;
  double token_f1_threshold = 0.6;
  double embedding_match_threshold = 0.85;

  std::uint64_t assignment_seed = 7;
  double lease_minutes = 30.0;
  std::vector<std::string> teams{"team-1"};
  double duplicate_fraction = 0.0;
  std::map<std::string, std::string> annotator_teams;  // annotator id -> team

  std::string checklist;  // inclusion criteria shown to annotators
};

ProjectConfig project_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProjectConfig& config);

// A project directory. Every artifact is a flat JSON or JSONL file:
//
//   config.json  keywords.txt  corpus.jsonl  triaged.jsonl  relevance.json
//   eventsets/<name>.json  eventsets/<name>.segments.json
//   extracted/<name>.json  workitems.json  annotations.jsonl  cache/
class Project {
 public:
  // Opens an existing project (reads config.json).
  explicit Project(std::filesystem::path root);

  // Creates root with a config copied from `config_template` (a JSON file)
  // and a keywords file, unless they already exist.
  static Project init(const std::filesystem::path& root, const std::filesystem::path& config_template,
                      const std::filesystem::path& keywords_template);

  const std::filesystem::path& root() const noexcept { return root_; }
  const ProjectConfig& config() const noexcept { return config_; }
  ProjectConfig& mutable_config() noexcept { return config_; }
  const VariableSchema& schema() const noexcept { return *schema_; }

  // Path of artifact (kind, name): kind is one of corpus, triaged, relevance,
  // eventsets, segments, extracted, workitems, annotations.
  std::filesystem::path artifact(std::string_view kind, std::string_view name = {}) const;
  std::filesystem::path cache_dir() const { return root_ / "cache"; }

  std::vector<Document> corpus() const;
  // triaged.jsonl when present, else corpus.jsonl.
  std::vector<Document> working_corpus() const;
  std::vector<std::string> keywords() const;

  std::vector<EventSet> event_sets(std::string_view name) const;
  std::map<std::string, std::vector<std::string>> segments(std::string_view name) const;
  // Segments of every saved segmented run, merged.
  std::map<std::string, std::vector<std::string>> all_segments() const;
  std::vector<ExtractedEvent> extracted(std::string_view name) const;
  // Extractions of every saved run, by event set id.
  std::map<std::string, ExtractedEvent> all_extracted() const;
  std::vector<AnnotationRecord> annotations() const;

  // Oracle over the project's replay cache. force_replay overrides the
  // configured cache mode.
  std::shared_ptr<Oracle> make_oracle(bool force_replay, std::shared_ptr<Transport> transport = nullptr) const;

 private:
  std::filesystem::path root_;
  ProjectConfig config_;
  std::shared_ptr<VariableSchema> schema_;
};

}  // namespace evanno
