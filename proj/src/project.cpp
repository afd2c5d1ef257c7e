#include "evanno/project.hpp"

#include <algorithm>

#include "evanno/io.hpp"
#include "evanno/stub_backend.hpp"

namespace evanno {

namespace {

const nlohmann::json& section(const nlohmann::json& j, const char* name) {
  static const nlohmann::json empty = nlohmann::json::object();
  return j.contains(name) && j[name].is_object() ? j[name] : empty;
}

}  // namespace

ProjectConfig project_config_from_json(const nlohmann::json& j) {
  try {
    ProjectConfig c;
    c.keywords_file = j.value("keywords_file", c.keywords_file);
    c.schema_file = j.value("schema_file", c.schema_file);

    const auto& cur = section(j, "curation");
    c.tfidf_threshold = cur.value("tfidf_threshold", c.tfidf_threshold);
    c.embedding_threshold = cur.value("embedding_threshold", c.embedding_threshold);
    c.prefilter = cur.value("prefilter", c.prefilter);
    c.lm_method = method_from_string(cur.value("lm_method", std::string(to_string(c.lm_method))));
    const auto& grid = section(cur, "grid");
    c.grid_min = grid.value("min", c.grid_min);
    c.grid_max = grid.value("max", c.grid_max);
    c.grid_steps = grid.value("steps", c.grid_steps);

    if (j.contains("provider")) c.provider = provider_config_from_json(j["provider"]);
    c.cache_mode = cache_mode_from_string(j.value("cache_mode", std::string(to_string(c.cache_mode))));

    const auto& rel = section(j, "relevance");
    c.relevance.lambda = rel.value("lambda", c.relevance.lambda);
    c.relevance.epochs = rel.value("epochs", c.relevance.epochs);
    c.relevance.eta0 = rel.value("eta0", c.relevance.eta0);
    c.relevance.seed = rel.value("seed", c.relevance.seed);
    c.relevance.threshold = rel.value("threshold", c.relevance.threshold);

    const auto& ext = section(j, "extraction");
    c.extraction.prompt_template = ext.value("prompt", c.extraction.prompt_template);
    c.extraction.per_document = ext.value("per_document", c.extraction.per_document);

    const auto& met = section(j, "metrics");
    c.agreement_metric = metric_from_string(met.value("agreement", std::string(to_string(c.agreement_metric))));
    c.token_f1_threshold = met.value("token_f1_threshold", c.token_f1_threshold);
    c.embedding_match_threshold = met.value("embedding_threshold", c.embedding_match_threshold);

    const auto& wi = section(j, "workitems");
    c.assignment_seed = wi.value("seed", c.assignment_seed);
    c.lease_minutes = wi.value("lease_minutes", c.lease_minutes);
    c.teams = wi.value("teams", c.teams);
    c.duplicate_fraction = wi.value("duplicate_fraction", c.duplicate_fraction);
    c.annotator_teams = wi.value("annotators", c.annotator_teams);
    c.checklist = j.value("checklist", c.checklist);

    if (c.teams.empty()) throw InputError("config: workitems.teams must not be empty");
    if (c.duplicate_fraction < 0 || c.duplicate_fraction > 1) {
      throw InputError("config: workitems.duplicate_fraction must be in [0, 1]");
    }
    if (c.lease_minutes <= 0) throw InputError("config: workitems.lease_minutes must be positive");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

nlohmann::json to_json(const ProjectConfig& c) {
  return {
      {"keywords_file", c.keywords_file},
      {"schema_file", c.schema_file},
      {"curation",
       {{"tfidf_threshold", c.tfidf_threshold},
        {"embedding_threshold", c.embedding_threshold},
        {"prefilter", c.prefilter},
        {"lm_method", to_string(c.lm_method)},
        {"grid", {{"min", c.grid_min}, {"max", c.grid_max}, {"steps", c.grid_steps}}}}},
      {"provider", to_json(c.provider)},
      {"cache_mode", to_string(c.cache_mode)},
      {"relevance",
       {{"lambda", c.relevance.lambda},
        {"epochs", c.relevance.epochs},
        {"eta0", c.relevance.eta0},
        {"seed", c.relevance.seed},
        {"threshold", c.relevance.threshold}}},
      {"extraction", {{"prompt", c.extraction.prompt_template}, {"per_document", c.extraction.per_document}}},
      {"metrics",
       {{"agreement", to_string(c.agreement_metric)},
        {"token_f1_threshold", c.token_f1_threshold},
        {"embedding_threshold", c.embedding_match_threshold}}},
      {"workitems",
       {{"seed", c.assignment_seed},
        {"lease_minutes", c.lease_minutes},
        {"teams", c.teams},
        {"duplicate_fraction", c.duplicate_fraction},
        {"annotators", c.annotator_teams}}},
      {"checklist", c.checklist},
  };
}

Project::Project(std::filesystem::path root) : root_(std::move(root)) {
  const auto config_path = root_ / "config.json";
  if (!std::filesystem::exists(config_path)) {
    throw InputError("not a project directory (no config.json): " + root_.string());
  }
  config_ = project_config_from_json(read_json_file(config_path));
  schema_ = std::make_shared<VariableSchema>(config_.schema_file.empty()
                                                 ? VariableSchema::standard()
                                                 : schema_from_json(read_json_file(root_ / config_.schema_file)));
}

Project Project::init(const std::filesystem::path& root, const std::filesystem::path& config_template,
                      const std::filesystem::path& keywords_template) {
  std::filesystem::create_directories(root);
  const auto config_path = root / "config.json";
  if (!std::filesystem::exists(config_path)) {
    // Round-trip through the parser so a bad template fails here.
    write_json_file(config_path, to_json(project_config_from_json(read_json_file(config_template))));
  }
  const auto config = project_config_from_json(read_json_file(config_path));
  const auto keywords = root / config.keywords_file;
  if (!std::filesystem::exists(keywords) && std::filesystem::exists(keywords_template)) {
    atomic_write_text(keywords, read_text_file(keywords_template));
  }
  return Project(root);
}

std::filesystem::path Project::artifact(std::string_view kind, std::string_view name) const {
  const std::string n(name);
  if (kind == "corpus") return root_ / "corpus.jsonl";
  if (kind == "triaged") return root_ / "triaged.jsonl";
  if (kind == "relevance") return root_ / "relevance.json";
  if (kind == "workitems") return root_ / "workitems.json";
  if (kind == "annotations") return root_ / "annotations.jsonl";
  if (n.empty() || n.find('/') != std::string::npos || n.starts_with(".")) {
    throw InputError("bad artifact name \"" + n + "\"");
  }
  if (kind == "eventsets") return root_ / "eventsets" / (n + ".json");
  if (kind == "segments") return root_ / "eventsets" / (n + ".segments.json");
  if (kind == "extracted") return root_ / "extracted" / (n + ".json");
  throw InputError("unknown artifact kind \"" + std::string(kind) + "\"");
}

std::vector<Document> Project::corpus() const { return ingest_jsonl(artifact("corpus")); }

std::vector<Document> Project::working_corpus() const {
  const auto triaged = artifact("triaged");
  return std::filesystem::exists(triaged) ? ingest_jsonl(triaged) : corpus();
}

std::vector<std::string> Project::keywords() const { return load_keywords(root_ / config_.keywords_file); }

std::vector<EventSet> Project::event_sets(std::string_view name) const {
  return load_event_sets(artifact("eventsets", name));
}

std::map<std::string, std::vector<std::string>> Project::segments(std::string_view name) const {
  const auto path = artifact("segments", name);
  if (!std::filesystem::exists(path)) return {};
  return read_json_file(path).get<std::map<std::string, std::vector<std::string>>>();
}

std::map<std::string, std::vector<std::string>> Project::all_segments() const {
  std::map<std::string, std::vector<std::string>> out;
  const auto dir = root_ / "eventsets";
  if (!std::filesystem::exists(dir)) return out;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().filename().string().ends_with(".segments.json")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    for (auto& [doc, segs] : read_json_file(f).get<std::map<std::string, std::vector<std::string>>>()) {
      const auto [it, inserted] = out.emplace(doc, segs);
      if (!inserted && it->second != segs) {
        throw InputError("segment files disagree on document " + doc + "; re-run curation");
      }
    }
  }
  return out;
}

std::vector<ExtractedEvent> Project::extracted(std::string_view name) const {
  return load_extracted(*schema_, artifact("extracted", name));
}

std::map<std::string, ExtractedEvent> Project::all_extracted() const {
  std::map<std::string, ExtractedEvent> out;
  const auto dir = root_ / "extracted";
  if (!std::filesystem::exists(dir)) return out;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    for (auto& e : load_extracted(*schema_, f)) out.emplace(e.event_id, std::move(e));
  }
  return out;
}

std::vector<AnnotationRecord> Project::annotations() const {
  return load_annotations(*schema_, artifact("annotations"));
}

std::shared_ptr<Oracle> Project::make_oracle(bool force_replay, std::shared_ptr<Transport> transport) const {
  const auto mode = force_replay ? CacheMode::replay : config_.cache_mode;
  auto cache = std::make_shared<ReplayCache>(cache_dir(), mode);
  if (!transport && mode != CacheMode::replay) {
    // "stub:" selects the offline fixture backend (demos and tests).
    transport = config_.provider.base_url.starts_with("stub:") ? std::make_shared<StubTransport>()
                                                                : make_http_transport(config_.provider);
  }
  return std::make_shared<Oracle>(config_.provider, std::move(transport), std::move(cache));
}

}  // namespace evanno
