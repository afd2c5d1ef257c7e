// Eigen (via project.hpp) must come before httplib; see http_transport.cpp.
#include "evanno/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>

#include "evanno/reports.hpp"
#include "evanno/seteval.hpp"
#include "evanno/tfidf.hpp"

namespace evanno {

namespace {

constexpr std::array<std::string_view, 4> kMethodOrder{"tfidf", "embedding", "llm_cls", "llm_cls_seg"};

ApiResponse error(int status, const std::string& message) { return {status, {{"error", message}}}; }

std::vector<std::string> saved_event_set_names(const Project& project) {
  std::vector<std::string> names;
  const auto dir = project.root() / "eventsets";
  if (!std::filesystem::exists(dir)) return names;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto file = e.path().filename().string();
    if (!file.ends_with(".json") || file.ends_with(".segments.json") || file.ends_with(".search.json")) continue;
    const auto name = file.substr(0, file.size() - 5);
    if (name != "gold") names.push_back(name);
  }
  auto rank = [](const std::string& n) {
    const auto it = std::find(kMethodOrder.begin(), kMethodOrder.end(), n);
    return static_cast<std::size_t>(it - kMethodOrder.begin());
  };
  std::sort(names.begin(), names.end(), [&](const auto& a, const auto& b) {
    return std::pair(rank(a), a) < std::pair(rank(b), b);
  });
  return names;
}

ReportOutput curation_report(const Project& project) {
  const auto gold_path = project.artifact("eventsets", "gold");
  if (!std::filesystem::exists(gold_path)) throw InputError("no gold event sets (eventsets/gold.json)");
  const auto gold = load_event_sets(gold_path);
  std::vector<std::pair<std::string, CurationReport>> rows;
  nlohmann::json data = nlohmann::json::object();
  for (const auto& name : saved_event_set_names(project)) {
    auto report = evaluate_partition(gold, project.event_sets(name));
    data[name] = to_json(report);
    rows.emplace_back(name, std::move(report));
  }
  if (rows.empty()) throw InputError("no curated event sets to evaluate");
  return {format_curation_table(rows), std::move(data)};
}

}  // namespace

std::vector<AnnotationRecord> automated_records(const Project& project) {
  std::vector<AnnotationRecord> out;
  const auto path = project.artifact("workitems");
  if (!std::filesystem::exists(path)) return out;
  const auto extracted = project.all_extracted();
  std::set<std::string> seen;
  for (const auto& item : load_workitems(path)) {
    if (!seen.insert(item.event_set).second) continue;
    const auto it = extracted.find(item.event_set);
    if (it == extracted.end()) continue;
    AnnotationRecord r;
    r.annotator = std::string(kAutomatedAnnotator);
    r.team = std::string(kAutomatedAnnotator);
    r.event_set = item.event_set;
    r.setting = Setting::automated;
    r.subset = item.subset;
    r.values = it->second.values;
    r.prepopulated.assign(r.values.size(), true);
    out.push_back(std::move(r));
  }
  return out;
}

ReportOutput project_report(const Project& project, std::string_view kind, const ReportOptions& options) {
  const auto& schema = project.schema();
  if (kind == "curation") return curation_report(project);
  if (kind == "agreement") {
    auto records = project.annotations();
    auto automated = automated_records(project);
    records.insert(records.end(), automated.begin(), automated.end());
    const auto& cfg = project.config();
    MetricConfig metric;
    metric.metric = options.metric.value_or(cfg.agreement_metric);
    metric.token_f1_threshold = cfg.token_f1_threshold;
    metric.embedding_threshold = cfg.embedding_match_threshold;
    std::shared_ptr<Oracle> oracle;
    if (metric.metric == Metric::token_f1) {
      const auto corpus = project.working_corpus();
      metric.idf = build_tfidf(corpus).features().idf_table();
    }
    if (metric.metric == Metric::embedding) {
      oracle = project.make_oracle(options.replay);
      metric.oracle = oracle.get();
    }
    const auto rows = agreement_breakdown(schema, records, metric);
    return {format_agreement_table(schema, rows), to_json(rows)};
  }
  if (kind == "selection") {
    std::vector<AnnotationRecord> hybrid;
    for (auto& r : project.annotations()) {
      if (r.setting == Setting::hybrid) hybrid.push_back(std::move(r));
    }
    std::vector<ExtractedEvent> extracted;
    for (auto& [_, e] : project.all_extracted()) extracted.push_back(std::move(e));
    const auto report = selection_frequency(schema, hybrid, extracted);
    return {format_selection_table(report), to_json(report)};
  }
  if (kind == "timing") {
    const auto summary = timing_summary(project.annotations());
    return {format_timing_table(summary), to_json(summary)};
  }
  throw InputError("unknown report \"" + std::string(kind) + "\" (curation, agreement, selection, timing)");
}

AnnotationService::AnnotationService(Project project, Clock clock)
    : project_(std::move(project)), clock_(std::move(clock)) {
  items_ = load_workitems(project_.artifact("workitems"));
  for (std::size_t i = 0; i < items_.size(); ++i) index_.emplace(items_[i].id, i);
  corpus_ = project_.working_corpus();
  segments_ = project_.all_segments();
  extracted_ = project_.all_extracted();
  for (const auto& r : project_.annotations()) {
    if (!r.item.empty()) done_.insert(r.item);
  }
}

const WorkItem* AnnotationService::find_item(const std::string& id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &items_[it->second];
}

bool AnnotationService::live(const Claim& c, Timestamp now) const {
  return seconds_between(c.since, now) < project_.config().lease_minutes * 60.0;
}

std::string AnnotationService::team_of(const std::string& annotator) const {
  const auto& m = project_.config().annotator_teams;
  const auto it = m.find(annotator);
  return it == m.end() ? std::string() : it->second;
}

ApiResponse AnnotationService::queue(const std::string& annotator, const std::string& team) const {
  if (annotator.empty()) return error(400, "missing X-Annotator header");
  const auto now = clock_();
  std::lock_guard lock(mutex_);
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : items_) {
    if (done_.contains(item.id)) continue;
    if (!team.empty() && !item.team.empty() && item.team != team) continue;
    const auto c = claims_.find(item.id);
    const bool mine = c != claims_.end() && live(c->second, now) && c->second.annotator == annotator;
    if (c != claims_.end() && live(c->second, now) && !mine) continue;
    items.push_back({{"id", item.id},
                     {"event_set", item.event_set},
                     {"setting", to_string(item.setting)},
                     {"subset", to_string(item.subset)},
                     {"team", item.team},
                     {"documents", item.members.size()},
                     {"claimed", mine}});
  }
  return {200, {{"annotator", annotator}, {"items", std::move(items)}}};
}

ApiResponse AnnotationService::claim(const std::string& annotator, const nlohmann::json& body) {
  if (annotator.empty()) return error(400, "missing X-Annotator header");
  if (!body.is_object() || !body.contains("item") || !body["item"].is_string()) {
    return error(400, "body must be {\"item\": id}");
  }
  const auto id = body["item"].get<std::string>();
  const auto* item = find_item(id);
  if (!item) return error(404, "unknown item " + id);
  const auto now = clock_();
  std::lock_guard lock(mutex_);
  if (done_.contains(id)) return error(409, "item " + id + " is already coded");
  const auto c = claims_.find(id);
  if (c != claims_.end() && live(c->second, now) && c->second.annotator != annotator) {
    return error(409, "item " + id + " is claimed by another annotator");
  }
  claims_[id] = Claim{annotator, now};
  const auto lease = std::chrono::milliseconds(static_cast<std::int64_t>(project_.config().lease_minutes * 60000.0));
  return {200, {{"item", id}, {"annotator", annotator}, {"claimed_at", format_iso8601(now)},
                {"expires_at", format_iso8601(now + lease)}}};
}

ApiResponse AnnotationService::item(const std::string& id) const {
  const auto* item = find_item(id);
  if (!item) return error(404, "unknown item " + id);
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : item->members) {
    const auto* doc = find_document(corpus_, m.doc);
    nlohmann::json j{{"ref", m.key()}, {"doc", m.doc}};
    if (doc) {
      j["title"] = doc->title;
      j["source"] = doc->source;
      if (doc->published_at) j["published_at"] = *doc->published_at;
    }
    if (m.segment) {
      j["segment"] = *m.segment;
      const auto s = segments_.find(m.doc);
      j["text"] = s != segments_.end() && *m.segment < s->second.size() ? s->second[*m.segment] : std::string();
    } else {
      j["text"] = doc ? doc->body : std::string();
    }
    members.push_back(std::move(j));
  }
  nlohmann::json out{{"id", item->id},
                     {"event_set", item->event_set},
                     {"setting", to_string(item->setting)},
                     {"subset", to_string(item->subset)},
                     {"team", item->team},
                     {"members", std::move(members)},
                     {"checklist", project_.config().checklist},
                     {"schema", to_json(project_.schema())}};
  if (item->setting == Setting::hybrid) {
    const auto e = extracted_.find(item->event_set);
    if (e != extracted_.end()) {
      const auto full = to_json(project_.schema(), e->second);
      out["extracted"] = {{"values", full["values"]}, {"conflicts", full["conflicts"]}, {"warnings", full["warnings"]}};
    }
  }
  {
    std::lock_guard lock(mutex_);
    out["done"] = done_.contains(item->id);
  }
  return {200, std::move(out)};
}

ApiResponse AnnotationService::submit(const std::string& annotator, const nlohmann::json& body) {
  if (annotator.empty()) return error(400, "missing X-Annotator header");
  if (!body.is_object() || !body.contains("item") || !body["item"].is_string()) {
    return error(400, "body must carry an \"item\" id");
  }
  const auto id = body["item"].get<std::string>();
  const auto* item = find_item(id);
  if (!item) return error(404, "unknown item " + id);

  const auto now = clock_();
  std::lock_guard lock(mutex_);
  if (done_.contains(id)) return error(409, "item " + id + " is already coded");
  const auto c = claims_.find(id);
  if (c == claims_.end() || !live(c->second, now) || c->second.annotator != annotator) {
    return error(409, "item " + id + " is not claimed by " + annotator);
  }

  AnnotationRecord record;
  try {
    nlohmann::json j = body;
    j["annotator"] = annotator;
    j["team"] = item->team;
    j["event_set"] = item->event_set;
    j["setting"] = to_string(item->setting);
    j["subset"] = to_string(item->subset);
    j.erase("received_at");
    if (!j.contains("values")) j["values"] = nlohmann::json::object();
    record = annotation_from_json(project_.schema(), j);
    record.received_at = now;
    validate_record(project_.schema(), record);
  } catch (const ValidationError& e) {
    return {422, {{"error", e.what()}, {"variable", e.variable()}, {"token", e.token()}}};
  } catch (const Error& e) {
    return error(422, e.what());
  }
  append_annotation(project_.schema(), project_.artifact("annotations"), record);
  done_.insert(id);
  claims_.erase(id);
  return {201, to_json(project_.schema(), record)};
}

ApiResponse AnnotationService::report(std::string_view kind, const ReportOptions& options) const {
  try {
    std::lock_guard lock(mutex_);
    auto out = project_report(project_, kind, options);
    return {200, {{"kind", kind}, {"table", out.table}, {"data", out.data}}};
  } catch (const InputError& e) {
    return error(404, e.what());
  }
}

struct HttpFrontend::Impl {
  httplib::Server server;
};

HttpFrontend::HttpFrontend(AnnotationService& service, std::string static_dir) : impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto annotator = [](const httplib::Request& req) { return req.get_header_value("X-Annotator"); };
  auto team = [&service](const httplib::Request& req) {
    const auto t = req.get_header_value("X-Team");
    return t.empty() ? service.team_of(req.get_header_value("X-Annotator")) : t;
  };
  auto parse = [](const httplib::Request& req) { return nlohmann::json::parse(req.body, nullptr, false); };

  srv.Get("/api/queue", [&service, reply, annotator, team](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.queue(annotator(req), team(req)));
  });
  srv.Post("/api/claim", [&service, reply, annotator, parse](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse(req);
    if (body.is_discarded()) return reply(res, error(400, "body is not JSON"));
    reply(res, service.claim(annotator(req), body));
  });
  srv.Get(R"(/api/items/([^/]+))", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.item(req.matches[1].str()));
  });
  srv.Post("/api/annotations", [&service, reply, annotator, parse](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse(req);
    if (body.is_discarded()) return reply(res, error(400, "body is not JSON"));
    reply(res, service.submit(annotator(req), body));
  });
  srv.Get(R"(/api/reports/([a-z_]+))", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    ReportOptions options;
    if (req.has_param("metric")) {
      try {
        options.metric = metric_from_string(req.get_param_value("metric"));
      } catch (const InputError& e) {
        return reply(res, error(400, e.what()));
      }
    }
    reply(res, service.report(req.matches[1].str(), options));
  });
  srv.set_exception_handler([reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      reply(res, error(500, e.what()));
    }
  });
  if (!static_dir.empty() && !srv.set_mount_point("/", static_dir)) {
    throw InputError("static directory not found: " + static_dir);
  }
}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpFrontend::listen() { impl_->server.listen_after_bind(); }

void HttpFrontend::start() {
  thread_ = std::thread([this] { listen(); });
  impl_->server.wait_until_ready();
}

void HttpFrontend::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace evanno
