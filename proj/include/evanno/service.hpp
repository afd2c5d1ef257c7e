#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "evanno/project.hpp"
#include "evanno/timeutil.hpp"
#include "evanno/workitems.hpp"

namespace evanno {

struct ReportOutput {
  std::string table;
  nlohmann::json data;
};

struct ReportOptions {
  std::optional<Metric> metric;  // agreement only; default from config
  bool replay = true;            // oracle mode for the embedding metric
};

// kind: curation | agreement | selection | timing. Throws InputError when
// the artifacts the report needs are missing.
ReportOutput project_report(const Project& project, std::string_view kind, const ReportOptions& options = {});

// Automated-setting records built from the saved extractions, one per event
// set that has a work item (subset taken from the item).
std::vector<AnnotationRecord> automated_records(const Project& project);

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Work-queue logic behind the HTTP API, independent of the transport.
// Claims live in memory; completion is derived from the annotation log.
class AnnotationService {
 public:
  using Clock = std::function<Timestamp()>;

  explicit AnnotationService(Project project, Clock clock = now_utc);

  // Open items for the annotator: not done and not held by someone else's
  // live claim. An empty team means every team.
  ApiResponse queue(const std::string& annotator, const std::string& team) const;
  // body {"item": id}. 409 when done or claimed by another annotator.
  ApiResponse claim(const std::string& annotator, const nlohmann::json& body);
  // Members, checklist and schema; extracted values only for hybrid items.
  ApiResponse item(const std::string& id) const;
  // body {item, values, prepopulated, started_at, ended_at}. 409 unless the
  // annotator holds a live claim; 422 on invalid values or timing.
  ApiResponse submit(const std::string& annotator, const nlohmann::json& body);
  ApiResponse report(std::string_view kind, const ReportOptions& options = {}) const;

  // Team for an annotator from config, or empty.
  std::string team_of(const std::string& annotator) const;

  const Project& project() const noexcept { return project_; }

 private:
  struct Claim {
    std::string annotator;
    Timestamp since;
  };

  const WorkItem* find_item(const std::string& id) const;
  bool live(const Claim& c, Timestamp now) const;

  Project project_;
  Clock clock_;
  std::vector<WorkItem> items_;
  std::map<std::string, std::size_t> index_;
  std::vector<Document> corpus_;
  std::map<std::string, std::vector<std::string>> segments_;
  std::map<std::string, ExtractedEvent> extracted_;

  mutable std::mutex mutex_;  // guards claims_, done_ and the annotation log
  std::map<std::string, Claim> claims_;
  std::set<std::string> done_;
};

// cpp-httplib front end for AnnotationService:
//   GET /api/queue, POST /api/claim, GET /api/items/{id},
//   POST /api/annotations, GET /api/reports/{kind}
// The annotator is named by the X-Annotator header; X-Team overrides the
// configured team.
class HttpFrontend {
 public:
  explicit HttpFrontend(AnnotationService& service, std::string static_dir = {});
  ~HttpFrontend();

  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  // Binds host:port (port 0 picks a free one) and returns the bound port.
  // Throws Error when binding fails.
  int bind(const std::string& host, int port);
  // Serves until stop(); call after bind.
  void listen();
  // listen() on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace evanno
