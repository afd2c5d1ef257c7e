#include "evanno/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "evanno/curation.hpp"
#include "evanno/io.hpp"
#include "evanno/project.hpp"
#include "evanno/relevance.hpp"
#include "evanno/service.hpp"
#include "evanno/seteval.hpp"
#include "evanno/table.hpp"
#include "evanno/text.hpp"
#include "evanno/workitems.hpp"

namespace evanno {

namespace {

namespace fs = std::filesystem;

void print_exception(std::ostream& err, const std::exception& e, int depth = 0) {
  err << (depth == 0 ? "error: " : std::string(static_cast<std::size_t>(depth) * 2, ' ') + "caused by: ") << e.what()
      << "\n";
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    print_exception(err, inner, depth + 1);
  }
}

struct Globals {
  std::string project = ".";
  bool replay = false;
};

std::vector<EventSet> load_sets_arg(const Project& project, const std::string& arg) {
  if (fs::exists(arg)) return load_event_sets(arg);
  return project.event_sets(arg);
}

bool has_segments(std::span<const EventSet> sets) {
  return std::any_of(sets.begin(), sets.end(), [](const EventSet& s) {
    return std::any_of(s.members.begin(), s.members.end(), [](const MemberRef& m) { return m.segment.has_value(); });
  });
}

void report_oracle(std::ostream& out, const Oracle& oracle) {
  out << "oracle: " << oracle.network_calls() << " network calls, " << oracle.cache_hits() << " cache hits\n";
}

std::shared_ptr<Oracle> oracle_for(const Project& project, const Globals& g, const CliHooks& hooks) {
  return project.make_oracle(g.replay, g.replay ? nullptr : hooks.transport);
}

std::string rel(const Project& project, const fs::path& p) { return fs::relative(p, project.root()).string(); }

int cmd_init(const Globals& g, const std::string& config, std::ostream& out) {
  const fs::path dir = EVANNO_DEFAULT_CONFIG_DIR;
  const fs::path tmpl = config.empty() ? dir / "default_config.json" : fs::path(config);
  const auto project = Project::init(g.project, tmpl, dir / "keywords.txt");
  out << "initialized project at " << project.root().string() << "\n";
  return 0;
}

int cmd_ingest(const Globals& g, const std::vector<std::string>& files, const std::string& gold, std::ostream& out) {
  const Project project(g.project);
  if (!files.empty()) {
    std::vector<Document> all;
    std::set<std::string> ids;
    for (const auto& f : files) {
      for (auto& d : ingest_jsonl(f)) {
        if (!ids.insert(d.id).second) throw InputError(f + ": duplicate id " + d.id + " across inputs");
        all.push_back(std::move(d));
      }
    }
    const auto unique = dedupe_exact(all);
    write_jsonl(project.artifact("corpus"), unique);
    out << "ingested " << all.size() << " documents, " << unique.size() << " after exact de-duplication -> "
        << rel(project, project.artifact("corpus")) << "\n";
  }
  if (!gold.empty()) {
    const auto sets = load_event_sets(gold);
    const auto corpus = project.corpus();
    for (const auto& s : sets) {
      validate_event_set(s);
      for (const auto& m : s.members) {
        if (!find_document(corpus, m.doc)) throw InputError("gold set " + s.id + " names unknown document " + m.doc);
      }
    }
    fs::create_directories(project.root() / "eventsets");
    save_event_sets(project.artifact("eventsets", "gold"), sets);
    out << "stored " << sets.size() << " gold event sets -> " << rel(project, project.artifact("eventsets", "gold"))
        << "\n";
  }
  if (files.empty() && gold.empty()) throw InputError("ingest: give corpus files and/or --gold");
  return 0;
}

int cmd_triage(const Globals& g, const std::string& train, bool no_keywords, bool no_model, std::ostream& out) {
  const Project project(g.project);
  const auto docs = project.corpus();
  auto kept = no_keywords ? docs : keyword_filter(docs, project.keywords());
  out << docs.size() << " documents, " << kept.size() << " after keyword filter\n";
  if (!train.empty()) {
    std::vector<LabeledDocument> labeled;
    std::ifstream in(train);
    if (!in) throw InputError("cannot open " + train);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (trim(line).empty()) continue;
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("relevant") || !j["relevant"].is_boolean()) {
        throw InputError(train + " line " + std::to_string(n) + ": need a JSON object with boolean \"relevant\"");
      }
      labeled.emplace_back(document_from_json(j, n), j["relevant"].get<bool>());
    }
    const auto model = train_relevance(labeled, project.config().relevance);
    write_json_file(project.artifact("relevance"), to_json(model));
    out << "trained relevance model on " << labeled.size() << " labeled documents -> "
        << rel(project, project.artifact("relevance")) << "\n";
  }
  if (!no_model && fs::exists(project.artifact("relevance"))) {
    const auto model = relevance_model_from_json(read_json_file(project.artifact("relevance")));
    std::erase_if(kept, [&](const Document& d) { return !score_relevance(model, d).relevant; });
    out << kept.size() << " after relevance classifier\n";
  }
  write_jsonl(project.artifact("triaged"), kept);
  out << "wrote " << rel(project, project.artifact("triaged")) << "\n";
  return 0;
}

int cmd_curate(const Globals& g, const CliHooks& hooks, const std::string& method_name, std::optional<double> threshold,
               bool search, std::optional<double> prefilter, std::ostream& out) {
  const Project project(g.project);
  const auto& cfg = project.config();
  const auto method = method_from_string(method_name);
  const auto docs = project.working_corpus();
  if (docs.empty()) throw InputError("curate: corpus is empty");
  fs::create_directories(project.root() / "eventsets");
  const std::string name(to_string(method));
  std::vector<EventSet> sets;
  std::shared_ptr<Oracle> oracle;
  LlmClusterOptions llm{prefilter.value_or(cfg.prefilter)};
  switch (method) {
    case Method::tfidf: {
      const auto model = build_tfidf(docs);
      sets = cluster_tfidf(model, model.doc_ids(), threshold.value_or(cfg.tfidf_threshold));
      break;
    }
    case Method::embedding: {
      oracle = oracle_for(project, g, hooks);
      const auto matrix = embed_matrix(*oracle, docs);
      double t = threshold.value_or(cfg.embedding_threshold);
      if (search) {
        const auto gold = project.event_sets("gold");
        const auto result = grid_search_threshold(matrix, gold, cfg.grid_min, cfg.grid_max, cfg.grid_steps);
        nlohmann::json trace = nlohmann::json::array();
        for (const auto& p : result.trace) {
          trace.push_back({{"threshold", p.threshold}, {"precision", p.precision}, {"recall", p.recall},
                           {"f1", p.f1}, {"sets", p.n_sets}});
        }
        write_json_file(project.root() / "eventsets" / "embedding.search.json",
                        {{"min", result.min}, {"max", result.max}, {"steps", result.steps},
                         {"best_threshold", result.best_threshold}, {"best_f1", result.best_f1}, {"trace", trace}});
        t = result.best_threshold;
        out << "grid search: best threshold " << format_fixed(t, 4) << " (F1 " << format_fixed(result.best_f1, 4)
            << ")\n";
      }
      sets = cluster_by_threshold(matrix, t, Method::embedding);
      break;
    }
    case Method::llm_cls:
      oracle = oracle_for(project, g, hooks);
      sets = cluster_llm_cls(*oracle, docs, llm);
      break;
    case Method::llm_cls_seg: {
      oracle = oracle_for(project, g, hooks);
      auto result = cluster_llm_cls_seg(*oracle, docs, llm);
      write_json_file(project.artifact("segments", name), result.segments);
      sets = std::move(result.sets);
      break;
    }
    case Method::gold:
      throw InputError("curate: gold sets are imported with `ingest --gold`");
  }
  save_event_sets(project.artifact("eventsets", name), sets);
  out << "wrote " << rel(project, project.artifact("eventsets", name)) << " (" << sets.size() << " event sets)\n";
  if (oracle) report_oracle(out, *oracle);
  return 0;
}

int cmd_eval(const Globals& g, const std::string& gold_arg, const std::string& pred_arg, const std::string& granularity,
             bool matched_pairs, bool json, std::ostream& out) {
  const Project project(g.project);
  const auto gold = load_sets_arg(project, gold_arg);
  const auto pred = load_sets_arg(project, pred_arg);
  EvalOptions options;
  if (granularity == "segment") {
    options.granularity = Granularity::segment;
  } else if (granularity == "auto") {
    options.granularity = has_segments(gold) && has_segments(pred) ? Granularity::segment : Granularity::document;
  }
  options.averaging = matched_pairs ? Averaging::matched_pairs : Averaging::gold_sets;
  const auto report = evaluate_partition(gold, pred, options);
  if (json) {
    out << to_json(report).dump(2) << "\n";
  } else {
    const std::vector<std::pair<std::string, CurationReport>> rows{{fs::path(pred_arg).stem().string(), report}};
    out << format_curation_table(rows);
  }
  return 0;
}

int cmd_extract(const Globals& g, const CliHooks& hooks, std::vector<std::string> names, bool per_document,
                std::ostream& out) {
  const Project project(g.project);
  if (names.empty()) {
    for (const auto& n : {std::string("gold"), std::string(to_string(project.config().lm_method))}) {
      if (fs::exists(project.artifact("eventsets", n))) names.push_back(n);
    }
    if (names.empty()) throw InputError("extract: no event sets found; run curate first or pass --sets");
  }
  auto options = project.config().extraction;
  options.per_document = options.per_document || per_document;
  const auto docs = project.working_corpus();
  const auto segments = project.all_segments();
  const auto oracle = oracle_for(project, g, hooks);
  fs::create_directories(project.root() / "extracted");
  for (const auto& name : names) {
    const auto sets = project.event_sets(name);
    const auto events = extract_all(*oracle, project.schema(), sets, docs, segments, options);
    save_extracted(project.schema(), project.artifact("extracted", name), events);
    std::size_t conflicts = 0;
    for (const auto& e : events) conflicts += e.conflicts.size();
    out << "wrote " << rel(project, project.artifact("extracted", name)) << " (" << events.size() << " events, "
        << conflicts << " conflicts)\n";
  }
  report_oracle(out, *oracle);
  return 0;
}

int cmd_assign(const Globals& g, const std::string& lm_name, std::ostream& out) {
  const Project project(g.project);
  const auto& cfg = project.config();
  const auto gold = project.event_sets("gold");
  const auto lm = project.event_sets(lm_name.empty() ? std::string(to_string(cfg.lm_method)) : lm_name);
  AssignOptions options{cfg.assignment_seed, cfg.teams, cfg.duplicate_fraction};
  const auto items = assign_workitems(gold, lm, options);
  save_workitems(project.artifact("workitems"), items);
  std::map<std::pair<Subset, Setting>, std::size_t> counts;
  for (const auto& i : items) ++counts[{i.subset, i.setting}];
  TextTable table({"Subset", "Manual", "Hybrid"});
  for (const auto s : {Subset::human, Subset::lm, Subset::overlap}) {
    table.add_row({std::string(to_string(s)), std::to_string(counts[{s, Setting::manual}]),
                   std::to_string(counts[{s, Setting::hybrid}])});
  }
  out << "wrote " << rel(project, project.artifact("workitems")) << " (" << items.size() << " work items)\n"
      << table.render();
  return 0;
}

int cmd_report(const Globals& g, const std::string& kind, const std::string& metric, bool json, std::ostream& out) {
  const Project project(g.project);
  ReportOptions options;
  options.replay = g.replay;
  if (!metric.empty()) options.metric = metric_from_string(metric);
  const auto r = project_report(project, kind, options);
  if (json) {
    out << r.data.dump(2) << "\n";
  } else {
    out << r.table;
  }
  return 0;
}

int cmd_serve(const Globals& g, const std::string& host, int port, const std::string& static_dir, std::ostream& out) {
  AnnotationService service{Project(g.project)};
  HttpFrontend http(service, static_dir);
  const int bound = http.bind(host, port);
  out << "serving " << g.project << " on http://" << host << ":" << bound << "\n" << std::flush;
  http.listen();
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const CliHooks& hooks) {
  CLI::App app{"Event-set curation, variable extraction and annotation reports", "evanno"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--project,-p", g.project, "Project directory")->capture_default_str();
  app.add_flag("--replay", g.replay, "Answer oracle calls from the replay cache only");

  std::string init_config;
  auto* init = app.add_subcommand("init", "Create a project with the default config");
  init->add_option("--config", init_config, "Config template to copy");

  std::vector<std::string> ingest_files;
  std::string ingest_gold;
  auto* ingest = app.add_subcommand("ingest", "Load JSONL documents into corpus.jsonl and/or import gold sets");
  ingest->add_option("files", ingest_files, "JSONL corpus files");
  ingest->add_option("--gold", ingest_gold, "Gold event sets JSON to import");

  std::string train;
  bool no_keywords = false;
  bool no_model = false;
  auto* triage = app.add_subcommand("triage", "Keyword filter and relevance classifier");
  triage->add_option("--train", train, "Labeled JSONL (documents with boolean \"relevant\")");
  triage->add_flag("--no-keywords", no_keywords, "Skip the keyword filter");
  triage->add_flag("--no-model", no_model, "Skip the relevance classifier");

  std::string method;
  std::optional<double> threshold;
  std::optional<double> prefilter;
  bool search = false;
  auto* curate = app.add_subcommand("curate", "Build candidate event sets");
  curate->add_option("--method,-m", method, "tfidf | embedding | llm-cls | llm-cls-seg")
      ->required()
      ->check(CLI::IsMember({"tfidf", "embedding", "llm-cls", "llm_cls", "llm-cls-seg", "llm_cls_seg"}));
  curate->add_option("--threshold", threshold, "Similarity threshold (tfidf, embedding)")->check(CLI::Range(0.0, 1.0));
  curate->add_flag("--search", search, "Grid-search the embedding threshold against gold");
  curate->add_option("--prefilter", prefilter, "Tf-idf cosine a pair needs before the oracle is asked")
      ->check(CLI::Range(0.0, 1.0));

  std::string gold_arg;
  std::string pred_arg;
  std::string granularity = "auto";
  bool matched_pairs = false;
  bool eval_json = false;
  auto* eval = app.add_subcommand("eval", "Score candidate event sets against gold");
  eval->add_option("--gold", gold_arg, "Gold sets (file or saved name)")->required();
  eval->add_option("--pred", pred_arg, "Candidate sets (file or saved name)")->required();
  eval->add_option("--granularity", granularity, "auto | document | segment")
      ->check(CLI::IsMember({"auto", "document", "segment"}))
      ->capture_default_str();
  eval->add_flag("--matched-pairs", matched_pairs, "Average over matched pairs instead of gold sets");
  eval->add_flag("--json", eval_json, "Print JSON");

  std::vector<std::string> extract_sets;
  bool per_document = false;
  auto* extract = app.add_subcommand("extract", "Extract coding variables for event sets");
  extract->add_option("--sets", extract_sets, "Saved event set names (default: gold and the LM method)");
  extract->add_flag("--per-document", per_document, "Prompt per member and merge");

  std::string lm_name;
  auto* assign = app.add_subcommand("assign", "Build work items from gold and LM event sets");
  assign->add_option("--lm", lm_name, "Saved LM event set name (default from config)");

  std::string report_kind;
  std::string metric;
  bool report_json = false;
  auto* report = app.add_subcommand("report", "Print a report");
  report->add_option("kind", report_kind, "curation | agreement | selection | timing")
      ->required()
      ->check(CLI::IsMember({"curation", "agreement", "selection", "timing"}));
  report->add_option("--metric", metric, "Agreement metric: exact | nm | token_f1 | embedding")
      ->check(CLI::IsMember({"exact", "nm", "token_f1", "token-f1", "embedding"}));
  report->add_flag("--json", report_json, "Print JSON");

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  auto* serve = app.add_subcommand("serve", "Run the annotation HTTP service");
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str()->check(CLI::Range(0, 65535));
  serve->add_option("--static", static_dir, "Directory served at / (workbench build)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*init) return cmd_init(g, init_config, out);
    if (*ingest) return cmd_ingest(g, ingest_files, ingest_gold, out);
    if (*triage) return cmd_triage(g, train, no_keywords, no_model, out);
    if (*curate) return cmd_curate(g, hooks, method, threshold, search, prefilter, out);
    if (*eval) return cmd_eval(g, gold_arg, pred_arg, granularity, matched_pairs, eval_json, out);
    if (*extract) return cmd_extract(g, hooks, extract_sets, per_document, out);
    if (*assign) return cmd_assign(g, lm_name, out);
    if (*report) return cmd_report(g, report_kind, metric, report_json, out);
    if (*serve) return cmd_serve(g, host, port, static_dir, out);
  } catch (const std::exception& e) {
    print_exception(err, e);
    return 1;
  }
  return 2;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace evanno
