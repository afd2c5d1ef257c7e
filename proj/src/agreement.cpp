#include "evanno/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "evanno/io.hpp"
#include "evanno/text.hpp"

namespace evanno {

namespace {

EquivalenceVerdict verdict(Metric m, double score, double threshold) {
  return {m, score, score >= threshold};
}

const char* kind_name(const VariableValue& v) {
  switch (v.index()) {
    case 0: return "NA";
    case 1: return "text";
    case 2: return "enum";
    default: return "count";
  }
}

std::map<std::string, const AnnotationRecord*> by_event(std::span<const AnnotationRecord> records, char side) {
  std::map<std::string, const AnnotationRecord*> out;
  for (const auto& r : records) {
    if (!out.emplace(r.event_set, &r).second) {
      throw InputError(std::string("pairwise_agreement: side ") + side + " has more than one record for event set " +
                       r.event_set);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Setting s) {
  switch (s) {
    case Setting::manual: return "manual";
    case Setting::hybrid: return "hybrid";
    case Setting::automated: return "automated";
  }
  return "?";
}

std::string_view to_string(Subset s) {
  switch (s) {
    case Subset::human: return "human";
    case Subset::lm: return "lm";
    case Subset::overlap: return "overlap";
  }
  return "?";
}

Setting setting_from_string(std::string_view s) {
  for (auto v : {Setting::manual, Setting::hybrid, Setting::automated}) {
    if (iequals_ascii(s, to_string(v))) return v;
  }
  throw InputError("unknown setting \"" + std::string(s) + "\"");
}

Subset subset_from_string(std::string_view s) {
  for (auto v : {Subset::human, Subset::lm, Subset::overlap}) {
    if (iequals_ascii(s, to_string(v))) return v;
  }
  throw InputError("unknown subset \"" + std::string(s) + "\"");
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::exact: return "exact";
    case Metric::nm: return "nm";
    case Metric::token_f1: return "token_f1";
    case Metric::embedding: return "embedding";
  }
  return "?";
}

Metric metric_from_string(std::string_view s) {
  for (auto v : {Metric::exact, Metric::nm, Metric::token_f1, Metric::embedding}) {
    if (iequals_ascii(s, to_string(v))) return v;
  }
  if (iequals_ascii(s, "token-f1")) return Metric::token_f1;
  throw InputError("unknown metric \"" + std::string(s) + "\"");
}

void validate_record(const VariableSchema& schema, const AnnotationRecord& r) {
  if (r.event_set.empty()) throw InputError("annotation: missing event_set");
  if (r.values.size() != schema.size()) {
    throw InputError("annotation for " + r.event_set + ": expected " + std::to_string(schema.size()) + " values, got " +
                     std::to_string(r.values.size()));
  }
  if (r.prepopulated.size() != schema.size()) {
    throw InputError("annotation for " + r.event_set + ": expected " + std::to_string(schema.size()) +
                     " prepopulated flags");
  }
  for (std::size_t i = 0; i < schema.size(); ++i) check_value(schema, i, r.values[i]);
  if (r.ended_at < r.started_at) {
    throw InputError("annotation for " + r.event_set + ": ended_at " + format_iso8601(r.ended_at) +
                     " is before started_at " + format_iso8601(r.started_at));
  }
  if (r.setting == Setting::manual && std::find(r.prepopulated.begin(), r.prepopulated.end(), true) != r.prepopulated.end()) {
    throw InputError("annotation for " + r.event_set + ": manual coding cannot have prepopulated values");
  }
  const bool reserved = r.annotator == kAutomatedAnnotator;
  if ((r.setting == Setting::automated) != reserved) {
    throw InputError("annotation for " + r.event_set + ": annotator id \"" + std::string(kAutomatedAnnotator) +
                     "\" is reserved for automated records");
  }
  if (r.annotator.empty()) throw InputError("annotation for " + r.event_set + ": missing annotator");
}

nlohmann::json to_json(const VariableSchema& schema, const AnnotationRecord& r) {
  nlohmann::json values = nlohmann::json::object();
  nlohmann::json pre = nlohmann::json::object();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    values[schema[i].name] = value_to_json(r.values.at(i));
    pre[schema[i].name] = static_cast<bool>(r.prepopulated.at(i));
  }
  nlohmann::json j{{"annotator", r.annotator},
                   {"team", r.team},
                   {"event_set", r.event_set},
                   {"item", r.item},
                   {"setting", to_string(r.setting)},
                   {"subset", to_string(r.subset)},
                   {"values", std::move(values)},
                   {"prepopulated", std::move(pre)},
                   {"started_at", format_iso8601(r.started_at)},
                   {"ended_at", format_iso8601(r.ended_at)}};
  if (r.received_at) j["received_at"] = format_iso8601(*r.received_at);
  return j;
}

AnnotationRecord annotation_from_json(const VariableSchema& schema, const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("annotation must be a JSON object");
  try {
    AnnotationRecord r;
    r.annotator = j.value("annotator", std::string());
    r.team = j.value("team", std::string());
    r.event_set = j.at("event_set").get<std::string>();
    r.item = j.value("item", std::string());
    r.setting = setting_from_string(j.at("setting").get<std::string>());
    r.subset = subset_from_string(j.at("subset").get<std::string>());
    const auto& values = j.at("values");
    if (!values.is_object()) throw InputError("annotation values must be an object keyed by variable name");
    const auto pre = j.value("prepopulated", nlohmann::json::object());
    // Keys are matched like schema names elsewhere ("Generic Attack" works).
    std::vector<const nlohmann::json*> raw(schema.size(), nullptr);
    std::vector<bool> flags(schema.size(), false);
    for (const auto& [key, value] : values.items()) {
      const auto i = schema.find(key);
      if (!i) throw InputError("annotation: unknown variable \"" + key + "\"");
      raw[*i] = &value;
    }
    if (!pre.is_object()) throw InputError("annotation prepopulated must be an object keyed by variable name");
    for (const auto& [key, value] : pre.items()) {
      const auto i = schema.find(key);
      if (!i) throw InputError("annotation: unknown variable \"" + key + "\"");
      flags[*i] = value.get<bool>();
    }
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const auto& name = schema[i].name;
      r.values.push_back(raw[i] ? validate_value(schema, name, *raw[i]) : VariableValue{Na{}});
      r.prepopulated.push_back(flags[i]);
    }
    r.started_at = parse_iso8601(j.at("started_at").get<std::string>());
    r.ended_at = parse_iso8601(j.at("ended_at").get<std::string>());
    if (j.contains("received_at") && !j["received_at"].is_null()) {
      r.received_at = parse_iso8601(j["received_at"].get<std::string>());
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("annotation: ") + e.what());
  }
}

std::vector<AnnotationRecord> load_annotations(const VariableSchema& schema, const std::filesystem::path& path) {
  std::vector<AnnotationRecord> out;
  if (!std::filesystem::exists(path)) return out;
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(annotation_from_json(schema, nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw InputError(path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void append_annotation(const VariableSchema& schema, const std::filesystem::path& path,
                       const AnnotationRecord& record) {
  validate_record(schema, record);
  std::string content = std::filesystem::exists(path) ? read_text_file(path) : std::string();
  if (!content.empty() && content.back() != '\n') content += '\n';
  content += to_json(schema, record).dump() + "\n";
  atomic_write_text(path, content);
}

EquivalenceVerdict exact_match(const VariableValue& a, const VariableValue& b) {
  return verdict(Metric::exact, a == b ? 1.0 : 0.0, 1.0);
}

EquivalenceVerdict normalized_match(const VariableValue& a, const VariableValue& b) {
  if (is_na(a) || is_na(b)) return verdict(Metric::nm, is_na(a) && is_na(b) ? 1.0 : 0.0, 1.0);
  if (a.index() != b.index()) {
    throw InputError(std::string("normalized_match: cannot compare ") + kind_name(a) + " with " + kind_name(b));
  }
  bool same = false;
  if (const auto* t = std::get_if<Text>(&a)) {
    same = normalize_answer(t->value) == normalize_answer(std::get<Text>(b).value);
  } else {
    // Enum sets are stored in schema order, so equality is set equality.
    same = a == b;
  }
  return verdict(Metric::nm, same ? 1.0 : 0.0, 1.0);
}

EquivalenceVerdict token_f1(std::string_view a, std::string_view b, const IdfTable& idf, double threshold) {
  std::map<std::string, int> ca;
  std::map<std::string, int> cb;
  for (auto& t : answer_tokens(a)) ++ca[std::move(t)];
  for (auto& t : answer_tokens(b)) ++cb[std::move(t)];
  if (ca.empty() && cb.empty()) return verdict(Metric::token_f1, 1.0, threshold);
  if (ca.empty() || cb.empty()) return verdict(Metric::token_f1, 0.0, threshold);
  if (ca == cb) return verdict(Metric::token_f1, 1.0, threshold);
  double wa = 0;
  double wb = 0;
  double overlap = 0;
  for (const auto& [t, n] : ca) wa += n * idf(t);
  for (const auto& [t, n] : cb) wb += n * idf(t);
  for (const auto& [t, n] : ca) {
    const auto it = cb.find(t);
    if (it != cb.end()) overlap += std::min(n, it->second) * idf(t);
  }
  const double denom = wa + wb;
  const double score = denom > 0 ? std::clamp(2.0 * overlap / denom, 0.0, std::nextafter(1.0, 0.0)) : 0.0;
  return verdict(Metric::token_f1, score, threshold);
}

EquivalenceVerdict embedding_match(Oracle& oracle, std::string_view a, std::string_view b, double threshold) {
  if (a == b) return verdict(Metric::embedding, 1.0, threshold);
  if (trim(a).empty() || trim(b).empty()) return verdict(Metric::embedding, 0.0, threshold);
  const std::vector<std::string> texts{std::string(a), std::string(b)};
  const auto v = oracle.embed(texts);
  return verdict(Metric::embedding, std::clamp(v[0].dot(v[1]), 0.0, 1.0), threshold);
}

EquivalenceVerdict compare_values(const VariableDescriptor& variable, const VariableValue& a, const VariableValue& b,
                                  const MetricConfig& config) {
  if (config.metric == Metric::exact) return exact_match(a, b);
  if (config.metric == Metric::nm || variable.kind != VariableKind::text) {
    return normalized_match(a, b);
  }
  if (is_na(a) || is_na(b)) {
    const double s = is_na(a) && is_na(b) ? 1.0 : 0.0;
    return {config.metric, s, s == 1.0};
  }
  const auto& ta = std::get<Text>(a).value;
  const auto& tb = std::get<Text>(b).value;
  if (config.metric == Metric::token_f1) return token_f1(ta, tb, config.idf, config.token_f1_threshold);
  if (!config.oracle) throw InputError("embedding metric needs an oracle");
  return embedding_match(*config.oracle, ta, tb, config.embedding_threshold);
}

AgreementReport pairwise_agreement(const VariableSchema& schema, std::span<const AnnotationRecord> a,
                                   std::span<const AnnotationRecord> b, const MetricConfig& config) {
  const auto ma = by_event(a, 'a');
  const auto mb = by_event(b, 'b');
  AgreementReport report;
  report.metric = config.metric;
  for (const auto& d : schema.variables()) report.variables.push_back({d.name, 0, 0});
  for (const auto& [event, ra] : ma) {
    const auto it = mb.find(event);
    if (it == mb.end()) {
      ++report.only_a;
      continue;
    }
    ++report.n_events;
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const bool eq = compare_values(schema[i], ra->values.at(i), it->second->values.at(i), config).equivalent;
      report.variables[i].agree += eq ? 1 : 0;
      report.variables[i].total += 1;
    }
  }
  for (const auto& [event, _] : mb) {
    if (!ma.contains(event)) ++report.only_b;
  }
  if (report.n_events == 0) throw InputError("pairwise_agreement: no shared event sets");
  for (const auto& v : report.variables) {
    report.agree += v.agree;
    report.total += v.total;
  }
  return report;
}

void accumulate(AgreementReport& into, const AgreementReport& from) {
  if (into.variables.empty()) {
    into = from;
    return;
  }
  if (into.variables.size() != from.variables.size()) throw InputError("accumulate: variable lists differ");
  into.n_events += from.n_events;
  into.only_a += from.only_a;
  into.only_b += from.only_b;
  into.agree += from.agree;
  into.total += from.total;
  for (std::size_t i = 0; i < into.variables.size(); ++i) {
    into.variables[i].agree += from.variables[i].agree;
    into.variables[i].total += from.variables[i].total;
  }
}

nlohmann::json to_json(const AgreementReport& report) {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : report.variables) {
    vars.push_back({{"variable", v.variable}, {"agree", v.agree}, {"total", v.total}, {"rate", v.rate()}});
  }
  return {{"metric", to_string(report.metric)}, {"events", report.n_events}, {"only_a", report.only_a},
          {"only_b", report.only_b},             {"agree", report.agree},     {"total", report.total},
          {"rate", report.rate()},               {"variables", std::move(vars)}};
}

}  // namespace evanno
