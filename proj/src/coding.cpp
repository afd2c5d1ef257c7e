#include "evanno/coding.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "evanno/io.hpp"
#include "evanno/parallel.hpp"
#include "evanno/text.hpp"
#include "evanno/tfidf.hpp"

namespace evanno {

namespace {

constexpr std::string_view kLocationWarning = "Location equals Country; the location may be underspecified";

struct Candidate {
  VariableValue value;
  std::string raw;
  std::vector<std::string> sources;
};

struct Merged {
  VariableValue value = Na{};
  std::string raw;
  std::vector<std::string> sources;
  std::optional<Conflict> conflict;
};

std::string raw_string(const nlohmann::json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

template <typename T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Agreement key: two values agree iff their keys are equal.
std::string agreement_key(const VariableValue& v) {
  if (const auto* t = std::get_if<Text>(&v)) return "t:" + normalize_answer(t->value);
  if (const auto* c = std::get_if<Count>(&v)) return "c:" + std::to_string(c->n) + std::string(to_string(c->qualifier));
  return "v:" + render(v);
}

std::string smallest_raw_for(const std::vector<Candidate>& cands, const VariableValue& value) {
  std::optional<std::string> best;
  for (const auto& c : cands) {
    if (c.value == value && (!best || c.raw < *best)) best = c.raw;
  }
  return best.value_or(render(value));
}

Merged merge_candidates(const VariableDescriptor& d, std::vector<Candidate> all) {
  std::vector<Candidate> cands;
  for (auto& c : all) {
    if (!is_na(c.value)) cands.push_back(std::move(c));
  }
  Merged out;
  if (cands.empty()) return out;
  for (const auto& c : cands) out.sources.insert(out.sources.end(), c.sources.begin(), c.sources.end());
  sort_unique(out.sources);

  std::set<std::string> keys;
  for (const auto& c : cands) keys.insert(agreement_key(c.value));
  if (keys.size() > 1) {
    Conflict conflict{d.name, {}, "sources disagree"};
    for (const auto& c : cands) conflict.values.push_back(c.raw);
    sort_unique(conflict.values);
    out.conflict = std::move(conflict);
  }

  switch (d.kind) {
    case VariableKind::text: {
      std::map<std::string, std::size_t> freq;
      for (const auto& c : cands) ++freq[normalize_answer(std::get<Text>(c.value).value)];
      auto best = freq.begin();
      for (auto it = freq.begin(); it != freq.end(); ++it) {
        if (it->second > best->second || (it->second == best->second && it->first.size() > best->first.size())) {
          best = it;
        }
      }
      std::optional<std::string> text;
      for (const auto& c : cands) {
        const auto& v = std::get<Text>(c.value).value;
        if (normalize_answer(v) == best->first && (!text || v < *text)) text = v;
      }
      out.value = Text{*text};
      out.raw = smallest_raw_for(cands, out.value);
      break;
    }
    case VariableKind::enum_multi: {
      std::set<std::string> chosen;
      for (const auto& c : cands) {
        const auto& vals = std::get<EnumSet>(c.value).values;
        chosen.insert(vals.begin(), vals.end());
      }
      EnumSet set;
      for (const auto& a : d.allowed) {
        if (chosen.contains(a)) set.values.push_back(a);
      }
      out.value = set;
      out.raw = keys.size() > 1 ? render(out.value) : smallest_raw_for(cands, out.value);
      break;
    }
    case VariableKind::count: {
      Count best = std::get<Count>(cands.front().value);
      for (const auto& c : cands) {
        const auto& n = std::get<Count>(c.value);
        if (n.n > best.n || (n.n == best.n && n.qualifier == CountQualifier::at_least)) best = n;
      }
      out.value = best;
      out.raw = smallest_raw_for(cands, out.value);
      break;
    }
  }
  return out;
}

void finalize(const VariableSchema& schema, ExtractedEvent& e) {
  sort_unique(e.conflicts);
  std::erase(e.warnings, std::string(kLocationWarning));
  const auto country = schema.find("Country");
  const auto location = schema.find("Location");
  if (country && location) {
    const auto* c = std::get_if<Text>(&e.values[*country]);
    const auto* l = std::get_if<Text>(&e.values[*location]);
    if (c && l && normalize_answer(c->value) == normalize_answer(l->value)) e.warnings.emplace_back(kLocationWarning);
  }
  sort_unique(e.warnings);
}

void apply(ExtractedEvent& e, const VariableDescriptor& d, std::size_t index, Merged merged) {
  e.values[index] = std::move(merged.value);
  if (!is_na(e.values[index])) {
    e.raw[d.name] = std::move(merged.raw);
    e.provenance[d.name] = std::move(merged.sources);
  }
  if (merged.conflict) e.conflicts.push_back(std::move(*merged.conflict));
}

std::optional<nlohmann::json> parse_answer_object(std::string_view content) {
  auto j = nlohmann::json::parse(strip_code_fence(content), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

nlohmann::json ask(Oracle& oracle, const std::string& prompt) {
  const auto first = oracle.chat(RequestKind::extract_variables, prompt);
  if (auto j = parse_answer_object(first)) return *j;
  const auto retry = prompt + "\n" + std::string(kExtractionRetry);
  const auto second = oracle.chat(RequestKind::extract_variables, retry);
  if (auto j = parse_answer_object(second)) return *j;
  throw ResponseParseError(RequestKind::extract_variables,
                           OracleRequest::make(RequestKind::extract_variables, oracle.config().model_id, retry).cache_key,
                           second, "extraction answer is not a JSON object");
}

}  // namespace

std::vector<MemberText> resolve_member_texts(const EventSet& set, std::span<const Document> docs,
                                             const std::map<std::string, std::vector<std::string>>& segments) {
  std::vector<MemberText> out;
  for (const auto& m : set.members) {
    if (m.segment) {
      const auto it = segments.find(m.doc);
      if (it == segments.end() || *m.segment >= it->second.size()) {
        throw InputError("event set " + set.id + ": no stored segment " + m.key());
      }
      out.push_back({m, it->second[*m.segment]});
    } else {
      const auto* d = find_document(docs, m.doc);
      if (!d) throw InputError("event set " + set.id + ": unknown document " + m.doc);
      out.push_back({m, document_text(*d)});
    }
  }
  return out;
}

std::string render_variable_list(const VariableSchema& schema) {
  std::string out;
  for (const auto& d : schema.variables()) {
    out += "\"" + d.name + "\": " + d.description;
    if (d.kind == VariableKind::enum_multi) {
      out += " One or more of: ";
      for (std::size_t i = 0; i < d.allowed.size(); ++i) out += (i ? ", " : "") + d.allowed[i];
      out += ".";
    } else if (d.kind == VariableKind::count) {
      out += " An integer; prefix \"at least\" if the count is a lower bound.";
    }
    out += "\n";
  }
  return out;
}

std::string render_extraction_prompt(const VariableSchema& schema, std::span<const MemberText> members,
                                     std::string_view prompt_template) {
  std::string docs;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i) docs += "\n---\n";
    docs += "Document " + std::to_string(i + 1) + " (" + members[i].ref.key() + "):\n" + members[i].text;
  }
  const auto vars = render_variable_list(schema);
  // Substitute into a copy piecewise so placeholder-like text in documents
  // is left alone.
  std::string out(prompt_template);
  const auto pv = out.find("{variables}");
  if (pv != std::string::npos) out.replace(pv, 11, vars);
  const auto pd = out.find("{documents}");
  if (pd != std::string::npos) {
    out.replace(pd, 11, docs);
  } else {
    out += "\n" + docs;
  }
  return out;
}

ExtractedEvent interpret_extraction(const VariableSchema& schema, const std::string& event_id,
                                    const nlohmann::json& answer, std::span<const std::string> sources) {
  if (!answer.is_object()) throw InputError("extraction answer must be a JSON object");
  ExtractedEvent e;
  e.event_id = event_id;
  e.values.assign(schema.size(), Na{});
  std::vector<std::optional<nlohmann::json>> found(schema.size());
  for (const auto& [key, value] : answer.items()) {
    const auto i = schema.find(key);
    if (!i) {
      e.warnings.push_back("ignored unknown variable \"" + key + "\"");
      continue;
    }
    found[*i] = value;
  }
  const std::vector<std::string> src(sources.begin(), sources.end());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!found[i]) continue;
    const auto& d = schema[i];
    const auto& v = *found[i];
    std::vector<nlohmann::json> raws;
    if (v.is_object() && v.contains("candidates") && v["candidates"].is_array()) {
      raws.assign(v["candidates"].begin(), v["candidates"].end());
    } else {
      raws.push_back(v);
    }
    std::vector<Candidate> cands;
    for (const auto& r : raws) {
      try {
        cands.push_back({validate_value(schema, d.name, r), raw_string(r), src});
      } catch (const Error& err) {
        e.conflicts.push_back({d.name, {raw_string(r)}, std::string("rejected: ") + err.what()});
      }
    }
    apply(e, d, i, merge_candidates(d, std::move(cands)));
  }
  finalize(schema, e);
  return e;
}

ExtractedEvent extract_variables(Oracle& oracle, const VariableSchema& schema, const EventSet& set,
                                 std::span<const MemberText> members, const ExtractionOptions& options) {
  if (members.empty()) throw InputError("extract_variables: event set " + set.id + " has no members");
  if (!options.per_document) {
    std::vector<std::string> keys;
    for (const auto& m : members) keys.push_back(m.ref.key());
    sort_unique(keys);
    const auto answer = ask(oracle, render_extraction_prompt(schema, members, options.prompt_template));
    return interpret_extraction(schema, set.id, answer, keys);
  }
  std::vector<ExtractedEvent> fragments;
  for (const auto& m : members) {
    const std::vector<std::string> keys{m.ref.key()};
    const auto answer = ask(oracle, render_extraction_prompt(schema, std::span(&m, 1), options.prompt_template));
    fragments.push_back(interpret_extraction(schema, set.id, answer, keys));
  }
  return merge_extractions(schema, fragments);
}

std::vector<ExtractedEvent> extract_all(Oracle& oracle, const VariableSchema& schema, std::span<const EventSet> sets,
                                        std::span<const Document> docs,
                                        const std::map<std::string, std::vector<std::string>>& segments,
                                        const ExtractionOptions& options) {
  std::vector<std::vector<MemberText>> texts;
  for (const auto& s : sets) texts.push_back(resolve_member_texts(s, docs, segments));
  std::vector<ExtractedEvent> out(sets.size());
  const auto workers = static_cast<std::size_t>(std::max(1, oracle.config().max_in_flight));
  parallel_for(sets.size(), workers, [&](std::size_t k) {
    try {
      out[k] = extract_variables(oracle, schema, sets[k], texts[k], options);
    } catch (const std::exception&) {
      std::throw_with_nested(Error("extraction failed for event set " + sets[k].id));
    }
  });
  return out;
}

ExtractedEvent merge_extractions(const VariableSchema& schema, std::span<const ExtractedEvent> fragments) {
  if (fragments.empty()) throw InputError("merge_extractions: no fragments");
  ExtractedEvent e;
  e.event_id = fragments.front().event_id;
  e.values.assign(schema.size(), Na{});
  for (const auto& f : fragments) {
    if (f.event_id != e.event_id) {
      throw InputError("merge_extractions: mixed event ids " + e.event_id + " and " + f.event_id);
    }
    if (f.values.size() != schema.size()) throw InputError("merge_extractions: fragment has wrong variable count");
    e.conflicts.insert(e.conflicts.end(), f.conflicts.begin(), f.conflicts.end());
    e.warnings.insert(e.warnings.end(), f.warnings.begin(), f.warnings.end());
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& d = schema[i];
    std::vector<Candidate> cands;
    for (const auto& f : fragments) {
      const auto raw = f.raw.find(d.name);
      const auto prov = f.provenance.find(d.name);
      cands.push_back({f.values[i], raw != f.raw.end() ? raw->second : render(f.values[i]),
                       prov != f.provenance.end() ? prov->second : std::vector<std::string>{}});
    }
    apply(e, d, i, merge_candidates(d, std::move(cands)));
  }
  finalize(schema, e);
  return e;
}

nlohmann::json to_json(const VariableSchema& schema, const ExtractedEvent& event) {
  nlohmann::json values = nlohmann::json::object();
  for (std::size_t i = 0; i < schema.size(); ++i) values[schema[i].name] = value_to_json(event.values.at(i));
  nlohmann::json conflicts = nlohmann::json::array();
  for (const auto& c : event.conflicts) {
    conflicts.push_back({{"variable", c.variable}, {"values", c.values}, {"note", c.note}});
  }
  return {{"event_set", event.event_id}, {"values", std::move(values)},       {"raw", event.raw},
          {"conflicts", std::move(conflicts)}, {"provenance", event.provenance}, {"warnings", event.warnings}};
}

ExtractedEvent extracted_event_from_json(const VariableSchema& schema, const nlohmann::json& j) {
  try {
    ExtractedEvent e;
    e.event_id = j.at("event_set").get<std::string>();
    const auto& values = j.at("values");
    for (const auto& d : schema.variables()) {
      e.values.push_back(values.contains(d.name) ? validate_value(schema, d.name, values[d.name]) : VariableValue{Na{}});
    }
    e.raw = j.value("raw", std::map<std::string, std::string>{});
    for (const auto& c : j.value("conflicts", nlohmann::json::array())) {
      e.conflicts.push_back({c.at("variable").get<std::string>(), c.at("values").get<std::vector<std::string>>(),
                             c.value("note", std::string())});
    }
    e.provenance = j.value("provenance", std::map<std::string, std::vector<std::string>>{});
    e.warnings = j.value("warnings", std::vector<std::string>{});
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("extracted event: ") + ex.what());
  }
}

std::vector<ExtractedEvent> load_extracted(const VariableSchema& schema, const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  std::vector<ExtractedEvent> out;
  for (const auto& e : j.at("events")) out.push_back(extracted_event_from_json(schema, e));
  return out;
}

void save_extracted(const VariableSchema& schema, const std::filesystem::path& path,
                    std::span<const ExtractedEvent> events) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : events) arr.push_back(to_json(schema, e));
  write_json_file(path, {{"schema_version", schema.version()}, {"events", std::move(arr)}});
}

}  // namespace evanno
