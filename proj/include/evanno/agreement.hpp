#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evanno/oracle.hpp"
#include "evanno/schema.hpp"
#include "evanno/tfidf.hpp"
#include "evanno/timeutil.hpp"

namespace evanno {

enum class Setting { manual, hybrid, automated };
enum class Subset { human, lm, overlap };

std::string_view to_string(Setting s);
std::string_view to_string(Subset s);
Setting setting_from_string(std::string_view s);
Subset subset_from_string(std::string_view s);

// Annotator id reserved for records produced by the model alone.
inline constexpr std::string_view kAutomatedAnnotator = "lm";

// One submitted coding of an event set.
struct AnnotationRecord {
  std::string annotator;
  std::string team;
  std::string event_set;
  std::string item;  // work item id, empty for automated records
  Setting setting = Setting::manual;
  Subset subset = Subset::human;
  std::vector<VariableValue> values;  // schema order
  std::vector<bool> prepopulated;     // value accepted from the model, per variable
  Timestamp started_at{};
  Timestamp ended_at{};
  std::optional<Timestamp> received_at;

  bool operator==(const AnnotationRecord&) const = default;

  double seconds() const { return seconds_between(started_at, ended_at); }
};

// Throws ValidationError/InputError when the record breaks its invariants:
// 9 values, ended_at >= started_at, no prepopulated flags for manual coding,
// and the reserved annotator id exactly for automated records.
void validate_record(const VariableSchema& schema, const AnnotationRecord& record);

nlohmann::json to_json(const VariableSchema& schema, const AnnotationRecord& record);
AnnotationRecord annotation_from_json(const VariableSchema& schema, const nlohmann::json& j);

// One JSON object per line.
std::vector<AnnotationRecord> load_annotations(const VariableSchema& schema, const std::filesystem::path& path);
// Appends by rewriting the log to a temp file and renaming it over the old one.
void append_annotation(const VariableSchema& schema, const std::filesystem::path& path,
                       const AnnotationRecord& record);

enum class Metric { exact, nm, token_f1, embedding };

std::string_view to_string(Metric m);
Metric metric_from_string(std::string_view s);

struct EquivalenceVerdict {
  Metric metric = Metric::exact;
  double score = 0;
  bool equivalent = false;
};

// Structural equality.
EquivalenceVerdict exact_match(const VariableValue& a, const VariableValue& b);

// Text: equal after normalize_answer (case, punctuation, articles,
// whitespace). Enum sets: set equality. Counts: n and qualifier equal.
// NA matches only NA. Throws InputError on a kind mismatch.
EquivalenceVerdict normalized_match(const VariableValue& a, const VariableValue& b);

// F1 over answer-token multisets, each token weighted by idf:
// 2 * overlap / (weight(a) + weight(b)). Empty vs empty scores 1.
EquivalenceVerdict token_f1(std::string_view a, std::string_view b, const IdfTable& idf, double threshold = 0.6);

// Cosine of oracle embeddings, clamped to [0, 1]. Identical strings score 1
// without a call.
EquivalenceVerdict embedding_match(Oracle& oracle, std::string_view a, std::string_view b, double threshold = 0.85);

struct MetricConfig {
  Metric metric = Metric::nm;
  IdfTable idf;
  Oracle* oracle = nullptr;  // needed for Metric::embedding
  double token_f1_threshold = 0.6;
  double embedding_threshold = 0.85;
};

// Compares two values of one variable. token_f1 and embedding apply to text
// variables; enum and count variables always use normalized_match. NA vs a
// value scores 0 under every metric.
EquivalenceVerdict compare_values(const VariableDescriptor& variable, const VariableValue& a, const VariableValue& b,
                                  const MetricConfig& config);

struct VariableAgreement {
  std::string variable;
  std::size_t agree = 0;
  std::size_t total = 0;
  double rate() const { return total == 0 ? 0.0 : static_cast<double>(agree) / static_cast<double>(total); }
};

struct AgreementReport {
  Metric metric = Metric::nm;
  std::size_t n_events = 0;     // shared events compared
  std::size_t only_a = 0;       // events coded by side a only
  std::size_t only_b = 0;
  std::vector<VariableAgreement> variables;  // schema order
  std::size_t agree = 0;
  std::size_t total = 0;
  double rate() const { return total == 0 ? 0.0 : static_cast<double>(agree) / static_cast<double>(total); }
};

// Agreement over the events coded on both sides. Each side may hold at most
// one record per event set. Throws InputError when no event is shared.
AgreementReport pairwise_agreement(const VariableSchema& schema, std::span<const AnnotationRecord> a,
                                   std::span<const AnnotationRecord> b, const MetricConfig& config);

// Adds b's counts into a (same schema and metric).
void accumulate(AgreementReport& into, const AgreementReport& from);

nlohmann::json to_json(const AgreementReport& report);

}  // namespace evanno
