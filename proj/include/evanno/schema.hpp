#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace evanno {

enum class VariableKind { text, enum_multi, count };

std::string_view to_string(VariableKind kind);

struct VariableDescriptor {
  std::string name;
  VariableKind kind = VariableKind::text;
  std::vector<std::string> allowed;  // enum_multi only; excludes "NA"
  bool na_allowed = true;
  std::string description;
};

// The coding target: an ordered list of variable descriptors.
class VariableSchema {
 public:
  VariableSchema(std::string version, std::vector<VariableDescriptor> variables);

  // Country, Location, Target, Perpetrator, GenericAttack, GenericWeapon,
  // SpecificWeapon, Kills, Wounds.
  static VariableSchema standard();

  const std::string& version() const noexcept { return version_; }
  const std::vector<VariableDescriptor>& variables() const noexcept { return variables_; }
  std::size_t size() const noexcept { return variables_.size(); }

  // Index of `name`; matching ignores case, spaces and punctuation, so
  // "Generic Attack" finds GenericAttack. Throws InputError when absent.
  std::size_t index_of(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;
  const VariableDescriptor& at(std::string_view name) const { return variables_[index_of(name)]; }
  const VariableDescriptor& operator[](std::size_t i) const { return variables_[i]; }

 private:
  std::string version_;
  std::vector<VariableDescriptor> variables_;
};

nlohmann::json to_json(const VariableSchema& schema);
VariableSchema schema_from_json(const nlohmann::json& j);

struct Na {
  bool operator==(const Na&) const = default;
};

struct Text {
  std::string value;
  bool operator==(const Text&) const = default;
};

// Allowed enum values, in schema order, without NA.
struct EnumSet {
  std::vector<std::string> values;
  bool operator==(const EnumSet&) const = default;
};

enum class CountQualifier { exact, at_least };

struct Count {
  std::int64_t n = 0;
  CountQualifier qualifier = CountQualifier::exact;
  bool operator==(const Count&) const = default;
};

// One coded value. Which variable it belongs to is given by its position in
// the schema.
using VariableValue = std::variant<Na, Text, EnumSet, Count>;

bool is_na(const VariableValue& v);
// Human-readable rendering: "NA", the text, "A; B", "8" or "at least 8".
std::string render(const VariableValue& v);

nlohmann::json value_to_json(const VariableValue& v);
std::string_view to_string(CountQualifier q);

// English number words zero..twenty and digit strings, with an optional
// leading "at least" (n, at_least) or "more than" (n + 1, at_least). Trailing
// words are ignored ("at least eight people wounded" -> 8, at_least).
// Unparseable input gives NA; negative numbers throw ValidationError.
VariableValue parse_count(std::string_view raw);
VariableValue parse_count(std::int64_t raw);

// Checks a raw JSON value against the descriptor for `name`:
//   null, "NA", "N/A"             -> NA
//   text        string            -> trimmed Text (empty -> NA)
//   enum_multi  string or array   -> EnumSet matched case- and punctuation-
//                                    insensitively; comma/semicolon lists ok
//   count       integer, string,
//               or {n, qualifier} -> parse_count
// Unknown enum tokens and wrong JSON types throw ValidationError.
VariableValue validate_value(const VariableSchema& schema, std::string_view name, const nlohmann::json& raw);

// Throws ValidationError if `value` is not valid for variable `index`.
void check_value(const VariableSchema& schema, std::size_t index, const VariableValue& value);

}  // namespace evanno
