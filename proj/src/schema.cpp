#include "evanno/schema.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "evanno/error.hpp"
#include "evanno/text.hpp"

namespace evanno {

namespace {

// Lowercase, punctuation- and space-free key for name and enum matching.
std::string compact_key(std::string_view s) {
  auto folded = fold_text(s);
  std::erase(folded, ' ');
  return folded;
}

bool is_na_token(std::string_view s) {
  const auto k = compact_key(s);
  return k == "na";
}

constexpr std::array<std::string_view, 21> kNumberWords = {
    "zero", "one",    "two",     "three",    "four",     "five",    "six",
    "seven", "eight", "nine",    "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};

std::optional<std::int64_t> parse_number_token(std::string_view token) {
  if (!token.empty() && std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    if (token.size() > 15) return std::nullopt;
    return std::stoll(std::string(token));
  }
  for (std::size_t i = 0; i < kNumberWords.size(); ++i) {
    if (token == kNumberWords[i]) return static_cast<std::int64_t>(i);
  }
  return std::nullopt;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ';') {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.emplace_back(trim(cur));
  std::erase_if(out, [](const std::string& t) { return t.empty(); });
  return out;
}

[[noreturn]] void reject(const VariableDescriptor& d, const std::string& token, const std::string& why) {
  throw ValidationError(d.name, token, d.name + ": " + why);
}

VariableValue validate_enum(const VariableDescriptor& d, const nlohmann::json& raw) {
  std::vector<std::string> tokens;
  if (raw.is_string()) {
    const auto& s = raw.get_ref<const std::string&>();
    // Whole-string match first so values containing separators stay intact.
    const auto whole = compact_key(s);
    const bool whole_match = std::any_of(d.allowed.begin(), d.allowed.end(),
                                         [&](const std::string& a) { return compact_key(a) == whole; });
    tokens = whole_match ? std::vector<std::string>{s} : split_list(s);
  } else if (raw.is_array()) {
    for (const auto& item : raw) {
      if (!item.is_string()) reject(d, item.dump(), "enum values must be strings");
      tokens.push_back(item.get<std::string>());
    }
  } else {
    reject(d, raw.dump(), "expected a string or an array of strings");
  }
  std::vector<bool> chosen(d.allowed.size(), false);
  for (const auto& t : tokens) {
    if (trim(t).empty() || is_na_token(t)) continue;
    const auto key = compact_key(t);
    const auto it = std::find_if(d.allowed.begin(), d.allowed.end(),
                                 [&](const std::string& a) { return compact_key(a) == key; });
    if (it == d.allowed.end()) reject(d, t, "unknown value \"" + t + "\"");
    chosen[static_cast<std::size_t>(it - d.allowed.begin())] = true;
  }
  EnumSet set;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    if (chosen[i]) set.values.push_back(d.allowed[i]);
  }
  if (set.values.empty()) return Na{};
  return set;
}

VariableValue validate_count(const VariableDescriptor& d, const nlohmann::json& raw) {
  try {
    if (raw.is_number_integer()) return parse_count(raw.get<std::int64_t>());
    if (raw.is_number_float()) {
      const double v = raw.get<double>();
      if (v != static_cast<double>(static_cast<std::int64_t>(v))) reject(d, raw.dump(), "count must be an integer");
      return parse_count(static_cast<std::int64_t>(v));
    }
    if (raw.is_string()) {
      const auto s = trim(raw.get_ref<const std::string&>());
      if (s.empty()) return Na{};
      return parse_count(s);
    }
    if (raw.is_object() && raw.contains("n")) {
      const auto& n = raw["n"];
      if (!n.is_number_integer()) reject(d, raw.dump(), "count n must be an integer");
      auto v = parse_count(n.get<std::int64_t>());
      const auto q = raw.value("qualifier", std::string("exact"));
      if (q == "at_least") {
        std::get<Count>(v).qualifier = CountQualifier::at_least;
      } else if (q != "exact") {
        reject(d, q, "unknown count qualifier \"" + q + "\"");
      }
      return v;
    }
  } catch (const ValidationError& e) {
    throw ValidationError(d.name, e.token(), d.name + ": " + e.what());
  }
  reject(d, raw.dump(), "expected an integer or a count string");
}

}  // namespace

std::string_view to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::text: return "text";
    case VariableKind::enum_multi: return "enum_multi";
    case VariableKind::count: return "count";
  }
  return "?";
}

std::string_view to_string(CountQualifier q) { return q == CountQualifier::exact ? "exact" : "at_least"; }

VariableSchema::VariableSchema(std::string version, std::vector<VariableDescriptor> variables)
    : version_(std::move(version)), variables_(std::move(variables)) {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (compact_key(variables_[i].name) == compact_key(variables_[j].name)) {
        throw InputError("schema: duplicate variable " + variables_[i].name);
      }
    }
    if (variables_[i].kind == VariableKind::enum_multi && variables_[i].allowed.empty()) {
      throw InputError("schema: enum variable " + variables_[i].name + " has no allowed values");
    }
  }
}

VariableSchema VariableSchema::standard() {
  using K = VariableKind;
  return VariableSchema(
      "1",
      {
          {"Country", K::text, {}, true, "The country in which the event occurred."},
          {"Location", K::text, {}, true, "The most specific location (e.g., village name) in which the event occurred."},
          {"Target", K::text, {}, true, "The targeted group of the event."},
          {"Perpetrator", K::text, {}, true, "The group carrying out the event."},
          {"GenericAttack",
           K::enum_multi,
           {"Facility/Infrastructure Attack", "Armed Assault", "Assassination", "Bombing/Explosion",
            "Hostage Taking (Kidnapping)"},
           true,
           "One or more generic attack types."},
          {"GenericWeapon",
           K::enum_multi,
           {"Explosives", "Firearms", "Incendiary", "Sabotage Equipment", "Melee", "Vehicle"},
           true,
           "One or more generic weapon types."},
          {"SpecificWeapon", K::text, {}, true, "A detailed description of the generic weapon."},
          {"Kills", K::count, {}, true, "Number of people killed during the event."},
          {"Wounds", K::count, {}, true, "Number of people injured during the event."},
      });
}

std::optional<std::size_t> VariableSchema::find(std::string_view name) const {
  const auto key = compact_key(name);
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (compact_key(variables_[i].name) == key) return i;
  }
  return std::nullopt;
}

std::size_t VariableSchema::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw InputError("unknown variable " + std::string(name));
}

nlohmann::json to_json(const VariableSchema& schema) {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& d : schema.variables()) {
    nlohmann::json v{{"name", d.name}, {"kind", to_string(d.kind)}, {"na_allowed", d.na_allowed},
                     {"description", d.description}};
    if (d.kind == VariableKind::enum_multi) v["allowed"] = d.allowed;
    vars.push_back(std::move(v));
  }
  return {{"version", schema.version()}, {"variables", std::move(vars)}};
}

VariableSchema schema_from_json(const nlohmann::json& j) {
  try {
    std::vector<VariableDescriptor> vars;
    for (const auto& v : j.at("variables")) {
      VariableDescriptor d;
      d.name = v.at("name").get<std::string>();
      const auto kind = v.at("kind").get<std::string>();
      if (kind == "text") {
        d.kind = VariableKind::text;
      } else if (kind == "enum_multi") {
        d.kind = VariableKind::enum_multi;
      } else if (kind == "count") {
        d.kind = VariableKind::count;
      } else {
        throw InputError("schema: unknown kind " + kind);
      }
      d.allowed = v.value("allowed", std::vector<std::string>{});
      std::erase_if(d.allowed, [](const std::string& a) { return is_na_token(a); });
      d.na_allowed = v.value("na_allowed", true);
      d.description = v.value("description", std::string());
      vars.push_back(std::move(d));
    }
    return VariableSchema(j.at("version").get<std::string>(), std::move(vars));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("schema: ") + e.what());
  }
}

bool is_na(const VariableValue& v) { return std::holds_alternative<Na>(v); }

std::string render(const VariableValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Na>) {
          return "NA";
        } else if constexpr (std::is_same_v<T, Text>) {
          return x.value;
        } else if constexpr (std::is_same_v<T, EnumSet>) {
          std::string out;
          for (const auto& s : x.values) out += (out.empty() ? "" : "; ") + s;
          return out;
        } else {
          return (x.qualifier == CountQualifier::at_least ? "at least " : "") + std::to_string(x.n);
        }
      },
      v);
}

nlohmann::json value_to_json(const VariableValue& v) {
  return std::visit(
      [](const auto& x) -> nlohmann::json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Na>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, Text>) {
          return x.value;
        } else if constexpr (std::is_same_v<T, EnumSet>) {
          return x.values;
        } else {
          return {{"n", x.n}, {"qualifier", to_string(x.qualifier)}};
        }
      },
      v);
}

VariableValue parse_count(std::int64_t raw) {
  if (raw < 0) throw ValidationError("", std::to_string(raw), "negative count " + std::to_string(raw));
  return Count{raw, CountQualifier::exact};
}

VariableValue parse_count(std::string_view raw) {
  const auto s = trim(raw);
  if (s.empty()) throw InputError("parse_count: empty input");
  if (s.front() == '-' && s.size() > 1 && s[1] >= '0' && s[1] <= '9') {
    throw ValidationError("", std::string(s), "negative count " + std::string(s));
  }
  const auto tokens = tokenize(s);
  std::size_t pos = 0;
  auto qualifier = CountQualifier::exact;
  std::int64_t bump = 0;
  if (tokens.size() >= 2 && tokens[0] == "at" && tokens[1] == "least") {
    qualifier = CountQualifier::at_least;
    pos = 2;
  } else if (tokens.size() >= 2 && tokens[0] == "more" && tokens[1] == "than") {
    qualifier = CountQualifier::at_least;
    bump = 1;
    pos = 2;
  }
  if (pos >= tokens.size()) return Na{};
  const auto n = parse_number_token(tokens[pos]);
  if (!n) return Na{};
  return Count{*n + bump, qualifier};
}

VariableValue validate_value(const VariableSchema& schema, std::string_view name, const nlohmann::json& raw) {
  const auto& d = schema.at(name);
  if (raw.is_null() || (raw.is_string() && is_na_token(raw.get_ref<const std::string&>()))) {
    if (!d.na_allowed) reject(d, "NA", "NA is not allowed");
    return Na{};
  }
  switch (d.kind) {
    case VariableKind::text: {
      if (!raw.is_string()) reject(d, raw.dump(), "expected a string");
      const auto s = trim(raw.get_ref<const std::string&>());
      if (s.empty()) return Na{};
      return Text{std::string(s)};
    }
    case VariableKind::enum_multi:
      return validate_enum(d, raw);
    case VariableKind::count:
      return validate_count(d, raw);
  }
  reject(d, raw.dump(), "unsupported kind");
}

void check_value(const VariableSchema& schema, std::size_t index, const VariableValue& value) {
  const auto& d = schema[index];
  const auto again = validate_value(schema, d.name, value_to_json(value));
  if (again != value) reject(d, render(value), "value is not in canonical form");
  const bool kind_ok = std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Na>) return true;
        if constexpr (std::is_same_v<T, Text>) return d.kind == VariableKind::text;
        if constexpr (std::is_same_v<T, EnumSet>) return d.kind == VariableKind::enum_multi;
        if constexpr (std::is_same_v<T, Count>) return d.kind == VariableKind::count;
      },
      value);
  if (!kind_ok) reject(d, render(value), "value kind does not match variable kind");
}

}  // namespace evanno
