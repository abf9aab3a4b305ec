#pragma once

// Structured-output schemas for the three prediction tasks and the
// validator that turns raw model text into a typed prediction.
//
//   roles     {"player_1":"good"|"evil"|"merlin", ..., "player_6":...}
//   merlin    {"merlin":"player_1"|...|"player_6"}
//   strategy  {"strategy":"assertion"|...|"appeal_defense"}

#include <string>
#include <variant>
#include <vector>

#include "avalon/context/prompt.hpp"
#include "avalon/data/labels.hpp"

namespace avalon {

enum class SchemaKind : std::uint8_t { Role, Merlin, Strategy };

inline constexpr SchemaKind schema_for(Task t) {
  switch (t) {
    case Task::Roles: return SchemaKind::Role;
    case Task::Merlin: return SchemaKind::Merlin;
    case Task::Strategy: return SchemaKind::Strategy;
  }
  return SchemaKind::Role;
}

// Predicted labels never include "unknown".
struct RolePrediction {
  std::array<Label, kNumPlayers> labels{};
  bool operator==(const RolePrediction&) const = default;
};

struct MerlinPrediction {
  PlayerId merlin;
  bool operator==(const MerlinPrediction&) const = default;
};

struct StrategyPrediction {
  Persuasion strategy = Persuasion::Assertion;
  bool operator==(const StrategyPrediction&) const = default;
};

using Prediction = std::variant<RolePrediction, MerlinPrediction, StrategyPrediction>;

inline json to_json(const RolePrediction& p) {
  json j = json::object();
  for (PlayerId s : all_players()) j[s.key()] = label_name(p.labels[s.index()]);
  return j;
}
inline json to_json(const MerlinPrediction& p) { return json{{"merlin", p.merlin.key()}}; }
inline json to_json(const StrategyPrediction& p) { return json{{"strategy", persuasion_id(p.strategy)}}; }
inline json to_json(const Prediction& p) {
  return std::visit([](const auto& v) { return to_json(v); }, p);
}

inline RolePrediction truth_prediction(const RoleAssignment& roles) {
  RolePrediction p;
  for (PlayerId s : all_players()) p.labels[s.index()] = label_of(roles[s.index()]);
  return p;
}

inline BeliefVector as_belief(const RolePrediction& p) { return p.labels; }

// JSON Schema sent with structured-output requests.
inline json schema_json(SchemaKind kind) {
  json props = json::object();
  json required = json::array();
  auto add = [&](const std::string& key, json values) {
    props[key] = json{{"type", "string"}, {"enum", std::move(values)}};
    required.push_back(key);
  };
  switch (kind) {
    case SchemaKind::Role:
      for (PlayerId p : all_players()) add(p.key(), json::array({"good", "evil", "merlin"}));
      break;
    case SchemaKind::Merlin: {
      json seats = json::array();
      for (PlayerId p : all_players()) seats.push_back(p.key());
      add("merlin", seats);
      break;
    }
    case SchemaKind::Strategy: {
      json ids = json::array();
      for (Persuasion p : kAllPersuasion) ids.push_back(persuasion_id(p));
      add("strategy", ids);
      break;
    }
  }
  return json{{"type", "object"}, {"properties", props}, {"required", required}, {"additionalProperties", false}};
}

struct Diagnostic {
  std::string field;
  std::string message;
  std::string text() const { return field + ": " + message; }
  bool operator==(const Diagnostic&) const = default;
};

struct Validation {
  std::optional<Prediction> prediction;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return prediction.has_value(); }
  std::string diagnostics_text() const {
    std::string out;
    for (const auto& d : diagnostics) out += d.text() + "\n";
    return out;
  }
};

namespace detail {

// Start and end of the first balanced {...} in `raw` starting at or after
// `from`, ignoring braces inside string literals.
inline std::optional<std::pair<std::size_t, std::size_t>> balanced_object(std::string_view raw, std::size_t from) {
  const std::size_t start = raw.find('{', from);
  if (start == std::string_view::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return std::make_pair(start, i + 1);
  }
  return std::nullopt;
}

inline std::string allowed_set(const std::vector<std::string>& values) {
  std::string out = "{";
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + values[i];
  return out + "}";
}

inline std::optional<std::string> string_field(const json& obj, const std::string& key,
                                               std::vector<Diagnostic>& diags) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    diags.push_back({key, "required field absent"});
    return std::nullopt;
  }
  if (!it->is_string()) {
    diags.push_back({key, "expected a string, got " + it->dump()});
    return std::nullopt;
  }
  return it->get<std::string>();
}

}  // namespace detail

// The first balanced object literal that parses as JSON.
inline std::optional<json> extract_object(std::string_view raw) {
  std::size_t from = 0;
  while (auto span = detail::balanced_object(raw, from)) {
    json j = json::parse(raw.substr(span->first, span->second - span->first), nullptr, false);
    if (!j.is_discarded() && j.is_object()) return j;
    from = span->first + 1;
  }
  return std::nullopt;
}

inline Validation validate_response(std::string_view raw, SchemaKind kind) {
  Validation v;
  const auto obj = extract_object(raw);
  if (!obj) {
    v.diagnostics.push_back({"response", "no JSON object found"});
    return v;
  }
  std::vector<std::string> known;
  switch (kind) {
    case SchemaKind::Role: {
      const std::vector<std::string> allowed{"good", "evil", "merlin"};
      RolePrediction p;
      for (PlayerId s : all_players()) {
        known.push_back(s.key());
        auto value = detail::string_field(*obj, s.key(), v.diagnostics);
        if (!value) continue;
        if (*value == "good") p.labels[s.index()] = Label::Good;
        else if (*value == "evil") p.labels[s.index()] = Label::Evil;
        else if (*value == "merlin") p.labels[s.index()] = Label::Merlin;
        else v.diagnostics.push_back({s.key(), "value \"" + *value + "\" not in " + detail::allowed_set(allowed)});
      }
      if (v.diagnostics.empty()) v.prediction = p;
      break;
    }
    case SchemaKind::Merlin: {
      known.push_back("merlin");
      std::vector<std::string> seats;
      for (PlayerId s : all_players()) seats.push_back(s.key());
      if (auto value = detail::string_field(*obj, "merlin", v.diagnostics)) {
        if (std::find(seats.begin(), seats.end(), *value) == seats.end())
          v.diagnostics.push_back({"merlin", "value \"" + *value + "\" not in " + detail::allowed_set(seats)});
        else
          v.prediction = MerlinPrediction{*PlayerId::parse(*value)};
      }
      break;
    }
    case SchemaKind::Strategy: {
      known.push_back("strategy");
      std::vector<std::string> ids;
      for (Persuasion p : kAllPersuasion) ids.emplace_back(persuasion_id(p));
      if (auto value = detail::string_field(*obj, "strategy", v.diagnostics)) {
        auto it = std::find(ids.begin(), ids.end(), *value);
        if (it == ids.end())
          v.diagnostics.push_back({"strategy", "value \"" + *value + "\" not in " + detail::allowed_set(ids)});
        else
          v.prediction = StrategyPrediction{kAllPersuasion[static_cast<std::size_t>(it - ids.begin())]};
      }
      break;
    }
  }
  for (const auto& [key, value] : obj->items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      v.diagnostics.push_back({key, "unexpected field"});
  }
  if (!v.diagnostics.empty()) v.prediction.reset();
  return v;
}

}  // namespace avalon
