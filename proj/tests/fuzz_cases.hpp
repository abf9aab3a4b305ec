#pragma once

// Generated model replies whose validity is known by construction.

#include <string>

#include "avalon/game/rng.hpp"
#include "avalon/predict/schema.hpp"

namespace avalon::testing {

struct FuzzCase {
  SchemaKind kind;
  std::string text;
  std::optional<json> expected;  // the object that must be accepted, or nullopt
};

inline json random_valid(SchemaKind kind, SplitMix64& rng) {
  static const char* roles[] = {"good", "evil", "merlin"};
  static const char* strategies[] = {"assertion", "questioning", "suggestion", "agreement",
                                     "logical_deduction", "compromise_concession", "critique_opposition",
                                     "appeal_defense"};
  json j = json::object();
  switch (kind) {
    case SchemaKind::Role:
      for (int s = 1; s <= 6; ++s) j["player_" + std::to_string(s)] = roles[rng.below(3)];
      break;
    case SchemaKind::Merlin: j["merlin"] = "player_" + std::to_string(rng.below(6) + 1); break;
    case SchemaKind::Strategy: j["strategy"] = strategies[rng.below(8)]; break;
  }
  return j;
}

// Prose without braces, so wrapping never introduces another object.
inline std::string prose(SplitMix64& rng) {
  static const char* bits[] = {"", "Sure! ", "Here is my answer:\n", "```json\n", "Answer: ", "\n", "I think "};
  return bits[rng.below(7)];
}

inline FuzzCase fuzz_case(SplitMix64& rng) {
  const auto kind = static_cast<SchemaKind>(rng.below(3));
  json obj = random_valid(kind, rng);
  std::optional<json> expected = obj;
  std::string body;
  switch (rng.below(9)) {
    case 0:  // untouched
      body = obj.dump();
      break;
    case 1: {  // drop a required key
      auto it = obj.begin();
      std::advance(it, static_cast<long>(rng.below(obj.size())));
      obj.erase(it.key());
      body = obj.dump();
      expected.reset();
      break;
    }
    case 2: {  // value outside the enumeration
      static const char* bad[] = {"wizard", "Good", "EVIL", "unknown", "player_7", "player-1", "", "merlin ",
                                  "Logical Deduction", "player_0"};
      auto it = obj.begin();
      std::advance(it, static_cast<long>(rng.below(obj.size())));
      obj[it.key()] = bad[rng.below(10)];
      body = obj.dump();
      expected.reset();
      break;
    }
    case 3: {  // wrong type
      auto it = obj.begin();
      std::advance(it, static_cast<long>(rng.below(obj.size())));
      const json wrong[] = {json(1), json(nullptr), json(true), json::array({"good"}), json::object()};
      obj[it.key()] = wrong[rng.below(5)];
      body = obj.dump();
      expected.reset();
      break;
    }
    case 4:  // extra field
      obj["confidence"] = "high";
      body = obj.dump();
      expected.reset();
      break;
    case 5:  // truncated
      body = obj.dump();
      body.resize(rng.below(body.size()));
      expected.reset();
      break;
    case 6: {  // random bytes, no object at all
      const std::size_t n = rng.below(60);
      for (std::size_t i = 0; i < n; ++i) {
        char c = static_cast<char>(32 + rng.below(95));
        if (c == '{' || c == '}') c = '#';
        body += c;
      }
      expected.reset();
      break;
    }
    case 7: {  // valid keys nested one level down
      body = json{{"answer", obj}}.dump();
      expected.reset();
      break;
    }
    case 8:  // pretty-printed, surrounded by prose
      body = obj.dump(2);
      break;
  }
  return FuzzCase{kind, prose(rng) + body + prose(rng), expected};
}

}  // namespace avalon::testing
