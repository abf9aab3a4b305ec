#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace avalon {

enum class Persuasion : std::uint8_t {
  Assertion,
  Questioning,
  Suggestion,
  Agreement,
  LogicalDeduction,
  CompromiseConcession,
  CritiqueOpposition,
  AppealDefense,
};

inline constexpr std::array<Persuasion, 8> kAllPersuasion = {
    Persuasion::Assertion,        Persuasion::Questioning,          Persuasion::Suggestion,
    Persuasion::Agreement,        Persuasion::LogicalDeduction,     Persuasion::CompromiseConcession,
    Persuasion::CritiqueOpposition, Persuasion::AppealDefense};

// Identifier used in files and on the wire.
inline constexpr std::string_view persuasion_id(Persuasion p) {
  constexpr std::array<std::string_view, 8> ids = {
      "assertion",         "questioning",           "suggestion",          "agreement",
      "logical_deduction", "compromise_concession", "critique_opposition", "appeal_defense"};
  return ids[static_cast<int>(p)];
}

// Human-facing label.
inline constexpr std::string_view persuasion_label(Persuasion p) {
  constexpr std::array<std::string_view, 8> labels = {
      "Assertion",         "Questioning",           "Suggestion",          "Agreement",
      "Logical Deduction", "Compromise/Concession", "Critique/Opposition", "Appeal/Defense"};
  return labels[static_cast<int>(p)];
}

inline std::optional<Persuasion> parse_persuasion(std::string_view s) {
  for (Persuasion p : kAllPersuasion)
    if (persuasion_id(p) == s || persuasion_label(p) == s) return p;
  return std::nullopt;
}

enum class Deception : std::uint8_t { Commission, Omission, Influence };

inline constexpr std::string_view deception_id(Deception d) {
  switch (d) {
    case Deception::Commission: return "commission";
    case Deception::Omission: return "omission";
    case Deception::Influence: return "influence";
  }
  return "?";
}

inline std::optional<Deception> parse_deception(std::string_view s) {
  for (Deception d : {Deception::Commission, Deception::Omission, Deception::Influence})
    if (deception_id(d) == s) return d;
  return std::nullopt;
}

}  // namespace avalon
