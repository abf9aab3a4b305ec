#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace avalon {

inline constexpr int kNumPlayers = 6;
inline constexpr int kNumQuests = 5;

// Seat-indexed player handle. Seats are 1-based to match the "player-X"
// aliases used in logs and prompts.
class PlayerId {
 public:
  constexpr PlayerId() = default;
  constexpr explicit PlayerId(int seat) : seat_(seat) {
    if (seat < 1 || seat > kNumPlayers) throw std::out_of_range("seat out of range");
  }

  constexpr int seat() const { return seat_; }
  constexpr int index() const { return seat_ - 1; }

  // "player_3", used for JSON keys and wire actors.
  std::string key() const { return "player_" + std::to_string(seat_); }
  // "player-3", used in text renderings.
  std::string alias() const { return "player-" + std::to_string(seat_); }

  constexpr PlayerId next() const { return PlayerId(seat_ % kNumPlayers + 1); }

  // Accepts "player_3", "player-3", "player3" or "3".
  static std::optional<PlayerId> parse(std::string_view s) {
    constexpr std::string_view prefix = "player";
    if (s.substr(0, prefix.size()) == prefix) {
      s.remove_prefix(prefix.size());
      if (!s.empty() && (s.front() == '_' || s.front() == '-')) s.remove_prefix(1);
    }
    if (s.size() != 1 || s[0] < '1' || s[0] > '0' + kNumPlayers) return std::nullopt;
    return PlayerId(s[0] - '0');
  }

  constexpr auto operator<=>(const PlayerId&) const = default;

 private:
  int seat_ = 1;
};

inline std::array<PlayerId, kNumPlayers> all_players() {
  return {PlayerId(1), PlayerId(2), PlayerId(3), PlayerId(4), PlayerId(5), PlayerId(6)};
}

enum class Alignment : std::uint8_t { Good, Evil };

enum class Role : std::uint8_t { Merlin, Percival, LoyalServant, Morgana, Assassin };

inline constexpr Alignment alignment_of(Role r) {
  return (r == Role::Morgana || r == Role::Assassin) ? Alignment::Evil : Alignment::Good;
}

inline constexpr std::string_view role_name(Role r) {
  switch (r) {
    case Role::Merlin: return "merlin";
    case Role::Percival: return "percival";
    case Role::LoyalServant: return "servant";
    case Role::Morgana: return "morgana";
    case Role::Assassin: return "assassin";
  }
  return "?";
}

inline std::optional<Role> parse_role(std::string_view s) {
  for (Role r : {Role::Merlin, Role::Percival, Role::LoyalServant, Role::Morgana, Role::Assassin})
    if (role_name(r) == s) return r;
  return std::nullopt;
}

inline constexpr std::string_view alignment_name(Alignment a) {
  return a == Alignment::Good ? "good" : "evil";
}

inline std::optional<Alignment> parse_alignment(std::string_view s) {
  if (s == "good") return Alignment::Good;
  if (s == "evil") return Alignment::Evil;
  return std::nullopt;
}

// Role groups used for beliefs, predictions and scoring.
enum class Label : std::uint8_t { Good, Evil, Merlin, Unknown };

inline constexpr std::string_view label_name(Label l) {
  switch (l) {
    case Label::Good: return "good";
    case Label::Evil: return "evil";
    case Label::Merlin: return "merlin";
    case Label::Unknown: return "unknown";
  }
  return "?";
}

inline std::optional<Label> parse_label(std::string_view s) {
  for (Label l : {Label::Good, Label::Evil, Label::Merlin, Label::Unknown})
    if (label_name(l) == s) return l;
  return std::nullopt;
}

inline constexpr Label label_of(Role r) {
  if (r == Role::Merlin) return Label::Merlin;
  return alignment_of(r) == Alignment::Evil ? Label::Evil : Label::Good;
}

// Fixed six-player roster multiset, in canonical order.
inline constexpr std::array<Role, kNumPlayers> kRoleMultiset = {
    Role::Merlin, Role::Percival, Role::LoyalServant,
    Role::LoyalServant, Role::Morgana, Role::Assassin};

using RoleAssignment = std::array<Role, kNumPlayers>;

inline bool is_valid_roster(const RoleAssignment& roles) {
  std::array<int, 5> counts{};
  for (Role r : roles) ++counts[static_cast<int>(r)];
  return counts == std::array<int, 5>{1, 1, 2, 1, 1};
}

inline PlayerId find_role(const RoleAssignment& roles, Role wanted) {
  for (PlayerId p : all_players())
    if (roles[p.index()] == wanted) return p;
  throw std::logic_error("role missing from roster");
}

// Per-seat role-group belief. Unknown only appears before any prediction.
using BeliefVector = std::array<Label, kNumPlayers>;

inline BeliefVector unknown_beliefs() {
  BeliefVector b;
  b.fill(Label::Unknown);
  return b;
}

inline BeliefVector labels_of(const RoleAssignment& roles) {
  BeliefVector b;
  for (int i = 0; i < kNumPlayers; ++i) b[i] = label_of(roles[i]);
  return b;
}

}  // namespace avalon
