#pragma once

// Six-player Avalon rules engine.
//
// GameState is an immutable value; apply_event() returns the successor state
// or throws IllegalEvent and leaves the input untouched. A game is fully
// determined by (seed, rejection limit, event sequence), which is what makes
// recorded logs replayable.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "avalon/game/rng.hpp"
#include "avalon/game/types.hpp"

namespace avalon {

using json = nlohmann::json;

enum class Phase : std::uint8_t { Lobby, Discussion, PartyVote, QuestVote, Assassination, Finished };

inline constexpr std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::Lobby: return "lobby";
    case Phase::Discussion: return "discussion";
    case Phase::PartyVote: return "party_vote";
    case Phase::QuestVote: return "quest_vote";
    case Phase::Assassination: return "assassination";
    case Phase::Finished: return "finished";
  }
  return "?";
}

enum class WinReason : std::uint8_t {
  None,
  ThreeFailures,
  RejectionLimit,
  AssassinFoundMerlin,
  AssassinMissed,
  AssassinNoPick,
};

inline constexpr std::string_view win_reason_name(WinReason r) {
  switch (r) {
    case WinReason::None: return "none";
    case WinReason::ThreeFailures: return "three_failures";
    case WinReason::RejectionLimit: return "rejection_limit";
    case WinReason::AssassinFoundMerlin: return "assassin_found_merlin";
    case WinReason::AssassinMissed: return "assassin_missed";
    case WinReason::AssassinNoPick: return "assassin_no_pick";
  }
  return "?";
}

enum class EventKind : std::uint8_t {
  Chat,
  EndTurn,
  Propose,
  ConfirmProposal,
  StartPartyVote,
  PartyVote,
  QuestVote,
  Assassinate,
  DeadlineExpired,
  RoundBoundary,
};

inline constexpr std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::Chat: return "chat";
    case EventKind::EndTurn: return "end_turn";
    case EventKind::Propose: return "propose";
    case EventKind::ConfirmProposal: return "confirm_proposal";
    case EventKind::StartPartyVote: return "start_party_vote";
    case EventKind::PartyVote: return "party_vote";
    case EventKind::QuestVote: return "quest_vote";
    case EventKind::Assassinate: return "assassinate";
    case EventKind::DeadlineExpired: return "deadline_expired";
    case EventKind::RoundBoundary: return "round_boundary";
  }
  return "?";
}

inline std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(EventKind::RoundBoundary); ++i) {
    auto k = static_cast<EventKind>(i);
    if (event_kind_name(k) == s) return k;
  }
  return std::nullopt;
}

inline constexpr bool is_system_kind(EventKind k) {
  return k == EventKind::DeadlineExpired || k == EventKind::RoundBoundary;
}

struct GameEvent {
  std::int64_t seq = 0;
  std::int64_t t_ms = 0;
  EventKind kind = EventKind::Chat;
  std::optional<PlayerId> actor;  // nullopt = system
  json payload = json::object();

  bool is_default() const { return payload.is_object() && payload.value("default", false); }
  bool operator==(const GameEvent&) const = default;
};

struct GameConfig {
  std::vector<std::string> players;
  int rejection_limit = 5;
};

struct PartyProposal {
  PlayerId leader;
  std::vector<PlayerId> members;  // seat order
  bool confirmed = false;
  bool operator==(const PartyProposal&) const = default;
};

struct QuestRecord {
  int index = 0;
  bool success = false;
  std::vector<PlayerId> party;                 // seat order
  std::array<bool, kNumPlayers> party_votes{};  // approval, indexed by seat
  int fail_count = 0;
  bool operator==(const QuestRecord&) const = default;
};

struct KnowledgeView {
  PlayerId viewer;
  Role own_role = Role::LoyalServant;
  std::vector<PlayerId> marked_red;
  std::vector<PlayerId> marked_red_blue;
  bool operator==(const KnowledgeView&) const = default;
};

struct GameState {
  std::uint64_t seed = 0;
  RoleAssignment roles{};
  int rejection_limit = 5;

  Phase phase = Phase::Lobby;
  std::optional<Alignment> winner;
  WinReason win_reason = WinReason::None;

  int quest_index = 1;
  std::vector<QuestRecord> quests;

  PlayerId leader;
  PlayerId turn_holder;
  std::optional<PartyProposal> proposal;
  int consecutive_rejections = 0;
  int discussion_rounds_this_proposal = 0;

  std::array<std::optional<bool>, kNumPlayers> party_votes{};
  std::vector<PlayerId> quest_party;
  std::array<bool, kNumPlayers> quest_party_votes{};
  std::array<std::optional<bool>, kNumPlayers> quest_votes{};
  std::optional<PlayerId> assassination_target;

  // Conversation round bookkeeping (a round is one pass of turns starting
  // at the leader's seat).
  int round = 1;
  bool round_pending = false;       // next discussion event opens a round
  bool awaiting_leader = false;     // turn came back to the leader

  std::int64_t last_seq = 0;
  std::int64_t phase_serial = 0;    // bumps whenever a fresh deadline starts

  int successes() const {
    return static_cast<int>(std::count_if(quests.begin(), quests.end(),
                                          [](const QuestRecord& q) { return q.success; }));
  }
  int failures() const { return static_cast<int>(quests.size()) - successes(); }
  Role role_of(PlayerId p) const { return roles[p.index()]; }

  bool operator==(const GameState&) const = default;
};

enum class RejectReason : std::uint8_t {
  IllegalActor,
  IllegalPhase,
  MalformedPayload,
  RuleViolation,
  StaleDeadline,
  OutOfOrder,
};

inline constexpr std::string_view reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::IllegalActor: return "illegal_actor";
    case RejectReason::IllegalPhase: return "illegal_phase";
    case RejectReason::MalformedPayload: return "malformed_payload";
    case RejectReason::RuleViolation: return "rule_violation";
    case RejectReason::StaleDeadline: return "stale_deadline";
    case RejectReason::OutOfOrder: return "out_of_order";
  }
  return "?";
}

class IllegalEvent : public std::runtime_error {
 public:
  IllegalEvent(RejectReason reason, const std::string& detail)
      : std::runtime_error(std::string(reject_reason_name(reason)) + ": " + detail), reason_(reason) {}
  RejectReason reason() const { return reason_; }

 private:
  RejectReason reason_;
};

// Official six-player schedule.
inline int quest_party_size(int quest_index) {
  static constexpr std::array<int, kNumQuests> sizes = {2, 3, 4, 3, 4};
  if (quest_index < 1 || quest_index > kNumQuests) throw std::out_of_range("quest index must be 1..5");
  return sizes[quest_index - 1];
}

inline RoleAssignment assign_roles(std::uint64_t seed) {
  RoleAssignment roles = kRoleMultiset;
  SplitMix64 rng(mix_seed(seed, 0x726f6c6573ull));
  rng.shuffle(roles.begin(), roles.end());
  return roles;
}

inline GameState new_game(std::uint64_t seed, const GameConfig& config) {
  if (config.players.size() != kNumPlayers)
    throw std::invalid_argument("a game needs exactly six players, got " +
                                std::to_string(config.players.size()));
  std::set<std::string> distinct(config.players.begin(), config.players.end());
  if (distinct.size() != kNumPlayers) throw std::invalid_argument("player names must be distinct");
  if (config.rejection_limit < 1) throw std::invalid_argument("rejection limit must be positive");

  GameState s;
  s.seed = seed;
  s.roles = assign_roles(seed);
  s.rejection_limit = config.rejection_limit;
  s.phase = Phase::Discussion;
  s.leader = PlayerId(1);
  s.turn_holder = PlayerId(1);
  s.quest_index = 1;
  return s;
}

inline KnowledgeView knowledge_view(const GameState& s, PlayerId viewer) {
  if (s.phase == Phase::Lobby) throw std::logic_error("game has not started");
  KnowledgeView v;
  v.viewer = viewer;
  v.own_role = s.role_of(viewer);
  switch (v.own_role) {
    case Role::Merlin:
      for (PlayerId p : all_players())
        if (alignment_of(s.role_of(p)) == Alignment::Evil) v.marked_red.push_back(p);
      break;
    case Role::Morgana:
    case Role::Assassin:
      for (PlayerId p : all_players())
        if (p != viewer && alignment_of(s.role_of(p)) == Alignment::Evil) v.marked_red.push_back(p);
      break;
    case Role::Percival:
      for (PlayerId p : all_players())
        if (s.role_of(p) == Role::Merlin || s.role_of(p) == Role::Morgana) v.marked_red_blue.push_back(p);
      break;
    case Role::LoyalServant:
      break;
  }
  return v;
}

// Strict majority of six; ties reject.
inline bool tally_party_vote(std::span<const std::pair<PlayerId, bool>> votes) {
  if (votes.size() != kNumPlayers) throw std::invalid_argument("party vote needs exactly six votes");
  std::array<bool, kNumPlayers> seen{};
  int yes = 0;
  for (const auto& [voter, approve] : votes) {
    if (seen[voter.index()]) throw std::invalid_argument("duplicate voter " + voter.alias());
    seen[voter.index()] = true;
    yes += approve ? 1 : 0;
  }
  return yes > kNumPlayers / 2;
}

struct QuestTally {
  bool success = false;
  int fail_count = 0;
};

// A single fail vote fails the quest.
inline QuestTally tally_quest_vote(std::span<const PlayerId> members,
                                   std::span<const std::pair<PlayerId, bool>> votes) {
  if (members.empty()) throw std::invalid_argument("quest party is empty");
  if (votes.size() != members.size()) throw std::invalid_argument("one vote per party member required");
  std::array<bool, kNumPlayers> seen{};
  QuestTally t;
  for (const auto& [voter, success] : votes) {
    if (std::find(members.begin(), members.end(), voter) == members.end())
      throw std::invalid_argument("vote from non-member " + voter.alias());
    if (seen[voter.index()]) throw std::invalid_argument("duplicate quest vote from " + voter.alias());
    seen[voter.index()] = true;
    t.fail_count += success ? 0 : 1;
  }
  t.success = t.fail_count == 0;
  return t;
}

// Winner derived from the quest record and assassination alone.
inline std::optional<Alignment> game_outcome(const GameState& s) {
  if (s.failures() >= 3) return Alignment::Evil;
  if (s.consecutive_rejections >= s.rejection_limit) return Alignment::Evil;
  if (s.successes() >= 3 && s.phase == Phase::Finished) {
    if (s.assassination_target && s.role_of(*s.assassination_target) == Role::Merlin)
      return Alignment::Evil;
    return Alignment::Good;
  }
  return std::nullopt;
}

namespace detail {

inline PlayerId require_player(const GameEvent& e) {
  if (!e.actor) throw IllegalEvent(RejectReason::IllegalActor, "system cannot issue " +
                                                                   std::string(event_kind_name(e.kind)));
  return *e.actor;
}

inline void require_phase(const GameState& s, Phase p, const GameEvent& e) {
  if (s.phase != p)
    throw IllegalEvent(RejectReason::IllegalPhase, std::string(event_kind_name(e.kind)) + " during " +
                                                       std::string(phase_name(s.phase)));
}

inline bool payload_bool(const GameEvent& e, const char* field) {
  if (!e.payload.is_object() || !e.payload.contains(field) || !e.payload[field].is_boolean())
    throw IllegalEvent(RejectReason::MalformedPayload, std::string("expected boolean '") + field + "'");
  return e.payload[field].get<bool>();
}

inline std::vector<PlayerId> payload_members(const GameEvent& e) {
  if (!e.payload.is_object() || !e.payload.contains("members") || !e.payload["members"].is_array())
    throw IllegalEvent(RejectReason::MalformedPayload, "expected 'members' array");
  std::vector<PlayerId> out;
  for (const auto& m : e.payload["members"]) {
    auto p = m.is_string() ? PlayerId::parse(m.get<std::string>()) : std::nullopt;
    if (!p) throw IllegalEvent(RejectReason::MalformedPayload, "bad party member " + m.dump());
    out.push_back(*p);
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end())
    throw IllegalEvent(RejectReason::RuleViolation, "duplicate party member");
  return out;
}

inline void begin_discussion(GameState& s, PlayerId leader) {
  s.phase = Phase::Discussion;
  s.leader = leader;
  s.turn_holder = leader;
  s.discussion_rounds_this_proposal = 0;
  s.awaiting_leader = false;
  s.round_pending = true;
  s.proposal.reset();
  s.party_votes = {};
  ++s.phase_serial;
}

inline void finish(GameState& s, Alignment winner, WinReason why) {
  s.phase = Phase::Finished;
  s.winner = winner;
  s.win_reason = why;
  ++s.phase_serial;
}

inline void require_leader_turn(const GameState& s, PlayerId actor) {
  if (actor != s.leader || s.turn_holder != s.leader)
    throw IllegalEvent(RejectReason::IllegalActor, actor.alias() + " is not the leader on turn");
}

inline void resolve_party_vote(GameState& s) {
  std::vector<std::pair<PlayerId, bool>> votes;
  for (PlayerId p : all_players()) votes.emplace_back(p, *s.party_votes[p.index()]);
  const bool approved = tally_party_vote(votes);
  const PlayerId next_leader = s.leader.next();
  if (approved) {
    s.consecutive_rejections = 0;
    s.quest_party = s.proposal->members;
    for (PlayerId p : all_players()) s.quest_party_votes[p.index()] = *s.party_votes[p.index()];
    s.quest_votes = {};
    s.phase = Phase::QuestVote;
    s.leader = next_leader;
    s.turn_holder = next_leader;
    s.discussion_rounds_this_proposal = 0;
    s.proposal.reset();
    ++s.phase_serial;
    return;
  }
  ++s.consecutive_rejections;
  if (s.consecutive_rejections >= s.rejection_limit) {
    finish(s, Alignment::Evil, WinReason::RejectionLimit);
    return;
  }
  begin_discussion(s, next_leader);
}

inline void resolve_quest(GameState& s) {
  std::vector<std::pair<PlayerId, bool>> votes;
  for (PlayerId p : s.quest_party) votes.emplace_back(p, *s.quest_votes[p.index()]);
  const QuestTally t = tally_quest_vote(s.quest_party, votes);
  s.quests.push_back(QuestRecord{s.quest_index, t.success, s.quest_party, s.quest_party_votes, t.fail_count});
  s.quest_party.clear();
  s.quest_votes = {};
  if (s.failures() >= 3) {
    finish(s, Alignment::Evil, WinReason::ThreeFailures);
  } else if (s.successes() >= 3) {
    s.phase = Phase::Assassination;
    ++s.phase_serial;
  } else {
    ++s.quest_index;
    begin_discussion(s, s.leader);
  }
}

}  // namespace detail

// Round index the event belongs to when applied to `s`.
inline int event_round(const GameState& s, const GameEvent& e) {
  if (s.phase != Phase::Discussion || e.kind == EventKind::RoundBoundary) return s.round;
  if (s.round_pending) return s.round + 1;
  if (s.awaiting_leader && (e.kind == EventKind::Chat || e.kind == EventKind::EndTurn)) return s.round + 1;
  return s.round;
}

inline GameState apply_event(const GameState& state, const GameEvent& e) {
  using detail::require_phase;
  using detail::require_player;
  if (state.phase == Phase::Lobby) throw IllegalEvent(RejectReason::IllegalPhase, "game has not started");
  if (state.phase == Phase::Finished) throw IllegalEvent(RejectReason::IllegalPhase, "game is finished");
  if (e.seq <= state.last_seq)
    throw IllegalEvent(RejectReason::OutOfOrder, "seq " + std::to_string(e.seq) + " not after " +
                                                     std::to_string(state.last_seq));
  if (is_system_kind(e.kind) && e.actor)
    throw IllegalEvent(RejectReason::IllegalActor, "only the system may issue " +
                                                       std::string(event_kind_name(e.kind)));

  GameState s = state;
  const int round = event_round(state, e);
  if (round != s.round) {
    s.round = round;
    s.round_pending = false;
    s.awaiting_leader = false;
  }

  switch (e.kind) {
    case EventKind::Chat: {
      require_phase(s, Phase::Discussion, e);
      const PlayerId actor = require_player(e);
      if (actor != s.turn_holder) throw IllegalEvent(RejectReason::IllegalActor, actor.alias() + " is not on turn");
      if (!e.payload.is_object() || !e.payload.contains("text") || !e.payload["text"].is_string() ||
          e.payload["text"].get<std::string>().empty())
        throw IllegalEvent(RejectReason::MalformedPayload, "chat needs non-empty 'text'");
      break;
    }
    case EventKind::EndTurn: {
      require_phase(s, Phase::Discussion, e);
      const PlayerId actor = require_player(e);
      if (actor != s.turn_holder) throw IllegalEvent(RejectReason::IllegalActor, actor.alias() + " is not on turn");
      s.turn_holder = s.turn_holder.next();
      ++s.phase_serial;
      if (s.turn_holder == s.leader) {
        ++s.discussion_rounds_this_proposal;
        s.awaiting_leader = true;
      }
      break;
    }
    case EventKind::Propose:
    case EventKind::ConfirmProposal: {
      require_phase(s, Phase::Discussion, e);
      const PlayerId actor = require_player(e);
      detail::require_leader_turn(s, actor);
      const bool has_members = e.payload.is_object() && e.payload.contains("members");
      if (e.kind == EventKind::Propose || has_members) {
        auto members = detail::payload_members(e);
        if (static_cast<int>(members.size()) != quest_party_size(s.quest_index))
          throw IllegalEvent(RejectReason::RuleViolation,
                             "quest " + std::to_string(s.quest_index) + " needs a party of " +
                                 std::to_string(quest_party_size(s.quest_index)));
        s.proposal = PartyProposal{actor, std::move(members), false};
      } else if (!s.proposal) {
        throw IllegalEvent(RejectReason::RuleViolation, "no party proposed");
      }
      if (e.kind == EventKind::ConfirmProposal) {
        s.proposal->confirmed = true;
        if (e.is_default()) ++s.phase_serial;
      }
      break;
    }
    case EventKind::StartPartyVote: {
      require_phase(s, Phase::Discussion, e);
      const PlayerId actor = require_player(e);
      detail::require_leader_turn(s, actor);
      if (!s.proposal || !s.proposal->confirmed)
        throw IllegalEvent(RejectReason::RuleViolation, "no confirmed party proposal");
      if (s.discussion_rounds_this_proposal < 1)
        throw IllegalEvent(RejectReason::RuleViolation, "one round of discussion is required before a vote");
      s.phase = Phase::PartyVote;
      s.party_votes = {};
      ++s.phase_serial;
      break;
    }
    case EventKind::PartyVote: {
      require_phase(s, Phase::PartyVote, e);
      const PlayerId actor = require_player(e);
      const bool approve = detail::payload_bool(e, "approve");
      if (s.party_votes[actor.index()])
        throw IllegalEvent(RejectReason::RuleViolation, actor.alias() + " already voted");
      s.party_votes[actor.index()] = approve;
      if (std::all_of(s.party_votes.begin(), s.party_votes.end(), [](const auto& v) { return v.has_value(); }))
        detail::resolve_party_vote(s);
      break;
    }
    case EventKind::QuestVote: {
      require_phase(s, Phase::QuestVote, e);
      const PlayerId actor = require_player(e);
      if (std::find(s.quest_party.begin(), s.quest_party.end(), actor) == s.quest_party.end())
        throw IllegalEvent(RejectReason::IllegalActor, actor.alias() + " is not in the quest party");
      const bool success = detail::payload_bool(e, "success");
      if (s.quest_votes[actor.index()])
        throw IllegalEvent(RejectReason::RuleViolation, actor.alias() + " already voted");
      if (!success && alignment_of(s.role_of(actor)) == Alignment::Good)
        throw IllegalEvent(RejectReason::RuleViolation, "good players must vote for success");
      s.quest_votes[actor.index()] = success;
      if (std::all_of(s.quest_party.begin(), s.quest_party.end(),
                      [&](PlayerId p) { return s.quest_votes[p.index()].has_value(); }))
        detail::resolve_quest(s);
      break;
    }
    case EventKind::Assassinate: {
      require_phase(s, Phase::Assassination, e);
      const PlayerId actor = require_player(e);
      if (s.role_of(actor) != Role::Assassin)
        throw IllegalEvent(RejectReason::IllegalActor, actor.alias() + " is not the assassin");
      if (!e.payload.is_object() || !e.payload.contains("target"))
        throw IllegalEvent(RejectReason::MalformedPayload, "assassinate needs 'target'");
      const json& target = e.payload["target"];
      if (target.is_null()) {
        detail::finish(s, Alignment::Good, WinReason::AssassinNoPick);
        break;
      }
      auto victim = target.is_string() ? PlayerId::parse(target.get<std::string>()) : std::nullopt;
      if (!victim) throw IllegalEvent(RejectReason::MalformedPayload, "bad target " + target.dump());
      s.assassination_target = *victim;
      if (s.role_of(*victim) == Role::Merlin)
        detail::finish(s, Alignment::Evil, WinReason::AssassinFoundMerlin);
      else
        detail::finish(s, Alignment::Good, WinReason::AssassinMissed);
      break;
    }
    case EventKind::DeadlineExpired: {
      if (!e.payload.is_object() || !e.payload.contains("phase_serial") ||
          !e.payload["phase_serial"].is_number_integer())
        throw IllegalEvent(RejectReason::MalformedPayload, "deadline_expired needs 'phase_serial'");
      if (e.payload["phase_serial"].get<std::int64_t>() != s.phase_serial)
        throw IllegalEvent(RejectReason::StaleDeadline, "deadline belongs to an earlier phase");
      break;
    }
    case EventKind::RoundBoundary: {
      if (!e.payload.is_object() || !e.payload.contains("round") || !e.payload["round"].is_number_integer() ||
          e.payload["round"].get<int>() != s.round)
        throw IllegalEvent(RejectReason::MalformedPayload, "round marker does not match round " +
                                                               std::to_string(s.round));
      break;
    }
  }
  s.last_seq = e.seq;
  return s;
}

// Folds an event sequence from a fresh game.
inline GameState replay(std::uint64_t seed, std::span<const GameEvent> events, int rejection_limit = 5) {
  GameConfig cfg{{"p1", "p2", "p3", "p4", "p5", "p6"}, rejection_limit};
  GameState s = new_game(seed, cfg);
  for (const auto& e : events) s = apply_event(s, e);
  return s;
}

// ---------------------------------------------------------------------------
// Deadlines and timeout defaults

struct Timing {
  std::chrono::milliseconds turn{std::chrono::seconds(200)};
  std::chrono::milliseconds vote{std::chrono::seconds(30)};
  std::chrono::milliseconds assassination{std::chrono::seconds(200)};
};

struct Deadline {
  std::int64_t phase_serial = 0;
  Phase phase = Phase::Lobby;
  std::chrono::milliseconds duration{0};
  bool operator==(const Deadline&) const = default;
};

inline std::optional<Deadline> deadline_for(const GameState& s, const Timing& timing) {
  switch (s.phase) {
    case Phase::Discussion: return Deadline{s.phase_serial, s.phase, timing.turn};
    case Phase::PartyVote:
    case Phase::QuestVote: return Deadline{s.phase_serial, s.phase, timing.vote};
    case Phase::Assassination: return Deadline{s.phase_serial, s.phase, timing.assassination};
    default: return std::nullopt;
  }
}

// Uniform draw over all member sets of the required size, seeded by the game
// seed and the phase serial so replays reproduce it.
inline std::vector<PlayerId> random_party(const GameState& s) {
  const int k = quest_party_size(s.quest_index);
  std::vector<std::vector<PlayerId>> sets;
  for (unsigned mask = 0; mask < (1u << kNumPlayers); ++mask) {
    if (std::popcount(mask) != k) continue;
    std::vector<PlayerId> members;
    for (int i = 0; i < kNumPlayers; ++i)
      if (mask & (1u << i)) members.emplace_back(i + 1);
    sets.push_back(std::move(members));
  }
  std::sort(sets.begin(), sets.end());
  SplitMix64 rng(mix_seed(s.seed, static_cast<std::uint64_t>(s.phase_serial) + 0x7061727479ull));
  return sets[rng.below(sets.size())];
}

inline json members_json(std::span<const PlayerId> members) {
  json arr = json::array();
  for (PlayerId p : members) arr.push_back(p.key());
  return arr;
}

// Events that stand in for absent player actions when a deadline lapses.
// Returns nothing for a stale deadline. The first event is always the
// deadline_expired marker; seq numbers are left for the caller to assign.
inline std::vector<GameEvent> default_action(const GameState& s, const Deadline& d) {
  std::vector<GameEvent> out;
  if (d.phase_serial != s.phase_serial || s.phase == Phase::Finished || s.phase == Phase::Lobby) return out;
  out.push_back(GameEvent{0, 0, EventKind::DeadlineExpired, std::nullopt, {{"phase_serial", s.phase_serial}}});
  auto by = [&](EventKind k, PlayerId p, json payload) {
    payload["default"] = true;
    out.push_back(GameEvent{0, 0, k, p, std::move(payload)});
  };
  switch (s.phase) {
    case Phase::Discussion:
      if (s.turn_holder != s.leader) {
        by(EventKind::EndTurn, s.turn_holder, json::object());
      } else if (!s.proposal || !s.proposal->confirmed) {
        by(EventKind::ConfirmProposal, s.leader, {{"members", members_json(random_party(s))}});
      } else if (s.discussion_rounds_this_proposal >= 1) {
        by(EventKind::StartPartyVote, s.leader, json::object());
      } else {
        by(EventKind::EndTurn, s.leader, json::object());
      }
      break;
    case Phase::PartyVote:
      for (PlayerId p : all_players())
        if (!s.party_votes[p.index()]) by(EventKind::PartyVote, p, {{"approve", true}});
      break;
    case Phase::QuestVote:
      for (PlayerId p : s.quest_party)
        if (!s.quest_votes[p.index()]) by(EventKind::QuestVote, p, {{"success", true}});
      break;
    case Phase::Assassination:
      by(EventKind::Assassinate, find_role(s.roles, Role::Assassin), {{"target", nullptr}});
      break;
    default:
      break;
  }
  return out;
}

}  // namespace avalon
