#pragma once

#include <string>
#include <vector>

#include "avalon/data/game_log.hpp"

namespace avalon {

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

inline std::string alias_list(std::span<const PlayerId> players) {
  std::vector<std::string> names;
  for (PlayerId p : players) names.push_back(p.alias());
  return join(names, ", ");
}

// ---------------------------------------------------------------------------
// Global state templates

// "quest-1: success (party: player-1, player-2 | player votes: player-1: yes, ...)"
inline std::string render_quest(const QuestRecord& q) {
  std::vector<std::string> votes;
  for (PlayerId p : all_players()) votes.push_back(p.alias() + ": " + (q.party_votes[p.index()] ? "yes" : "no"));
  return "quest-" + std::to_string(q.index) + ": " + (q.success ? "success" : "failure") +
         " (party: " + alias_list(q.party) + " | player votes: " + join(votes, ", ") + ")";
}

inline std::vector<std::string> render_quest_lines(const GameState& s) {
  std::vector<std::string> lines;
  for (const auto& q : s.quests) lines.push_back(render_quest(q));
  return lines;
}

// Members of the current proposal, or empty when there is none.
inline std::string render_party(const GameState& s) {
  return s.proposal ? alias_list(s.proposal->members) : std::string();
}

// Quest lines, then the current proposal line when one exists.
inline std::string render_global_state(const GameState& s) {
  auto lines = render_quest_lines(s);
  if (s.proposal) lines.push_back("current party proposal: " + render_party(s));
  return join(lines, "\n");
}

// ---------------------------------------------------------------------------
// Round segmentation

struct ChatEntry {
  std::int64_t seq = 0;
  std::optional<PlayerId> speaker;  // nullopt = the "system" narrator
  std::string text;

  bool is_system() const { return !speaker.has_value(); }
  std::string line() const { return (speaker ? speaker->alias() : std::string("system")) + ": " + text; }
  bool operator==(const ChatEntry&) const = default;
};

struct RoundSegment {
  int index = 0;
  PlayerId leader;
  GameState before;  // snapshot before the round's first event
  std::vector<ChatEntry> entries;
};

// System narration for one transition (empty when nothing public changed).
inline std::vector<std::string> narrate(const GameState& before, const GameEvent& e, const GameState& after) {
  std::vector<std::string> out;
  switch (e.kind) {
    case EventKind::ConfirmProposal:
      out.push_back(e.actor->alias() + " proposed a party: " + render_party(after));
      break;
    case EventKind::PartyVote:
      if (after.phase != Phase::PartyVote) {
        std::vector<std::string> votes;
        for (PlayerId p : all_players()) {
          const bool yes = p == *e.actor ? e.payload["approve"].get<bool>() : *before.party_votes[p.index()];
          votes.push_back(p.alias() + ": " + (yes ? "Yes" : "No"));
        }
        out.push_back("Party Vote Outcome: " + join(votes, ", "));
        out.push_back(after.phase == Phase::QuestVote ? "Vote Succeeded! Initiating Quest Vote!" : "Vote Failed!");
      }
      break;
    case EventKind::QuestVote:
      if (after.quests.size() > before.quests.size())
        out.push_back(after.quests.back().success ? "Quest Succeeded!" : "Quest Failed!");
      break;
    default:
      break;
  }
  return out;
}

// Splits the game into conversation rounds. A round opens at the leader's
// seat and closes once every seat had a turn and the leader either moved to
// a vote or continued talking. Votes and quests that follow a round's
// discussion belong to that round.
inline std::vector<RoundSegment> segment_rounds(const GameLog& log) {
  std::vector<RoundSegment> segments;
  GameState s = initial_state(log);
  std::map<std::int64_t, std::string> text;
  for (const auto& u : log.utterances) text[u.seq] = u.text;

  for (const auto& e : log.events) {
    const int round = event_round(s, e);
    if (segments.empty() || segments.back().index != round) {
      RoundSegment seg;
      seg.index = round;
      seg.leader = s.leader;
      seg.before = s;
      if (segments.empty()) seg.entries.push_back({0, std::nullopt, "Game Started!"});
      segments.push_back(std::move(seg));
    }
    const GameState next = apply_event(s, e);
    auto& entries = segments.back().entries;
    if (e.kind == EventKind::Chat) {
      auto it = text.find(e.seq);
      entries.push_back({e.seq, e.actor, it != text.end() ? it->second : e.payload.value("text", std::string())});
    }
    for (auto& line : narrate(s, e, next)) entries.push_back({e.seq, std::nullopt, std::move(line)});
    s = next;
  }
  return segments;
}

}  // namespace avalon
