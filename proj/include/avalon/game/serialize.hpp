#pragma once

#include <stdexcept>
#include <string>

#include "avalon/game/game.hpp"

namespace avalon {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline json actor_json(const std::optional<PlayerId>& actor) {
  return actor ? json(actor->key()) : json("system");
}

// Canonical event record: {"seq","t_ms","kind","actor","payload"}.
inline json event_to_json(const GameEvent& e) {
  json j;
  j["seq"] = e.seq;
  j["t_ms"] = e.t_ms;
  j["kind"] = std::string(event_kind_name(e.kind));
  j["actor"] = actor_json(e.actor);
  j["payload"] = e.payload;
  return j;
}

inline GameEvent event_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("event record is not an object");
  for (const char* f : {"seq", "t_ms", "kind", "actor", "payload"})
    if (!j.contains(f)) throw FormatError(std::string("event record missing '") + f + "'");
  if (!j["seq"].is_number_integer() || !j["t_ms"].is_number_integer())
    throw FormatError("event seq/t_ms must be integers");
  GameEvent e;
  e.seq = j["seq"].get<std::int64_t>();
  e.t_ms = j["t_ms"].get<std::int64_t>();
  auto kind = j["kind"].is_string() ? parse_event_kind(j["kind"].get<std::string>()) : std::nullopt;
  if (!kind) throw FormatError("unknown event kind " + j["kind"].dump());
  e.kind = *kind;
  if (!j["actor"].is_string()) throw FormatError("event actor must be a string");
  const auto actor = j["actor"].get<std::string>();
  if (actor != "system") {
    auto p = PlayerId::parse(actor);
    if (!p) throw FormatError("unknown actor '" + actor + "'");
    e.actor = *p;
  }
  e.payload = j["payload"];
  return e;
}

inline json state_to_json(const GameState& s) {
  json quests = json::array();
  for (const auto& q : s.quests) {
    json votes = json::object();
    for (PlayerId p : all_players()) votes[p.key()] = q.party_votes[p.index()];
    quests.push_back({{"index", q.index},
                      {"outcome", q.success ? "success" : "failure"},
                      {"party", members_json(q.party)},
                      {"party_votes", votes},
                      {"fail_count", q.fail_count}});
  }
  json j;
  j["phase"] = std::string(phase_name(s.phase));
  j["quest_index"] = s.quest_index;
  j["quests"] = quests;
  j["leader"] = s.leader.key();
  j["turn_holder"] = s.turn_holder.key();
  j["consecutive_rejections"] = s.consecutive_rejections;
  j["discussion_rounds"] = s.discussion_rounds_this_proposal;
  j["round"] = s.round;
  if (s.proposal)
    j["proposal"] = {{"leader", s.proposal->leader.key()},
                     {"members", members_json(s.proposal->members)},
                     {"confirmed", s.proposal->confirmed}};
  else
    j["proposal"] = nullptr;
  j["winner"] = s.winner ? json(std::string(alignment_name(*s.winner))) : json(nullptr);
  j["win_reason"] = std::string(win_reason_name(s.win_reason));
  return j;
}

}  // namespace avalon
