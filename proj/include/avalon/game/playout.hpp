#pragma once

#include <functional>
#include <string>
#include <vector>

#include "avalon/game/game.hpp"

namespace avalon {

struct PlayoutOptions {
  double chat_prob = 0.35;
  double timeout_prob = 0.05;
  double approve_prob = 0.6;
  double evil_fail_prob = 0.5;
  int max_events = 20000;
};

struct Playout {
  GameState final_state;
  std::vector<GameEvent> events;
};

// Drives a game to completion with seeded random legal moves and occasional
// deadline expiries. Every emitted event has already been accepted by
// apply_event, so `events` replays to `final_state`.
inline Playout random_playout(std::uint64_t seed, const PlayoutOptions& opt = {}) {
  GameState s = new_game(seed, GameConfig{{"a", "b", "c", "d", "e", "f"}});
  SplitMix64 rng(mix_seed(seed, 0x706c61796f7574ull));
  Playout out;
  std::int64_t seq = 0;
  auto push = [&](GameEvent e) {
    e.seq = ++seq;
    e.t_ms = seq * 1000;
    s = apply_event(s, e);
    out.events.push_back(std::move(e));
  };
  auto coin = [&](double p) { return rng.uniform01() < p; };

  while (s.phase != Phase::Finished) {
    if (static_cast<int>(out.events.size()) > opt.max_events)
      throw std::logic_error("playout did not terminate");
    if (coin(opt.timeout_prob)) {
      for (auto& e : default_action(s, Deadline{s.phase_serial, s.phase, {}})) push(e);
      continue;
    }
    switch (s.phase) {
      case Phase::Discussion: {
        const PlayerId p = s.turn_holder;
        if (coin(opt.chat_prob)) {
          push({0, 0, EventKind::Chat, p, {{"text", "message " + std::to_string(seq)}}});
        } else if (p == s.leader && (!s.proposal || !s.proposal->confirmed)) {
          GameState probe = s;
          probe.phase_serial = static_cast<std::int64_t>(rng.next() >> 1);
          push({0, 0, EventKind::Propose, p, {{"members", members_json(random_party(probe))}}});
          push({0, 0, EventKind::ConfirmProposal, p, json::object()});
        } else if (p == s.leader && s.discussion_rounds_this_proposal >= 1 && coin(0.8)) {
          push({0, 0, EventKind::StartPartyVote, p, json::object()});
        } else {
          push({0, 0, EventKind::EndTurn, p, json::object()});
        }
        break;
      }
      case Phase::PartyVote: {
        std::vector<PlayerId> pending;
        for (PlayerId p : all_players())
          if (!s.party_votes[p.index()]) pending.push_back(p);
        const PlayerId p = pending[rng.below(pending.size())];
        push({0, 0, EventKind::PartyVote, p, {{"approve", coin(opt.approve_prob)}}});
        break;
      }
      case Phase::QuestVote: {
        std::vector<PlayerId> pending;
        for (PlayerId p : s.quest_party)
          if (!s.quest_votes[p.index()]) pending.push_back(p);
        const PlayerId p = pending[rng.below(pending.size())];
        const bool evil = alignment_of(s.role_of(p)) == Alignment::Evil;
        push({0, 0, EventKind::QuestVote, p, {{"success", !(evil && coin(opt.evil_fail_prob))}}});
        break;
      }
      case Phase::Assassination: {
        const PlayerId target(static_cast<int>(rng.below(kNumPlayers)) + 1);
        push({0, 0, EventKind::Assassinate, find_role(s.roles, Role::Assassin), {{"target", target.key()}}});
        break;
      }
      default:
        throw std::logic_error("unexpected phase in playout");
    }
  }
  out.final_state = s;
  return out;
}

}  // namespace avalon
