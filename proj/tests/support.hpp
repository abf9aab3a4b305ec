#pragma once

// Helpers for driving games step by step in tests.

#include <initializer_list>
#include <string>
#include <vector>

#include "avalon/data/game_log.hpp"
#include "avalon/game/game.hpp"

namespace avalon::testing {

inline GameConfig six_players() { return GameConfig{{"ann", "bob", "cat", "dan", "eve", "fay"}}; }

inline json party(std::initializer_list<int> seats) {
  json arr = json::array();
  for (int s : seats) arr.push_back(PlayerId(s).key());
  return arr;
}

struct Driver {
  explicit Driver(std::uint64_t seed = 1) : state(new_game(seed, six_players())) {}
  explicit Driver(GameState s) : state(std::move(s)) {}

  GameState state;
  std::vector<GameEvent> events;
  std::int64_t seq = 0;

  GameEvent make(EventKind k, std::optional<PlayerId> actor, json payload = json::object()) const {
    return GameEvent{seq + 1, (seq + 1) * 1000, k, actor, std::move(payload)};
  }

  const GameState& apply(EventKind k, std::optional<PlayerId> actor, json payload = json::object()) {
    GameEvent e = make(k, actor, std::move(payload));
    state = apply_event(state, e);
    seq = e.seq;
    events.push_back(std::move(e));
    return state;
  }

  void apply_all(std::vector<GameEvent> evs) {
    for (auto& e : evs) {
      e.seq = ++seq;
      e.t_ms = seq * 1000;
      state = apply_event(state, e);
      events.push_back(std::move(e));
    }
  }

  void chat(int seat, const std::string& text) { apply(EventKind::Chat, PlayerId(seat), {{"text", text}}); }
  void end_turn() { apply(EventKind::EndTurn, state.turn_holder); }

  // Leader proposes and confirms, then every seat takes one turn so the
  // turn returns to the leader.
  void propose(std::initializer_list<int> seats) {
    apply(EventKind::Propose, state.leader, {{"members", party(seats)}});
    apply(EventKind::ConfirmProposal, state.leader);
  }
  void discussion_cycle() {
    for (int i = 0; i < kNumPlayers; ++i) end_turn();
  }
  void start_vote() { apply(EventKind::StartPartyVote, state.leader); }
  void vote_all(bool approve) {
    for (PlayerId p : all_players()) apply(EventKind::PartyVote, p, {{"approve", approve}});
  }
  void votes(std::initializer_list<bool> approvals) {
    int seat = 1;
    for (bool a : approvals) apply(EventKind::PartyVote, PlayerId(seat++), {{"approve", a}});
  }
  // Every member votes success, except evil members when `evil_fail`.
  void quest(bool evil_fail) {
    const auto members = state.quest_party;
    for (PlayerId p : members) {
      const bool evil = alignment_of(state.role_of(p)) == Alignment::Evil;
      apply(EventKind::QuestVote, p, {{"success", !(evil && evil_fail)}});
    }
  }

  // One whole quest: propose the lowest seats (or a party containing evil
  // when `fail` is set), discuss, approve, run it.
  void play_quest(bool fail) {
    const int k = quest_party_size(state.quest_index);
    std::vector<PlayerId> members;
    if (fail) members.push_back(find_role(state.roles, Role::Morgana));
    for (PlayerId p : all_players()) {
      if (static_cast<int>(members.size()) == k) break;
      const bool evil = alignment_of(state.role_of(p)) == Alignment::Evil;
      if (!fail && evil) continue;
      if (std::find(members.begin(), members.end(), p) == members.end()) members.push_back(p);
    }
    apply(EventKind::Propose, state.leader, {{"members", members_json(members)}});
    apply(EventKind::ConfirmProposal, state.leader);
    discussion_cycle();
    start_vote();
    vote_all(true);
    quest(fail);
  }
};

// Two-round partial game used by the prompt golden files
// (tests/golden/make_golden.py renders the same game independently).
inline GameLog fixture_log() {
  GameState s = new_game(0, six_players());
  s.roles = {Role::LoyalServant, Role::Merlin, Role::Percival, Role::Morgana, Role::LoyalServant, Role::Assassin};
  Driver d(s);
  d.apply(EventKind::ConfirmProposal, PlayerId(1), {{"members", party({1, 2})}});
  const char* round1[] = {
      "This is the first round, we don't have a lot of information so I propose myself and the next person "
      "player-2.",
      "I agree with player-1. I am good too.",
      "I think I am fine with the team as well",
      "i am good with that",
      "No opinions in the first turn. I'm fine with this party",
      "Oh, yeah, I am good with this. We don't know anything at this point anyways"};
  for (int seat = 1; seat <= 6; ++seat) {
    d.chat(seat, round1[seat - 1]);
    d.end_turn();
  }
  d.start_vote();
  d.vote_all(true);
  d.quest(false);
  d.chat(2, "Quest one went well. I will keep player-1 and add player-3.");
  d.apply(EventKind::ConfirmProposal, PlayerId(2), {{"members", party({1, 2, 3})}});
  d.end_turn();
  d.chat(3, "Fine by me.");
  d.end_turn();
  return make_log("fixture", 0, s.roles, d.events);
}

}  // namespace avalon::testing
