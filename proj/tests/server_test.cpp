#include <gtest/gtest.h>

#include <cstdlib>

#include "avalon/server/bots.hpp"

namespace avalon {
namespace {

struct Table {
  std::int64_t now = 1000;
  Session session;
  std::array<Session::ConnId, kNumPlayers> conn{};
  std::array<std::vector<json>, kNumPlayers> got;

  explicit Table(SessionConfig cfg = {}) : session(std::move(cfg), [this] { return now; }) {
    for (PlayerId p : all_players()) {
      conn[p.index()] = session.connect([this, p](const std::string& m) { got[p.index()].push_back(json::parse(m)); });
      send(p, "join", {{"seat", p.key()}});
    }
  }

  HandleOutcome send(PlayerId p, const std::string& type, json payload = json::object()) {
    return session.handle(conn[p.index()], json{{"type", type}, {"payload", payload}}.dump());
  }
  GameState st() const { return session.state(); }
  PlayerId role(Role r) const { return find_role(st().roles, r); }

  json last(PlayerId p, const std::string& type) const {
    for (auto it = got[p.index()].rbegin(); it != got[p.index()].rend(); ++it)
      if ((*it)["type"] == type) return *it;
    return nullptr;
  }

  // Leader proposes `members`, everyone passes, leader calls the vote.
  void to_party_vote(std::vector<PlayerId> members) {
    const PlayerId leader = st().leader;
    ASSERT_TRUE(send(leader, "confirm_proposal", {{"members", members_json(members)}}).accepted());
    for (int i = 0; i < kNumPlayers; ++i) ASSERT_TRUE(send(st().turn_holder, "end_turn").accepted());
    ASSERT_TRUE(send(leader, "start_party_vote").accepted());
    ASSERT_EQ(st().phase, Phase::PartyVote);
  }
};

json without(json v, std::initializer_list<const char*> keys) {
  for (const char* k : keys) v.erase(k);
  return v;
}

TEST(Session, StartsWhenSixSeatsJoin) {
  std::int64_t now = 0;
  Session s({}, [&] { return now; });
  std::vector<Session::ConnId> ids;
  for (int i = 0; i < 5; ++i) {
    ids.push_back(s.connect([](const std::string&) {}));
    s.handle(ids.back(), R"({"type":"join","payload":{}})");
  }
  EXPECT_FALSE(s.started());
  EXPECT_EQ(s.view(std::nullopt)["phase"], "lobby");
  EXPECT_EQ(s.handle(ids[0], R"({"type":"end_turn"})").status, HandleOutcome::Status::Rejected);
  ids.push_back(s.connect([](const std::string&) {}));
  s.handle(ids.back(), R"({"type":"join","payload":{}})");
  EXPECT_TRUE(s.started());
  EXPECT_EQ(s.view(std::nullopt)["phase"], "discussion");
  EXPECT_EQ(*s.next_deadline_ms(), 200000);
}

TEST(Session, ChatIsBroadcastWithServerStampedEnvelope) {
  Table t;
  t.now = 5000;
  auto r = t.session.handle(t.conn[0], R"({"type":"chat","actor":"player_4","seq":99,"payload":{"text":"hi all"}})");
  ASSERT_TRUE(r.accepted()) << r.detail;
  for (PlayerId p : all_players()) {
    const json env = t.last(p, "chat");
    ASSERT_TRUE(env.is_object());
    EXPECT_EQ(env["actor"], "player_1");
    EXPECT_EQ(env["seq"], 1);
    EXPECT_EQ(env["t_ms"], 5000);
    EXPECT_EQ(env["payload"]["text"], "hi all");
    EXPECT_EQ(env["game_id"], "game");
  }
}

TEST(Session, RejectionsCarryReasons) {
  Table t;
  EXPECT_EQ(t.send(PlayerId(2), "end_turn").status, HandleOutcome::Status::Rejected);
  EXPECT_EQ(t.last(PlayerId(2), "error")["payload"]["reason"], "illegal_actor");
  EXPECT_EQ(t.session.handle(t.conn[0], "not json").status, HandleOutcome::Status::ProtocolError);
  EXPECT_EQ(t.send(PlayerId(1), "dance").status, HandleOutcome::Status::ProtocolError);
  EXPECT_EQ(t.last(PlayerId(1), "error")["payload"]["reason"], "protocol_error");
  EXPECT_EQ(t.st().last_seq, 0);
}

TEST(Session, SpectatorCannotAct) {
  Table t;
  std::vector<json> seen;
  const auto spec = t.session.connect([&](const std::string& m) { seen.push_back(json::parse(m)); });
  ASSERT_TRUE(t.session.handle(spec, R"({"type":"join","payload":{"spectator":true}})").accepted());
  ASSERT_FALSE(seen.empty());
  EXPECT_TRUE(seen.back()["payload"]["you"].is_null());
  EXPECT_FALSE(seen.back()["payload"].contains("roles"));
  const auto r = t.session.handle(spec, R"({"type":"chat","payload":{"text":"boo"}})");
  EXPECT_EQ(r.status, HandleOutcome::Status::Rejected);
  EXPECT_EQ(seen.back()["payload"]["reason"], "illegal_actor");
  EXPECT_EQ(t.st().last_seq, 0);
  t.send(PlayerId(1), "chat", {{"text", "hello"}});
  EXPECT_EQ(seen.back()["type"], "state_sync");
  EXPECT_EQ(seen[seen.size() - 2]["type"], "chat");
}

// Seeds are walked until both a good and an evil leader were seen.
TEST(Session, DeceptionLabelRejectedForServant) {
  bool saw_good = false, saw_evil = false;
  for (std::uint64_t seed = 0; seed < 40 && !(saw_good && saw_evil); ++seed) {
    SessionConfig cfg;
    cfg.seed = seed;
    Table t(cfg);
    const PlayerId leader = t.st().leader;
    ASSERT_TRUE(t.send(leader, "chat", {{"text", "trust me"}}).accepted());
    const Role role = t.st().role_of(leader);
    const auto res = t.send(leader, "strategy_label", {{"seq", 1}, {"persuasion", "assertion"}, {"deception", "commission"}});
    if (role == Role::LoyalServant || role == Role::Merlin || role == Role::Percival) {
      saw_good = true;
      EXPECT_FALSE(res.accepted());
      EXPECT_EQ(t.last(leader, "error")["payload"]["reason"], "rule_violation");
    } else {
      saw_evil = true;
      EXPECT_TRUE(res.accepted()) << res.detail;
    }
    // Someone else's message cannot be labelled.
    const PlayerId other(leader.seat() % kNumPlayers + 1);
    EXPECT_FALSE(t.send(other, "strategy_label", {{"seq", 1}, {"persuasion", "assertion"}}).accepted());
  }
  EXPECT_TRUE(saw_good);
  EXPECT_TRUE(saw_evil);
}

TEST(Session, VoteDeadlineIsThirtySeconds) {
  Table t;
  t.to_party_vote({PlayerId(1), PlayerId(2)});
  const auto due = t.session.next_deadline_ms();
  ASSERT_TRUE(due);
  EXPECT_EQ(*due, t.now + 30000);
  t.send(PlayerId(3), "party_vote", {{"approve", false}});
  t.now = *due - 1;
  t.session.tick();
  EXPECT_EQ(t.st().phase, Phase::PartyVote);
  t.now = *due;
  t.session.tick();
  // The five missing votes default to approve.
  EXPECT_EQ(t.st().phase, Phase::QuestVote);
  const auto log = t.session.log();
  int defaults = 0;
  for (const auto& e : log.events) defaults += e.kind == EventKind::PartyVote && e.is_default();
  EXPECT_EQ(defaults, 5);
  // Vote values never leave the server before the tally.
  for (const auto& env : t.got[0])
    if (env["type"] == "system_event" && env["payload"]["kind"] == "party_vote")
      EXPECT_FALSE(env["payload"].contains("approve"));
}

TEST(Session, DeadlineFiresOnceAndStaleOnesAreIgnored) {
  Table t;
  t.to_party_vote({PlayerId(1), PlayerId(2)});
  const std::int64_t first_due = *t.session.next_deadline_ms();
  t.now += 1000;
  for (PlayerId p : all_players()) t.send(p, "party_vote", {{"approve", true}});
  ASSERT_EQ(t.st().phase, Phase::QuestVote);
  const std::int64_t second_due = *t.session.next_deadline_ms();
  EXPECT_EQ(second_due, t.now + 30000);
  const auto seq = t.st().last_seq;
  t.now = first_due;
  t.session.tick();
  EXPECT_EQ(t.st().last_seq, seq);
  t.now = second_due;
  t.session.tick();
  const auto after = t.st().last_seq;
  EXPECT_GT(after, seq);
  t.session.tick();
  EXPECT_EQ(t.st().last_seq, after);
}

TEST(Session, PrivateViewsShareThePublicPart) {
  Table t;
  t.to_party_vote({PlayerId(1), PlayerId(2)});
  const json pub = without(t.session.view(std::nullopt), {"you"});
  EXPECT_FALSE(pub.contains("roles"));
  EXPECT_EQ(pub.dump().find("merlin"), std::string::npos);
  for (PlayerId p : all_players()) {
    const json v = t.session.view(p);
    EXPECT_EQ(without(v, {"you"}), pub);
    EXPECT_EQ(v["you"]["role"], std::string(role_name(t.st().role_of(p))));
    const KnowledgeView k = knowledge_view(t.st(), p);
    EXPECT_EQ(v["you"]["marked_red"], members_json(k.marked_red));
    EXPECT_EQ(v["you"]["marked_red_blue"], members_json(k.marked_red_blue));
  }
  // Broadcast envelopes are identical for every seat.
  for (PlayerId p : all_players()) {
    std::vector<json> a, b;
    for (const auto& e : t.got[0])
      if (e["type"] != "state_sync") a.push_back(e);
    for (const auto& e : t.got[p.index()])
      if (e["type"] != "state_sync") b.push_back(e);
    EXPECT_EQ(a, b);
  }
}

TEST(Session, ReconnectResyncMatchesLiveView) {
  Table t;
  t.send(PlayerId(1), "chat", {{"text", "one"}});
  t.to_party_vote({PlayerId(1), PlayerId(2)});
  t.send(PlayerId(4), "party_vote", {{"approve", true}});

  t.send(PlayerId(4), "state_sync");
  const json before = t.last(PlayerId(4), "state_sync")["payload"];

  std::vector<json> fresh;
  const auto c = t.session.connect([&](const std::string& m) { fresh.push_back(json::parse(m)); });
  ASSERT_TRUE(t.session.handle(c, R"({"type":"join","payload":{"seat":"player_4"}})").accepted());
  EXPECT_EQ(t.last(PlayerId(4), "error")["payload"]["reason"], "replaced");
  json resync;
  for (const auto& e : fresh)
    if (e["type"] == "state_sync" && e["payload"].contains("history")) resync = e["payload"];
  ASSERT_TRUE(resync.is_object());
  EXPECT_EQ(resync, before);
  EXPECT_EQ(resync["history"].size(), before["history"].size());
  // The old connection lost the seat.
  EXPECT_FALSE(t.send(PlayerId(4), "party_vote", {{"approve", true}}).accepted());
}

TEST(Session, BeliefsOverwritePerRound) {
  Table t;
  const PlayerId p(3);
  ASSERT_TRUE(t.send(p, "belief_update", {{"beliefs", {{"player_1", "evil"}}}}).accepted());
  ASSERT_TRUE(t.send(p, "belief_update", {{"beliefs", {{"player_1", "good"}}}}).accepted());
  EXPECT_FALSE(t.send(p, "belief_update", {{"round", 4}, {"beliefs", json::object()}}).accepted());
  EXPECT_FALSE(t.send(p, "belief_update", {{"beliefs", {{"player_1", "wizard"}}}}).accepted());
  const auto log = t.session.log();
  ASSERT_EQ(log.beliefs.size(), 1u);
  EXPECT_EQ(log.beliefs[0].beliefs[0], Label::Good);
  EXPECT_EQ(log.beliefs[0].believer, p);
  EXPECT_EQ(t.session.view(p)["you"]["beliefs"]["1"]["player_1"], "good");
  EXPECT_TRUE(t.session.view(PlayerId(2))["you"]["beliefs"].empty());
}

TEST(Session, DefaultFlagFromClientsIsIgnored) {
  Table t;
  t.send(PlayerId(1), "chat", {{"text", "x"}, {"default", true}});
  EXPECT_FALSE(t.session.log().events.back().is_default());
}

TEST(Bots, AlwaysApprovePlaysToTheEnd) {
  const ScriptedRun run = run_scripted_game(BotScenario::AlwaysApprove, {});
  ASSERT_EQ(run.final_state.phase, Phase::Finished);
  EXPECT_EQ(run.rejected, 0u);
  for (const auto& q : run.final_state.quests) EXPECT_TRUE(q.success);
  EXPECT_TRUE(run.final_state.win_reason == WinReason::AssassinFoundMerlin ||
              run.final_state.win_reason == WinReason::AssassinMissed);
  ASSERT_TRUE(run.log.result);
  // Nothing was left to a deadline.
  for (const auto& e : run.log.events) EXPECT_FALSE(e.is_default()) << event_kind_name(e.kind);
  const GameLog back = log_from_string(log_to_string(run.log));
  EXPECT_EQ(back, run.log);
  EXPECT_FALSE(run.log.beliefs.empty());
  EXPECT_TRUE(std::all_of(run.log.utterances.begin(), run.log.utterances.end(),
                          [](const UtteranceRecord& u) { return u.persuasion.has_value(); }));
}

TEST(Bots, EvilFailSinksEveryQuestWithEvil) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    SessionConfig cfg;
    cfg.seed = seed;
    const ScriptedRun run = run_scripted_game(BotScenario::EvilFail, cfg);
    ASSERT_EQ(run.final_state.phase, Phase::Finished);
    EXPECT_EQ(run.rejected, 0u);
    for (const auto& q : run.final_state.quests) {
      const bool has_evil = std::any_of(q.party.begin(), q.party.end(), [&](PlayerId p) {
        return alignment_of(run.final_state.role_of(p)) == Alignment::Evil;
      });
      EXPECT_EQ(q.success, !has_evil);
    }
    EXPECT_EQ(log_from_string(log_to_string(run.log)), run.log);
  }
}

TEST(Bots, SilentGameRunsOnDeadlines) {
  const ScriptedRun run = run_scripted_game(BotScenario::Silent, {});
  ASSERT_EQ(run.final_state.phase, Phase::Finished);
  EXPECT_TRUE(run.log.utterances.empty());
  const auto& ev = run.log.events;
  ASSERT_FALSE(ev.empty());
  std::int64_t prev = 0;
  bool saw_vote = false, saw_turn = false, saw_assassin = false;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (ev[i].kind != EventKind::DeadlineExpired) continue;
    const std::int64_t gap = ev[i].t_ms - prev;
    prev = ev[i].t_ms;
    ASSERT_LT(i + 1, ev.size());
    switch (ev[i + 1].kind) {
      case EventKind::PartyVote:
      case EventKind::QuestVote:
        EXPECT_EQ(gap, 30000);
        saw_vote = true;
        break;
      case EventKind::EndTurn:
      case EventKind::ConfirmProposal:
      case EventKind::StartPartyVote:
        EXPECT_EQ(gap, 200000);
        saw_turn = true;
        break;
      case EventKind::Assassinate:
        EXPECT_EQ(gap, 200000);
        saw_assassin = true;
        break;
      default:
        ADD_FAILURE() << "unexpected default " << event_kind_name(ev[i + 1].kind);
    }
  }
  EXPECT_TRUE(saw_vote && saw_turn && saw_assassin);
  EXPECT_EQ(run.final_state.winner, Alignment::Good);
}

TEST(Recording, FinishedGameIsWrittenAndReplays) {
  const auto dir = std::filesystem::temp_directory_path() / "avalon_server_test";
  std::filesystem::remove_all(dir);
  SessionConfig cfg;
  cfg.game_id = "rec-1";
  cfg.seed = 11;
  cfg.record_dir = dir / "configured";
  ::setenv("AVALON_RECORD_DIR", (dir / "env").c_str(), 1);
  const ScriptedRun run = run_scripted_game(BotScenario::AlwaysApprove, cfg);
  ::unsetenv("AVALON_RECORD_DIR");
  ASSERT_TRUE(run.recorded);
  EXPECT_EQ(*run.recorded, dir / "env" / "rec-1.jsonl");
  const GameLog back = read_log_file(*run.recorded);
  EXPECT_EQ(back, run.log);
  ASSERT_TRUE(back.names);
  EXPECT_EQ((*back.names)[0], "bot-1");
  EXPECT_EQ(replay_log(back), run.final_state);
  EXPECT_FALSE(std::filesystem::exists(dir / "configured"));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace avalon
