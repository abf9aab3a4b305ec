#pragma once

// Scripted players that speak the wire protocol. They read state_sync
// envelopes and answer with client messages, so they run against a Session
// directly or over a socket.

#include <deque>

#include "avalon/server/session.hpp"

namespace avalon {

enum class BotScenario : std::uint8_t { AlwaysApprove, EvilFail, Silent };

inline std::optional<BotScenario> parse_scenario(std::string_view s) {
  if (s == "always_approve") return BotScenario::AlwaysApprove;
  if (s == "evil_fail") return BotScenario::EvilFail;
  if (s == "silent") return BotScenario::Silent;
  return std::nullopt;
}

class ScriptedBot {
 public:
  ScriptedBot(PlayerId seat, BotScenario scenario) : seat_(seat), scenario_(scenario) {}

  PlayerId seat() const { return seat_; }

  std::string join_message() const {
    return json{{"type", "join"}, {"payload", {{"seat", seat_.key()}, {"name", "bot-" + std::to_string(seat_.seat())}}}}
        .dump();
  }

  // Messages to send in reply to one server envelope.
  std::vector<std::string> on_message(const std::string& raw) {
    const json env = json::parse(raw);
    const std::string type = env.value("type", "");
    std::vector<json> out;
    if (type == "chat" && env["actor"] == seat_.key()) label_own_chat(env, out);
    if (type == "state_sync") act(env["payload"], out);
    std::vector<std::string> texts;
    for (const auto& m : out) texts.push_back(m.dump());
    return texts;
  }

 private:
  static json msg(const std::string& type, json payload = json::object()) {
    return json{{"type", type}, {"payload", std::move(payload)}};
  }

  bool evil(const json& you) const { return you.value("alignment", "") == "evil"; }

  void label_own_chat(const json& env, std::vector<json>& out) {
    if (scenario_ == BotScenario::Silent || !you_.is_object()) return;
    json p{{"seq", env["seq"]}, {"persuasion", "suggestion"}};
    if (evil(you_)) p["deception"] = "omission";
    out.push_back(msg("strategy_label", p));
  }

  void act(const json& v, std::vector<json>& out) {
    if (!v.value("started", false) || v["phase"] == "finished" || !v["you"].contains("role")) return;
    you_ = v["you"];
    if (scenario_ == BotScenario::Silent) return;
    const std::int64_t serial = v["phase_serial"].get<std::int64_t>();
    const std::string phase = v["phase"];
    const std::string me = seat_.key();

    if (v["round"].get<int>() != belief_round_) {
      belief_round_ = v["round"].get<int>();
      json b = json::object();
      b[me] = role_label();
      for (const auto& p : you_["marked_red"]) b[p.get<std::string>()] = "evil";
      out.push_back(msg("belief_update", {{"beliefs", b}}));
    }

    // At most one move per distinct decision point.
    const std::string key = json{serial, phase, v["proposal"], v["discussion_rounds"]}.dump();
    if (key == acted_key_) return;
    auto mark = [&] { acted_key_ = key; };

    if (phase == "discussion" && v["turn_holder"] == me) {
      mark();
      const bool leader = v["leader"] == me;
      const json& prop = v["proposal"];
      if (leader && (prop.is_null() || !prop.value("confirmed", false))) {
        out.push_back(msg("chat", {{"text", seat_.alias() + " proposing a party."}}));
        out.push_back(msg("confirm_proposal", {{"members", choose_party(v["party_size"].get<int>())}}));
      } else if (leader && v["discussion_rounds"].get<int>() >= 1) {
        out.push_back(msg("start_party_vote"));
      } else {
        out.push_back(msg("chat", {{"text", "I am fine with " + members_text(prop) + "."}}));
        out.push_back(msg("end_turn"));
      }
    } else if (phase == "party_vote" && !contains(v["party_voted"], me)) {
      mark();
      out.push_back(msg("party_vote", {{"approve", true}}));
    } else if (phase == "quest_vote" && contains(v["quest_party"], me) && !contains(v["quest_voted"], me)) {
      mark();
      const bool fail = scenario_ == BotScenario::EvilFail && evil(you_);
      out.push_back(msg("quest_vote", {{"success", !fail}}));
    } else if (phase == "assassination" && you_["role"] == "assassin") {
      mark();
      for (PlayerId p : all_players()) {
        if (p == seat_ || contains(you_["marked_red"], p.key())) continue;
        out.push_back(msg("assassinate", {{"target", p.key()}}));
        break;
      }
    }
  }

  std::string role_label() const {
    const std::string role = you_["role"];
    if (role == "merlin") return "merlin";
    return evil(you_) ? "evil" : "good";
  }

  // Evil leaders put themselves and their partner first; good leaders take
  // the lowest seats starting with their own.
  json choose_party(int size) const {
    std::vector<PlayerId> members{seat_};
    if (scenario_ == BotScenario::EvilFail && evil(you_))
      for (const auto& p : you_["marked_red"]) members.push_back(*PlayerId::parse(p.get<std::string>()));
    for (PlayerId p : all_players())
      if (std::find(members.begin(), members.end(), p) == members.end()) members.push_back(p);
    members.resize(size);
    std::sort(members.begin(), members.end());
    return members_json(members);
  }

  static std::string members_text(const json& prop) {
    if (prop.is_null()) return "the plan";
    std::vector<std::string> names;
    for (const auto& m : prop["members"]) names.push_back(PlayerId::parse(m.get<std::string>())->alias());
    return names.empty() ? "the plan" : join(names, ", ");
  }

  static bool contains(const json& arr, const std::string& key) {
    return std::any_of(arr.begin(), arr.end(), [&](const json& x) { return x == key; });
  }

  PlayerId seat_;
  BotScenario scenario_;
  json you_;
  int belief_round_ = 0;
  std::string acted_key_;
};

struct ScriptedRun {
  GameLog log;
  GameState final_state;
  std::size_t rejected = 0;
  std::size_t messages = 0;
  std::optional<std::filesystem::path> recorded;
};

// Six bots against one session on a simulated clock. Idle periods jump
// straight to the next deadline.
inline ScriptedRun run_scripted_game(BotScenario scenario, SessionConfig config, std::int64_t max_steps = 100000) {
  std::int64_t now = 0;
  Session session(std::move(config), [&now] { return now; });
  std::vector<ScriptedBot> bots;
  std::array<std::deque<std::string>, kNumPlayers> inbox;
  std::array<Session::ConnId, kNumPlayers> conn{};
  for (PlayerId p : all_players()) {
    bots.emplace_back(p, scenario);
    conn[p.index()] = session.connect([&inbox, p](const std::string& m) { inbox[p.index()].push_back(m); });
  }
  ScriptedRun run;
  for (PlayerId p : all_players()) session.handle(conn[p.index()], bots[p.index()].join_message());

  for (std::int64_t step = 0; step < max_steps && !session.finished(); ++step) {
    bool busy = false;
    for (PlayerId p : all_players()) {
      auto& q = inbox[p.index()];
      while (!q.empty()) {
        busy = true;
        const std::string m = std::move(q.front());
        q.pop_front();
        for (const auto& reply : bots[p.index()].on_message(m)) {
          now += 250;
          ++run.messages;
          if (!session.handle(conn[p.index()], reply).accepted()) ++run.rejected;
        }
      }
    }
    if (busy) {
      session.tick();
      continue;
    }
    auto due = session.next_deadline_ms();
    if (!due) break;
    now = std::max(now, *due);
    session.tick();
  }
  run.log = session.log();
  run.final_state = session.state();
  run.recorded = session.recorded_path();
  return run;
}

}  // namespace avalon
