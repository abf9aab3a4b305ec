#pragma once

// One live game: seats bound to connections, the authoritative state,
// phase deadlines, private annotations and the recorded log.
//
// Wire envelopes are single-line JSON objects:
//   {"type":..,"game_id":..,"actor":..,"seq":..,"payload":{..},"t_ms":..}
// Clients send type and payload only; the server stamps the rest.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>

#include "avalon/context/rounds.hpp"
#include "avalon/data/game_log.hpp"

namespace avalon {

using ClockFn = std::function<std::int64_t()>;  // milliseconds

inline ClockFn system_clock_ms() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

// Directory for finished game logs: AVALON_RECORD_DIR wins over `configured`.
inline std::optional<std::filesystem::path> record_dir(const std::optional<std::filesystem::path>& configured) {
  if (const char* env = std::getenv("AVALON_RECORD_DIR"); env && *env) return std::filesystem::path(env);
  return configured;
}

struct SessionConfig {
  std::string game_id = "game";
  std::uint64_t seed = 0;
  Timing timing;
  int rejection_limit = 5;
  std::optional<std::filesystem::path> record_dir;
};

struct HandleOutcome {
  enum class Status { Accepted, Rejected, ProtocolError };
  Status status = Status::Accepted;
  std::string detail;
  bool accepted() const { return status == Status::Accepted; }
};

inline const std::map<std::string, EventKind>& action_types() {
  static const std::map<std::string, EventKind> m{
      {"chat", EventKind::Chat},
      {"propose", EventKind::Propose},
      {"confirm_proposal", EventKind::ConfirmProposal},
      {"start_party_vote", EventKind::StartPartyVote},
      {"party_vote", EventKind::PartyVote},
      {"quest_vote", EventKind::QuestVote},
      {"end_turn", EventKind::EndTurn},
      {"assassinate", EventKind::Assassinate},
  };
  return m;
}

class Session {
 public:
  using ConnId = std::uint64_t;
  using Sink = std::function<void(const std::string&)>;

  Session(SessionConfig config, ClockFn clock = system_clock_ms())
      : config_(std::move(config)), clock_(std::move(clock)) {
    GameConfig gc{{"p1", "p2", "p3", "p4", "p5", "p6"}, config_.rejection_limit};
    state_ = new_game(config_.seed, gc);
  }

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& game_id() const { return config_.game_id; }

  ConnId connect(Sink sink) {
    std::lock_guard lock(mu_);
    const ConnId id = ++next_conn_;
    conns_[id] = Conn{std::move(sink), std::nullopt, false};
    return id;
  }

  void disconnect(ConnId id) {
    std::lock_guard lock(mu_);
    auto it = conns_.find(id);
    if (it == conns_.end()) return;
    if (it->second.seat && seat_conn_[it->second.seat->index()] == id) seat_conn_[it->second.seat->index()] = 0;
    conns_.erase(it);
    if (started_) broadcast_sync();
  }

  HandleOutcome handle(ConnId id, std::string_view raw) {
    std::lock_guard lock(mu_);
    auto it = conns_.find(id);
    if (it == conns_.end()) return {HandleOutcome::Status::ProtocolError, "unknown connection"};
    const json msg = json::parse(raw, nullptr, false);
    if (msg.is_discarded() || !msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
      return protocol_error(id, "expected a JSON object with a string 'type'", "");
    const std::string type = msg["type"].get<std::string>();
    json payload = msg.value("payload", json::object());
    if (!payload.is_object()) return protocol_error(id, "'payload' must be an object", type);

    if (type == "join") return join(id, payload);
    if (type == "state_sync") {
      send(id, envelope("state_sync", std::nullopt, full_view(conns_[id].seat)));
      return {};
    }
    if (type == "strategy_label") return strategy_label(id, payload);
    if (type == "belief_update") return belief_update(id, payload);
    auto action = action_types().find(type);
    if (action == action_types().end()) return protocol_error(id, "unknown message type '" + type + "'", type);
    return act(id, action->second, std::move(payload), type);
  }

  // Fires the live deadline if it has passed.
  void tick() {
    std::lock_guard lock(mu_);
    if (!started_ || !deadline_ || clock_() < due_ms_) return;
    const Deadline d = *deadline_;
    deadline_.reset();
    auto defaults = default_action(state_, d);
    for (auto& e : defaults) {
      e.seq = state_.last_seq + 1;
      e.t_ms = clock_();
      commit(std::move(e));
    }
    after_change();
  }

  std::optional<std::int64_t> next_deadline_ms() const {
    std::lock_guard lock(mu_);
    if (!started_ || !deadline_) return std::nullopt;
    return due_ms_;
  }

  // Starts without waiting for six joins (scripted runs).
  void start() {
    std::lock_guard lock(mu_);
    start_locked();
  }

  bool started() const {
    std::lock_guard lock(mu_);
    return started_;
  }
  bool finished() const {
    std::lock_guard lock(mu_);
    return state_.phase == Phase::Finished;
  }
  GameState state() const {
    std::lock_guard lock(mu_);
    return state_;
  }
  GameLog log() const {
    std::lock_guard lock(mu_);
    return build_log();
  }
  json view(std::optional<PlayerId> viewer) const {
    std::lock_guard lock(mu_);
    return render_view(viewer);
  }
  std::optional<std::filesystem::path> recorded_path() const {
    std::lock_guard lock(mu_);
    return recorded_;
  }

 private:
  struct Conn {
    Sink sink;
    std::optional<PlayerId> seat;
    bool spectator = false;
  };

  json envelope(const std::string& type, std::optional<PlayerId> actor, json payload) const {
    return json{{"type", type},
                {"game_id", config_.game_id},
                {"actor", actor ? json(actor->key()) : json("system")},
                {"seq", state_.last_seq},
                {"payload", std::move(payload)},
                {"t_ms", clock_()}};
  }

  void send(ConnId id, const json& env) {
    auto it = conns_.find(id);
    if (it != conns_.end() && it->second.sink) it->second.sink(env.dump());
  }

  void broadcast(const json& env) {
    const std::string text = env.dump();
    for (auto& [id, c] : conns_)
      if (c.sink && (c.seat || c.spectator)) c.sink(text);
  }

  HandleOutcome protocol_error(ConnId id, const std::string& what, const std::string& type) {
    send(id, envelope("error", std::nullopt, {{"reason", "protocol_error"}, {"message", what}, {"in_reply_to", type}}));
    return {HandleOutcome::Status::ProtocolError, what};
  }

  HandleOutcome reject(ConnId id, const std::string& reason, const std::string& what, const std::string& type) {
    send(id, envelope("error", std::nullopt, {{"reason", reason}, {"message", what}, {"in_reply_to", type}}));
    return {HandleOutcome::Status::Rejected, reason + ": " + what};
  }

  HandleOutcome join(ConnId id, const json& payload) {
    Conn& c = conns_[id];
    if (payload.value("spectator", false)) {
      c.spectator = true;
      c.seat.reset();
      send(id, envelope("state_sync", std::nullopt, full_view(std::nullopt)));
      return {};
    }
    std::optional<PlayerId> seat;
    if (payload.contains("seat")) {
      const json& s = payload["seat"];
      if (s.is_string()) seat = PlayerId::parse(s.get<std::string>());
      else if (s.is_number_integer() && s.get<int>() >= 1 && s.get<int>() <= kNumPlayers) seat = PlayerId(s.get<int>());
      if (!seat) return reject(id, "malformed_payload", "seat must be player_1..player_6", "join");
    } else {
      for (PlayerId p : all_players())
        if (!seat_taken_[p.index()]) {
          seat = p;
          break;
        }
      if (!seat) return reject(id, "illegal_actor", "all seats are taken", "join");
    }
    // Rejoining a seat replaces the old connection (reconnect).
    if (ConnId old = seat_conn_[seat->index()]; old && old != id) {
      send(old, envelope("error", std::nullopt, {{"reason", "replaced"}, {"message", "seat taken over"}, {"in_reply_to", "join"}}));
      conns_[old].seat.reset();
    }
    c.seat = seat;
    c.spectator = false;
    seat_conn_[seat->index()] = id;
    seat_taken_[seat->index()] = true;
    if (payload.contains("name") && payload["name"].is_string() && !payload["name"].get<std::string>().empty())
      names_[seat->index()] = payload["name"].get<std::string>();
    if (!started_ && std::all_of(seat_taken_.begin(), seat_taken_.end(), [](bool b) { return b; })) {
      start_locked();
    } else {
      send(id, envelope("state_sync", *seat, full_view(seat)));
      if (started_) broadcast_sync();
    }
    return {};
  }

  void start_locked() {
    if (started_) return;
    started_ = true;
    start_ms_ = clock_();
    after_change();
  }

  HandleOutcome act(ConnId id, EventKind kind, json payload, const std::string& type) {
    const Conn& c = conns_[id];
    if (!c.seat) return reject(id, "illegal_actor", "join a seat before acting", type);
    if (!started_) return reject(id, "illegal_phase", "the game has not started", type);
    payload.erase("default");
    GameEvent e{state_.last_seq + 1, clock_(), kind, c.seat, std::move(payload)};
    try {
      GameState next = apply_event(state_, e);
      (void)next;
    } catch (const IllegalEvent& err) {
      return reject(id, std::string(reject_reason_name(err.reason())), err.what(), type);
    }
    commit(std::move(e));
    after_change();
    return {};
  }

  // Appends an event already known to be legal and broadcasts its public part.
  void commit(GameEvent e) {
    const GameState before = state_;
    state_ = apply_event(state_, e);
    events_.push_back(e);
    json pub;
    if (e.kind == EventKind::Chat) {
      pub = envelope("chat", e.actor, {{"text", e.payload.value("text", std::string())}});
    } else {
      json p{{"kind", std::string(event_kind_name(e.kind))}, {"default", e.is_default()}};
      if (e.kind == EventKind::Propose || e.kind == EventKind::ConfirmProposal)
        if (state_.proposal) p["members"] = members_json(state_.proposal->members);
      if (e.kind == EventKind::Assassinate) p["target"] = e.payload.value("target", json(nullptr));
      p["lines"] = narrate(before, e, state_);
      pub = envelope("system_event", e.actor, p);
    }
    history_.push_back(pub);
    broadcast(pub);
  }

  void after_change() {
    if (state_.phase == Phase::Finished) {
      deadline_.reset();
      if (!recorded_) record();
    } else if (auto d = deadline_for(state_, config_.timing)) {
      if (!deadline_ || deadline_->phase_serial != d->phase_serial || deadline_->phase != d->phase) {
        deadline_ = d;
        due_ms_ = clock_() + d->duration.count();
      }
    }
    broadcast_sync();
  }

  void broadcast_sync() {
    for (auto& [id, c] : conns_)
      if (c.sink && (c.seat || c.spectator)) c.sink(envelope("state_sync", c.seat, render_view(c.seat)).dump());
  }

  HandleOutcome strategy_label(ConnId id, const json& payload) {
    const Conn& c = conns_[id];
    if (!c.seat) return reject(id, "illegal_actor", "join a seat before labelling", "strategy_label");
    if (!payload.contains("seq") || !payload["seq"].is_number_integer())
      return reject(id, "malformed_payload", "strategy_label needs an integer 'seq'", "strategy_label");
    const std::int64_t seq = payload["seq"].get<std::int64_t>();
    auto ev = std::find_if(events_.begin(), events_.end(), [&](const GameEvent& e) { return e.seq == seq; });
    if (ev == events_.end() || ev->kind != EventKind::Chat || ev->actor != c.seat)
      return reject(id, "rule_violation", "seq " + std::to_string(seq) + " is not one of your messages", "strategy_label");
    Annotation a;
    if (payload.contains("persuasion") && !payload["persuasion"].is_null()) {
      auto p = payload["persuasion"].is_string() ? parse_persuasion(payload["persuasion"].get<std::string>()) : std::nullopt;
      if (!p) return reject(id, "malformed_payload", "unknown persuasion strategy", "strategy_label");
      a.persuasion = p;
    }
    if (payload.contains("deception") && !payload["deception"].is_null()) {
      auto d = payload["deception"].is_string() ? parse_deception(payload["deception"].get<std::string>()) : std::nullopt;
      if (!d) return reject(id, "malformed_payload", "unknown deception strategy", "strategy_label");
      if (alignment_of(state_.role_of(*c.seat)) != Alignment::Evil)
        return reject(id, "rule_violation", "deception labels are only for evil players", "strategy_label");
      a.deception = d;
    }
    labels_[seq] = a;
    send(id, envelope("strategy_label", c.seat, {{"seq", seq}, {"ok", true}}));
    return {};
  }

  HandleOutcome belief_update(ConnId id, const json& payload) {
    const Conn& c = conns_[id];
    if (!c.seat) return reject(id, "illegal_actor", "join a seat before submitting beliefs", "belief_update");
    if (!started_ || state_.phase == Phase::Finished)
      return reject(id, "illegal_phase", "beliefs are collected while the game runs", "belief_update");
    int round = state_.round;
    if (payload.contains("round")) {
      if (!payload["round"].is_number_integer())
        return reject(id, "malformed_payload", "'round' must be an integer", "belief_update");
      round = payload["round"].get<int>();
      if (round < 1 || round > state_.round)
        return reject(id, "rule_violation", "round " + std::to_string(round) + " has not started", "belief_update");
    }
    BeliefVector b = unknown_beliefs();
    const json beliefs = payload.value("beliefs", json::object());
    if (!beliefs.is_object()) return reject(id, "malformed_payload", "'beliefs' must be an object", "belief_update");
    for (const auto& [k, v] : beliefs.items()) {
      auto p = PlayerId::parse(k);
      auto l = v.is_string() ? parse_label(v.get<std::string>()) : std::nullopt;
      if (!p || !l) return reject(id, "malformed_payload", "bad belief entry '" + k + "'", "belief_update");
      b[p->index()] = *l;
    }
    // One record per believer and round; a resubmission replaces it.
    beliefs_.erase(std::remove_if(beliefs_.begin(), beliefs_.end(),
                                  [&](const BeliefRecord& r) { return r.believer == *c.seat && r.round == round; }),
                   beliefs_.end());
    beliefs_.push_back(BeliefRecord{round, *c.seat, b, state_.last_seq});
    send(id, envelope("belief_update", c.seat, {{"round", round}, {"beliefs", beliefs_to_json(b)}, {"ok", true}}));
    return {};
  }

  json render_view(std::optional<PlayerId> viewer) const {
    json v;
    v["game_id"] = config_.game_id;
    v["started"] = started_;
    v["phase"] = std::string(phase_name(started_ ? state_.phase : Phase::Lobby));
    v["quest_index"] = state_.quest_index;
    v["party_size"] = state_.phase == Phase::Finished ? 0 : quest_party_size(std::min(state_.quest_index, kNumQuests));
    v["leader"] = state_.leader.key();
    v["turn_holder"] = state_.turn_holder.key();
    v["round"] = state_.round;
    v["discussion_rounds"] = state_.discussion_rounds_this_proposal;
    v["consecutive_rejections"] = state_.consecutive_rejections;
    v["rejection_limit"] = state_.rejection_limit;
    v["last_seq"] = state_.last_seq;
    v["phase_serial"] = state_.phase_serial;
    v["proposal"] = state_.proposal ? json{{"leader", state_.proposal->leader.key()},
                                           {"members", members_json(state_.proposal->members)},
                                           {"confirmed", state_.proposal->confirmed}}
                                    : json(nullptr);
    json quests = json::array();
    for (const auto& q : state_.quests) {
      json votes = json::object();
      for (PlayerId p : all_players()) votes[p.key()] = q.party_votes[p.index()];
      quests.push_back({{"index", q.index}, {"success", q.success}, {"party", members_json(q.party)},
                        {"party_votes", votes}, {"fail_count", q.fail_count}});
    }
    v["quests"] = quests;
    json voted = json::array(), quest_voted = json::array();
    for (PlayerId p : all_players()) {
      if (state_.party_votes[p.index()]) voted.push_back(p.key());
      if (state_.quest_votes[p.index()]) quest_voted.push_back(p.key());
    }
    v["party_voted"] = voted;
    v["quest_party"] = members_json(state_.quest_party);
    v["quest_voted"] = quest_voted;
    v["deadline"] = deadline_ ? json{{"phase", std::string(phase_name(deadline_->phase))},
                                     {"phase_serial", deadline_->phase_serial},
                                     {"expires_t_ms", due_ms_}}
                              : json(nullptr);
    v["winner"] = state_.winner ? json(std::string(alignment_name(*state_.winner))) : json(nullptr);
    v["win_reason"] = std::string(win_reason_name(state_.win_reason));
    json seats = json::array();
    for (PlayerId p : all_players())
      seats.push_back({{"seat", p.key()}, {"name", names_[p.index()]}, {"connected", seat_conn_[p.index()] != 0}});
    v["seats"] = seats;
    if (state_.phase == Phase::Finished) {
      json roles = json::object();
      for (PlayerId p : all_players()) roles[p.key()] = std::string(role_name(state_.role_of(p)));
      v["roles"] = roles;
      v["assassination_target"] = state_.assassination_target ? json(state_.assassination_target->key()) : json(nullptr);
    }
    v["you"] = viewer && started_ ? private_view(*viewer) : viewer ? json{{"seat", viewer->key()}} : json(nullptr);
    return v;
  }

  json private_view(PlayerId viewer) const {
    const KnowledgeView k = knowledge_view(state_, viewer);
    json you{{"seat", viewer.key()},
             {"role", std::string(role_name(k.own_role))},
             {"alignment", std::string(alignment_name(alignment_of(k.own_role)))},
             {"marked_red", members_json(k.marked_red)},
             {"marked_red_blue", members_json(k.marked_red_blue)}};
    json beliefs = json::object();
    for (const auto& b : beliefs_)
      if (b.believer == viewer) beliefs[std::to_string(b.round)] = beliefs_to_json(b.beliefs);
    you["beliefs"] = beliefs;
    json labels = json::object();
    for (const auto& [seq, a] : labels_) {
      auto ev = std::find_if(events_.begin(), events_.end(), [&](const GameEvent& e) { return e.seq == seq; });
      if (ev == events_.end() || ev->actor != viewer) continue;
      labels[std::to_string(seq)] = {
          {"persuasion", a.persuasion ? json(std::string(persuasion_id(*a.persuasion))) : json(nullptr)},
          {"deception", a.deception ? json(std::string(deception_id(*a.deception))) : json(nullptr)}};
    }
    you["labels"] = labels;
    return you;
  }

  // Sync plus every public envelope so far, for joins and resync requests.
  json full_view(std::optional<PlayerId> viewer) const {
    json v = render_view(viewer);
    v["history"] = history_;
    return v;
  }

  GameLog build_log() const {
    GameLog log = make_log(config_.game_id, config_.seed, state_.roles, events_, state_.rejection_limit);
    for (auto& u : log.utterances) {
      if (auto it = labels_.find(u.seq); it != labels_.end()) {
        u.persuasion = it->second.persuasion;
        u.deception = it->second.deception;
      }
    }
    log.beliefs = beliefs_;
    if (std::any_of(names_.begin(), names_.end(), [](const std::string& n) { return !n.empty(); })) {
      std::array<std::string, kNumPlayers> names;
      for (PlayerId p : all_players())
        names[p.index()] = names_[p.index()].empty() ? p.alias() : names_[p.index()];
      log.names = names;
    }
    log.duration_ms = (events_.empty() ? start_ms_ : events_.back().t_ms) - start_ms_;
    return log;
  }

  void record() {
    auto dir = record_dir(config_.record_dir);
    if (!dir) return;
    std::filesystem::create_directories(*dir);
    const auto path = *dir / (config_.game_id + ".jsonl");
    write_log_file(path, build_log());
    recorded_ = path;
  }

  struct Annotation {
    std::optional<Persuasion> persuasion;
    std::optional<Deception> deception;
  };

  SessionConfig config_;
  ClockFn clock_;
  mutable std::mutex mu_;

  GameState state_;
  std::vector<GameEvent> events_;
  std::vector<json> history_;
  bool started_ = false;
  std::int64_t start_ms_ = 0;

  std::optional<Deadline> deadline_;
  std::int64_t due_ms_ = 0;

  ConnId next_conn_ = 0;
  std::map<ConnId, Conn> conns_;
  std::array<ConnId, kNumPlayers> seat_conn_{};
  std::array<bool, kNumPlayers> seat_taken_{};
  std::array<std::string, kNumPlayers> names_{};

  std::map<std::int64_t, Annotation> labels_;
  std::vector<BeliefRecord> beliefs_;
  std::optional<std::filesystem::path> recorded_;
};

}  // namespace avalon
