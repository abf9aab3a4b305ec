#pragma once

// On-disk game log: one file per game, line-delimited JSON.
//
//   {"v":1,"game_id":..,"seed":..,"roles":{"player_1":"merlin",..}}      header
//   {"seq":..,"t_ms":..,"kind":..,"actor":..,"payload":{..}}             event
//   {... event fields ..., "text":..,"persuasion":..,"deception":..}    chat event
//   {"round":..,"believer":..,"beliefs":{"player_1":"good",..}}          belief
//   {"result":{..},"duration_ms":..}                                     trailer
//
// Chat text lives in the top-level "text" field only; the in-memory event
// payload carries it so the engine can validate the turn.

#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "avalon/data/labels.hpp"
#include "avalon/game/game.hpp"
#include "avalon/game/serialize.hpp"

namespace avalon {

struct UtteranceRecord {
  std::string game_id;
  int round = 0;
  std::int64_t seq = 0;
  PlayerId speaker;
  std::string text;
  std::optional<Persuasion> persuasion;
  std::optional<Deception> deception;
  bool operator==(const UtteranceRecord&) const = default;
};

struct BeliefRecord {
  int round = 0;
  PlayerId believer;
  BeliefVector beliefs{};
  std::int64_t after_seq = 0;  // position in the event stream
  bool operator==(const BeliefRecord&) const = default;
};

struct GameResult {
  std::optional<Alignment> winner;
  WinReason reason = WinReason::None;
  std::vector<bool> quests;  // success flags in order
  std::optional<PlayerId> assassin_target;
  bool operator==(const GameResult&) const = default;
};

struct GameLog {
  std::string game_id;
  std::uint64_t seed = 0;
  RoleAssignment roles{};
  int rejection_limit = 5;
  std::optional<std::array<std::string, kNumPlayers>> names;  // real names, removed by anonymize()
  std::vector<GameEvent> events;
  std::vector<UtteranceRecord> utterances;
  std::vector<BeliefRecord> beliefs;
  std::int64_t duration_ms = 0;
  std::optional<GameResult> result;

  bool operator==(const GameLog&) const = default;
};

class LogError : public std::runtime_error {
 public:
  enum class Kind { SchemaViolation, ReplayDivergence };
  LogError(Kind kind, const std::string& source, int line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " +
                           (kind == Kind::SchemaViolation ? "schema violation: " : "replay divergence: ") + what),
        kind_(kind),
        line_(line) {}
  Kind kind() const { return kind_; }
  int line() const { return line_; }

 private:
  Kind kind_;
  int line_;
};

inline GameResult make_result(const GameState& s) {
  GameResult r;
  r.winner = s.winner;
  r.reason = s.win_reason;
  for (const auto& q : s.quests) r.quests.push_back(q.success);
  r.assassin_target = s.assassination_target;
  return r;
}

inline GameState initial_state(const GameLog& log) {
  GameState s = new_game(log.seed, GameConfig{{"1", "2", "3", "4", "5", "6"}, log.rejection_limit});
  s.roles = log.roles;
  return s;
}

// Replays the whole log; throws IllegalEvent on an invalid transition.
inline GameState replay_log(const GameLog& log) {
  GameState s = initial_state(log);
  for (const auto& e : log.events) s = apply_event(s, e);
  return s;
}

inline std::string quest_outcome_name(bool success) { return success ? "success" : "failure"; }

inline json beliefs_to_json(const BeliefVector& b) {
  json j = json::object();
  for (PlayerId p : all_players()) j[p.key()] = std::string(label_name(b[p.index()]));
  return j;
}

inline json result_to_json(const GameResult& r) {
  json quests = json::array();
  for (bool q : r.quests) quests.push_back(quest_outcome_name(q));
  return {{"winner", r.winner ? json(std::string(alignment_name(*r.winner))) : json(nullptr)},
          {"reason", std::string(win_reason_name(r.reason))},
          {"quests", quests},
          {"assassin_target", r.assassin_target ? json(r.assassin_target->key()) : json(nullptr)}};
}

inline void write_log(std::ostream& out, const GameLog& log) {
  json header;
  header["v"] = 1;
  header["game_id"] = log.game_id;
  header["seed"] = log.seed;
  json roles = json::object();
  for (PlayerId p : all_players()) roles[p.key()] = std::string(role_name(log.roles[p.index()]));
  header["roles"] = roles;
  if (log.rejection_limit != 5) header["rejection_limit"] = log.rejection_limit;
  if (log.names) {
    json names = json::object();
    for (PlayerId p : all_players()) names[p.key()] = (*log.names)[p.index()];
    header["names"] = names;
  }
  out << header.dump() << '\n';

  std::map<std::int64_t, const UtteranceRecord*> by_seq;
  for (const auto& u : log.utterances) by_seq[u.seq] = &u;

  auto write_beliefs_after = [&](std::int64_t seq) {
    for (const auto& b : log.beliefs) {
      if (b.after_seq != seq) continue;
      json j{{"round", b.round}, {"believer", b.believer.key()}, {"beliefs", beliefs_to_json(b.beliefs)}};
      out << j.dump() << '\n';
    }
  };
  write_beliefs_after(0);
  for (const auto& e : log.events) {
    json j = event_to_json(e);
    if (e.kind == EventKind::Chat) {
      j["payload"].erase("text");
      auto it = by_seq.find(e.seq);
      j["text"] = e.payload.value("text", std::string());
      if (it != by_seq.end() && it->second->persuasion)
        j["persuasion"] = std::string(persuasion_id(*it->second->persuasion));
      else
        j["persuasion"] = nullptr;
      if (it != by_seq.end() && it->second->deception)
        j["deception"] = std::string(deception_id(*it->second->deception));
      else
        j["deception"] = nullptr;
    }
    out << j.dump() << '\n';
    write_beliefs_after(e.seq);
  }
  if (log.result) out << json{{"result", result_to_json(*log.result)}, {"duration_ms", log.duration_ms}}.dump() << '\n';
}

namespace detail {

inline BeliefVector parse_belief_map(const json& j, const std::string& src, int line) {
  if (!j.is_object()) throw LogError(LogError::Kind::SchemaViolation, src, line, "beliefs must be an object");
  BeliefVector b = unknown_beliefs();
  std::array<bool, kNumPlayers> seen{};
  for (const auto& [k, v] : j.items()) {
    auto p = PlayerId::parse(k);
    auto l = v.is_string() ? parse_label(v.get<std::string>()) : std::nullopt;
    if (!p || !l) throw LogError(LogError::Kind::SchemaViolation, src, line, "bad belief entry " + k + "=" + v.dump());
    b[p->index()] = *l;
    seen[p->index()] = true;
  }
  for (PlayerId p : all_players())
    if (!seen[p.index()])
      throw LogError(LogError::Kind::SchemaViolation, src, line, "beliefs missing " + p.key());
  return b;
}

}  // namespace detail

// Parses and validates a log: schema checks per record, then a full replay
// that must reach Finished and agree with the recorded result.
inline GameLog read_log(std::istream& in, const std::string& source = "<stream>") {
  using K = LogError::Kind;
  GameLog log;
  std::vector<int> event_lines;
  int result_line = 0;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LogError(K::SchemaViolation, source, lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw LogError(K::SchemaViolation, source, lineno, "record is not an object");
    if (!have_header) {
      if (!j.contains("v") || j["v"] != 1)
        throw LogError(K::SchemaViolation, source, lineno, "first record must be a v1 header");
      if (!j.contains("game_id") || !j["game_id"].is_string() || !j.contains("seed") ||
          !j["seed"].is_number_unsigned() || !j.contains("roles") || !j["roles"].is_object())
        throw LogError(K::SchemaViolation, source, lineno, "header needs game_id, seed and roles");
      log.game_id = j["game_id"].get<std::string>();
      log.seed = j["seed"].get<std::uint64_t>();
      std::array<bool, kNumPlayers> seen{};
      for (const auto& [k, v] : j["roles"].items()) {
        auto p = PlayerId::parse(k);
        auto r = v.is_string() ? parse_role(v.get<std::string>()) : std::nullopt;
        if (!p || !r) throw LogError(K::SchemaViolation, source, lineno, "bad role entry " + k);
        log.roles[p->index()] = *r;
        seen[p->index()] = true;
      }
      if (std::find(seen.begin(), seen.end(), false) != seen.end() || !is_valid_roster(log.roles))
        throw LogError(K::SchemaViolation, source, lineno, "roles must cover six seats with the fixed role set");
      log.rejection_limit = j.value("rejection_limit", 5);
      if (j.contains("names")) {
        std::array<std::string, kNumPlayers> names;
        for (PlayerId p : all_players()) {
          if (!j["names"].contains(p.key()) || !j["names"][p.key()].is_string())
            throw LogError(K::SchemaViolation, source, lineno, "names missing " + p.key());
          names[p.index()] = j["names"][p.key()].get<std::string>();
        }
        log.names = names;
      }
      have_header = true;
      continue;
    }
    if (j.contains("seq")) {
      GameEvent e;
      try {
        e = event_from_json(j);
      } catch (const FormatError& ex) {
        throw LogError(K::SchemaViolation, source, lineno, ex.what());
      }
      if (!log.events.empty() && e.seq <= log.events.back().seq)
        throw LogError(K::SchemaViolation, source, lineno, "seq not strictly increasing");
      if (e.kind == EventKind::Chat) {
        if (!j.contains("text") || !j["text"].is_string())
          throw LogError(K::SchemaViolation, source, lineno, "chat record needs 'text'");
        UtteranceRecord u;
        u.game_id = log.game_id;
        u.seq = e.seq;
        u.speaker = e.actor.value_or(PlayerId(1));
        u.text = j["text"].get<std::string>();
        e.payload["text"] = u.text;
        if (j.contains("persuasion") && !j["persuasion"].is_null()) {
          auto p = j["persuasion"].is_string() ? parse_persuasion(j["persuasion"].get<std::string>()) : std::nullopt;
          if (!p) throw LogError(K::SchemaViolation, source, lineno, "unknown persuasion " + j["persuasion"].dump());
          u.persuasion = *p;
        }
        if (j.contains("deception") && !j["deception"].is_null()) {
          auto d = j["deception"].is_string() ? parse_deception(j["deception"].get<std::string>()) : std::nullopt;
          if (!d) throw LogError(K::SchemaViolation, source, lineno, "unknown deception " + j["deception"].dump());
          if (e.actor && alignment_of(log.roles[e.actor->index()]) != Alignment::Evil)
            throw LogError(K::SchemaViolation, source, lineno, "deception label on a good speaker");
          u.deception = *d;
        }
        log.utterances.push_back(std::move(u));
      } else if (j.contains("text")) {
        throw LogError(K::SchemaViolation, source, lineno, "text on a non-chat event");
      }
      log.events.push_back(std::move(e));
      event_lines.push_back(lineno);
    } else if (j.contains("believer")) {
      BeliefRecord b;
      auto p = j["believer"].is_string() ? PlayerId::parse(j["believer"].get<std::string>()) : std::nullopt;
      if (!p || !j.contains("round") || !j["round"].is_number_integer() || !j.contains("beliefs"))
        throw LogError(K::SchemaViolation, source, lineno, "belief record needs round, believer, beliefs");
      b.believer = *p;
      b.round = j["round"].get<int>();
      b.beliefs = detail::parse_belief_map(j["beliefs"], source, lineno);
      b.after_seq = log.events.empty() ? 0 : log.events.back().seq;
      log.beliefs.push_back(b);
    } else if (j.contains("result")) {
      const json& r = j["result"];
      GameResult res;
      try {
        if (!r["winner"].is_null()) res.winner = parse_alignment(r["winner"].get<std::string>()).value();
        for (const auto& q : r.at("quests")) res.quests.push_back(q.get<std::string>() == "success");
        if (r.contains("assassin_target") && !r["assassin_target"].is_null())
          res.assassin_target = PlayerId::parse(r["assassin_target"].get<std::string>()).value();
        const std::string reason = r.at("reason").get<std::string>();
        for (int i = 0; i <= static_cast<int>(WinReason::AssassinNoPick); ++i)
          if (win_reason_name(static_cast<WinReason>(i)) == reason) res.reason = static_cast<WinReason>(i);
      } catch (const std::exception& ex) {
        throw LogError(K::SchemaViolation, source, lineno, std::string("bad result record: ") + ex.what());
      }
      log.result = res;
      log.duration_ms = j.value("duration_ms", std::int64_t{0});
      result_line = lineno;
    } else {
      throw LogError(K::SchemaViolation, source, lineno, "unrecognized record");
    }
  }
  if (!have_header) throw LogError(K::SchemaViolation, source, lineno, "empty log");

  GameState s = initial_state(log);
  std::map<std::int64_t, int> round_of;
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const int round = event_round(s, log.events[i]);
    try {
      s = apply_event(s, log.events[i]);
    } catch (const IllegalEvent& ex) {
      throw LogError(K::ReplayDivergence, source, event_lines[i], ex.what());
    }
    round_of[log.events[i].seq] = round;
  }
  if (s.phase != Phase::Finished)
    throw LogError(K::ReplayDivergence, source, lineno, "log ends before the game is finished");
  if (log.result) {
    const GameResult replayed = make_result(s);
    const GameResult& rec = *log.result;
    if (rec.quests.size() != replayed.quests.size())
      throw LogError(K::ReplayDivergence, source, result_line, "recorded " + std::to_string(rec.quests.size()) +
                                                                   " quests, replay has " +
                                                                   std::to_string(replayed.quests.size()));
    for (std::size_t q = 0; q < rec.quests.size(); ++q)
      if (rec.quests[q] != replayed.quests[q])
        throw LogError(K::ReplayDivergence, source, result_line,
                       "quest " + std::to_string(q + 1) + " recorded " + quest_outcome_name(rec.quests[q]) +
                           ", replay gives " + quest_outcome_name(replayed.quests[q]));
    if (rec.winner != replayed.winner || rec.reason != replayed.reason ||
        rec.assassin_target != replayed.assassin_target)
      throw LogError(K::ReplayDivergence, source, result_line, "recorded winner differs from replay");
  }
  for (auto& u : log.utterances) u.round = round_of[u.seq];
  return log;
}

inline GameLog read_log_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_log(in, path.string());
}

inline void write_log_file(const std::filesystem::path& path, const GameLog& log) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_log(out, log);
}

inline std::string log_to_string(const GameLog& log) {
  std::ostringstream os;
  write_log(os, log);
  return os.str();
}

inline GameLog log_from_string(const std::string& text, const std::string& source = "<string>") {
  std::istringstream in(text);
  return read_log(in, source);
}

// All *.jsonl logs under a directory, sorted by file name.
inline std::vector<GameLog> read_log_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<GameLog> logs;
  for (const auto& f : files) logs.push_back(read_log_file(f));
  return logs;
}

// Builds a log from an accepted event sequence (utterances derived from chat).
inline GameLog make_log(std::string game_id, std::uint64_t seed, const RoleAssignment& roles,
                        std::vector<GameEvent> events, int rejection_limit = 5) {
  GameLog log;
  log.game_id = std::move(game_id);
  log.seed = seed;
  log.roles = roles;
  log.rejection_limit = rejection_limit;
  log.events = std::move(events);
  GameState s = initial_state(log);
  for (const auto& e : log.events) {
    const int round = event_round(s, e);
    s = apply_event(s, e);
    if (e.kind == EventKind::Chat)
      log.utterances.push_back(UtteranceRecord{log.game_id, round, e.seq, *e.actor,
                                               e.payload.value("text", std::string()), std::nullopt, std::nullopt});
  }
  if (s.phase == Phase::Finished) log.result = make_result(s);
  if (!log.events.empty()) log.duration_ms = log.events.back().t_ms - log.events.front().t_ms;
  return log;
}

}  // namespace avalon
