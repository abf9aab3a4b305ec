#pragma once

// Human baseline annotations exported from the survey forms, one row per
// (annotator, game, round):
//
//   annotator,game_id,round,player_1,...,player_6
//   a1,g15,3,good,evil,I don't know,merlin,good,evil
//
// "I don't know" is an abstention for that player.

#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "avalon/data/game_log.hpp"
#include "avalon/eval/metrics.hpp"

namespace avalon {

struct HumanAnnotation {
  std::string annotator;
  std::string game_id;
  int round = 0;
  LabelRow labels{};
  int line = 0;
};

struct HumanAnnotationSet {
  std::vector<HumanAnnotation> rows;

  std::vector<std::string> annotators() const {
    std::set<std::string> s;
    for (const auto& r : rows) s.insert(r.annotator);
    return {s.begin(), s.end()};
  }
};

class AnnotationError : public std::runtime_error {
 public:
  explicit AnnotationError(std::vector<std::string> problems)
      : std::runtime_error(joined(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string joined(const std::vector<std::string>& p) {
    std::string out;
    for (const auto& s : p) out += (out.empty() ? "" : "\n") + s;
    return out;
  }
  std::vector<std::string> problems_;
};

namespace detail {

// RFC 4180 style field split for a single line.
inline std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') out.back() += '"', ++i;
      else if (c == '"') quoted = false;
      else out.back() += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

// nullopt = abstain; throws on anything unrecognised.
inline std::optional<Label> annotation_label(const std::string& raw) {
  std::string v;
  for (char c : trim(raw)) v += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (std::size_t pos; (pos = v.find("\xe2\x80\x99")) != std::string::npos;) v.replace(pos, 3, "'");
  if (v == "good") return Label::Good;
  if (v == "evil") return Label::Evil;
  if (v == "merlin") return Label::Merlin;
  if (v == "i don't know" || v == "i dont know") return std::nullopt;
  throw std::invalid_argument("label '" + trim(raw) + "' not in {good, evil, merlin, I don't know}");
}

}  // namespace detail

inline HumanAnnotationSet ingest_human_annotations(std::istream& in, const std::string& source = "<stream>") {
  std::string header_line;
  if (!std::getline(in, header_line)) throw AnnotationError({source + ":1: empty file"});
  const auto header = detail::csv_fields(header_line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[detail::trim(header[i])] = i;
  std::vector<std::string> problems;
  std::vector<std::string> needed{"annotator", "game_id", "round"};
  for (PlayerId p : all_players()) needed.push_back(p.key());
  for (const auto& n : needed)
    if (!col.count(n)) problems.push_back(source + ":1: missing column '" + n + "'");
  if (!problems.empty()) throw AnnotationError(problems);

  HumanAnnotationSet set;
  int line_no = 1;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (detail::trim(line).empty() || detail::trim(line) == "\r") continue;
    const auto f = detail::csv_fields(line);
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (f.size() < header.size()) {
      problems.push_back(where + "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
      continue;
    }
    HumanAnnotation a;
    a.line = line_no;
    a.annotator = detail::trim(f[col["annotator"]]);
    a.game_id = detail::trim(f[col["game_id"]]);
    if (a.annotator.empty()) problems.push_back(where + "annotator is empty");
    if (a.game_id.empty()) problems.push_back(where + "game_id is empty");
    try {
      std::size_t used = 0;
      const std::string r = detail::trim(f[col["round"]]);
      a.round = std::stoi(r, &used);
      if (used != r.size() || a.round < 1) throw std::invalid_argument(r);
    } catch (const std::exception&) {
      problems.push_back(where + "round '" + detail::trim(f[col["round"]]) + "' is not a positive integer");
    }
    for (PlayerId p : all_players()) {
      try {
        a.labels[p.index()] = detail::annotation_label(f[col[p.key()]]);
      } catch (const std::invalid_argument& e) {
        problems.push_back(where + p.key() + ": " + e.what());
      }
    }
    set.rows.push_back(std::move(a));
  }
  if (!problems.empty()) throw AnnotationError(problems);
  return set;
}

inline HumanAnnotationSet ingest_human_annotations_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw AnnotationError({"cannot open " + path.string()});
  return ingest_human_annotations(in, path.string());
}

struct HumanReport {
  std::string annotator;  // "pooled" for the combined row
  F1Triple f1;
  ConfusionMatrix confusion;
  double anytime = 0;
  // Final from the assassin's pick: over games that reached an assassination,
  // and over all annotated games with no assassination counted as a miss.
  double final_assassin_games = 0;
  double final_all_games = 0;
  int games = 0;
};

// A round's Merlin pick is the single player labelled merlin; none or
// several labels mean no pick that round.
inline std::optional<PlayerId> unique_merlin(const LabelRow& labels) {
  std::optional<PlayerId> pick;
  for (PlayerId p : all_players()) {
    if (labels[p.index()] != Label::Merlin) continue;
    if (pick) return std::nullopt;
    pick = p;
  }
  return pick;
}

// Scores annotators with the model pipeline: roles from each annotator's last
// round per game, Merlin anytime from every round's pick.
inline std::vector<HumanReport> score_human_annotations(const HumanAnnotationSet& set, const std::vector<GameLog>& logs) {
  auto score = [&](const std::string& who, bool pooled) {
    HumanReport r;
    r.annotator = who;
    std::map<std::pair<std::string, std::string>, std::map<int, const HumanAnnotation*>> by_unit;
    for (const auto& a : set.rows)
      if (pooled || a.annotator == who) by_unit[{a.annotator, a.game_id}][a.round] = &a;
    std::vector<LabelRow> preds;
    std::vector<TruthRow> truths;
    double any = 0;
    std::set<std::string> games;
    for (const auto& [unit, rounds] : by_unit) {
      const GameLog* log = nullptr;
      for (const auto& l : logs)
        if (l.game_id == unit.second) log = &l;
      if (!log) throw AnnotationError({"no log for annotated game '" + unit.second + "'"});
      games.insert(unit.second);
      TruthRow truth{};
      for (PlayerId p : all_players()) truth[p.index()] = label_of(log->roles[p.index()]);
      truths.push_back(truth);
      preds.push_back(rounds.rbegin()->second->labels);
      std::vector<std::optional<PlayerId>> picks;
      for (const auto& [round, a] : rounds) picks.push_back(unique_merlin(a->labels));
      any += merlin_final_anytime(picks, find_role(log->roles, Role::Merlin)).anytime;
    }
    r.confusion = confusion_matrix(preds, truths);
    r.f1 = f1_triple(r.confusion);
    r.anytime = by_unit.empty() ? 0.0 : any / static_cast<double>(by_unit.size());
    int attempted = 0, hits = 0;
    for (const auto& g : games) {
      for (const auto& l : logs) {
        if (l.game_id != g || !l.result) continue;
        if (l.result->assassin_target) {
          ++attempted;
          hits += *l.result->assassin_target == find_role(l.roles, Role::Merlin) ? 1 : 0;
        }
      }
    }
    r.games = static_cast<int>(games.size());
    r.final_assassin_games = attempted ? static_cast<double>(hits) / attempted : 0.0;
    r.final_all_games = games.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(games.size());
    return r;
  };
  std::vector<HumanReport> out;
  for (const auto& who : set.annotators()) out.push_back(score(who, false));
  out.push_back(score("pooled", true));
  return out;
}

}  // namespace avalon
