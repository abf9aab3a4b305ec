#pragma once

// Prompt-length statistics and per-game covariates for external testing.

#include <cmath>
#include <ostream>

#include "avalon/context/prompt.hpp"

namespace avalon {

// Tokenizers are named so a statistics file records which one produced it.
//   whitespace  runs of non-space characters
//   wordpunct   runs of word characters, or runs of other non-space characters
//   chars4      ceil(bytes / 4), a rough stand-in for subword tokenizers
inline const std::vector<std::string>& tokenizer_ids() {
  static const std::vector<std::string> ids{"whitespace", "wordpunct", "chars4"};
  return ids;
}

inline std::size_t count_tokens(std::string_view text, std::string_view tokenizer) {
  auto space = [](unsigned char c) { return std::isspace(c) != 0; };
  auto word = [](unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; };
  if (tokenizer == "chars4") return (text.size() + 3) / 4;
  if (tokenizer == "whitespace") {
    std::size_t n = 0;
    bool in = false;
    for (unsigned char c : text) {
      if (space(c)) in = false;
      else if (!in) in = true, ++n;
    }
    return n;
  }
  if (tokenizer == "wordpunct") {
    std::size_t n = 0;
    int cls = 0;  // 0 space, 1 word, 2 punct
    for (unsigned char c : text) {
      const int k = space(c) ? 0 : word(c) ? 1 : 2;
      if (k && k != cls) ++n;
      cls = k;
    }
    return n;
  }
  throw std::invalid_argument("unknown tokenizer '" + std::string(tokenizer) + "'");
}

struct TokenStats {
  std::size_t prompts = 0;
  double mean = 0;
  double std = 0;  // sample standard deviation
  std::size_t max = 0;
};

struct GameCovariates {
  std::string game_id;
  int merlin_seat = 0;
  bool merlin_first_three = false;
  std::array<int, 5> utterances_by_role{};  // indexed by Role
  int good_utterances = 0;
  int evil_utterances = 0;
  int evil_lies = 0;  // evil utterances carrying a deception label
  double evil_lie_rate = 0;
  int rounds = 0;
  std::optional<Alignment> winner;
  WinReason reason = WinReason::None;
  bool assassination_attempted = false;
  std::optional<bool> assassination_correct;
};

struct CorpusStats {
  std::string tokenizer;
  TokenStats round;
  TokenStats full;
  std::vector<GameCovariates> games;
};

inline TokenStats summarize(const std::vector<std::size_t>& counts) {
  TokenStats s;
  s.prompts = counts.size();
  if (counts.empty()) return s;
  double sum = 0;
  for (auto c : counts) sum += static_cast<double>(c);
  s.mean = sum / static_cast<double>(counts.size());
  double sq = 0;
  for (auto c : counts) sq += (static_cast<double>(c) - s.mean) * (static_cast<double>(c) - s.mean);
  s.std = counts.size() > 1 ? std::sqrt(sq / static_cast<double>(counts.size() - 1)) : 0.0;
  s.max = *std::max_element(counts.begin(), counts.end());
  return s;
}

inline GameCovariates covariates(const GameLog& log) {
  GameCovariates c;
  c.game_id = log.game_id;
  c.merlin_seat = find_role(log.roles, Role::Merlin).seat();
  c.merlin_first_three = c.merlin_seat <= 3;
  for (const auto& u : log.utterances) {
    const Role r = log.roles[u.speaker.index()];
    ++c.utterances_by_role[static_cast<int>(r)];
    if (alignment_of(r) == Alignment::Evil) {
      ++c.evil_utterances;
      if (u.deception) ++c.evil_lies;
    } else {
      ++c.good_utterances;
    }
  }
  c.evil_lie_rate = c.evil_utterances ? static_cast<double>(c.evil_lies) / c.evil_utterances : 0.0;
  c.rounds = static_cast<int>(segment_rounds(log).size());
  if (log.result) {
    c.winner = log.result->winner;
    c.reason = log.result->reason;
    c.assassination_attempted = log.result->assassin_target.has_value();
    if (c.assassination_attempted)
      c.assassination_correct = *log.result->assassin_target == find_role(log.roles, Role::Merlin);
  }
  return c;
}

// Token counts are taken over the role-inference prompt with chat and state,
// one prompt per (game, round) in each context mode.
inline CorpusStats compute_corpus_stats(const std::vector<GameLog>& logs, std::string_view tokenizer) {
  if (std::find(tokenizer_ids().begin(), tokenizer_ids().end(), tokenizer) == tokenizer_ids().end())
    throw std::invalid_argument("unknown tokenizer '" + std::string(tokenizer) + "'");
  CorpusStats stats;
  stats.tokenizer = std::string(tokenizer);
  std::vector<std::size_t> round_counts, full_counts;
  for (const auto& log : logs) {
    const auto segments = segment_rounds(log);
    for (int t = 1; t <= static_cast<int>(segments.size()); ++t) {
      round_counts.push_back(count_tokens(
          build_role_prompt(segments, t, ContextMode::Round, Modality::ChatAndState, std::nullopt).text(), tokenizer));
      full_counts.push_back(count_tokens(
          build_role_prompt(segments, t, ContextMode::Full, Modality::ChatAndState, std::nullopt).text(), tokenizer));
    }
    stats.games.push_back(covariates(log));
  }
  stats.round = summarize(round_counts);
  stats.full = summarize(full_counts);
  return stats;
}

inline json stats_to_json(const CorpusStats& s) {
  auto tok = [](const TokenStats& t) {
    return json{{"prompts", t.prompts}, {"mean", t.mean}, {"std", t.std}, {"max", t.max}};
  };
  return json{{"tokenizer", s.tokenizer}, {"games", s.games.size()}, {"round", tok(s.round)}, {"full", tok(s.full)}};
}

inline void write_covariates_csv(std::ostream& out, const CorpusStats& s) {
  out << "game_id,merlin_seat,merlin_first_three,utt_merlin,utt_percival,utt_servant,utt_morgana,utt_assassin,"
         "utt_good,utt_evil,evil_lies,evil_lie_rate,rounds,winner,win_reason,assassination_attempted,"
         "assassination_correct\n";
  for (const auto& g : s.games) {
    std::string id = g.game_id;
    if (id.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : id) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      id = q + "\"";
    }
    out << id << ',' << g.merlin_seat << ',' << g.merlin_first_three;
    for (int n : g.utterances_by_role) out << ',' << n;
    out << ',' << g.good_utterances << ',' << g.evil_utterances << ',' << g.evil_lies << ',' << g.evil_lie_rate << ','
        << g.rounds << ',' << (g.winner ? alignment_name(*g.winner) : "") << ',' << win_reason_name(g.reason) << ','
        << g.assassination_attempted << ','
        << (g.assassination_correct ? (*g.assassination_correct ? "1" : "0") : "") << "\n";
  }
}

}  // namespace avalon
