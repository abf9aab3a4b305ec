#pragma once

// Utterance clean-up: dictionary spell correction, player-name correction
// and anonymization to seat aliases.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "avalon/data/game_log.hpp"

namespace avalon {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Edit distance with unit costs. Returns `cap + 1` as soon as the distance
// is known to exceed `cap`.
inline int levenshtein(std::string_view a, std::string_view b, int cap = 1 << 20) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  if (std::abs(n - m) > cap) return cap + 1;
  std::vector<int> prev(m + 1), cur(m + 1);
  for (int j = 0; j <= m; ++j) prev[j] = j;
  for (int i = 1; i <= n; ++i) {
    cur[0] = i;
    int row_min = cur[0];
    for (int j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min > cap) return cap + 1;
    std::swap(prev, cur);
  }
  return prev[m];
}

// Word list with optional frequencies; lookups are case-insensitive.
class Dictionary {
 public:
  Dictionary() = default;
  Dictionary(std::initializer_list<std::pair<std::string, long>> words) {
    for (const auto& [w, f] : words) add(w, f);
  }

  void add(std::string_view word, long frequency = 1) {
    auto key = to_lower(word);
    auto [it, inserted] = freq_.emplace(key, frequency);
    if (!inserted) it->second = std::max(it->second, frequency);
    else words_.push_back(key);
  }

  bool contains(std::string_view word) const { return freq_.count(to_lower(word)) > 0; }
  long frequency(const std::string& lower) const {
    auto it = freq_.find(lower);
    return it == freq_.end() ? 0 : it->second;
  }
  std::size_t size() const { return words_.size(); }

  // Nearest word within `threshold` edits; ties prefer higher frequency, then
  // alphabetical order.
  std::optional<std::string> nearest(std::string_view token, int threshold) const {
    const std::string t = to_lower(token);
    std::optional<std::string> best;
    int best_d = threshold + 1;
    long best_f = -1;
    for (const auto& w : words_) {
      const int d = levenshtein(t, w, best_d);
      if (d > threshold) continue;
      const long f = frequency(w);
      if (d < best_d || (d == best_d && (f > best_f || (f == best_f && w < *best)))) {
        best = w;
        best_d = d;
        best_f = f;
      }
    }
    return best;
  }

  // One entry per line: "word" or "word<whitespace>count".
  static Dictionary load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dictionary " + path.string());
    Dictionary d;
    std::string word;
    long freq = 1;
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      if (!(ls >> word)) continue;
      if (!(ls >> freq)) freq = 1;
      d.add(word, freq);
    }
    return d;
  }

 private:
  std::unordered_map<std::string, long> freq_;
  std::vector<std::string> words_;
};

struct Correction {
  std::int64_t seq = 0;
  std::string from;
  std::string to;
};

struct UnresolvedToken {
  std::int64_t seq = 0;
  std::string token;
};

struct NormalizeReport {
  std::vector<UtteranceRecord> utterances;
  std::vector<Correction> corrections;
  std::vector<UnresolvedToken> unresolved;
};

struct NormalizeOptions {
  int max_distance = 2;
};

namespace detail {

inline bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '\'';
}

inline std::string match_case(const std::string& original, std::string replacement) {
  const bool all_upper = original.size() > 1 && std::all_of(original.begin(), original.end(), [](unsigned char c) {
                           return !std::isalpha(c) || std::isupper(c);
                         });
  if (all_upper) {
    for (auto& c : replacement) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  } else if (!original.empty() && std::isupper(static_cast<unsigned char>(original[0])) && !replacement.empty()) {
    replacement[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])));
  }
  return replacement;
}

inline bool alias_at(std::string_view text, std::size_t i) {
  static constexpr std::string_view kAlias = "player-";
  if (text.substr(i, kAlias.size()) != kAlias || i + kAlias.size() >= text.size()) return false;
  const char d = text[i + kAlias.size()];
  return d >= '1' && d <= '6';
}

}  // namespace detail

// Rewrites each utterance token by token. Seat aliases ("player-3") are left
// alone; name-map variants are replaced first; remaining unknown alphabetic
// tokens take the nearest dictionary word within the distance threshold and
// are otherwise reported for manual review.
inline NormalizeReport normalize_text(const std::vector<UtteranceRecord>& utterances, const Dictionary& dictionary,
                                      const std::map<std::string, std::string>& name_map,
                                      const NormalizeOptions& opt = {}) {
  std::map<std::string, std::string> names;
  for (const auto& [k, v] : name_map) names[to_lower(k)] = v;

  NormalizeReport report;
  for (const auto& u : utterances) {
    const std::string& text = u.text;
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
      if (detail::alias_at(text, i)) {
        out.append(text, i, 8);
        i += 8;
        continue;
      }
      if (!detail::is_word_char(text[i])) {
        out.push_back(text[i++]);
        continue;
      }
      std::size_t j = i;
      while (j < text.size() && detail::is_word_char(text[j])) ++j;
      const std::string token = text.substr(i, j - i);
      i = j;

      const std::string lower = to_lower(token);
      if (auto it = names.find(lower); it != names.end()) {
        if (it->second != token) report.corrections.push_back({u.seq, token, it->second});
        out += it->second;
        continue;
      }
      const bool alphabetic = std::all_of(token.begin(), token.end(), [](unsigned char c) {
        return std::isalpha(c) || c == '\'';
      });
      if (!alphabetic || dictionary.contains(token)) {
        out += token;
        continue;
      }
      if (auto fix = dictionary.nearest(token, opt.max_distance)) {
        std::string replacement = detail::match_case(token, *fix);
        report.corrections.push_back({u.seq, token, replacement});
        out += replacement;
      } else {
        report.unresolved.push_back({u.seq, token});
        out += token;
      }
    }
    UtteranceRecord fixed = u;
    fixed.text = std::move(out);
    report.utterances.push_back(std::move(fixed));
  }
  return report;
}

struct AnonymizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Replaces every real-name mention (whole word, case-insensitive) with the
// seat alias and drops the name table. `name_map` may carry extra spellings
// and nicknames; every participant listed in the log header must be covered.
inline GameLog anonymize(const GameLog& log, const std::map<std::string, PlayerId>& name_map) {
  if (log.names) {
    for (PlayerId p : all_players()) {
      const std::string& name = (*log.names)[p.index()];
      auto it = std::find_if(name_map.begin(), name_map.end(),
                             [&](const auto& kv) { return to_lower(kv.first) == to_lower(name); });
      if (it == name_map.end()) throw AnonymizeError("no alias for participant '" + name + "'");
      if (it->second != p)
        throw AnonymizeError("participant '" + name + "' sits at " + p.alias() + ", map says " + it->second.alias());
    }
  }
  // Longest names first so "Anna Lee" wins over "Anna".
  std::vector<std::pair<std::string, PlayerId>> ordered(name_map.begin(), name_map.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });

  auto scrub = [&](const std::string& text) {
    std::string out = text;
    for (const auto& [name, seat] : ordered) {
      if (name.empty()) continue;
      const std::string needle = to_lower(name);
      std::string lower = to_lower(out);
      std::size_t pos = 0;
      while ((pos = lower.find(needle, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !detail::is_word_char(out[pos - 1]);
        const std::size_t end = pos + needle.size();
        const bool right_ok = end >= out.size() || !detail::is_word_char(out[end]);
        if (left_ok && right_ok) {
          const std::string alias = seat.alias();
          out.replace(pos, needle.size(), alias);
          lower.replace(pos, needle.size(), alias);
          pos += alias.size();
        } else {
          pos = end;
        }
      }
    }
    return out;
  };

  GameLog out = log;
  out.names.reset();
  for (auto& u : out.utterances) u.text = scrub(u.text);
  for (auto& e : out.events)
    if (e.kind == EventKind::Chat && e.payload.contains("text"))
      e.payload["text"] = scrub(e.payload["text"].get<std::string>());
  return out;
}

// Name map from the log header alone.
inline std::map<std::string, PlayerId> header_name_map(const GameLog& log) {
  std::map<std::string, PlayerId> m;
  if (log.names)
    for (PlayerId p : all_players()) m[(*log.names)[p.index()]] = p;
  return m;
}

// Writes normalized texts back into the log (utterances and chat payloads).
inline GameLog with_texts(const GameLog& log, const std::vector<UtteranceRecord>& utterances) {
  GameLog out = log;
  std::map<std::int64_t, std::string> text;
  for (const auto& u : utterances) text[u.seq] = u.text;
  for (auto& u : out.utterances)
    if (auto it = text.find(u.seq); it != text.end()) u.text = it->second;
  for (auto& e : out.events)
    if (auto it = text.find(e.seq); e.kind == EventKind::Chat && it != text.end()) e.payload["text"] = it->second;
  return out;
}

}  // namespace avalon
