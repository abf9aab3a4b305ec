#pragma once

// Train/test partition of a game collection.
//
//   {"train":["g01",..],"test":["g15",..]}

#include <filesystem>
#include <set>

#include "avalon/data/game_log.hpp"
#include "avalon/game/rng.hpp"

namespace avalon {

struct SplitComposition {
  int good_wins = 0;
  int evil_wins = 0;
  int assassination_wins = 0;  // evil wins through the assassin's pick
  int unknown = 0;             // ids without a log or without a result
  bool operator==(const SplitComposition&) const = default;
};

struct SplitManifest {
  std::vector<std::string> train;
  std::vector<std::string> test;

  bool in_test(const std::string& id) const { return std::find(test.begin(), test.end(), id) != test.end(); }
  bool in_train(const std::string& id) const { return std::find(train.begin(), train.end(), id) != train.end(); }

  const std::vector<std::string>& ids(std::string_view split) const {
    if (split == "train") return train;
    if (split == "test") return test;
    throw std::invalid_argument("unknown split '" + std::string(split) + "'");
  }
};

inline json split_to_json(const SplitManifest& m) { return json{{"train", m.train}, {"test", m.test}}; }

inline SplitManifest split_from_json(const json& j) {
  SplitManifest m;
  try {
    m.train = j.at("train").get<std::vector<std::string>>();
    m.test = j.at("test").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("split manifest: ") + e.what());
  }
  return m;
}

inline SplitManifest load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open split manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return split_from_json(j);
}

inline void save_split(const std::filesystem::path& path, const SplitManifest& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << split_to_json(m).dump(2) << "\n";
}

// Structural problems: duplicates and overlap. Empty when the manifest is sound.
inline std::vector<std::string> split_problems(const SplitManifest& m) {
  std::vector<std::string> out;
  std::set<std::string> train(m.train.begin(), m.train.end());
  std::set<std::string> test(m.test.begin(), m.test.end());
  if (train.size() != m.train.size()) out.push_back("train split lists a game twice");
  if (test.size() != m.test.size()) out.push_back("test split lists a game twice");
  for (const auto& id : test)
    if (train.count(id)) out.push_back("game '" + id + "' is in both splits");
  return out;
}

inline const GameLog* find_log(const std::vector<GameLog>& logs, const std::string& id) {
  for (const auto& l : logs)
    if (l.game_id == id) return &l;
  return nullptr;
}

inline SplitComposition composition(const std::vector<std::string>& ids, const std::vector<GameLog>& logs) {
  SplitComposition c;
  for (const auto& id : ids) {
    const GameLog* log = find_log(logs, id);
    if (!log || !log->result || !log->result->winner) {
      ++c.unknown;
      continue;
    }
    if (*log->result->winner == Alignment::Good) {
      ++c.good_wins;
    } else {
      ++c.evil_wins;
      if (log->result->reason == WinReason::AssassinFoundMerlin) ++c.assassination_wins;
    }
  }
  return c;
}

// The released partition: 14 train, 6 test, test holding three good wins and
// three evil wins of which two came from the assassin.
inline std::vector<std::string> release_split_problems(const SplitManifest& m, const std::vector<GameLog>& logs) {
  auto out = split_problems(m);
  if (m.train.size() != 14) out.push_back("train split has " + std::to_string(m.train.size()) + " games, expected 14");
  if (m.test.size() != 6) out.push_back("test split has " + std::to_string(m.test.size()) + " games, expected 6");
  const SplitComposition c = composition(m.test, logs);
  if (c.unknown) out.push_back(std::to_string(c.unknown) + " test games have no finished log");
  if (c.good_wins != 3 || c.evil_wins != 3 || c.assassination_wins != 2)
    out.push_back("test composition is " + std::to_string(c.good_wins) + " good / " + std::to_string(c.evil_wins) +
                  " evil (" + std::to_string(c.assassination_wins) + " by assassination), expected 3 / 3 (2)");
  return out;
}

// Seeded random partition of `logs` with `n_test` games held out.
inline SplitManifest random_split(const std::vector<GameLog>& logs, std::size_t n_test, std::uint64_t seed) {
  std::vector<std::string> ids;
  for (const auto& l : logs) ids.push_back(l.game_id);
  std::sort(ids.begin(), ids.end());
  if (n_test > ids.size()) throw std::invalid_argument("more test games requested than available");
  SplitMix64 rng(seed);
  rng.shuffle(ids.begin(), ids.end());
  SplitManifest m;
  m.test.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
  m.train.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_test), ids.end());
  std::sort(m.test.begin(), m.test.end());
  std::sort(m.train.begin(), m.train.end());
  return m;
}

}  // namespace avalon
