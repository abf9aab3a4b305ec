#include <gtest/gtest.h>

#include <algorithm>

#include "avalon/data/export.hpp"
#include "avalon/data/stats.hpp"
#include "avalon/data/text.hpp"
#include "avalon/game/playout.hpp"
#include "support.hpp"

namespace avalon {
namespace {

using testing::fixture_log;

GameLog finished_log(std::uint64_t seed) {
  const Playout p = random_playout(seed);
  GameLog log = make_log("game-" + std::to_string(seed), seed, p.final_state.roles, p.events);
  log.duration_ms = p.events.empty() ? 0 : p.events.back().t_ms;
  return log;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string unlines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

TEST(GameLog, RoundTripsThroughText) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GameLog log = finished_log(seed);
    ASSERT_TRUE(log.result);
    for (auto& u : log.utterances) {
      u.persuasion = Persuasion::LogicalDeduction;
      if (alignment_of(log.roles[u.speaker.index()]) == Alignment::Evil) u.deception = Deception::Omission;
    }
    log.beliefs.push_back({1, PlayerId(2), unknown_beliefs(), log.events[3].seq});
    const GameLog back = log_from_string(log_to_string(log));
    EXPECT_EQ(back, log) << seed;
    EXPECT_EQ(log_to_string(back), log_to_string(log));
  }
}

TEST(GameLog, NamesAndHeaderRolesSurvive) {
  GameLog log = finished_log(4);
  log.names = std::array<std::string, kNumPlayers>{"Alice", "Bob", "Cara", "Dev", "Eli", "Fran"};
  // Percival and a servant trade seats: same alignments, different deal.
  std::swap(log.roles[find_role(log.roles, Role::Percival).index()],
            log.roles[find_role(log.roles, Role::LoyalServant).index()]);
  const auto text = log_to_string(log);
  EXPECT_EQ(log_from_string(text).names, log.names);
  // Header roles win over the seed's deal.
  EXPECT_EQ(log_from_string(text).roles, log.roles);
}

TEST(GameLog, ChatTextLivesAtTopLevel) {
  const auto lines = lines_of(log_to_string(fixture_log()));
  bool seen = false;
  for (const auto& l : lines) {
    const json j = json::parse(l);
    if (j.value("kind", "") != "chat") continue;
    seen = true;
    EXPECT_TRUE(j.contains("text"));
    EXPECT_FALSE(j["payload"].contains("text"));
  }
  EXPECT_TRUE(seen);
}

TEST(GameLog, TamperedQuestOutcomeIsReported) {
  GameLog log;
  std::uint64_t seed = 0;
  for (;; ++seed) {
    log = finished_log(seed);
    if (log.result && log.result->quests.size() >= 2) break;
  }
  auto lines = lines_of(log_to_string(log));
  json trailer = json::parse(lines.back());
  const bool was = trailer["result"]["quests"][1] == "success";
  trailer["result"]["quests"][1] = was ? "failure" : "success";
  lines.back() = trailer.dump();
  try {
    log_from_string(unlines(lines), "g.jsonl");
    FAIL() << "tampered log accepted";
  } catch (const LogError& e) {
    EXPECT_EQ(e.kind(), LogError::Kind::ReplayDivergence);
    EXPECT_EQ(e.line(), static_cast<int>(lines.size()));
    EXPECT_NE(std::string(e.what()).find("quest 2"), std::string::npos) << e.what();
  }
}

TEST(GameLog, IllegalEventIsADivergence) {
  auto lines = lines_of(log_to_string(fixture_log()));
  // Line 2 is the first event; give it to a seat that does not lead.
  json first = json::parse(lines[1]);
  first["actor"] = "player_4";
  lines[1] = first.dump();
  try {
    log_from_string(unlines(lines));
    FAIL();
  } catch (const LogError& e) {
    EXPECT_EQ(e.kind(), LogError::Kind::ReplayDivergence);
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(GameLog, SchemaErrorsCarryLineNumbers) {
  const auto good = lines_of(log_to_string(finished_log(3)));
  struct Case {
    int line;
    std::function<void(json&)> edit;
  };
  const std::vector<Case> cases{
      {1, [](json& j) { j.erase("roles"); }},
      {1, [](json& j) { j["roles"]["player_1"] = "wizard"; }},
      {2, [](json& j) { j["kind"] = "dance"; }},
      {3, [](json& j) { j.erase("seq"); }},
      {3, [](json& j) { j["actor"] = "player_9"; }},
  };
  for (const auto& c : cases) {
    auto lines = good;
    json j = json::parse(lines[c.line - 1]);
    c.edit(j);
    lines[c.line - 1] = j.dump();
    try {
      log_from_string(unlines(lines));
      ADD_FAILURE() << "accepted edit on line " << c.line;
    } catch (const LogError& e) {
      EXPECT_EQ(e.kind(), LogError::Kind::SchemaViolation) << e.what();
      EXPECT_EQ(e.line(), c.line) << e.what();
    }
  }
  auto lines = good;
  lines[4] = "{not json";
  EXPECT_THROW(log_from_string(unlines(lines)), LogError);
}

TEST(GameLog, UnfinishedGameIsRejected) {
  EXPECT_THROW(log_from_string(log_to_string(fixture_log())), LogError);
}

TEST(GameLog, UtteranceRoundsFollowSegmentation) {
  const GameLog log = fixture_log();
  ASSERT_EQ(log.utterances.size(), 8u);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(log.utterances[i].round, 1);
  EXPECT_EQ(log.utterances[6].round, 2);
  EXPECT_EQ(log.utterances[7].round, 2);
}

TEST(Levenshtein, Basics) {
  EXPECT_EQ(levenshtein("kitten", "sitting"), 3);
  EXPECT_EQ(levenshtein("", "abc"), 3);
  EXPECT_EQ(levenshtein("same", "same"), 0);
  EXPECT_GT(levenshtein("abcdef", "uvwxyz", 2), 2);
}

UtteranceRecord utt(std::int64_t seq, std::string text) {
  UtteranceRecord u;
  u.seq = seq;
  u.speaker = PlayerId(1);
  u.text = std::move(text);
  return u;
}

const Dictionary& words() {
  static const Dictionary d{{"the", 100}, {"party", 20}, {"is", 80},   {"evil", 10}, {"i", 90},
                            {"think", 30}, {"good", 25}, {"approve", 5}, {"this", 40}, {"they", 35}};
  return d;
}

TEST(Normalize, FixesMisspellings) {
  const auto r = normalize_text({utt(1, "teh party")}, words(), {});
  EXPECT_EQ(r.utterances[0].text, "the party");
  ASSERT_EQ(r.corrections.size(), 1u);
  EXPECT_EQ(r.corrections[0].from, "teh");
}

TEST(Normalize, NameVariantsBecomeAliases) {
  const auto r = normalize_text({utt(1, "p4 is evil"), utt(2, "I think P4 is good")}, words(), {{"p4", "player-4"}});
  EXPECT_EQ(r.utterances[0].text, "player-4 is evil");
  EXPECT_EQ(r.utterances[1].text, "I think player-4 is good");
}

TEST(Normalize, CleanTextAndAliasesUntouched) {
  const auto r = normalize_text({utt(1, "I think player-3 is evil, approve this party!")}, words(), {});
  EXPECT_EQ(r.utterances[0].text, "I think player-3 is evil, approve this party!");
  EXPECT_TRUE(r.corrections.empty());
  EXPECT_TRUE(r.unresolved.empty());
}

TEST(Normalize, FarTokensGoToReview) {
  const auto r = normalize_text({utt(7, "Thinkk xyzzyq")}, words(), {});
  EXPECT_EQ(r.utterances[0].text, "Think xyzzyq");
  ASSERT_EQ(r.unresolved.size(), 1u);
  EXPECT_EQ(r.unresolved[0].token, "xyzzyq");
  EXPECT_EQ(r.unresolved[0].seq, 7);
}

TEST(Anonymize, ReplacesNamesWithSeats) {
  GameLog log = fixture_log();
  log.names = std::array<std::string, kNumPlayers>{"Ann", "Bo", "Alice", "Dev", "Eli", "Fran"};
  log.utterances[0].text = "Alice seems fine, alice is good. Alicea is not a name here.";
  const GameLog anon = anonymize(log, header_name_map(log));
  EXPECT_EQ(anon.utterances[0].text, "player-3 seems fine, player-3 is good. Alicea is not a name here.");
  EXPECT_FALSE(anon.names);
  EXPECT_EQ(anonymize(anon, header_name_map(log)), anon);
}

TEST(Anonymize, UnmappedParticipantIsFatal) {
  GameLog log = fixture_log();
  log.names = std::array<std::string, kNumPlayers>{"Ann", "Bo", "Alice", "Dev", "Eli", "Fran"};
  auto map = header_name_map(log);
  map.erase("Fran");
  EXPECT_THROW(anonymize(log, map), AnonymizeError);
  map["Fran"] = PlayerId(2);
  EXPECT_THROW(anonymize(log, map), AnonymizeError);
}

std::vector<GameLog> corpus(int n) {
  std::vector<GameLog> logs;
  for (int i = 0; i < n; ++i) logs.push_back(finished_log(static_cast<std::uint64_t>(i)));
  return logs;
}

TEST(Split, OverlapAndDuplicatesAreReported) {
  SplitManifest m{{"a", "b", "b"}, {"c", "a"}};
  const auto problems = split_problems(m);
  ASSERT_EQ(problems.size(), 2u);
  EXPECT_NE(problems[1].find("'a'"), std::string::npos);
  EXPECT_TRUE(split_problems(SplitManifest{{"a"}, {"b"}}).empty());
}

TEST(Split, RandomSplitIsDisjointAndDeterministic) {
  const auto logs = corpus(20);
  const SplitManifest m = random_split(logs, 6, 7);
  EXPECT_EQ(m.train.size(), 14u);
  EXPECT_EQ(m.test.size(), 6u);
  EXPECT_TRUE(split_problems(m).empty());
  EXPECT_EQ(split_to_json(random_split(logs, 6, 7)), split_to_json(m));
  EXPECT_EQ(split_to_json(split_from_json(split_to_json(m))), split_to_json(m));
}

TEST(Split, ReleaseCompositionCheck) {
  std::vector<GameLog> logs;
  std::vector<std::string> good, evil_assassin, evil_other;
  for (std::uint64_t seed = 0; good.size() < 3 || evil_assassin.size() < 2 || evil_other.size() < 1; ++seed) {
    ASSERT_LT(seed, 2000u);
    GameLog log = finished_log(seed);
    const auto& r = *log.result;
    if (*r.winner == Alignment::Good && good.size() < 3) good.push_back(log.game_id);
    else if (r.reason == WinReason::AssassinFoundMerlin && evil_assassin.size() < 2) evil_assassin.push_back(log.game_id);
    else if (*r.winner == Alignment::Evil && r.reason != WinReason::AssassinFoundMerlin && evil_other.empty())
      evil_other.push_back(log.game_id);
    else continue;
    logs.push_back(std::move(log));
  }
  SplitManifest m;
  m.test = good;
  m.test.insert(m.test.end(), evil_assassin.begin(), evil_assassin.end());
  m.test.push_back(evil_other[0]);
  for (int i = 0; i < 14; ++i) m.train.push_back("train-" + std::to_string(i));
  EXPECT_EQ(composition(m.test, logs), (SplitComposition{3, 3, 2, 0}));
  EXPECT_TRUE(release_split_problems(m, logs).empty());
  m.test.pop_back();
  EXPECT_FALSE(release_split_problems(m, logs).empty());
}

TEST(Export, TestSplitIsRefused) {
  const auto logs = corpus(8);
  const SplitManifest m = random_split(logs, 2, 1);
  EXPECT_THROW(export_finetune_examples(m, "test", logs), LeakageError);
  SplitManifest leaky = m;
  leaky.train.push_back(m.test[0]);
  EXPECT_THROW(export_finetune_examples(leaky, "train", logs), LeakageError);
}

TEST(Export, OneExamplePerGameRound) {
  const auto logs = corpus(8);
  const SplitManifest m = random_split(logs, 2, 1);
  std::size_t rounds = 0;
  for (const auto& id : m.train) rounds += segment_rounds(*find_log(logs, id)).size();
  for (ContextMode mode : {ContextMode::Round, ContextMode::Full}) {
    const auto examples = export_finetune_examples(m, "train", logs, {Task::Roles, mode, Modality::ChatAndState});
    ASSERT_EQ(examples.size(), rounds);
    for (const auto& ex : examples) {
      EXPECT_FALSE(m.in_test(ex.game_id));
      ASSERT_EQ(ex.answer.size(), 6u);
      EXPECT_TRUE(validate_response(ex.answer.dump(), SchemaKind::Role).ok());
      const json j = ex.to_json();
      EXPECT_EQ(j["messages"].size(), 3u);
      EXPECT_EQ(j["messages"][2]["role"], "assistant");
    }
  }
  const auto merlin = export_finetune_examples(m, "train", logs, {Task::Merlin, ContextMode::Full, Modality::ChatOnly});
  for (const auto& ex : merlin) EXPECT_TRUE(validate_response(ex.answer.dump(), SchemaKind::Merlin).ok());
}

TEST(Stats, Tokenizers) {
  EXPECT_EQ(count_tokens("Hello, world!", "whitespace"), 2u);
  EXPECT_EQ(count_tokens("Hello, world!", "wordpunct"), 4u);
  EXPECT_EQ(count_tokens("Hello, world!", "chars4"), 4u);
  EXPECT_EQ(count_tokens("player-3: yes", "wordpunct"), 5u);
  EXPECT_THROW(count_tokens("x", "bpe"), std::invalid_argument);
  EXPECT_THROW(compute_corpus_stats({}, "bpe"), std::invalid_argument);
}

TEST(Stats, EmptyCorpusIsAllZero) {
  const CorpusStats s = compute_corpus_stats({}, "wordpunct");
  EXPECT_EQ(s.round.prompts, 0u);
  EXPECT_EQ(s.round.mean, 0.0);
  EXPECT_EQ(s.full.max, 0u);
  EXPECT_TRUE(s.games.empty());
}

TEST(Stats, CovariatesFollowGroundTruth) {
  const auto logs = corpus(20);
  const CorpusStats s = compute_corpus_stats(logs, "whitespace");
  ASSERT_EQ(s.games.size(), 20u);
  EXPECT_GE(s.full.mean, s.round.mean);
  EXPECT_GE(s.full.max, s.round.max);
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const auto& g = s.games[i];
    const int merlin = find_role(logs[i].roles, Role::Merlin).seat();
    EXPECT_EQ(g.merlin_first_three, merlin <= 3);
    int total = 0;
    for (int n : g.utterances_by_role) total += n;
    EXPECT_EQ(total, static_cast<int>(logs[i].utterances.size()));
    EXPECT_EQ(g.good_utterances + g.evil_utterances, total);
    if (g.assassination_correct) EXPECT_EQ(*g.assassination_correct, g.reason == WinReason::AssassinFoundMerlin);
  }
  std::ostringstream csv;
  write_covariates_csv(csv, s);
  EXPECT_EQ(lines_of(csv.str()).size(), 21u);
  EXPECT_EQ(stats_to_json(compute_corpus_stats(logs, "whitespace")), stats_to_json(s));
}

}  // namespace
}  // namespace avalon
