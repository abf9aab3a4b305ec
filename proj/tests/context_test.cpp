#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "avalon/context/prompt.hpp"
#include "avalon/game/playout.hpp"
#include "support.hpp"

namespace avalon {
namespace {

using testing::Driver;
using testing::fixture_log;
using testing::party;

std::string read_golden(const std::string& name) {
  std::ifstream in(std::string(AVALON_GOLDEN_DIR) + "/" + name);
  EXPECT_TRUE(in) << "missing golden " << name;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(GlobalState, FirstQuestTemplate) {
  Driver d;
  d.propose({1, 2});
  d.discussion_cycle();
  d.start_vote();
  d.vote_all(true);
  d.quest(false);
  EXPECT_EQ(render_global_state(d.state),
            "quest-1: success (party: player-1, player-2 | player votes: player-1: yes, player-2: yes, "
            "player-3: yes, player-4: yes, player-5: yes, player-6: yes)");
}

TEST(GlobalState, EmptyWithoutQuests) {
  Driver d;
  EXPECT_EQ(render_global_state(d.state), "");
  d.propose({3, 4});
  EXPECT_EQ(render_global_state(d.state), "current party proposal: player-3, player-4");
}

TEST(GlobalState, FailedQuestKeepsSeatOrderedVotes) {
  Driver d;
  d.play_quest(false);
  const PlayerId morgana = find_role(d.state.roles, Role::Morgana);
  std::vector<PlayerId> members{morgana};
  for (PlayerId p : all_players())
    if (members.size() < 3 && p != morgana) members.push_back(p);
  std::sort(members.begin(), members.end());
  d.apply(EventKind::Propose, d.state.leader, {{"members", members_json(members)}});
  d.apply(EventKind::ConfirmProposal, d.state.leader);
  d.discussion_cycle();
  d.start_vote();
  d.votes({true, true, false, true, false, true});
  d.quest(true);
  ASSERT_EQ(d.state.quests.size(), 2u);
  const std::string expected = "quest-2: failure (party: " + alias_list(members) +
                               " | player votes: player-1: yes, player-2: yes, player-3: no, player-4: yes, "
                               "player-5: no, player-6: yes)";
  EXPECT_EQ(render_quest_lines(d.state)[1], expected);
}

TEST(Segments, FirstRoundOfFixture) {
  const auto segs = segment_rounds(fixture_log());
  ASSERT_EQ(segs.size(), 2u);
  const auto& r1 = segs[0];
  EXPECT_EQ(r1.index, 1);
  EXPECT_EQ(r1.leader, PlayerId(1));
  ASSERT_EQ(r1.entries.size(), 11u);
  EXPECT_EQ(r1.entries[0].line(), "system: Game Started!");
  EXPECT_EQ(r1.entries[1].line(), "system: player-1 proposed a party: player-1, player-2");
  int utterances = 0;
  for (const auto& e : r1.entries) utterances += e.is_system() ? 0 : 1;
  EXPECT_EQ(utterances, 6);
  EXPECT_EQ(r1.entries.back().line(), "system: Quest Succeeded!");
  EXPECT_EQ(segs[1].leader, PlayerId(2));
  EXPECT_EQ(segs[1].before.quests.size(), 1u);
}

TEST(Segments, ConcatenationReproducesChatStream) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Playout p = random_playout(seed);
    const GameLog log = make_log("g", seed, p.final_state.roles, p.events);
    std::vector<std::string> expected;
    for (const auto& u : log.utterances) expected.push_back(u.text);
    std::vector<std::string> got;
    for (const auto& seg : segment_rounds(log))
      for (const auto& e : seg.entries)
        if (!e.is_system()) got.push_back(e.text);
    EXPECT_EQ(got, expected);
  }
}

TEST(Segments, EachRejectedProposalOpensARound) {
  Driver d;
  d.play_quest(false);
  for (int i = 0; i < 3; ++i) {
    d.chat(d.state.leader.seat(), "how about this");
    d.propose({1, 2, 3});
    d.discussion_cycle();
    d.start_vote();
    d.vote_all(i == 2);
  }
  const auto segs = segment_rounds(make_log("g", 1, d.state.roles, d.events));
  int quest2 = 0;
  for (const auto& s : segs) quest2 += s.before.quest_index == 2 ? 1 : 0;
  EXPECT_GE(quest2, 3);
}

TEST(Segments, SilentGameHasOnlyNarration) {
  Driver d;
  while (d.state.phase != Phase::Finished) d.apply_all(default_action(d.state, *deadline_for(d.state, {})));
  const auto segs = segment_rounds(make_log("g", 1, d.state.roles, d.events));
  ASSERT_FALSE(segs.empty());
  for (const auto& s : segs)
    for (const auto& e : s.entries) EXPECT_TRUE(e.is_system());
  EXPECT_EQ(d.state.winner, Alignment::Good);
}

TEST(SystemEvents, Narration) {
  const auto segs = segment_rounds(fixture_log());
  const auto sys = render_system_events(segs[0]);
  EXPECT_EQ(sys[1], "system: player-1 proposed a party: player-1, player-2");
  EXPECT_EQ(sys.back(), "system: Quest Succeeded!");

  Driver d;
  d.chat(1, "hello");
  d.end_turn();
  const auto quiet = segment_rounds(make_log("g", 1, d.state.roles, d.events));
  EXPECT_EQ(render_system_events(quiet[0]), std::vector<std::string>{"system: Game Started!"});
}

struct GoldenCase {
  Task task;
  ContextMode mode;
  Modality modality;
};

TEST(Prompts, GoldenFiles) {
  const GameLog log = fixture_log();
  const BeliefVector belief{Label::Good, Label::Merlin, Label::Good, Label::Evil, Label::Good, Label::Evil};
  for (Task task : {Task::Roles, Task::Merlin}) {
    for (ContextMode mode : {ContextMode::Round, ContextMode::Full}) {
      for (Modality modality : {Modality::ChatOnly, Modality::StateOnly, Modality::ChatAndState}) {
        std::string mod(modality_name(modality));
        std::replace(mod.begin(), mod.end(), '+', '_');
        const std::string name =
            std::string(task_name(task)) + "_" + std::string(mode_name(mode)) + "_" + mod + ".txt";
        const PromptBundle b = task == Task::Roles
                                   ? build_role_prompt(log, 2, mode, modality, belief)
                                   : build_merlin_prompt(log, 2, mode, modality, evil_players(log.roles), belief);
        EXPECT_EQ(b.text(), read_golden(name)) << name;
      }
    }
  }
}

TEST(Prompts, RoundOneBeliefIsUnknown) {
  const PromptBundle b = build_role_prompt(fixture_log(), 1, ContextMode::Round, Modality::ChatAndState, std::nullopt);
  ASSERT_TRUE(b.belief);
  EXPECT_EQ(*b.belief, "player-1: unknown, player-2: unknown, player-3: unknown, player-4: unknown, "
                       "player-5: unknown, player-6: unknown");
  const PromptBundle full = build_role_prompt(fixture_log(), 1, ContextMode::Full, Modality::ChatAndState, std::nullopt);
  EXPECT_FALSE(full.belief);
  EXPECT_EQ(full.human().find("initial belief"), std::string::npos);
}

TEST(Prompts, ChatOnlyDropsStateAndNarration) {
  const PromptBundle b = build_role_prompt(fixture_log(), 1, ContextMode::Full, Modality::ChatOnly, std::nullopt);
  EXPECT_FALSE(b.state);
  EXPECT_FALSE(b.party);
  for (const auto& line : b.chat) EXPECT_NE(line.rfind("system:", 0), 0u) << line;
}

TEST(Prompts, StateOnlyKeepsOnlyNarration) {
  const PromptBundle b = build_role_prompt(fixture_log(), 2, ContextMode::Full, Modality::StateOnly, std::nullopt);
  ASSERT_FALSE(b.chat.empty());
  for (const auto& line : b.chat) EXPECT_EQ(line.rfind("system:", 0), 0u) << line;
}

TEST(Prompts, MerlinPromptPreconditions) {
  const GameLog log = fixture_log();
  const PromptBundle b = build_merlin_prompt(log, 1, ContextMode::Full, Modality::ChatAndState,
                                             {PlayerId(5), PlayerId(3)});
  EXPECT_NE(b.human().find("You know that player-3, player-5 are evil."), std::string::npos);
  EXPECT_EQ(b.question, "Who do you think is Merlin? Please do not explain your answer, do not elaborate on it further.");
  EXPECT_THROW(build_merlin_prompt(log, 1, ContextMode::Full, Modality::ChatAndState, {PlayerId(3)}), PromptError);
  EXPECT_THROW(build_role_prompt(log, 3, ContextMode::Full, Modality::ChatAndState, std::nullopt), PromptError);
}

// Section-wise: the combined prompt's state lines equal the state-only
// prompt's, and its chat block splits into the chat-only and state-only blocks.
TEST(PromptProperties, ModalityOrthogonalityAndDeterminism) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Playout p = random_playout(seed);
    const GameLog log = make_log("g", seed, p.final_state.roles, p.events);
    const auto segs = segment_rounds(log);
    for (int t = 1; t <= static_cast<int>(segs.size()); ++t) {
      for (ContextMode mode : {ContextMode::Round, ContextMode::Full}) {
        const auto both = build_role_prompt(segs, t, mode, Modality::ChatAndState, std::nullopt);
        const auto chat = build_role_prompt(segs, t, mode, Modality::ChatOnly, std::nullopt);
        const auto state = build_role_prompt(segs, t, mode, Modality::StateOnly, std::nullopt);
        EXPECT_EQ(both.state, state.state);
        EXPECT_EQ(both.party, state.party);
        std::vector<std::string> sys, talk;
        for (const auto& l : both.chat) (l.rfind("system: ", 0) == 0 ? sys : talk).push_back(l);
        EXPECT_EQ(sys, state.chat);
        EXPECT_EQ(talk, chat.chat);
        EXPECT_EQ(both.text(), build_role_prompt(segs, t, mode, Modality::ChatAndState, std::nullopt).text());
      }
      if (t > 1) {
        const auto prev = build_role_prompt(segs, t - 1, ContextMode::Full, Modality::ChatAndState, std::nullopt);
        const auto cur = build_role_prompt(segs, t, ContextMode::Full, Modality::ChatAndState, std::nullopt);
        ASSERT_LE(prev.chat.size(), cur.chat.size());
        EXPECT_TRUE(std::equal(prev.chat.begin(), prev.chat.end(), cur.chat.begin()));
      }
    }
  }
}

}  // namespace
}  // namespace avalon
