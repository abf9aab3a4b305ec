#pragma once

// Prompt assembly for role inference and Merlin identification.

#include <optional>
#include <string>
#include <vector>

#include "avalon/context/rounds.hpp"

namespace avalon {

enum class ContextMode : std::uint8_t { Round, Full };
enum class Modality : std::uint8_t { ChatOnly, StateOnly, ChatAndState };
enum class Task : std::uint8_t { Roles, Merlin, Strategy };

inline constexpr std::string_view mode_name(ContextMode m) { return m == ContextMode::Round ? "round" : "full"; }
inline constexpr std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::ChatOnly: return "chat";
    case Modality::StateOnly: return "state";
    case Modality::ChatAndState: return "chat+state";
  }
  return "?";
}
inline constexpr std::string_view task_name(Task t) {
  switch (t) {
    case Task::Roles: return "roles";
    case Task::Merlin: return "merlin";
    case Task::Strategy: return "strategy";
  }
  return "?";
}

inline std::optional<ContextMode> parse_mode(std::string_view s) {
  if (s == "round") return ContextMode::Round;
  if (s == "full") return ContextMode::Full;
  return std::nullopt;
}
inline std::optional<Modality> parse_modality(std::string_view s) {
  if (s == "chat") return Modality::ChatOnly;
  if (s == "state") return Modality::StateOnly;
  if (s == "chat+state" || s == "chat-state" || s == "both") return Modality::ChatAndState;
  return std::nullopt;
}
inline std::optional<Task> parse_task(std::string_view s) {
  if (s == "roles") return Task::Roles;
  if (s == "merlin") return Task::Merlin;
  if (s == "strategy") return Task::Strategy;
  return std::nullopt;
}

inline constexpr bool shows_state(Modality m) { return m != Modality::ChatOnly; }
inline constexpr bool shows_chat(Modality m) { return m != Modality::StateOnly; }

inline constexpr std::string_view kRoleSystemPrompt =
    "You are a helpful assistant that uses the chat between six players, player-1 to player-6, who play Avalon: "
    "The Resistance (a cooperative-competitive game) to identify who is Merlin, Good or Evil. There are two evil "
    "players, which can usually be found because they are deceptive and lie about the good player's roles and vote "
    "for quests and parties irrationally. For Merlin, watch out for individuals with knowledge of evil players' "
    "identities, insightful comments beyond their role, and caution regarding mission teams or specific players.";

inline constexpr std::string_view kMerlinSystemPrompt =
    "You are a helpful assistant that uses the chat between six players, player-1 to player-6, who play Avalon: "
    "The Resistance (a cooperative-competitive game) to identify who is Merlin. There are three good players, "
    "Merlin, who is also a good player, and two evil players. Evil can usually be found because they are deceptive "
    "and lie about the good player's roles and vote for parties and quests irrationally. For Merlin, watch out for "
    "individuals with knowledge of evil players' identities, insightful comments beyond their role, and caution "
    "regarding mission teams or specific players.";

inline constexpr std::string_view kRoleQuestion =
    "What do you think is the role of each player? Please do not explain your answer, do not elaborate on it "
    "further, and do not say that these are just guesses; only provide the list and nothing else.";

inline constexpr std::string_view kMerlinQuestion =
    "Who do you think is Merlin? Please do not explain your answer, do not elaborate on it further.";

inline constexpr std::string_view kChatHeader = "This is the chat between player-1 to player-6:";

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};

// One assembled query. Absent sections render nothing at all.
struct PromptBundle {
  Task task = Task::Roles;
  std::string system;
  std::optional<std::string> state;
  std::optional<std::string> party;
  std::optional<std::string> belief;
  std::optional<std::string> evil;
  std::vector<std::string> chat;
  std::string question;

  std::string human() const {
    std::string out;
    if (state) out += "The current state is: " + *state + "\n";
    if (party) out += "The current party proposal is: " + *party + "\n";
    if (belief) out += "Your initial belief is: " + *belief + "\n";
    if (evil) out += "You know that " + *evil + " are evil.\n";
    out += std::string(kChatHeader) + "\n";
    for (const auto& line : chat) out += line + "\n";
    out += question;
    return out;
  }

  std::vector<ChatMessage> messages() const { return {{"system", system}, {"user", human()}}; }

  std::string text() const {
    std::string out = "system: " + system + "\nhuman: " + human();
    if (task == Task::Merlin) out += "\nassistant:";
    return out;
  }

  bool operator==(const PromptBundle&) const = default;
};

// "player-1: unknown, player-2: evil, ..." in seat order.
inline std::string render_belief(const BeliefVector& b) {
  std::vector<std::string> parts;
  for (PlayerId p : all_players()) parts.push_back(p.alias() + ": " + std::string(label_name(b[p.index()])));
  return join(parts, ", ");
}

inline std::vector<std::string> render_system_events(const RoundSegment& seg) {
  std::vector<std::string> out;
  for (const auto& e : seg.entries)
    if (e.is_system()) out.push_back(e.line());
  return out;
}

struct PromptError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void fill_context(PromptBundle& b, const std::vector<RoundSegment>& segments, int eval_point,
                         ContextMode mode, Modality modality) {
  if (eval_point < 1 || eval_point > static_cast<int>(segments.size()))
    throw PromptError("eval point " + std::to_string(eval_point) + " outside 1.." + std::to_string(segments.size()));
  const RoundSegment& current = segments[eval_point - 1];
  if (shows_state(modality)) {
    auto lines = render_quest_lines(current.before);
    b.state = lines.empty() ? std::string("none") : join(lines, "\n");
    const std::string party = render_party(current.before);
    b.party = party.empty() ? std::string("none") : party;
  }
  const int first = mode == ContextMode::Round ? eval_point : 1;
  for (int r = first; r <= eval_point; ++r) {
    for (const auto& entry : segments[r - 1].entries) {
      if (entry.is_system() ? !shows_state(modality) : !shows_chat(modality)) continue;
      b.chat.push_back(entry.line());
    }
  }
}

}  // namespace detail

inline PromptBundle build_role_prompt(const std::vector<RoundSegment>& segments, int eval_point, ContextMode mode,
                                      Modality modality, const std::optional<BeliefVector>& belief) {
  PromptBundle b;
  b.task = Task::Roles;
  b.system = std::string(kRoleSystemPrompt);
  b.question = std::string(kRoleQuestion);
  detail::fill_context(b, segments, eval_point, mode, modality);
  if (mode == ContextMode::Round) b.belief = render_belief(belief.value_or(unknown_beliefs()));
  return b;
}

inline PromptBundle build_role_prompt(const GameLog& log, int eval_point, ContextMode mode, Modality modality,
                                      const std::optional<BeliefVector>& belief) {
  return build_role_prompt(segment_rounds(log), eval_point, mode, modality, belief);
}

inline PromptBundle build_merlin_prompt(const std::vector<RoundSegment>& segments, int eval_point, ContextMode mode,
                                        Modality modality, std::vector<PlayerId> evil_set,
                                        const std::optional<BeliefVector>& belief = std::nullopt) {
  std::sort(evil_set.begin(), evil_set.end());
  evil_set.erase(std::unique(evil_set.begin(), evil_set.end()), evil_set.end());
  if (evil_set.size() != 2) throw PromptError("the evil set must name exactly two players");
  PromptBundle b;
  b.task = Task::Merlin;
  b.system = std::string(kMerlinSystemPrompt);
  b.question = std::string(kMerlinQuestion);
  detail::fill_context(b, segments, eval_point, mode, modality);
  if (mode == ContextMode::Round) b.belief = render_belief(belief.value_or(unknown_beliefs()));
  b.evil = alias_list(evil_set);
  return b;
}

inline PromptBundle build_merlin_prompt(const GameLog& log, int eval_point, ContextMode mode, Modality modality,
                                        std::vector<PlayerId> evil_set,
                                        const std::optional<BeliefVector>& belief = std::nullopt) {
  return build_merlin_prompt(segment_rounds(log), eval_point, mode, modality, std::move(evil_set), belief);
}

inline std::vector<PlayerId> evil_players(const RoleAssignment& roles) {
  std::vector<PlayerId> out;
  for (PlayerId p : all_players())
    if (alignment_of(roles[p.index()]) == Alignment::Evil) out.push_back(p);
  return out;
}

}  // namespace avalon
