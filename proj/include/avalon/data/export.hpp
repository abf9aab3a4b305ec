#pragma once

// Fine-tuning examples: prompts from the context builder paired with the
// ground-truth answer in the prediction schema's serialized form.

#include <ostream>

#include "avalon/context/prompt.hpp"
#include "avalon/data/split.hpp"
#include "avalon/predict/schema.hpp"

namespace avalon {

struct LeakageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FinetuneExample {
  std::string game_id;
  int eval_point = 0;
  PromptBundle prompt;
  json answer;

  json to_json() const {
    json messages = json::array();
    for (const auto& m : prompt.messages()) messages.push_back({{"role", m.role}, {"content", m.content}});
    messages.push_back({{"role", "assistant"}, {"content", answer.dump()}});
    return json{{"game_id", game_id}, {"eval_point", eval_point}, {"task", task_name(prompt.task)},
                {"messages", messages}};
  }
};

struct ExportOptions {
  Task task = Task::Roles;
  ContextMode mode = ContextMode::Round;
  Modality modality = Modality::ChatAndState;
};

// One example per (game, round) of the train split. Round-mode prompts carry
// the all-unknown belief since no model chain exists at training time.
inline std::vector<FinetuneExample> export_finetune_examples(const SplitManifest& split, std::string_view which,
                                                             const std::vector<GameLog>& logs,
                                                             const ExportOptions& opt = {}) {
  if (which != "train") throw LeakageError("fine-tuning data can only come from the train split");
  if (auto problems = split_problems(split); !problems.empty()) throw LeakageError(problems.front());
  if (opt.task == Task::Strategy) throw std::invalid_argument("strategy examples are not exported");

  std::vector<FinetuneExample> out;
  for (const auto& id : split.train) {
    const GameLog* log = find_log(logs, id);
    if (!log) throw std::invalid_argument("train game '" + id + "' has no log");
    const auto segments = segment_rounds(*log);
    for (int t = 1; t <= static_cast<int>(segments.size()); ++t) {
      FinetuneExample ex;
      ex.game_id = id;
      ex.eval_point = t;
      if (opt.task == Task::Roles) {
        ex.prompt = build_role_prompt(segments, t, opt.mode, opt.modality, std::nullopt);
        ex.answer = to_json(truth_prediction(log->roles));
      } else {
        ex.prompt = build_merlin_prompt(segments, t, opt.mode, opt.modality, evil_players(log->roles));
        ex.answer = to_json(MerlinPrediction{find_role(log->roles, Role::Merlin)});
      }
      out.push_back(std::move(ex));
    }
  }
  return out;
}

inline void write_examples(std::ostream& out, const std::vector<FinetuneExample>& examples) {
  for (const auto& ex : examples) out << ex.to_json().dump() << "\n";
}

}  // namespace avalon
