#pragma once

// Prediction tasks run against a model endpoint, with schema validation and
// a bounded repair loop. Every query and reply is kept for the transcript.

#include <atomic>
#include <exception>
#include <thread>

#include "avalon/predict/endpoint.hpp"
#include "avalon/predict/schema.hpp"

namespace avalon {

struct Attempt {
  std::vector<ChatMessage> messages;
  std::optional<std::string> reply;
  std::vector<std::string> diagnostics;
  std::optional<std::string> error;

  json to_json() const {
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    return json{{"messages", msgs},
                {"reply", reply ? json(*reply) : json(nullptr)},
                {"diagnostics", diagnostics},
                {"error", error ? json(*error) : json(nullptr)}};
  }
};

struct QueryOutcome {
  std::optional<Prediction> prediction;
  std::vector<Attempt> attempts;
  std::optional<std::string> failure;  // "schema" or the endpoint error kind

  bool valid() const { return prediction.has_value(); }
};

struct PredictOptions {
  int max_attempts = 3;
  RetryPolicy retry;
  Sleeper sleep = real_sleeper();
  std::uint64_t seed = 0;
};

inline std::string schema_name(SchemaKind k) {
  switch (k) {
    case SchemaKind::Role: return "roles";
    case SchemaKind::Merlin: return "merlin";
    case SchemaKind::Strategy: return "strategy";
  }
  return "?";
}

inline std::string repair_message(const std::vector<std::string>& diagnostics, const std::string& question) {
  std::string out = "Your previous reply did not match the required format:\n";
  for (const auto& d : diagnostics) out += d + "\n";
  out += "Please answer the original question again: " + question + "\n";
  out += "Reply with a single JSON object that follows the schema.";
  return out;
}

// Sends the prompt, validates, and on failure sends a follow-up carrying
// the diagnostics. At most `max_attempts` queries are made. Endpoint
// failures that survive the retry policy end the chain.
inline QueryOutcome run_query(ModelEndpoint& endpoint, std::vector<ChatMessage> messages, const std::string& question,
                              SchemaKind kind, const PredictOptions& opt) {
  QueryOutcome out;
  for (int attempt = 1; attempt <= opt.max_attempts; ++attempt) {
    ModelRequest request{messages, schema_json(kind), schema_name(kind), opt.seed};
    Attempt record;
    record.messages = messages;
    ModelReply reply;
    try {
      reply = query_model(endpoint, request, opt.retry, opt.sleep);
    } catch (const EndpointError& e) {
      record.error = std::string(endpoint_error_name(e.kind())) + ": " + e.what();
      out.attempts.push_back(std::move(record));
      out.failure = std::string(endpoint_error_name(e.kind()));
      return out;
    }
    record.reply = reply.text;
    Validation v = validate_response(reply.text, kind);
    for (const auto& d : v.diagnostics) record.diagnostics.push_back(d.text());
    out.attempts.push_back(record);
    if (v.ok()) {
      out.prediction = std::move(v.prediction);
      return out;
    }
    messages.push_back({"assistant", reply.text});
    messages.push_back({"user", repair_message(record.diagnostics, question)});
  }
  out.failure = "schema";
  return out;
}

inline QueryOutcome run_prompt(ModelEndpoint& endpoint, const PromptBundle& prompt, const PredictOptions& opt) {
  return run_query(endpoint, prompt.messages(), prompt.question, schema_for(prompt.task), opt);
}

// ---------------------------------------------------------------------------
// Role and Merlin chains

struct PredictionStep {
  int eval_point = 0;
  std::optional<BeliefVector> belief;  // belief line sent with this query
  QueryOutcome outcome;
};

// Round mode feeds each valid prediction back as the next round's belief;
// a failed round leaves the belief unchanged. Full mode queries every
// eval point over the whole history, without a belief line.
inline std::vector<PredictionStep> predict_roles(const std::vector<RoundSegment>& segments, ContextMode mode,
                                                 Modality modality, ModelEndpoint& endpoint,
                                                 const PredictOptions& opt = {}) {
  std::vector<PredictionStep> steps;
  BeliefVector belief = unknown_beliefs();
  for (int t = 1; t <= static_cast<int>(segments.size()); ++t) {
    PredictionStep step;
    step.eval_point = t;
    std::optional<BeliefVector> b;
    if (mode == ContextMode::Round) b = belief;
    step.belief = b;
    step.outcome = run_prompt(endpoint, build_role_prompt(segments, t, mode, modality, b), opt);
    if (step.outcome.valid()) belief = as_belief(std::get<RolePrediction>(*step.outcome.prediction));
    steps.push_back(std::move(step));
  }
  return steps;
}

inline std::vector<PredictionStep> predict_roles(const GameLog& log, ContextMode mode, Modality modality,
                                                 ModelEndpoint& endpoint, const PredictOptions& opt = {}) {
  return predict_roles(segment_rounds(log), mode, modality, endpoint, opt);
}

// Round-mode Merlin belief: the previous valid pick as merlin, the known
// evil players as evil, everyone else good; all unknown before any pick.
inline BeliefVector merlin_belief(const std::optional<PlayerId>& pick, const std::vector<PlayerId>& evil_set) {
  if (!pick) return unknown_beliefs();
  BeliefVector b;
  b.fill(Label::Good);
  for (PlayerId e : evil_set) b[e.index()] = Label::Evil;
  b[pick->index()] = Label::Merlin;
  return b;
}

inline std::vector<PredictionStep> predict_merlin(const std::vector<RoundSegment>& segments, ContextMode mode,
                                                  Modality modality, ModelEndpoint& endpoint,
                                                  const std::vector<PlayerId>& evil_set,
                                                  const PredictOptions& opt = {}) {
  std::vector<PredictionStep> steps;
  std::optional<PlayerId> pick;
  for (int t = 1; t <= static_cast<int>(segments.size()); ++t) {
    PredictionStep step;
    step.eval_point = t;
    std::optional<BeliefVector> b;
    if (mode == ContextMode::Round) b = merlin_belief(pick, evil_set);
    step.belief = b;
    step.outcome = run_prompt(endpoint, build_merlin_prompt(segments, t, mode, modality, evil_set, b), opt);
    if (step.outcome.valid()) pick = std::get<MerlinPrediction>(*step.outcome.prediction).merlin;
    steps.push_back(std::move(step));
  }
  return steps;
}

inline std::vector<PredictionStep> predict_merlin(const GameLog& log, ContextMode mode, Modality modality,
                                                  ModelEndpoint& endpoint, const std::vector<PlayerId>& evil_set,
                                                  const PredictOptions& opt = {}) {
  return predict_merlin(segment_rounds(log), mode, modality, endpoint, evil_set, opt);
}

// ---------------------------------------------------------------------------
// Persuasion strategy

inline constexpr std::string_view kStrategySystemPrompt =
    "You are a helpful assistant that labels utterances from games of Avalon: The Resistance, played by six "
    "players, player-1 to player-6, with the persuasion strategy each utterance uses.";

inline std::string strategy_question() {
  std::string ids;
  for (Persuasion p : kAllPersuasion) ids += (ids.empty() ? "" : ", ") + std::string(persuasion_id(p));
  return "Which persuasion strategy does this utterance use? Choose one of: " + ids +
         ". Please do not explain your answer.";
}

inline PromptBundle build_strategy_prompt(const UtteranceRecord& utterance, const std::vector<std::string>& context) {
  if (utterance.text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw PromptError("cannot label an empty utterance");
  PromptBundle b;
  b.task = Task::Strategy;
  b.system = std::string(kStrategySystemPrompt);
  b.chat = context;
  b.chat.push_back("The utterance to label is: " + utterance.speaker.alias() + ": " + utterance.text);
  b.question = strategy_question();
  return b;
}

// Chat lines of the utterance's round that precede it.
inline std::vector<std::string> strategy_context(const std::vector<RoundSegment>& segments,
                                                 const UtteranceRecord& utterance) {
  std::vector<std::string> out;
  for (const auto& seg : segments) {
    bool here = false;
    for (const auto& e : seg.entries) here = here || e.seq == utterance.seq;
    if (!here) continue;
    for (const auto& e : seg.entries) {
      if (e.seq >= utterance.seq && e.seq != 0) break;
      if (!e.is_system()) out.push_back(e.line());
    }
  }
  return out;
}

inline QueryOutcome predict_strategy(const UtteranceRecord& utterance, const std::vector<std::string>& context,
                                     ModelEndpoint& endpoint, const PredictOptions& opt = {}) {
  return run_prompt(endpoint, build_strategy_prompt(utterance, context), opt);
}

// ---------------------------------------------------------------------------
// Transcripts: one JSON line per query chain.

struct RunLabel {
  Task task = Task::Roles;
  ContextMode mode = ContextMode::Round;
  Modality modality = Modality::ChatAndState;
  std::string model;
  int run = 0;
};

inline json transcript_base(const RunLabel& l, const std::string& game_id) {
  return json{{"task", task_name(l.task)}, {"mode", mode_name(l.mode)}, {"modality", modality_name(l.modality)},
              {"model", l.model},          {"run", l.run},              {"game_id", game_id}};
}

inline json outcome_json(const QueryOutcome& o) {
  json attempts = json::array();
  for (const auto& a : o.attempts) attempts.push_back(a.to_json());
  return json{{"prediction", o.prediction ? to_json(*o.prediction) : json(nullptr)},
              {"valid", o.valid()},
              {"failure", o.failure ? json(*o.failure) : json(nullptr)},
              {"attempts", attempts}};
}

inline std::vector<json> step_records(const RunLabel& label, const GameLog& log,
                                      const std::vector<PredictionStep>& steps) {
  std::vector<json> out;
  json truth = to_json(truth_prediction(log.roles));
  if (label.task == Task::Merlin) {
    json evil = json::array();
    for (PlayerId p : evil_players(log.roles)) evil.push_back(p.key());
    truth = json{{"merlin", find_role(log.roles, Role::Merlin).key()}, {"evil", evil}};
  }
  for (const auto& s : steps) {
    json j = transcript_base(label, log.game_id);
    j["eval_point"] = s.eval_point;
    j["rounds"] = steps.size();
    j["truth"] = truth;
    j["belief"] = s.belief ? beliefs_to_json(*s.belief) : json(nullptr);
    j.update(outcome_json(s.outcome));
    out.push_back(std::move(j));
  }
  return out;
}

// Runs `n` independent units on at most `in_flight` threads. The first
// exception thrown by a unit is rethrown after all threads join.
inline void parallel_for(std::size_t n, unsigned in_flight, const std::function<void(std::size_t)>& fn) {
  in_flight = std::max(1u, std::min<unsigned>(in_flight, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (in_flight == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < in_flight; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);
}

struct PredictJob {
  Task task = Task::Roles;
  ContextMode mode = ContextMode::Round;
  Modality modality = Modality::ChatAndState;
  int runs = 10;
  unsigned in_flight = 1;
  PredictOptions options;
};

// All transcript records for `logs` × runs, in game-major, run-minor order
// regardless of scheduling.
inline std::vector<json> run_predictions(const PredictJob& job, const std::vector<GameLog>& logs,
                                         ModelEndpoint& endpoint) {
  const std::size_t units = logs.size() * static_cast<std::size_t>(std::max(job.runs, 0));
  std::vector<std::vector<json>> results(units);
  parallel_for(units, job.in_flight, [&](std::size_t u) {
    const GameLog& log = logs[u / job.runs];
    const int run = static_cast<int>(u % job.runs);
    PredictOptions opt = job.options;
    opt.seed = mix_seed(job.options.seed, static_cast<std::uint64_t>(run) + 1);
    RunLabel label{job.task, job.mode, job.modality, endpoint.model(), run};
    const auto segments = segment_rounds(log);
    if (job.task == Task::Roles) {
      results[u] = step_records(label, log, predict_roles(segments, job.mode, job.modality, endpoint, opt));
    } else if (job.task == Task::Merlin) {
      results[u] = step_records(label, log,
                                predict_merlin(segments, job.mode, job.modality, endpoint, evil_players(log.roles), opt));
    } else {
      for (const auto& utt : log.utterances) {
        if (utt.text.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        json j = transcript_base(label, log.game_id);
        j["seq"] = utt.seq;
        j["round"] = utt.round;
        j["truth"] = utt.persuasion ? json(std::string(persuasion_id(*utt.persuasion))) : json(nullptr);
        j.update(outcome_json(predict_strategy(utt, strategy_context(segments, utt), endpoint, opt)));
        results[u].push_back(std::move(j));
      }
    }
  });
  std::vector<json> out;
  for (auto& r : results)
    for (auto& j : r) out.push_back(std::move(j));
  return out;
}

}  // namespace avalon
