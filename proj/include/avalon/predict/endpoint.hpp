#pragma once

// Model endpoint abstraction, typed transport failures and the retry policy.

#include <chrono>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>

#include "avalon/context/prompt.hpp"
#include "avalon/game/rng.hpp"

namespace avalon {

struct ModelRequest {
  std::vector<ChatMessage> messages;
  std::optional<json> schema;  // structured-output schema, when the endpoint supports one
  std::string schema_name;
  std::uint64_t seed = 0;  // varies per run; endpoints may ignore it
};

struct ModelReply {
  std::string text;
  double latency_ms = 0;
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

class EndpointError : public std::runtime_error {
 public:
  enum class Kind { Timeout, Auth, RateLimited, Transport, BadReply };
  EndpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }
  bool retryable() const { return kind_ == Kind::Timeout || kind_ == Kind::RateLimited || kind_ == Kind::Transport; }

 private:
  Kind kind_;
};

inline std::string_view endpoint_error_name(EndpointError::Kind k) {
  switch (k) {
    case EndpointError::Kind::Timeout: return "timeout";
    case EndpointError::Kind::Auth: return "auth";
    case EndpointError::Kind::RateLimited: return "rate_limited";
    case EndpointError::Kind::Transport: return "transport";
    case EndpointError::Kind::BadReply: return "bad_reply";
  }
  return "?";
}

class ModelEndpoint {
 public:
  virtual ~ModelEndpoint() = default;
  virtual ModelReply complete(const ModelRequest& request) = 0;
  // Identification safe to write into transcripts and reports.
  virtual std::string model() const = 0;
};

struct RetryPolicy {
  int max_retries = 4;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{8000};

  std::chrono::milliseconds delay(int retry) const {
    auto d = base_delay * (1LL << std::min(retry, 20));
    return std::min<std::chrono::milliseconds>(d, max_delay);
  }
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

// Retries timeouts, rate limits and transport failures with exponential
// backoff; authentication failures and malformed replies surface at once.
inline ModelReply query_model(ModelEndpoint& endpoint, const ModelRequest& request, const RetryPolicy& policy = {},
                              const Sleeper& sleep = real_sleeper()) {
  for (int retry = 0;; ++retry) {
    try {
      return endpoint.complete(request);
    } catch (const EndpointError& e) {
      if (!e.retryable() || retry >= policy.max_retries) throw;
      sleep(policy.delay(retry));
    }
  }
}

// Scripted endpoint for tests and offline runs. Each call pops the next
// scripted step, or asks the responder when the script is empty.
class MockEndpoint : public ModelEndpoint {
 public:
  using Responder = std::function<std::string(const ModelRequest&)>;
  struct Step {
    std::optional<std::string> reply;
    std::optional<EndpointError::Kind> error;
  };

  explicit MockEndpoint(Responder responder = nullptr, std::string model = "mock")
      : responder_(std::move(responder)), model_(std::move(model)) {}

  MockEndpoint& then_reply(std::string text) {
    std::lock_guard lock(mu_);
    script_.push_back({std::move(text), std::nullopt});
    return *this;
  }
  MockEndpoint& then_fail(EndpointError::Kind kind) {
    std::lock_guard lock(mu_);
    script_.push_back({std::nullopt, kind});
    return *this;
  }

  ModelReply complete(const ModelRequest& request) override {
    Step step;
    {
      std::lock_guard lock(mu_);
      requests_.push_back(request);
      if (!script_.empty()) {
        step = script_.front();
        script_.pop_front();
      }
    }
    if (step.error) throw EndpointError(*step.error, "scripted " + std::string(endpoint_error_name(*step.error)));
    if (step.reply) return ModelReply{*step.reply, 0, 0, 0};
    if (!responder_) throw EndpointError(EndpointError::Kind::BadReply, "mock script exhausted");
    return ModelReply{responder_(request), 0, 0, 0};
  }

  std::string model() const override { return model_; }

  std::vector<ModelRequest> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

 private:
  Responder responder_;
  std::string model_;
  mutable std::mutex mu_;
  std::deque<Step> script_;
  std::vector<ModelRequest> requests_;
};

// Deterministic offline responders. Each reply depends only on the request,
// so a pipeline run against them is reproducible byte for byte.
inline std::uint64_t request_hash(const ModelRequest& r) {
  std::uint64_t h = 1469598103934665603ULL ^ r.seed;
  for (const auto& m : r.messages)
    for (unsigned char c : m.content) h = (h ^ c) * 1099511628211ULL;
  return h;
}

inline MockEndpoint::Responder constant_responder(std::string text) {
  return [text = std::move(text)](const ModelRequest&) { return text; };
}

// Valid random answers for whichever schema the request names: role
// permutations of the true multiset, a uniform Merlin seat, a uniform strategy.
inline MockEndpoint::Responder random_responder() {
  return [](const ModelRequest& r) {
    SplitMix64 rng(request_hash(r));
    if (r.schema_name == "merlin") return json{{"merlin", PlayerId(static_cast<int>(rng.below(6)) + 1).key()}}.dump();
    if (r.schema_name == "strategy") {
      static const char* ids[] = {"assertion", "questioning", "suggestion", "agreement",
                                  "logical_deduction", "compromise_concession", "critique_opposition",
                                  "appeal_defense"};
      return json{{"strategy", ids[rng.below(8)]}}.dump();
    }
    std::array<std::string, 6> labels{"merlin", "good", "good", "good", "evil", "evil"};
    rng.shuffle(labels.begin(), labels.end());
    json j = json::object();
    for (PlayerId p : all_players()) j[p.key()] = labels[p.index()];
    return j.dump();
  };
}

}  // namespace avalon
