#pragma once

// OpenAI-compatible chat-completions endpoint over HTTP(S) via libcurl.
// The API key is read from the environment at call time and never stored
// in transcripts, reports or error messages.

#include <curl/curl.h>

#include <cstdlib>
#include <filesystem>

#include "avalon/predict/endpoint.hpp"

namespace avalon {

struct HttpEndpointConfig {
  std::string name;
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  long timeout_ms = 60000;
  std::optional<double> temperature = 0.0;
  bool structured_output = true;
};

inline HttpEndpointConfig endpoint_config_from_json(const std::string& name, const json& j) {
  HttpEndpointConfig c;
  c.name = name;
  try {
    c.base_url = j.at("base_url").get<std::string>();
    c.model = j.at("model").get<std::string>();
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    if (j.contains("temperature"))
      c.temperature = j["temperature"].is_null() ? std::nullopt : std::optional<double>(j["temperature"].get<double>());
    c.structured_output = j.value("structured_output", c.structured_output);
  } catch (const json::exception& e) {
    throw FormatError("endpoint '" + name + "': " + e.what());
  }
  if (j.contains("api_key"))
    throw FormatError("endpoint '" + name + "': put the key in the environment variable named by api_key_env");
  return c;
}

class HttpEndpoint : public ModelEndpoint {
 public:
  explicit HttpEndpoint(HttpEndpointConfig config) : config_(std::move(config)) {
    static const bool init = [] { return curl_global_init(CURL_GLOBAL_DEFAULT) == CURLE_OK; }();
    (void)init;
  }

  std::string model() const override { return config_.name + "/" + config_.model; }

  json request_body(const ModelRequest& r) const {
    json messages = json::array();
    for (const auto& m : r.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    json body{{"model", config_.model}, {"messages", messages}};
    if (config_.temperature) body["temperature"] = *config_.temperature;
    if (r.seed) body["seed"] = r.seed;
    if (config_.structured_output && r.schema)
      body["response_format"] = {{"type", "json_schema"},
                                 {"json_schema", {{"name", r.schema_name.empty() ? "prediction" : r.schema_name},
                                                  {"schema", *r.schema},
                                                  {"strict", true}}}};
    return body;
  }

  ModelReply complete(const ModelRequest& request) override {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key) throw EndpointError(EndpointError::Kind::Auth, "environment variable " + config_.api_key_env + " is not set");

    std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), curl_easy_cleanup);
    if (!curl) throw EndpointError(EndpointError::Kind::Transport, "curl initialisation failed");
    const std::string url = config_.base_url + "/chat/completions";
    const std::string body = request_body(request).dump();
    const std::string auth = std::string("Authorization: Bearer ") + key;
    curl_slist* headers = curl_slist_append(nullptr, "Content-Type: application/json");
    headers = curl_slist_append(headers, auth.c_str());
    std::unique_ptr<curl_slist, decltype(&curl_slist_free_all)> header_guard(headers, curl_slist_free_all);

    std::string response;
    curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl.get(), CURLOPT_HTTPHEADER, headers);
    curl_easy_setopt(curl.get(), CURLOPT_POSTFIELDS, body.c_str());
    curl_easy_setopt(curl.get(), CURLOPT_POSTFIELDSIZE, static_cast<long>(body.size()));
    curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT_MS, config_.timeout_ms);
    curl_easy_setopt(curl.get(), CURLOPT_NOSIGNAL, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &HttpEndpoint::collect);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &response);

    const auto start = std::chrono::steady_clock::now();
    const CURLcode rc = curl_easy_perform(curl.get());
    const double latency =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (rc == CURLE_OPERATION_TIMEDOUT)
      throw EndpointError(EndpointError::Kind::Timeout, "no reply within " + std::to_string(config_.timeout_ms) + " ms");
    if (rc != CURLE_OK) throw EndpointError(EndpointError::Kind::Transport, curl_easy_strerror(rc));

    long status = 0;
    curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &status);
    if (status == 401 || status == 403) throw EndpointError(EndpointError::Kind::Auth, "HTTP " + std::to_string(status));
    if (status == 429) throw EndpointError(EndpointError::Kind::RateLimited, "HTTP 429");
    if (status >= 500) throw EndpointError(EndpointError::Kind::Transport, "HTTP " + std::to_string(status));
    if (status != 200) throw EndpointError(EndpointError::Kind::BadReply, "HTTP " + std::to_string(status));
    return parse_reply(response, latency);
  }

  static ModelReply parse_reply(const std::string& response, double latency_ms) {
    const json j = json::parse(response, nullptr, false);
    if (j.is_discarded()) throw EndpointError(EndpointError::Kind::BadReply, "reply is not JSON");
    try {
      ModelReply r;
      const auto& content = j.at("choices").at(0).at("message").at("content");
      r.text = content.is_string() ? content.get<std::string>() : std::string();
      r.latency_ms = latency_ms;
      if (j.contains("usage")) {
        r.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
        r.completion_tokens = j["usage"].value("completion_tokens", 0L);
      }
      return r;
    } catch (const json::exception& e) {
      throw EndpointError(EndpointError::Kind::BadReply, e.what());
    }
  }

 private:
  static std::size_t collect(char* data, std::size_t size, std::size_t n, void* out) {
    static_cast<std::string*>(out)->append(data, size * n);
    return size * n;
  }

  HttpEndpointConfig config_;
};

// Endpoint registry file: {"name": {"base_url":..,"model":..,"api_key_env":..}, ...}
inline std::map<std::string, HttpEndpointConfig> load_endpoint_configs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open endpoint config " + path.string());
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw FormatError(path.string() + ": expected a JSON object");
  std::map<std::string, HttpEndpointConfig> out;
  for (const auto& [name, cfg] : j.items()) out.emplace(name, endpoint_config_from_json(name, cfg));
  return out;
}

}  // namespace avalon
