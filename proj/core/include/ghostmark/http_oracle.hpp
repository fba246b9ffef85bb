#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ghostmark/oracle.hpp"

namespace ghostmark {

enum class RequestTemplate {
  kRaw,   // POST {prompt, max_new_tokens, temperature, top_p, top_k, seed?} -> {text}
  kChat,  // POST {messages:[{role:user, content}], ...} -> choices[0].message.content
};

RequestTemplate parse_request_template(std::string_view name);
const char* to_string(RequestTemplate t);

struct EndpointConfig {
  std::string url;  // full endpoint URL, e.g. http://127.0.0.1:8080/generate
  RequestTemplate request_template = RequestTemplate::kRaw;
  std::string auth_env = "ORACLE_AUTH_TOKEN";
  long timeout_ms = 60000;
  std::size_t max_new_tokens = 200;
  std::string model;  // sent with chat requests when non-empty

  // {url, template, auth_env, timeout_ms, max_new_tokens, model?}
  static EndpointConfig from_json(const nlohmann::json& j);
};

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

// Throws ValidationError for anything but http:// or https:// URLs.
SplitUrl split_url(std::string_view url);

// Client for a served model. Response bytes are returned untouched.
// 401/403 map to ErrorKind::kAuth, malformed bodies to ErrorKind::kProtocol
// (neither retryable); timeouts, connection failures, 429 and 5xx are
// retryable transport errors.
class HttpOracle : public ChallengeOracle {
 public:
  explicit HttpOracle(EndpointConfig config);

  std::string generate(std::string_view prompt, const GenerationSettings& settings) override;

  // Request body and response extraction, exposed for tests.
  std::string request_body(std::string_view prompt, const GenerationSettings& settings) const;
  std::string parse_response(std::string_view body) const;

  const EndpointConfig& config() const noexcept { return config_; }

 private:
  EndpointConfig config_;
  SplitUrl target_;
};

}  // namespace ghostmark
