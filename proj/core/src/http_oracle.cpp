#include "ghostmark/http_oracle.hpp"

#include <chrono>
#include <cstdlib>

#include <httplib.h>

#include "ghostmark/error.hpp"
#include "ghostmark/serialization.hpp"

namespace ghostmark {

namespace {

TransportError protocol_error(const std::string& message) {
  return TransportError(ErrorKind::kProtocol, message, false);
}

}  // namespace

RequestTemplate parse_request_template(std::string_view name) {
  if (name == "raw") return RequestTemplate::kRaw;
  if (name == "chat") return RequestTemplate::kChat;
  throw ValidationError("unknown request template '" + std::string(name) + "' (raw|chat)");
}

const char* to_string(RequestTemplate t) {
  return t == RequestTemplate::kRaw ? "raw" : "chat";
}

EndpointConfig EndpointConfig::from_json(const nlohmann::json& j) {
  EndpointConfig c;
  c.url = require_field<std::string>(j, "url");
  c.request_template = parse_request_template(optional_field<std::string>(j, "template", "raw"));
  c.auth_env = optional_field<std::string>(j, "auth_env", c.auth_env);
  c.timeout_ms = optional_field<long>(j, "timeout_ms", c.timeout_ms);
  c.max_new_tokens = optional_field<std::size_t>(j, "max_new_tokens", c.max_new_tokens);
  c.model = optional_field<std::string>(j, "model", "");
  if (c.timeout_ms <= 0) throw ValidationError("field 'timeout_ms' must be positive");
  split_url(c.url);
  return c;
}

SplitUrl split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw ValidationError("endpoint url '" + std::string(url) + "' has no scheme");
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ValidationError("endpoint url scheme must be http or https");
  }
  const auto host_begin = scheme_end + 3;
  const auto path_begin = url.find('/', host_begin);
  SplitUrl out;
  out.origin = std::string(url.substr(0, path_begin));
  out.path = path_begin == std::string_view::npos ? "/" : std::string(url.substr(path_begin));
  if (out.origin.size() == host_begin) throw ValidationError("endpoint url has no host");
  return out;
}

HttpOracle::HttpOracle(EndpointConfig config)
    : config_(std::move(config)), target_(split_url(config_.url)) {}

std::string HttpOracle::request_body(std::string_view prompt,
                                     const GenerationSettings& settings) const {
  nlohmann::ordered_json body;
  if (config_.request_template == RequestTemplate::kRaw) {
    body["prompt"] = std::string(prompt);
    body["max_new_tokens"] = settings.max_new_tokens;
  } else {
    if (!config_.model.empty()) body["model"] = config_.model;
    body["messages"] = nlohmann::ordered_json::array(
        {{{"role", "user"}, {"content", std::string(prompt)}}});
    body["max_tokens"] = settings.max_new_tokens;
  }
  body["temperature"] = settings.temperature;
  body["top_p"] = settings.top_p;
  body["top_k"] = settings.top_k;
  if (settings.seed) body["seed"] = *settings.seed;
  return body.dump();
}

std::string HttpOracle::parse_response(std::string_view body) const {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw protocol_error(std::string("response is not JSON: ") + e.what());
  }
  if (config_.request_template == RequestTemplate::kRaw) {
    if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
      throw protocol_error("response is missing string field 'text'");
    }
    return j["text"].get<std::string>();
  }
  const nlohmann::json* node = &j;
  for (const char* step : {"choices", "0", "message", "content"}) {
    if (std::string_view(step) == "0") {
      if (!node->is_array() || node->empty()) {
        throw protocol_error("response is missing field 'choices[0].message.content'");
      }
      node = &(*node)[0];
    } else {
      if (!node->is_object() || !node->contains(step)) {
        throw protocol_error("response is missing field 'choices[0].message.content'");
      }
      node = &(*node)[step];
    }
  }
  if (!node->is_string()) {
    throw protocol_error("response field 'choices[0].message.content' is not a string");
  }
  return node->get<std::string>();
}

std::string HttpOracle::generate(std::string_view prompt, const GenerationSettings& settings) {
  httplib::Client client(target_.origin);
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!config_.auth_env.empty()) {
    if (const char* token = std::getenv(config_.auth_env.c_str()); token && *token) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }
  const auto result =
      client.Post(target_.path, headers, request_body(prompt, settings), "application/json");
  if (!result) {
    throw TransportError(ErrorKind::kTransport,
                         "request to " + config_.url + " failed: " +
                             httplib::to_string(result.error()),
                         true);
  }
  const int status = result->status;
  if (status == 401 || status == 403) {
    throw TransportError(ErrorKind::kAuth,
                         "endpoint rejected credentials (HTTP " + std::to_string(status) + ")",
                         false);
  }
  if (status < 200 || status >= 300) {
    const bool retryable = status == 429 || status >= 500;
    throw TransportError(ErrorKind::kTransport,
                         "endpoint returned HTTP " + std::to_string(status), retryable);
  }
  return parse_response(result->body);
}

}  // namespace ghostmark
