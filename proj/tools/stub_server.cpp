#include "stub_server.hpp"

#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace ghostmark::tools {

StubServer::StubServer(StubConfig config)
    : config_(std::move(config)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

StubServer::~StubServer() { stop(); }

std::string StubServer::next_output(const std::string& prompt) {
  if (config_.mode == StubConfig::Mode::kEcho) return prompt;
  std::lock_guard lock(mutex_);
  if (config_.script.empty()) return "";
  const std::string out = config_.script[script_pos_ % config_.script.size()];
  ++script_pos_;
  return out;
}

void StubServer::install_routes() {
  auto handler = [this](const httplib::Request& req, httplib::Response& res, bool chat) {
    const std::size_t n = ++requests_;
    {
      std::lock_guard lock(mutex_);
      last_body_ = req.body;
    }
    if (config_.required_token &&
        req.get_header_value("Authorization") != "Bearer " + *config_.required_token) {
      res.status = 401;
      res.set_content(R"({"error":"unauthorized"})", "application/json");
      return;
    }
    if (n <= config_.fail_first) {
      res.status = 503;
      res.set_content(R"({"error":"warming up"})", "application/json");
      return;
    }
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      res.status = 400;
      res.set_content(R"({"error":"bad json"})", "application/json");
      return;
    }
    std::string prompt;
    if (chat) {
      if (body.contains("messages") && body["messages"].is_array() && !body["messages"].empty()) {
        prompt = body["messages"].back().value("content", "");
      }
    } else {
      prompt = body.value("prompt", "");
    }
    const std::string output = next_output(prompt);
    nlohmann::json reply;
    if (chat) {
      reply["choices"] = nlohmann::json::array(
          {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", output}}}}});
    } else {
      reply[config_.text_field] = output;
    }
    res.set_content(reply.dump(), "application/json");
  };
  server_->Post("/generate", [handler](const httplib::Request& req, httplib::Response& res) {
    handler(req, res, false);
  });
  server_->Post("/v1/chat/completions",
                [handler](const httplib::Request& req, httplib::Response& res) {
                  handler(req, res, true);
                });
}

void StubServer::start() {
  if (config_.port == 0) {
    port_ = server_->bind_to_any_port(config_.host);
  } else {
    port_ = server_->bind_to_port(config_.host, config_.port) ? config_.port : -1;
  }
  if (port_ <= 0) throw std::runtime_error("stub server could not bind " + config_.host);
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void StubServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string StubServer::url(const std::string& path) const {
  return "http://" + config_.host + ":" + std::to_string(port_) + path;
}

std::string StubServer::last_body() const {
  std::lock_guard lock(mutex_);
  return last_body_;
}

}  // namespace ghostmark::tools
