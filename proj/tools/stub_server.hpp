#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace ghostmark::tools {

// Minimal local endpoint speaking the raw and chat generation contracts.
struct StubConfig {
  enum class Mode {
    kEcho,      // returns the prompt unchanged
    kScripted,  // returns `script` entries in order, cycling
  };

  Mode mode = Mode::kEcho;
  std::vector<std::string> script;
  std::optional<std::string> required_token;  // Bearer token; 401 when absent or wrong
  std::size_t fail_first = 0;                 // answer this many requests with 503 first
  std::string text_field = "text";            // raw responses put the output here
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
};

class StubServer {
 public:
  explicit StubServer(StubConfig config);
  ~StubServer();

  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  // Binds and serves on a background thread.
  void start();
  void stop();

  int port() const noexcept { return port_; }
  std::string url(const std::string& path = "/generate") const;
  std::size_t request_count() const noexcept { return requests_; }
  std::string last_body() const;

 private:
  void install_routes();
  std::string next_output(const std::string& prompt);

  StubConfig config_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<std::size_t> requests_{0};
  std::size_t script_pos_ = 0;
  mutable std::mutex mutex_;
  std::string last_body_;
};

}  // namespace ghostmark::tools
