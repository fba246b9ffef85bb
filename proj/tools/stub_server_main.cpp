#include <pthread.h>

#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stub_server.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Local generation endpoint for transport tests"};
  ghostmark::tools::StubConfig config;
  std::string mode = "echo";
  std::string script_path;
  std::string token;
  app.add_option("--host", config.host, "Bind address");
  app.add_option("--port", config.port, "Port (0 = any free port)");
  app.add_option("--mode", mode, "echo or scripted")->check(CLI::IsMember({"echo", "scripted"}));
  app.add_option("--script", script_path, "JSON array of responses for scripted mode");
  app.add_option("--token", token, "Require this Bearer token");
  app.add_option("--fail-first", config.fail_first, "Answer the first N requests with 503");
  CLI11_PARSE(app, argc, argv);

  if (mode == "scripted") {
    config.mode = ghostmark::tools::StubConfig::Mode::kScripted;
    std::ifstream in(script_path, std::ios::binary);
    if (!in) {
      std::cerr << "cannot open script " << script_path << '\n';
      return 2;
    }
    config.script = nlohmann::json::parse(in).get<std::vector<std::string>>();
  }
  if (!token.empty()) config.required_token = token;

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ghostmark::tools::StubServer server(config);
  try {
    server.start();
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  std::cout << server.url() << std::endl;
  int received = 0;
  sigwait(&signals, &received);
  server.stop();
  return 0;
}
