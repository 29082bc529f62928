// axs-gateway: serves the accessibility pipeline over WebSocket.
#include <csignal>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "axs/error.hpp"
#include "axs/gateway.hpp"
#include "axs/gateway_config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Accessibility mediation gateway"};
  std::string config_path, dictionary, recognizer, log_level, host;
  int port = -1;
  unsigned threads = 0;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--port", port, "Listen port (0 picks a free one)")->check(CLI::Range(0, 65535));
  app.add_option("--host", host, "Listen address");
  app.add_option("--dictionary", dictionary, "Compiled sign dictionary");
  app.add_option("--recognizer", recognizer, "Speech backend")->check(CLI::IsMember({"mock", "external"}));
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error");
  app.add_option("--threads", threads, "I/O threads (0 = auto)");
  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json j = config_path.empty() ? nlohmann::json::object() : axs::load_config_json(config_path);
    for (const auto& name : axs::apply_env_overrides(j, axs::process_environment()))
      spdlog::info("config override from {}", name);
    if (port >= 0) j["port"] = port;
    if (!host.empty()) j["host"] = host;
    if (!dictionary.empty()) j["dictionary"] = std::filesystem::absolute(dictionary).string();
    if (!recognizer.empty()) j["recognizer"] = recognizer;
    if (!log_level.empty()) j["log_level"] = log_level;
    if (threads) j["threads"] = threads;

    const auto base = config_path.empty() ? std::filesystem::current_path()
                                          : std::filesystem::absolute(config_path).parent_path();
    auto cfg = axs::GatewayConfig::from_json(j, base);
    spdlog::set_level(spdlog::level::from_str(cfg.log_level));

    // Block termination signals before any thread starts so only sigwait sees them.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    auto assets = axs::load_assets(cfg);
    axs::Gateway gateway(cfg, assets);
    gateway.start();
    std::cout << "listening on " << cfg.host << ":" << gateway.port() << std::endl;

    int sig = 0;
    sigwait(&set, &sig);
    spdlog::info("signal {}, shutting down", sig);
    gateway.stop();
    return 0;
  } catch (const axs::Error& e) {
    std::cerr << "axs-gateway: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "axs-gateway: " << e.what() << "\n";
    return 2;
  }
}
