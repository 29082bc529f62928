#pragma once

#include <memory>

#include <json.hpp>

#include "axs/gateway_config.hpp"
#include "axs/latency.hpp"
#include "axs/pipeline.hpp"

namespace axs {

/// WebSocket front door. Serves /ws (the envelope protocol), GET /health and
/// GET /metrics on one port. Each room runs its pipeline on its own strand;
/// connections are read one message at a time and stop being read while
/// they hold `ingress_credit` unprocessed messages.
class Gateway {
 public:
  Gateway(GatewayConfig config, std::shared_ptr<const PipelineAssets> assets);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Binds and starts the I/O threads. Errors: BIND_FAILED.
  void start();
  /// Closes the listener and every connection, then joins the threads.
  void stop();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

  /// The bound port (useful with port 0).
  unsigned short port() const;

  nlohmann::json metrics() const;
  std::shared_ptr<LatencyLedger> ledger() const;
  const GatewayConfig& config() const;

 struct Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace axs
