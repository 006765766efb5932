#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "tanksworld/config.hpp"
#include "tanksworld/protocol.hpp"

namespace tanksworld {

struct ServerOptions {
  std::string host = "127.0.0.1";
  /// 0 picks a free port.
  unsigned short port = twp::kDefaultPort;
  /// Claimed tanks that have not acted by then play an all-zero action.
  std::chrono::milliseconds barrier_timeout{100};
  /// Lower bound on wall time between ticks, e.g. 100 ms for human play.
  std::chrono::milliseconds min_tick_interval{0};
  /// Serves files from this directory over plain HTTP on the same port.
  std::optional<std::filesystem::path> static_dir;
  /// Records every episode. Episode n > 0 goes to `<stem>-<n><ext>`.
  std::optional<std::filesystem::path> record_path;
  bool record_observations = false;
  /// Stop after this many finished episodes; 0 keeps serving.
  std::uint64_t max_episodes = 0;
  std::string session;  // defaults to "s<seed>"
};

struct ServerStats {
  std::uint64_t ticks = 0;
  std::uint64_t episodes_finished = 0;
  std::uint64_t barrier_timeouts = 0;  // ticks where at least one action was substituted
  std::uint64_t connections = 0;
};

/// WebSocket session host. One I/O thread handles connections; a separate
/// stepper thread owns the Env and talks to connections through queues.
class Server {
 public:
  Server(EnvConfig config, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts both threads. Returns the bound port. Throws
  /// ErrorKind::Io when the endpoint cannot be bound.
  unsigned short start();
  void stop();
  /// Blocks until the server stops (max_episodes reached or stop()).
  void wait();
  /// False once a stop has been requested or max_episodes reached.
  bool running() const;
  ServerStats stats() const;
  std::vector<std::filesystem::path> recordings() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace tanksworld
