#pragma once

// HTTP surface:
//   POST   /v1/score            one ScoreRequest -> ScoreResult
//   POST   /v1/score/batch      NDJSON in, chunked NDJSON out + report line
//   GET    /v1/models           summaries
//   GET    /v1/models/{id}      full document
//   PUT    /v1/models/{id}      validate then upsert (optional base_version)
//   DELETE /v1/models/{id}
//   POST   /v1/models/validate  findings only, nothing persisted
//   GET    /healthz             {"snapshot_version": N}

#include "scoring/registry.hpp"

#include <memory>
#include <optional>
#include <string>

namespace scoring {

struct ApiConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  unsigned batch_parallelism = 1;
  std::optional<std::string> console_origin;

  // SCORING_LISTEN_ADDR, SCORING_BATCH_PARALLELISM, SCORING_CONSOLE_ORIGIN.
  static ApiConfig from_env();
};

// "host:port"; throws std::invalid_argument.
std::pair<std::string, int> parse_listen_addr(const std::string& addr);

// HTTP status for a stable error code.
int http_status_for(const std::string& code);

class ScoringService {
public:
  ScoringService(ModelStore& store, ApiConfig config);
  ~ScoringService();
  ScoringService(const ScoringService&) = delete;
  ScoringService& operator=(const ScoringService&) = delete;

  // Blocks until stop(). Returns false if the address could not be bound.
  bool listen();
  // Binds an ephemeral port on config.host and returns it (or -1).
  int bind_any_port();
  // Serves on a socket bound by bind_any_port(); blocks until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace scoring
