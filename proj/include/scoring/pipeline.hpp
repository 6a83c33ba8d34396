#pragma once

// Orchestration: select -> retrieve -> compute -> enrich for one request, and
// ordered NDJSON batch scoring over a pinned snapshot.

#include "scoring/algorithms.hpp"
#include "scoring/registry.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace scoring {

struct ScoreRequest {
  std::string application_id;
  std::optional<std::int64_t> model_id;
  std::vector<std::string> kpi_list;
  Record record;
  std::optional<Record> co_record;
};

// Throws MalformedRequest.
ScoreRequest request_from_json(const nlohmann::json& doc);
nlohmann::json request_to_json(const ScoreRequest& req);

// Errors propagate with step() set to "select", "retrieve" or "compute".
ScoreResult score_one(const RegistrySnapshot& snapshot, const ScoreRequest& req);

// Body shared by the CLI and the HTTP API.
std::string score_response_body(const ScoreResult& result);
nlohmann::json error_to_json(const ScoringError& e);

enum class ErrorPolicy { Halt, SkipAndReport };

struct BatchFailure {
  std::size_t line_number = 0;
  std::string record_id;
  std::string error_code;
  std::string message;
};

struct BatchReport {
  std::size_t total = 0;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  std::vector<BatchFailure> failures;
  std::int64_t elapsed_ms = 0;
  bool halted = false;
};

nlohmann::json report_to_json(const BatchReport& report);

struct BatchOptions {
  ErrorPolicy policy = ErrorPolicy::SkipAndReport;
  unsigned parallelism = 1;
  std::size_t chunk_lines = 2048;
};

// Next input line, or nullopt at end of stream.
using LineSource = std::function<std::optional<std::string>()>;
// Receives each output line without its trailing newline.
using LineSink = std::function<void(const std::string&)>;

// One output line per non-blank input line, in input order, whatever the
// parallelism. Every line is scored against `snapshot`.
BatchReport score_batch(const RegistrySnapshot& snapshot, const LineSource& source, const LineSink& sink,
                        const BatchOptions& options = {});

BatchReport score_batch(const RegistrySnapshot& snapshot, std::istream& in, std::ostream& out,
                        const BatchOptions& options = {});

LineSource lines_of(std::istream& in);

struct CsvOptions {
  std::string application_id;
  std::optional<std::int64_t> model_id;
  std::vector<std::string> kpi_list;
  std::string record_id_column = "record_id";
};

// Converts CSV rows (header row = attribute names) into NDJSON request lines.
// Cells that parse as decimals become numbers, "true"/"false" booleans,
// empty cells are omitted, everything else is text. A broken row becomes a
// line that fails with malformed_request.
LineSource csv_requests(std::istream& in, CsvOptions options);

}  // namespace scoring
