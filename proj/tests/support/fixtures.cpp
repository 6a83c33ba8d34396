#include "support/fixtures.hpp"

#include "scoring/codec.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <sys/wait.h>

namespace scoring::testing {

namespace fs = std::filesystem;

fs::path data_dir() { return SCORING_DATA_DIR; }
fs::path fixture_model_path() { return data_dir() / "models" / "model-1011.json"; }
fs::path fixture_record_path() { return data_dir() / "records" / "record-104532.json"; }
std::string cli_path() { return SCORING_CLI_PATH; }

ScoringModel fixture_model() { return model_from_json(nlohmann::json::parse(read_file(fixture_model_path()))); }

Record fixture_record() { return record_from_json(nlohmann::json::parse(read_file(fixture_record_path()))); }

ScoreRequest fixture_request(std::optional<std::int64_t> model_id) {
  ScoreRequest req;
  req.application_id = "LENDING-01";
  req.model_id = model_id;
  req.kpi_list = {"CreditScore", "MonthlySalary", "EducationLevel", "TotalBankSaving"};
  req.record = fixture_record();
  return req;
}

SnapshotPtr fixture_snapshot() { return load_registry(data_dir() / "models"); }

std::string fixture_request_line() { return request_to_json(fixture_request()).dump(); }

TestServer::TestServer(const fs::path& models_dir, ApiConfig config)
    : store_(std::make_unique<ModelStore>(models_dir)) {
  config.host = "127.0.0.1";
  service_ = std::make_unique<ScoringService>(*store_, std::move(config));
  port_ = service_->bind_any_port();
  if (port_ <= 0) throw std::runtime_error("cannot bind a test port");
  thread_ = std::thread([this] { service_->listen_after_bind(); });
  service_->wait_until_ready();
}

TestServer::~TestServer() {
  service_->stop();
  if (thread_.joinable()) thread_.join();
}

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "scoring-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& contents) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << contents;
}

CommandResult run_command(const std::string& command) {
  CommandResult r;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace scoring::testing
