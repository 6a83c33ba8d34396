#pragma once

#include "scoring/api.hpp"
#include "scoring/pipeline.hpp"
#include "scoring/registry.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <thread>

namespace scoring::testing {

std::filesystem::path data_dir();
std::filesystem::path fixture_model_path();
std::filesystem::path fixture_record_path();

// Model-1011: weights 20/15/15/10, rule 105 marks 250/160/130/146.5.
ScoringModel fixture_model();
// Record 104532 {CreditScore 790, MonthlySalary 12000, EducationLevel Bachelor, TotalBankSaving 30000}.
Record fixture_record();
ScoreRequest fixture_request(std::optional<std::int64_t> model_id = 1011);
SnapshotPtr fixture_snapshot();
std::string fixture_request_line();

class TempDir {
public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& contents);

// ModelStore + ScoringService on an ephemeral loopback port, served from a
// background thread for the object's lifetime.
class TestServer {
public:
  explicit TestServer(const std::filesystem::path& models_dir, ApiConfig config = {});
  ~TestServer();
  int port() const { return port_; }
  ModelStore& store() { return *store_; }

private:
  std::unique_ptr<ModelStore> store_;
  std::unique_ptr<ScoringService> service_;
  std::thread thread_;
  int port_ = -1;
};

struct CommandResult {
  int exit_code = -1;
  std::string out;
};
// Runs through /bin/sh, capturing stdout.
CommandResult run_command(const std::string& command);
std::string cli_path();

}  // namespace scoring::testing
