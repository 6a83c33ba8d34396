#include "scoring/cli.hpp"

#include "scoring/api.hpp"
#include "scoring/codec.hpp"
#include "scoring/pipeline.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <pthread.h>

namespace scoring {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::exception& e) {
    throw MalformedRequest(path + ": invalid JSON: " + e.what());
  }
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void print_findings(std::ostream& out, const std::string& path, const std::vector<ValidationFinding>& findings) {
  if (findings.empty()) {
    out << path << ": ok\n";
    return;
  }
  for (const auto& f : findings)
    out << path << ": " << to_string(f.severity) << " " << f.code << " at " << f.location << ": " << f.message << "\n";
}

// Returns true when the file has no errors.
bool validate_file(std::ostream& out, const fs::path& path) {
  try {
    ScoringModel model = model_from_json(read_json_file(path.string()));
    auto findings = validate_model(model);
    print_findings(out, path.string(), findings);
    return !has_errors(findings);
  } catch (const ScoringError& e) {
    out << path.string() << ": error " << e.code() << ": " << e.what() << "\n";
    return false;
  }
}

int serve(const std::string& models_dir, const std::string& addr, std::ostream& err) {
  ModelStore store(models_dir);
  ApiConfig cfg = ApiConfig::from_env();
  if (!addr.empty()) {
    auto [host, port] = parse_listen_addr(addr);
    cfg.host = host;
    cfg.port = port;
  }
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ScoringService service(store, cfg);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  err << "serving " << store.snapshot()->models.size() << " model(s) from " << models_dir << " on " << cfg.host
      << ":" << cfg.port << "\n";
  const bool ok = service.listen();
  if (!ok) {
    err << "cannot listen on " << cfg.host << ":" << cfg.port << "\n";
    pthread_kill(waiter.native_handle(), SIGTERM);
  }
  waiter.join();
  return ok ? kExitOk : kExitDomainError;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Metadata-driven scoring engine"};
  app.require_subcommand(1);

  std::string models_dir = "models";
  app.add_option("--models-dir", models_dir, "Directory of model-<id>.json files")->envname("SCORING_MODELS_DIR");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  std::string addr;
  serve_cmd->add_option("--addr", addr, "HOST:PORT (default SCORING_LISTEN_ADDR or 127.0.0.1:8080)");

  auto* score_cmd = app.add_subcommand("score", "Score one record");
  std::optional<std::int64_t> model_id;
  std::string application, record_file, co_record_file, kpis;
  bool explain_flag = false, pretty = false;
  score_cmd->add_option("--model", model_id, "Model id (skips selection)");
  score_cmd->add_option("--application", application, "Application id");
  score_cmd->add_option("--record", record_file, "Record JSON file")->required();
  score_cmd->add_option("--co-record", co_record_file, "Co-applicant record JSON file");
  score_cmd->add_option("--kpis", kpis, "Comma-separated KPI names");
  score_cmd->add_flag("--explain", explain_flag, "Print a text explanation instead of JSON");
  score_cmd->add_flag("--pretty", pretty, "Indent JSON output");

  auto* batch_cmd = app.add_subcommand("batch", "Score an NDJSON or CSV file");
  std::string input, output, format = "ndjson", on_error = "skip", record_id_column = "record_id";
  std::optional<std::int64_t> batch_model;
  std::string batch_app, batch_kpis;
  unsigned parallelism = std::max(1u, std::thread::hardware_concurrency());
  batch_cmd->add_option("--input", input, "Input file")->required();
  batch_cmd->add_option("--output", output, "Output NDJSON file")->required();
  batch_cmd->add_option("--format", format, "ndjson|csv")->check(CLI::IsMember({"ndjson", "csv"}));
  batch_cmd->add_option("--on-error", on_error, "halt|skip")->check(CLI::IsMember({"halt", "skip"}));
  batch_cmd->add_option("--parallelism", parallelism, "Worker threads")->check(CLI::PositiveNumber);
  batch_cmd->add_option("--application", batch_app, "CSV: application id for every row");
  batch_cmd->add_option("--model", batch_model, "CSV: model id for every row");
  batch_cmd->add_option("--kpis", batch_kpis, "CSV: comma-separated KPI names");
  batch_cmd->add_option("--record-id-column", record_id_column, "CSV: column holding the record id");

  auto* models_cmd = app.add_subcommand("models", "Inspect model files");
  models_cmd->require_subcommand(1);
  auto* list_cmd = models_cmd->add_subcommand("list", "List models");
  auto* show_cmd = models_cmd->add_subcommand("show", "Print one model");
  std::int64_t show_id = 0;
  show_cmd->add_option("ID", show_id, "Model id")->required();
  auto* validate_cmd = models_cmd->add_subcommand("validate", "Validate model files");
  std::string validate_file_arg;
  validate_cmd->add_option("FILE", validate_file_arg, "Single model file (default: every file in --models-dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*serve_cmd) return serve(models_dir, addr, err);

    if (*score_cmd) {
      if (!model_id && application.empty())
        throw UsageError("score needs --model or --application");
      SnapshotPtr snap = load_registry(models_dir);
      ScoreRequest req;
      req.application_id = application;
      req.model_id = model_id;
      req.kpi_list = split_csv_list(kpis);
      req.record = record_from_json(read_json_file(record_file));
      if (!co_record_file.empty()) req.co_record = record_from_json(read_json_file(co_record_file));
      ScoreResult result = score_one(*snap, req);
      if (explain_flag) out << explain(result);
      else if (pretty) out << result_to_json(result).dump(2) << "\n";
      else out << score_response_body(result) << "\n";
      return kExitOk;
    }

    if (*batch_cmd) {
      SnapshotPtr snap = load_registry(models_dir);
      std::ifstream in(input, std::ios::binary);
      if (!in) throw IoFailure("cannot read " + input);
      std::ofstream outfile(output, std::ios::binary | std::ios::trunc);
      if (!outfile) throw IoFailure("cannot write " + output);
      BatchOptions opts{on_error == "halt" ? ErrorPolicy::Halt : ErrorPolicy::SkipAndReport, parallelism};
      LineSource source = format == "csv"
                              ? csv_requests(in, CsvOptions{batch_app, batch_model, split_csv_list(batch_kpis), record_id_column})
                              : lines_of(in);
      BatchReport report = score_batch(*snap, source, [&](const std::string& line) { outfile << line << '\n'; }, opts);
      outfile.flush();
      out << report_to_json(report).dump() << "\n";
      return report.halted ? kExitDomainError : kExitOk;
    }

    if (*list_cmd) {
      SnapshotPtr snap = load_registry(models_dir);
      json arr = json::array();
      for (const auto& [id, m] : snap->models)
        arr.push_back({{"model_id", id},
                       {"name", m.name},
                       {"version", m.version},
                       {"algorithm", std::string(algorithm_kind(m.algorithm))}});
      out << arr.dump(2) << "\n";
      return kExitOk;
    }

    if (*show_cmd) {
      SnapshotPtr snap = load_registry(models_dir);
      out << model_to_json(get_model(*snap, show_id)).dump(2) << "\n";
      return kExitOk;
    }

    if (*validate_cmd) {
      bool clean = true;
      if (!validate_file_arg.empty()) {
        clean = validate_file(out, validate_file_arg);
      } else {
        std::error_code ec;
        if (!fs::is_directory(models_dir, ec)) throw IoFailure("models directory not readable: " + models_dir);
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(models_dir))
          if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) clean = validate_file(out, f) && clean;
      }
      return clean ? kExitOk : kExitValidation;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ScoringError& e) {
    err << error_to_json(e).dump() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitUsage;
}

}  // namespace scoring
