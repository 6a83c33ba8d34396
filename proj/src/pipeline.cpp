#include "scoring/pipeline.hpp"

#include "scoring/codec.hpp"
#include "scoring/errors.hpp"

#include <atomic>
#include <chrono>
#include <istream>
#include <ostream>
#include <thread>

namespace scoring {

using nlohmann::json;

ScoreRequest request_from_json(const json& doc) {
  if (!doc.is_object()) throw MalformedRequest("request: expected an object");
  if (auto it = doc.find("csv_error"); it != doc.end() && it->is_string())
    throw MalformedRequest(it->get<std::string>());
  ScoreRequest req;
  if (auto it = doc.find("application_id"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) throw MalformedRequest("request.application_id: expected a string");
    req.application_id = it->get<std::string>();
  }
  if (auto it = doc.find("model_id"); it != doc.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw MalformedRequest("request.model_id: expected an integer");
    req.model_id = it->get<std::int64_t>();
  }
  if (auto it = doc.find("kpi_list"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw MalformedRequest("request.kpi_list: expected an array");
    for (const auto& k : *it) {
      if (!k.is_string()) throw MalformedRequest("request.kpi_list: expected strings");
      req.kpi_list.push_back(k.get<std::string>());
    }
  }
  auto rec = doc.find("record");
  if (rec == doc.end()) throw MalformedRequest("request: missing field 'record'");
  req.record = record_from_json(*rec, "request.record");
  if (auto it = doc.find("co_record"); it != doc.end() && !it->is_null())
    req.co_record = record_from_json(*it, "request.co_record");
  return req;
}

json request_to_json(const ScoreRequest& req) {
  json j = {{"application_id", req.application_id},
            {"kpi_list", req.kpi_list},
            {"record", record_to_json(req.record)}};
  if (req.model_id) j["model_id"] = *req.model_id;
  if (req.co_record) j["co_record"] = record_to_json(*req.co_record);
  return j;
}

namespace {

template <typename F>
auto in_step(const char* step, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (ScoringError& e) {
    if (!e.step()) e.set_step(step);
    throw;
  }
}

std::set<std::string> attribute_names(const Record& r) {
  std::set<std::string> names;
  for (const auto& [k, _] : r.attributes) names.insert(k);
  return names;
}

}  // namespace

ScoreResult score_one(const RegistrySnapshot& snapshot, const ScoreRequest& req) {
  SelectionOutcome outcome = in_step("select", [&] {
    if (req.model_id) return explicit_selection(*req.model_id);
    if (req.application_id.empty())
      throw MalformedRequest("application_id is required when model_id is absent");
    return select_model(snapshot, SelectionRequest{req.application_id, std::nullopt, req.kpi_list,
                                                   attribute_names(req.record)});
  });

  const ScoringModel& model = in_step("retrieve", [&]() -> const ScoringModel& {
    return get_model(snapshot, outcome.model_id);
  });

  ScoreResult result = in_step("compute", [&] {
    if (std::holds_alternative<MultiApplicantScorecard>(model.algorithm))
      return score_multi_applicant(model, req.record, req.co_record ? &*req.co_record : nullptr);
    ScoreResult r = score_weighted_average(model, req.record);
    if (req.co_record) r.notes.insert(r.notes.begin(), "co_record ignored: model is not a multi-applicant scorecard");
    return r;
  });
  result.selection = std::move(outcome);
  return result;
}

std::string score_response_body(const ScoreResult& result) { return result_to_json(result).dump(); }

json error_to_json(const ScoringError& e) {
  json j = {{"code", e.code()}, {"message", e.what()}};
  if (e.step()) j["step"] = *e.step();
  if (!e.details().is_null()) j["details"] = e.details();
  return j;
}

json report_to_json(const BatchReport& report) {
  json failures = json::array();
  for (const auto& f : report.failures)
    failures.push_back({{"line_number", f.line_number},
                        {"record_id", f.record_id},
                        {"error_code", f.error_code},
                        {"message", f.message}});
  return {{"total", report.total},
          {"succeeded", report.succeeded},
          {"failed", report.failed},
          {"failures", std::move(failures)},
          {"elapsed_ms", report.elapsed_ms},
          {"halted", report.halted}};
}

namespace {

struct LineOutcome {
  std::string output;
  bool ok = false;
  std::string record_id;
  std::string code;
  std::string message;
};

LineOutcome score_line(const RegistrySnapshot& snapshot, const std::string& line, std::size_t line_number) {
  LineOutcome out;
  auto fail = [&](const std::string& code, const std::string& detail, const std::string& message,
                  const std::optional<std::string>& step) {
    json err = {{"code", code}, {"detail", detail}};
    if (step) err["step"] = *step;
    out.output = json{{"ok", false}, {"line", line_number}, {"error", std::move(err)}}.dump();
    out.code = code;
    out.message = message;
  };
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::exception& e) {
    fail("malformed_request", "invalid JSON", e.what(), std::nullopt);
    return out;
  }
  if (doc.is_object()) {
    if (auto rec = doc.find("record"); rec != doc.end() && rec->is_object()) {
      if (auto id = rec->find("record_id"); id != rec->end())
        out.record_id = id->is_string() ? id->get<std::string>() : id->dump();
    }
  }
  try {
    ScoreResult result = score_one(snapshot, request_from_json(doc));
    out.output = json{{"ok", true}, {"result", result_to_json(result)}}.dump();
    out.ok = true;
  } catch (const ScoringError& e) {
    fail(e.code(), e.detail(), e.what(), e.step());
  } catch (const std::exception& e) {
    fail("internal", "internal error", e.what(), std::nullopt);
  }
  return out;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

BatchReport score_batch(const RegistrySnapshot& snapshot, const LineSource& source, const LineSink& sink,
                        const BatchOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  BatchReport report;
  const unsigned workers = std::max(1u, options.parallelism);
  const std::size_t chunk = std::max<std::size_t>(1, options.chunk_lines);
  std::size_t physical_line = 0;
  bool done = false;

  while (!done && !report.halted) {
    std::vector<std::pair<std::size_t, std::string>> batch;
    while (batch.size() < chunk) {
      std::optional<std::string> line = source();
      if (!line) {
        done = true;
        break;
      }
      ++physical_line;
      if (blank(*line)) continue;
      batch.emplace_back(physical_line, std::move(*line));
    }
    if (batch.empty()) break;

    std::vector<LineOutcome> outcomes(batch.size());
    if (workers == 1 || batch.size() == 1) {
      for (std::size_t i = 0; i < batch.size(); ++i)
        outcomes[i] = score_line(snapshot, batch[i].second, batch[i].first);
    } else {
      std::atomic<std::size_t> next{0};
      auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < batch.size(); i = next.fetch_add(1))
          outcomes[i] = score_line(snapshot, batch[i].second, batch[i].first);
      };
      std::vector<std::thread> pool;
      const unsigned extra = static_cast<unsigned>(std::min<std::size_t>(workers, batch.size())) - 1;
      for (unsigned t = 0; t < extra; ++t) pool.emplace_back(work);
      work();
      for (auto& t : pool) t.join();
    }

    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      auto& o = outcomes[i];
      sink(o.output);
      ++report.total;
      if (o.ok) {
        ++report.succeeded;
        continue;
      }
      ++report.failed;
      report.failures.push_back({batch[i].first, o.record_id, o.code, o.message});
      if (options.policy == ErrorPolicy::Halt) {
        report.halted = true;
        break;
      }
    }
  }
  report.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
  return report;
}

LineSource lines_of(std::istream& in) {
  return [&in]() -> std::optional<std::string> {
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    return line;
  };
}

BatchReport score_batch(const RegistrySnapshot& snapshot, std::istream& in, std::ostream& out,
                        const BatchOptions& options) {
  return score_batch(snapshot, lines_of(in), [&out](const std::string& line) { out << line << '\n'; }, options);
}

namespace {

// One CSV record (RFC 4180 quoting; quoted fields may span lines).
std::optional<std::vector<std::string>> read_csv_row(std::istream& in) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') quoted = true;
    else if (c == ',') fields.push_back(std::exchange(field, {}));
    else if (c == '\n') break;
    else if (c != '\r') field += c;
  }
  if (!any) return std::nullopt;
  fields.push_back(std::move(field));
  return fields;
}

json csv_cell(const std::string& cell) {
  if (cell == "true") return true;
  if (cell == "false") return false;
  if (auto d = Decimal::parse(cell)) return attribute_to_json(AttributeValue(*d));
  return cell;
}

}  // namespace

LineSource csv_requests(std::istream& in, CsvOptions options) {
  auto header = std::make_shared<std::optional<std::vector<std::string>>>();
  return [&in, options = std::move(options), header]() -> std::optional<std::string> {
    if (!*header) {
      *header = read_csv_row(in);
      if (!*header) return std::nullopt;
    }
    const auto& names = **header;
    for (;;) {
      auto row = read_csv_row(in);
      if (!row) return std::nullopt;
      if (row->size() == 1 && row->front().empty()) continue;
      if (row->size() != names.size())
        return json{{"csv_error", "row has " + std::to_string(row->size()) + " fields, header has " +
                                      std::to_string(names.size())}}.dump();
      json attributes = json::object();
      std::string record_id;
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == options.record_id_column) {
          record_id = (*row)[i];
          continue;
        }
        if ((*row)[i].empty()) continue;
        attributes[names[i]] = csv_cell((*row)[i]);
      }
      json req = {{"application_id", options.application_id},
                  {"kpi_list", options.kpi_list},
                  {"record", {{"record_id", record_id}, {"attributes", attributes}}}};
      if (options.model_id) req["model_id"] = *options.model_id;
      return req.dump();
    }
  };
}

}  // namespace scoring
