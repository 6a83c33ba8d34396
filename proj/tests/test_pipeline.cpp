#include "scoring/codec.hpp"
#include "scoring/pipeline.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <condition_variable>
#include <sstream>
#include <thread>

using namespace scoring;
using namespace scoring::testing;
using nlohmann::json;

namespace {

std::string line_without(const std::string& attribute, const std::string& record_id) {
  ScoreRequest req = fixture_request();
  req.record.attributes.erase(attribute);
  req.record.record_id = record_id;
  return request_to_json(req).dump();
}

std::string line_for(const std::string& record_id, std::int64_t credit) {
  ScoreRequest req = fixture_request(std::nullopt);
  req.record.record_id = record_id;
  req.record.attributes["CreditScore"] = AttributeValue(Decimal(credit));
  return request_to_json(req).dump();
}

std::vector<std::string> run(const RegistrySnapshot& snap, const std::string& input, BatchReport& report,
                             BatchOptions opts = {}) {
  std::istringstream in(input);
  std::vector<std::string> out;
  report = score_batch(snap, lines_of(in), [&](const std::string& l) { out.push_back(l); }, opts);
  return out;
}

}  // namespace

TEST_CASE("score_one: selection then compute") {
  ScoreResult r = score_one(*fixture_snapshot(), fixture_request(std::nullopt));
  CHECK(r.computed_score.to_string() == "180.25");
  REQUIRE(r.selection.has_value());
  CHECK(r.selection->fitness == Decimal(3));
  CHECK_FALSE(r.selection->bypassed);

  ScoreResult pinned = score_one(*fixture_snapshot(), fixture_request(1011));
  CHECK(pinned.selection->bypassed);
  CHECK(pinned.computed_score == r.computed_score);
}

TEST_CASE("score_one: errors carry the failing step") {
  auto step_of = [](const ScoreRequest& req) -> std::string {
    try {
      score_one(*fixture_snapshot(), req);
    } catch (const ScoringError& e) {
      return e.code() + "@" + e.step().value_or("?");
    }
    return "ok";
  };
  CHECK(step_of(fixture_request(9999)) == "model_not_found@retrieve");

  ScoreRequest missing = fixture_request(std::nullopt);
  missing.kpi_list = {"MonthlySalary"};
  missing.record.attributes.erase("CreditScore");
  CHECK(step_of(missing) == "no_eligible_model@select");

  ScoreRequest miss = fixture_request();
  miss.record.attributes["CreditScore"] = AttributeValue(Decimal(850));
  CHECK(step_of(miss) == "no_matching_rule@compute");

  ScoreRequest none = fixture_request(std::nullopt);
  none.application_id.clear();
  CHECK(step_of(none) == "malformed_request@select");
}

TEST_CASE("request JSON round-trips and rejects junk") {
  ScoreRequest req = fixture_request();
  ScoreRequest back = request_from_json(request_to_json(req));
  CHECK(back.record == req.record);
  CHECK(back.model_id == req.model_id);
  CHECK(back.kpi_list == req.kpi_list);
  CHECK_THROWS_AS(request_from_json(json::array()), MalformedRequest);
  CHECK_THROWS_AS(request_from_json(json{{"application_id", "A"}}), MalformedRequest);
  CHECK_THROWS_AS(request_from_json(json{{"model_id", "1011"}, {"record", {{"record_id", "x"}, {"attributes", json::object()}}}}),
                  MalformedRequest);
}

TEST_CASE("batch: middle line failure is reported by line number") {
  const std::string input = fixture_request_line() + "\n" + line_without("CreditScore", "bad") + "\n" +
                            fixture_request_line() + "\n";
  BatchReport report;
  auto out = run(*fixture_snapshot(), input, report);
  REQUIRE(out.size() == 3);
  CHECK(report.total == 3);
  CHECK(report.succeeded == 2);
  CHECK(report.failed == 1);
  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].line_number == 2);
  CHECK(report.failures[0].record_id == "bad");
  CHECK(report.failures[0].error_code == "missing_attribute");
  CHECK(json::parse(out[0])["result"]["computed_score"] == "180.25");
  CHECK(json::parse(out[1]) ==
        json::parse(R"({"ok":false,"line":2,"error":{"code":"missing_attribute","detail":"CreditScore","step":"compute"}})"));
}

TEST_CASE("batch: empty input and blank lines") {
  BatchReport report;
  CHECK(run(*fixture_snapshot(), "", report).empty());
  CHECK(report.total == 0);
  CHECK_FALSE(report.halted);

  auto out = run(*fixture_snapshot(), "\n" + fixture_request_line() + "\n   \n{oops\n", report);
  REQUIRE(out.size() == 2);
  CHECK(report.total == 2);
  CHECK(report.failures.at(0).line_number == 4);
  CHECK(report.failures.at(0).error_code == "malformed_request");
}

TEST_CASE("batch: halt stops after the first failure") {
  const std::string input = fixture_request_line() + "\n" + line_without("CreditScore", "bad") + "\n" +
                            fixture_request_line() + "\n";
  BatchReport report;
  auto out = run(*fixture_snapshot(), input, report, {ErrorPolicy::Halt, 4});
  CHECK(out.size() == 2);
  CHECK(report.halted);
  CHECK(report.total == 2);
  CHECK(report.failed == 1);
  CHECK(json::parse(out.back())["line"] == 2);
}

TEST_CASE("batch: output order is independent of parallelism and chunking") {
  std::string input;
  for (int i = 0; i < 500; ++i) input += (i % 7 == 3 ? line_for("r" + std::to_string(i), 900) : line_for("r" + std::to_string(i), 600 + i % 200)) + "\n";
  BatchReport serial_report, parallel_report;
  auto serial = run(*fixture_snapshot(), input, serial_report, {ErrorPolicy::SkipAndReport, 1});
  auto parallel = run(*fixture_snapshot(), input, parallel_report, {ErrorPolicy::SkipAndReport, 8, 37});
  CHECK(serial == parallel);
  CHECK(serial_report.failed == parallel_report.failed);
  CHECK(serial_report.failed == 71);
  for (std::size_t i = 0; i < parallel_report.failures.size(); ++i)
    CHECK(parallel_report.failures[i].line_number == serial_report.failures[i].line_number);
}

TEST_CASE("batch: every line sees the pinned snapshot") {
  TempDir dir;
  ModelStore store(dir.path());
  store.upsert(fixture_model());
  SnapshotPtr pinned = store.snapshot();

  std::mutex mu;
  std::condition_variable cv;
  bool updated = false;
  int served = 0;
  LineSource source = [&]() -> std::optional<std::string> {
    if (served == 3) return std::nullopt;
    if (served == 1) {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return updated; });
    }
    ++served;
    return fixture_request_line();
  };
  std::vector<std::string> out;
  std::thread writer([&] {
    store.upsert(fixture_model());
    std::lock_guard lock(mu);
    updated = true;
    cv.notify_all();
  });
  score_batch(*pinned, source, [&](const std::string& l) { out.push_back(l); }, {ErrorPolicy::SkipAndReport, 1, 1});
  writer.join();
  REQUIRE(out.size() == 3);
  for (const auto& l : out) CHECK(json::parse(l)["result"]["model_version"] == 1);
  CHECK(store.snapshot()->models.at(1011).version == 2);
}

TEST_CASE("csv rows become requests") {
  std::istringstream csv(
      "record_id,CreditScore,MonthlySalary,EducationLevel,TotalBankSaving\n"
      "104532,790,12000,Bachelor,30000\n"
      "\"q,1\",790,12000,\"Bach\"\"elor\",30000\n"
      "short,1\n");
  LineSource src = csv_requests(csv, CsvOptions{"LENDING-01", std::nullopt,
                                                {"CreditScore", "MonthlySalary", "EducationLevel", "TotalBankSaving"}});
  std::vector<std::string> out;
  BatchReport report = score_batch(*fixture_snapshot(), src, [&](const std::string& l) { out.push_back(l); });
  REQUIRE(out.size() == 3);
  CHECK(json::parse(out[0])["result"]["computed_score"] == "180.25");
  CHECK(json::parse(out[0])["result"]["record_id"] == "104532");
  CHECK(report.failures.at(0).record_id == "q,1");
  CHECK(report.failures.at(0).error_code == "no_matching_rule");
  CHECK(report.failures.at(1).error_code == "malformed_request");
  CHECK(report.failures.at(1).line_number == 3);
}

TEST_CASE("report JSON shape") {
  BatchReport r;
  r.total = 2;
  r.succeeded = 1;
  r.failed = 1;
  r.failures.push_back({2, "x", "missing_attribute", "missing attribute 'A'"});
  json j = report_to_json(r);
  CHECK(j["total"] == 2);
  CHECK(j["failures"][0]["line_number"] == 2);
  CHECK(j["halted"] == false);
}
