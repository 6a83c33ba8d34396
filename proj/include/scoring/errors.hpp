#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace scoring {

// Base for every domain failure. `code()` is the stable machine code used on
// the wire; `step()` names the pipeline stage that raised it, when known.
class ScoringError : public std::runtime_error {
public:
  ScoringError(std::string code, const std::string& message, nlohmann::json details = nullptr)
      : std::runtime_error(message), code_(std::move(code)), details_(std::move(details)) {}

  const std::string& code() const { return code_; }
  const nlohmann::json& details() const { return details_; }
  const std::optional<std::string>& step() const { return step_; }
  void set_step(std::string step) { step_ = std::move(step); }
  // Short single-token detail for batch error lines (attribute name etc.).
  virtual std::string detail() const { return what(); }

private:
  std::string code_;
  nlohmann::json details_;
  std::optional<std::string> step_;
};

class ModelNotFound : public ScoringError {
public:
  explicit ModelNotFound(std::int64_t model_id)
      : ScoringError("model_not_found", "model " + std::to_string(model_id) + " not found",
                     {{"model_id", model_id}}),
        model_id_(model_id) {}
  std::int64_t model_id() const { return model_id_; }

private:
  std::int64_t model_id_;
};

class MissingAttribute : public ScoringError {
public:
  explicit MissingAttribute(std::string name)
      : ScoringError("missing_attribute", "missing attribute '" + name + "'", {{"attribute", name}}),
        name_(std::move(name)) {}
  const std::string& name() const { return name_; }
  std::string detail() const override { return name_; }

private:
  std::string name_;
};

class KindMismatch : public ScoringError {
public:
  KindMismatch(std::string name, std::string expected, std::string found)
      : ScoringError("kind_mismatch",
                     "attribute '" + name + "' expected " + expected + " but found " + found,
                     {{"attribute", name}, {"expected", expected}, {"found", found}}),
        name_(std::move(name)) {}
  const std::string& name() const { return name_; }
  std::string detail() const override { return name_; }

private:
  std::string name_;
};

struct NearMiss {
  std::int64_t rule_id;
  std::string indicator;  // first failing indicator in model order
  std::string description;
};

class NoMatchingRule : public ScoringError {
public:
  NoMatchingRule(std::string record_id, std::vector<NearMiss> misses);
  const std::string& record_id() const { return record_id_; }
  const std::vector<NearMiss>& nearest_misses() const { return misses_; }

private:
  std::string record_id_;
  std::vector<NearMiss> misses_;
};

// Scorecard: no mark rule of a parameter matched one applicant's value.
class NoMarkRuleMatched : public ScoringError {
public:
  NoMarkRuleMatched(std::string parameter, std::string role, std::string value)
      : ScoringError("no_matching_rule",
                     "no mark rule of parameter '" + parameter + "' matched " + role + " value '" +
                         value + "'",
                     {{"parameter", parameter}, {"role", role}, {"value", value}}),
        parameter_(std::move(parameter)),
        role_(std::move(role)) {}
  const std::string& parameter() const { return parameter_; }
  const std::string& role() const { return role_; }
  std::string detail() const override { return parameter_; }

private:
  std::string parameter_;
  std::string role_;
};

class NoEligibleModel : public ScoringError {
public:
  // missing: per model id, the required KPIs not covered by the request.
  NoEligibleModel(std::string application_id,
                  std::vector<std::pair<std::int64_t, std::vector<std::string>>> missing);
  const std::vector<std::pair<std::int64_t, std::vector<std::string>>>& missing_kpis() const {
    return missing_;
  }

private:
  std::vector<std::pair<std::int64_t, std::vector<std::string>>> missing_;
};

class ParseError : public ScoringError {
public:
  ParseError(std::size_t offset, std::string expected, std::string found)
      : ScoringError("parse_error",
                     "at offset " + std::to_string(offset) + ": expected " + expected + ", found " +
                         found,
                     {{"offset", offset}, {"expected", expected}, {"found", found}}),
        offset_(offset),
        expected_(std::move(expected)),
        found_(std::move(found)) {}
  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }
  const std::string& found() const { return found_; }

private:
  std::size_t offset_;
  std::string expected_;
  std::string found_;
};

// Request or document could not be decoded.
class MalformedRequest : public ScoringError {
public:
  explicit MalformedRequest(const std::string& message)
      : ScoringError("malformed_request", message) {}
};

class IoFailure : public ScoringError {
public:
  explicit IoFailure(const std::string& message) : ScoringError("internal", message) {}
};

class MalformedModelFile : public ScoringError {
public:
  MalformedModelFile(std::string path, std::string detail)
      : ScoringError("validation_rejected", path + ": " + detail, {{"path", path}, {"detail", detail}}),
        path_(std::move(path)) {}
  const std::string& path() const { return path_; }

private:
  std::string path_;
};

}  // namespace scoring
