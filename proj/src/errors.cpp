#include "scoring/errors.hpp"

namespace scoring {

namespace {

std::string describe_misses(const std::string& record_id, const std::vector<NearMiss>& misses) {
  std::string msg = "no mapper rule matched record '" + record_id + "'";
  for (std::size_t i = 0; i < misses.size(); ++i) {
    msg += i == 0 ? ": " : "; ";
    msg += "rule " + std::to_string(misses[i].rule_id) + " failed on " + misses[i].indicator;
    if (!misses[i].description.empty()) msg += " (" + misses[i].description + ")";
  }
  return msg;
}

nlohmann::json misses_json(const std::string& record_id, const std::vector<NearMiss>& misses) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : misses)
    arr.push_back({{"rule_id", m.rule_id}, {"indicator", m.indicator}, {"condition", m.description}});
  return {{"record_id", record_id}, {"nearest_misses", std::move(arr)}};
}

std::string describe_missing(
    const std::string& app, const std::vector<std::pair<std::int64_t, std::vector<std::string>>>& missing) {
  std::string msg = "no eligible model for application '" + app + "'";
  for (std::size_t i = 0; i < missing.size(); ++i) {
    msg += i == 0 ? ": " : "; ";
    msg += "model " + std::to_string(missing[i].first) + " missing ";
    for (std::size_t k = 0; k < missing[i].second.size(); ++k) {
      if (k) msg += ",";
      msg += missing[i].second[k];
    }
  }
  return msg;
}

nlohmann::json missing_json(
    const std::string& app, const std::vector<std::pair<std::int64_t, std::vector<std::string>>>& missing) {
  nlohmann::json per_model = nlohmann::json::array();
  for (const auto& [id, kpis] : missing) per_model.push_back({{"model_id", id}, {"missing_kpis", kpis}});
  return {{"application_id", app}, {"missing_kpis_per_model", std::move(per_model)}};
}

}  // namespace

NoMatchingRule::NoMatchingRule(std::string record_id, std::vector<NearMiss> misses)
    : ScoringError("no_matching_rule", describe_misses(record_id, misses), misses_json(record_id, misses)),
      record_id_(std::move(record_id)),
      misses_(std::move(misses)) {}

NoEligibleModel::NoEligibleModel(std::string application_id,
                                 std::vector<std::pair<std::int64_t, std::vector<std::string>>> missing)
    : ScoringError("no_eligible_model", describe_missing(application_id, missing),
                   missing_json(application_id, missing)),
      missing_(std::move(missing)) {}

}  // namespace scoring
