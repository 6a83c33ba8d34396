#include "scoring/model.hpp"

#include <set>

namespace scoring {

std::string_view algorithm_kind(const Algorithm& a) {
  return std::holds_alternative<WeightedAverageMapper>(a) ? "weighted_average_mapper"
                                                          : "multi_applicant_scorecard";
}

// Every condition is evaluated (no early exit) so attribute errors are
// reported independently of which condition happens to fail first.
bool match_rule(const MapperRule& rule, const Record& record) {
  bool all = true;
  for (const auto& [indicator, predicate] : rule.conditions)
    all = evaluate_predicate(predicate, indicator, record.attributes) && all;
  return all;
}

std::optional<std::string> first_failing_condition(const MapperRule& rule, const Record& record,
                                                   const std::vector<IndicatorSpec>& indicator_order) {
  std::set<std::string> seen;
  for (const auto& spec : indicator_order) {
    auto it = rule.conditions.find(spec.name);
    if (it == rule.conditions.end()) continue;
    seen.insert(spec.name);
    if (!evaluate_predicate(it->second, spec.name, record.attributes)) return spec.name;
  }
  for (const auto& [indicator, predicate] : rule.conditions) {
    if (seen.count(indicator)) continue;
    if (!evaluate_predicate(predicate, indicator, record.attributes)) return indicator;
  }
  return std::nullopt;
}

}  // namespace scoring
