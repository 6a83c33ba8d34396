#pragma once

#include "scoring/decimal.hpp"
#include "scoring/rulelang.hpp"
#include "scoring/value.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace scoring {

struct IndicatorSpec {
  std::string name;
  ValueKind value_kind = ValueKind::Numeric;
  Decimal weight;

  friend bool operator==(const IndicatorSpec&, const IndicatorSpec&) = default;
};

// One row of the mapper matrix: a conjunction of per-indicator conditions and
// the marks awarded when it matches. Lower priority number wins.
struct MapperRule {
  std::int64_t rule_id = 0;
  std::int64_t priority = 0;
  std::map<std::string, Predicate> conditions;
  std::map<std::string, Decimal> marks;

  friend bool operator==(const MapperRule&, const MapperRule&) = default;
};

struct WeightedAverageMapper {
  std::vector<IndicatorSpec> indicators;
  std::vector<MapperRule> mapper_rules;

  friend bool operator==(const WeightedAverageMapper&, const WeightedAverageMapper&) = default;
};

struct RoleSplit {
  Decimal primary_pct{100};
  Decimal co_pct{0};

  friend bool operator==(const RoleSplit&, const RoleSplit&) = default;
};

struct MarkRule {
  Predicate predicate;
  Decimal mark;

  friend bool operator==(const MarkRule&, const MarkRule&) = default;
};

// Scorecard parameter. Non-expression predicates read the attribute named
// after the parameter.
struct ScorecardParameter {
  std::string name;
  Decimal weight;
  RoleSplit role_split;
  std::vector<MarkRule> mark_rules;

  friend bool operator==(const ScorecardParameter&, const ScorecardParameter&) = default;
};

struct MultiApplicantScorecard {
  std::vector<ScorecardParameter> parameters;

  friend bool operator==(const MultiApplicantScorecard&, const MultiApplicantScorecard&) = default;
};

using Algorithm = std::variant<WeightedAverageMapper, MultiApplicantScorecard>;

std::string_view algorithm_kind(const Algorithm& a);

struct SelectionBinding {
  std::vector<std::string> application_ids;
  std::vector<std::string> required_kpis;

  friend bool operator==(const SelectionBinding&, const SelectionBinding&) = default;
};

struct ScoringModel {
  std::int64_t model_id = 0;
  std::string name;
  std::int64_t version = 1;
  Algorithm algorithm;
  SelectionBinding selection_binding;

  friend bool operator==(const ScoringModel&, const ScoringModel&) = default;
};

// True iff every condition of `rule` holds for `record` (empty rule matches).
// Throws MissingAttribute / KindMismatch.
bool match_rule(const MapperRule& rule, const Record& record);

// First condition of `rule` that fails, checked in `indicator_order` and then
// any remaining condition keys. nullopt when the rule matches.
std::optional<std::string> first_failing_condition(const MapperRule& rule, const Record& record,
                                                   const std::vector<IndicatorSpec>& indicator_order);

}  // namespace scoring
