#pragma once

// Score computation: the weighted-average mapper and the multi-applicant
// scorecard. Both return the score with a per-indicator breakdown.

#include "scoring/model.hpp"
#include "scoring/selection.hpp"

#include <optional>
#include <string>
#include <vector>

namespace scoring {

inline constexpr const char* kComputedScoreAttribute = "Computed Score";

struct Contribution {
  std::string indicator;
  std::optional<AttributeValue> value;
  Decimal mark;
  Decimal weight;
  Decimal weighted_term;  // weight * mark
  Decimal share;          // weighted_term / sum of weighted terms, 0 when that sum is 0
  // Scorecard only: the per-role marks that were blended into `mark`.
  std::optional<Decimal> primary_mark;
  std::optional<Decimal> co_mark;

  friend bool operator==(const Contribution&, const Contribution&) = default;
};

struct ScoreResult {
  std::string record_id;
  std::int64_t model_id = 0;
  std::int64_t model_version = 0;
  Decimal computed_score;
  std::optional<std::int64_t> matched_rule_id;
  std::vector<Contribution> contributions;
  Record enriched_record;
  std::optional<SelectionOutcome> selection;
  std::vector<std::string> notes;

  friend bool operator==(const ScoreResult&, const ScoreResult&) = default;
};

// Winner among matching rules: lowest priority, then lowest rule_id.
// Throws NoMatchingRule, MissingAttribute, KindMismatch.
ScoreResult score_weighted_average(const ScoringModel& model, const Record& record);

// `co` absent means a sole applicant: role splits are ignored.
// Throws NoMarkRuleMatched, MissingAttribute, KindMismatch.
ScoreResult score_multi_applicant(const ScoringModel& model, const Record& primary, const Record* co);

// Deterministic multi-line account of a result, contributions by descending
// share (ties by indicator name).
std::string explain(const ScoreResult& result);

// Shares are written with 6 fractional digits, half-to-even.
nlohmann::json result_to_json(const ScoreResult& result);

}  // namespace scoring
