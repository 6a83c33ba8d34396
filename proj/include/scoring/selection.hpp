#pragma once

#include "scoring/registry.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace scoring {

struct SelectionRequest {
  std::string application_id;
  std::optional<std::int64_t> explicit_model_id;
  std::vector<std::string> provided_kpis;
  std::set<std::string> record_attribute_names;
};

struct SelectionOutcome {
  std::int64_t model_id = 0;
  Decimal fitness;  // in [0, 3]
  std::string rationale;
  bool bypassed = false;

  friend bool operator==(const SelectionOutcome&, const SelectionOutcome&) = default;
};

// Outcome for a caller-pinned model; does not look the model up.
SelectionOutcome explicit_selection(std::int64_t model_id);

// fitness(m) = 2 * [application bound to m] + |required ∩ provided| / max(1, |required|)
// over models whose required KPIs are covered by provided KPIs plus record
// attribute names. Highest fitness wins, then lowest model_id.
// Throws ModelNotFound (explicit id absent), NoEligibleModel.
SelectionOutcome select_model(const RegistrySnapshot& snapshot, const SelectionRequest& req);

nlohmann::json outcome_to_json(const SelectionOutcome& outcome);

}  // namespace scoring
