#include "scoring/selection.hpp"

#include <algorithm>

namespace scoring {

SelectionOutcome explicit_selection(std::int64_t model_id) {
  return {model_id, Decimal(3), "explicit model_id " + std::to_string(model_id) + " requested; selection bypassed",
          true};
}

SelectionOutcome select_model(const RegistrySnapshot& snapshot, const SelectionRequest& req) {
  if (req.explicit_model_id) {
    get_model(snapshot, *req.explicit_model_id);
    return explicit_selection(*req.explicit_model_id);
  }

  const std::set<std::string> provided(req.provided_kpis.begin(), req.provided_kpis.end());
  std::vector<std::pair<std::int64_t, std::vector<std::string>>> missing;
  std::optional<SelectionOutcome> best;

  // models is ordered by id, so strict '>' keeps the lowest id on ties.
  for (const auto& [id, model] : snapshot.models) {
    const auto& binding = model.selection_binding;
    std::vector<std::string> uncovered;
    std::size_t covered_by_request = 0;
    for (const auto& kpi : binding.required_kpis) {
      const bool in_request = provided.count(kpi) > 0;
      if (in_request) ++covered_by_request;
      if (!in_request && !req.record_attribute_names.count(kpi)) uncovered.push_back(kpi);
    }
    if (!uncovered.empty()) {
      missing.emplace_back(id, std::move(uncovered));
      continue;
    }
    const bool bound = std::find(binding.application_ids.begin(), binding.application_ids.end(),
                                 req.application_id) != binding.application_ids.end();
    const std::int64_t required = static_cast<std::int64_t>(binding.required_kpis.size());
    const Decimal coverage = Decimal(static_cast<std::int64_t>(covered_by_request)) / Decimal(std::max<std::int64_t>(1, required));
    const Decimal fitness = Decimal(bound ? 2 : 0) + coverage;
    if (!best || fitness > best->fitness) {
      std::string why = "model " + std::to_string(id) + " fitness " + fitness.to_string() + ": application '" +
                        req.application_id + "' " + (bound ? "bound" : "not bound") + ", " +
                        std::to_string(covered_by_request) + "/" + std::to_string(required) +
                        " required KPIs provided";
      best = SelectionOutcome{id, fitness, std::move(why), false};
    }
  }
  if (!best) throw NoEligibleModel(req.application_id, std::move(missing));
  return *best;
}

nlohmann::json outcome_to_json(const SelectionOutcome& outcome) {
  return {{"model_id", outcome.model_id},
          {"fitness", outcome.fitness.to_string()},
          {"rationale", outcome.rationale},
          {"bypassed", outcome.bypassed}};
}

}  // namespace scoring
