#include "scoring/algorithms.hpp"

#include "scoring/codec.hpp"
#include "scoring/errors.hpp"

#include <algorithm>
#include <sstream>

namespace scoring {

namespace {

void require_kind(const Record& record, const std::string& name, ValueKind kind) {
  auto it = record.attributes.find(name);
  if (it == record.attributes.end()) throw MissingAttribute(name);
  if (it->second.kind() != kind)
    throw KindMismatch(name, std::string(to_string(kind)), std::string(to_string(it->second.kind())));
}

void fill_shares(std::vector<Contribution>& contributions) {
  Decimal total;
  for (const auto& c : contributions) total += c.weighted_term;
  for (auto& c : contributions) c.share = total.is_zero() ? Decimal() : c.weighted_term / total;
}

Record enrich(const Record& input, const Decimal& score, std::vector<std::string>& notes) {
  Record out = input;
  if (out.attributes.count(kComputedScoreAttribute))
    notes.emplace_back("input attribute 'Computed Score' was replaced by the computed score");
  out.attributes.insert_or_assign(kComputedScoreAttribute, AttributeValue(score));
  return out;
}

Decimal weighted_mean(const std::vector<Contribution>& contributions) {
  Decimal num, den;
  for (const auto& c : contributions) {
    num += c.weighted_term;
    den += c.weight;
  }
  return num / den;
}

std::optional<AttributeValue> value_of(const Record& r, const std::string& name) {
  auto it = r.attributes.find(name);
  if (it == r.attributes.end()) return std::nullopt;
  return it->second;
}

}  // namespace

ScoreResult score_weighted_average(const ScoringModel& model, const Record& record) {
  const auto& alg = std::get<WeightedAverageMapper>(model.algorithm);
  for (const auto& spec : alg.indicators) require_kind(record, spec.name, spec.value_kind);

  const MapperRule* winner = nullptr;
  for (const auto& rule : alg.mapper_rules) {
    if (!match_rule(rule, record)) continue;
    if (!winner || std::tie(rule.priority, rule.rule_id) < std::tie(winner->priority, winner->rule_id))
      winner = &rule;
  }

  if (!winner) {
    std::vector<const MapperRule*> order;
    for (const auto& rule : alg.mapper_rules) order.push_back(&rule);
    std::sort(order.begin(), order.end(), [](const MapperRule* a, const MapperRule* b) {
      return std::tie(a->priority, a->rule_id) < std::tie(b->priority, b->rule_id);
    });
    std::vector<NearMiss> misses;
    for (const MapperRule* rule : order) {
      auto failing = first_failing_condition(*rule, record, alg.indicators);
      if (!failing) continue;
      misses.push_back({rule->rule_id, *failing, describe(rule->conditions.at(*failing))});
    }
    throw NoMatchingRule(record.record_id, std::move(misses));
  }

  ScoreResult result;
  result.record_id = record.record_id;
  result.model_id = model.model_id;
  result.model_version = model.version;
  result.matched_rule_id = winner->rule_id;
  for (const auto& spec : alg.indicators) {
    Contribution c;
    c.indicator = spec.name;
    c.value = value_of(record, spec.name);
    c.mark = winner->marks.at(spec.name);
    c.weight = spec.weight;
    c.weighted_term = c.weight * c.mark;
    result.contributions.push_back(std::move(c));
  }
  fill_shares(result.contributions);
  result.computed_score = weighted_mean(result.contributions);
  result.enriched_record = enrich(record, result.computed_score, result.notes);
  return result;
}

namespace {

Decimal first_mark(const ScorecardParameter& p, const Record& record, const char* role) {
  for (const auto& rule : p.mark_rules)
    if (evaluate_predicate(rule.predicate, p.name, record.attributes)) return rule.mark;
  auto v = value_of(record, p.name);
  throw NoMarkRuleMatched(p.name, role, v ? v->display() : "");
}

}  // namespace

ScoreResult score_multi_applicant(const ScoringModel& model, const Record& primary, const Record* co) {
  const auto& card = std::get<MultiApplicantScorecard>(model.algorithm);
  ScoreResult result;
  result.record_id = primary.record_id;
  result.model_id = model.model_id;
  result.model_version = model.version;
  if (!co) result.notes.emplace_back("sole applicant: role splits ignored");

  for (const auto& p : card.parameters) {
    const Decimal mark_p = first_mark(p, primary, "primary");
    Contribution c;
    c.indicator = p.name;
    c.value = value_of(primary, p.name);
    c.weight = p.weight;
    c.primary_mark = mark_p;
    if (co) {
      const Decimal mark_c = first_mark(p, *co, "co");
      c.co_mark = mark_c;
      c.mark = (p.role_split.primary_pct * mark_p + p.role_split.co_pct * mark_c) / Decimal(100);
      result.notes.push_back(p.name + ": primary mark " + mark_p.to_string() + " x " +
                             p.role_split.primary_pct.to_string() + "% + co mark " + mark_c.to_string() + " x " +
                             p.role_split.co_pct.to_string() + "% = " + c.mark.to_string());
    } else {
      c.mark = mark_p;
    }
    c.weighted_term = c.weight * c.mark;
    result.contributions.push_back(std::move(c));
  }
  fill_shares(result.contributions);
  result.computed_score = weighted_mean(result.contributions);
  result.enriched_record = enrich(primary, result.computed_score, result.notes);
  return result;
}

namespace {

std::vector<const Contribution*> by_share(const ScoreResult& result) {
  std::vector<const Contribution*> order;
  for (const auto& c : result.contributions) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const Contribution* a, const Contribution* b) {
    if (a->share != b->share) return a->share > b->share;
    return a->indicator < b->indicator;
  });
  return order;
}

}  // namespace

std::string explain(const ScoreResult& result) {
  std::ostringstream out;
  out << "record " << result.record_id << "\n";
  out << "model " << result.model_id << " version " << result.model_version << "\n";
  if (result.selection) out << "selection: " << result.selection->rationale << "\n";
  if (result.matched_rule_id) out << "matched rule " << *result.matched_rule_id << "\n";
  for (const Contribution* c : by_share(result)) {
    out << "  " << c->indicator << " = " << (c->value ? c->value->display() : "-") << ": mark "
        << c->mark.to_string() << " x weight " << c->weight.to_string() << " = " << c->weighted_term.to_string()
        << ", share " << c->share.to_fixed(6);
    if (c->primary_mark) {
      out << " (primary " << c->primary_mark->to_string();
      if (c->co_mark) out << ", co " << c->co_mark->to_string();
      out << ")";
    }
    out << "\n";
  }
  for (const auto& note : result.notes) out << "note: " << note << "\n";
  out << "computed score " << result.computed_score.to_string() << "\n";
  return out.str();
}

nlohmann::json result_to_json(const ScoreResult& result) {
  nlohmann::json contributions = nlohmann::json::array();
  for (const auto& c : result.contributions) {
    nlohmann::json j = {{"indicator", c.indicator},
                        {"value", c.value ? attribute_to_json(*c.value) : nlohmann::json(nullptr)},
                        {"mark", c.mark.to_string()},
                        {"weight", c.weight.to_string()},
                        {"weighted_term", c.weighted_term.to_string()},
                        {"share", c.share.to_fixed(6)}};
    if (c.primary_mark) j["primary_mark"] = c.primary_mark->to_string();
    if (c.co_mark) j["co_mark"] = c.co_mark->to_string();
    contributions.push_back(std::move(j));
  }
  nlohmann::json j = {{"record_id", result.record_id},
                      {"model_id", result.model_id},
                      {"model_version", result.model_version},
                      {"computed_score", result.computed_score.to_string()},
                      {"matched_rule_id", result.matched_rule_id ? nlohmann::json(*result.matched_rule_id)
                                                                 : nlohmann::json(nullptr)},
                      {"contributions", std::move(contributions)},
                      {"enriched_record", record_to_json(result.enriched_record)},
                      {"notes", result.notes}};
  if (result.selection) j["selection"] = outcome_to_json(*result.selection);
  return j;
}

}  // namespace scoring
