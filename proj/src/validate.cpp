#include "scoring/registry.hpp"

#include <algorithm>
#include <set>

namespace scoring {

std::string_view to_string(Severity s) { return s == Severity::Error ? "error" : "warning"; }

bool has_errors(const std::vector<ValidationFinding>& findings) {
  return std::any_of(findings.begin(), findings.end(),
                     [](const ValidationFinding& f) { return f.severity == Severity::Error; });
}

nlohmann::json findings_to_json(const std::vector<ValidationFinding>& findings) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : findings)
    arr.push_back({{"severity", std::string(to_string(f.severity))},
                   {"code", f.code},
                   {"message", f.message},
                   {"location", f.location}});
  return arr;
}

namespace {

// Numeric interval with optional (unbounded) ends.
struct Interval {
  std::optional<Decimal> lo, hi;
  bool lo_incl = true, hi_incl = true;

  bool empty() const {
    if (!lo || !hi) return false;
    if (*lo > *hi) return true;
    return *lo == *hi && !(lo_incl && hi_incl);
  }
  bool contains(const Decimal& v) const {
    if (lo && (lo_incl ? v < *lo : v <= *lo)) return false;
    if (hi && (hi_incl ? v > *hi : v >= *hi)) return false;
    return true;
  }
};

Interval intersect(const Interval& a, const Interval& b) {
  Interval r = a;
  if (b.lo && (!r.lo || *b.lo > *r.lo || (*b.lo == *r.lo && !b.lo_incl))) {
    r.lo = b.lo;
    r.lo_incl = b.lo_incl;
  }
  if (b.hi && (!r.hi || *b.hi < *r.hi || (*b.hi == *r.hi && !b.hi_incl))) {
    r.hi = b.hi;
    r.hi_incl = b.hi_incl;
  }
  return r;
}

// Interval described by a conjunction of numeric comparisons on `attr`;
// nullopt when the expression has any other shape.
std::optional<Interval> expr_interval(const ExprNode& n, const std::string& attr) {
  if (const auto* a = std::get_if<AndExpr>(&n.node)) {
    auto l = expr_interval(*a->lhs, attr);
    auto r = expr_interval(*a->rhs, attr);
    if (!l || !r) return std::nullopt;
    return intersect(*l, *r);
  }
  if (const auto* b = std::get_if<BetweenExpr>(&n.node)) {
    if (b->attr != attr) return std::nullopt;
    return Interval{b->lo, b->hi, true, true};
  }
  if (const auto* c = std::get_if<CompareExpr>(&n.node)) {
    if (c->attr != attr || !c->literal.is_number()) return std::nullopt;
    const Decimal& v = c->literal.number();
    switch (c->op) {
      case CompareOp::Eq: return Interval{v, v, true, true};
      case CompareOp::Lt: return Interval{std::nullopt, v, true, false};
      case CompareOp::Le: return Interval{std::nullopt, v, true, true};
      case CompareOp::Gt: return Interval{v, std::nullopt, false, true};
      case CompareOp::Ge: return Interval{v, std::nullopt, true, true};
      case CompareOp::Ne: return std::nullopt;
    }
  }
  return std::nullopt;
}

// Abstract view of a condition for overlap/gap analysis.
struct ValueSet {
  std::optional<Interval> interval;
  std::optional<std::vector<AttributeValue>> members;
};

ValueSet abstract(const Predicate& p, const std::string& attr) {
  ValueSet s;
  if (const auto* r = std::get_if<RangePredicate>(&p)) {
    s.interval = Interval{r->min, r->max, r->min_inclusive, r->max_inclusive};
  } else if (const auto* e = std::get_if<EqualsPredicate>(&p)) {
    s.members = std::vector<AttributeValue>{e->value};
  } else if (const auto* in = std::get_if<InSetPredicate>(&p)) {
    s.members = in->values;
  } else {
    s.interval = expr_interval(*std::get<ExprPredicate>(p).ast, attr);
  }
  return s;
}

// Conservative: unknown shapes may intersect.
bool may_intersect(const ValueSet& a, const ValueSet& b) {
  if (a.interval && b.interval) return !intersect(*a.interval, *b.interval).empty();
  if (a.members && b.members) {
    for (const auto& v : *a.members)
      if (std::find(b.members->begin(), b.members->end(), v) != b.members->end()) return true;
    return false;
  }
  const ValueSet* iv = a.interval ? &a : (b.interval ? &b : nullptr);
  const ValueSet* ms = a.members ? &a : (b.members ? &b : nullptr);
  if (iv && ms) {
    for (const auto& v : *ms->members)
      if (v.is_number() && iv->interval->contains(v.number())) return true;
    return false;
  }
  return true;
}

std::string interval_text(const Interval& i) {
  return std::string(i.lo_incl && i.lo ? "[" : "(") + (i.lo ? i.lo->to_string() : "-inf") + ", " +
         (i.hi ? i.hi->to_string() : "+inf") + (i.hi_incl && i.hi ? "]" : ")");
}

class Checker {
public:
  std::vector<ValidationFinding> out;

  void error(std::string code, std::string location, std::string message) {
    out.push_back({Severity::Error, std::move(code), std::move(message), std::move(location)});
  }
  void warning(std::string code, std::string location, std::string message) {
    out.push_back({Severity::Warning, std::move(code), std::move(message), std::move(location)});
  }

  // Kind and shape checks shared by mapper conditions and mark rules.
  // `known` lists names an expression may reference.
  void check_predicate(const Predicate& p, std::optional<ValueKind> subject_kind,
                       const std::set<std::string>& known, const std::string& loc) {
    if (const auto* r = std::get_if<RangePredicate>(&p)) {
      if (r->min > r->max) error("range_inverted", loc, "range min " + r->min.to_string() + " exceeds max " + r->max.to_string());
      if (subject_kind && *subject_kind != ValueKind::Numeric)
        error("predicate_kind_mismatch", loc, "range predicate on a " + std::string(to_string(*subject_kind)) + " indicator");
    } else if (const auto* e = std::get_if<EqualsPredicate>(&p)) {
      if (subject_kind && *subject_kind != e->value.kind())
        error("predicate_kind_mismatch", loc,
              "equals " + std::string(to_string(e->value.kind())) + " value on a " +
                  std::string(to_string(*subject_kind)) + " indicator");
    } else if (const auto* in = std::get_if<InSetPredicate>(&p)) {
      if (in->values.empty()) {
        error("empty_set", loc, "set predicate has no values");
        return;
      }
      const ValueKind k = in->values.front().kind();
      if (std::any_of(in->values.begin(), in->values.end(), [&](const AttributeValue& v) { return v.kind() != k; }))
        error("heterogeneous_set", loc, "set predicate mixes value kinds");
      else if (subject_kind && *subject_kind != k)
        error("predicate_kind_mismatch", loc,
              "set of " + std::string(to_string(k)) + " values on a " + std::string(to_string(*subject_kind)) +
                  " indicator");
    } else {
      const auto& e = std::get<ExprPredicate>(p);
      for (const auto& name : attrs(*e.ast))
        if (!known.count(name)) error("unknown_indicator", loc, "expression references unknown indicator '" + name + "'");
    }
  }
};

std::string key_list(const std::vector<std::string>& keys) {
  std::string s;
  for (std::size_t i = 0; i < keys.size(); ++i) s += (i ? ", " : "") + keys[i];
  return s;
}

void check_key_set(Checker& c, const std::set<std::string>& expected, const std::vector<std::string>& actual,
                   const std::string& code, std::int64_t rule_id, const std::string& loc, const char* what) {
  std::vector<std::string> missing, extra;
  std::set<std::string> actual_set(actual.begin(), actual.end());
  for (const auto& n : expected)
    if (!actual_set.count(n)) missing.push_back(n);
  for (const auto& n : actual_set)
    if (!expected.count(n)) extra.push_back(n);
  if (missing.empty() && extra.empty()) return;
  std::string msg = "rule " + std::to_string(rule_id) + " " + what;
  if (!missing.empty()) msg += " missing " + key_list(missing);
  if (!extra.empty()) msg += (missing.empty() ? " has unknown " : "; unknown ") + key_list(extra);
  c.error(code, loc, msg);
}

void check_weighted(Checker& c, const ScoringModel& model, const WeightedAverageMapper& w) {
  std::set<std::string> names;
  std::map<std::string, ValueKind> kinds;
  bool any_positive = false;
  if (w.indicators.empty()) c.error("no_indicators", "indicators", "model has no indicators");
  for (std::size_t i = 0; i < w.indicators.size(); ++i) {
    const auto& spec = w.indicators[i];
    if (spec.name.empty()) {
      c.error("empty_indicator_name", "indicators/#" + std::to_string(i), "indicator name is empty");
      continue;
    }
    const std::string loc = "indicators/" + spec.name;
    if (!names.insert(spec.name).second) c.error("duplicate_indicator", loc, "indicator '" + spec.name + "' declared twice");
    kinds[spec.name] = spec.value_kind;
    if (spec.weight.is_negative()) c.error("negative_weight", loc, "weight " + spec.weight.to_string() + " is negative");
    if (spec.weight > Decimal(0)) any_positive = true;
  }
  if (!w.indicators.empty() && !any_positive)
    c.error("all_weights_zero", "indicators", "at least one indicator weight must be positive");

  for (const auto& kpi : model.selection_binding.required_kpis)
    if (!names.count(kpi))
      c.error("unknown_required_kpi", "selection_binding/required_kpis/" + kpi,
              "required KPI '" + kpi + "' is not an indicator");

  std::map<std::int64_t, int> id_count;
  for (const auto& rule : w.mapper_rules) ++id_count[rule.rule_id];
  for (const auto& [id, count] : id_count)
    if (count > 1)
      c.error("duplicate_rule_id", "mapper_rules/" + std::to_string(id),
              "rule_id " + std::to_string(id) + " used by " + std::to_string(count) + " rules");

  for (const auto& rule : w.mapper_rules) {
    const std::string loc = "mapper_rules/" + std::to_string(rule.rule_id);
    if (rule.rule_id <= 0) c.error("invalid_rule_id", loc, "rule_id must be positive");
    if (rule.priority < 0) c.error("invalid_priority", loc, "priority must be non-negative");
    std::vector<std::string> cond_keys, mark_keys;
    for (const auto& [k, _] : rule.conditions) cond_keys.push_back(k);
    for (const auto& [k, _] : rule.marks) mark_keys.push_back(k);
    check_key_set(c, names, cond_keys, "conditions_key_mismatch", rule.rule_id, loc + "/conditions", "conditions");
    check_key_set(c, names, mark_keys, "marks_key_mismatch", rule.rule_id, loc + "/marks", "marks");
    for (const auto& [k, pred] : rule.conditions) {
      auto kind = kinds.find(k);
      c.check_predicate(pred, kind == kinds.end() ? std::nullopt : std::optional<ValueKind>(kind->second), names,
                        loc + "/conditions/" + k);
    }
  }

  // Warnings: ambiguous overlaps at equal priority.
  for (std::size_t i = 0; i < w.mapper_rules.size(); ++i) {
    for (std::size_t j = i + 1; j < w.mapper_rules.size(); ++j) {
      const auto& a = w.mapper_rules[i];
      const auto& b = w.mapper_rules[j];
      if (a.priority != b.priority) continue;
      bool all_intersect = true;
      bool numeric_overlap = false;
      for (const auto& name : names) {
        auto pa = a.conditions.find(name);
        auto pb = b.conditions.find(name);
        if (pa == a.conditions.end() || pb == b.conditions.end()) continue;
        const ValueSet sa = abstract(pa->second, name);
        const ValueSet sb = abstract(pb->second, name);
        if (!may_intersect(sa, sb)) {
          all_intersect = false;
          break;
        }
        if (sa.interval && sb.interval) numeric_overlap = true;
      }
      if (all_intersect && numeric_overlap) {
        const auto lo = std::min(a.rule_id, b.rule_id), hi = std::max(a.rule_id, b.rule_id);
        c.warning("overlapping_rules", "mapper_rules/" + std::to_string(lo),
                  "rules " + std::to_string(lo) + " and " + std::to_string(hi) +
                      " can both match at priority " + std::to_string(a.priority) +
                      "; the lower rule_id wins");
      }
    }
  }

  // Warnings: numeric values covered by no rule, per indicator.
  for (const auto& spec : w.indicators) {
    if (spec.value_kind != ValueKind::Numeric || w.mapper_rules.empty()) continue;
    std::vector<Interval> ivs;
    bool analyzable = true;
    for (const auto& rule : w.mapper_rules) {
      auto p = rule.conditions.find(spec.name);
      if (p == rule.conditions.end()) continue;
      const ValueSet s = abstract(p->second, spec.name);
      if (!s.interval) {
        analyzable = false;
        break;
      }
      if (!s.interval->empty()) ivs.push_back(*s.interval);
    }
    if (!analyzable || ivs.size() < 2) continue;
    std::sort(ivs.begin(), ivs.end(), [](const Interval& x, const Interval& y) {
      if (!x.lo || !y.lo) return !x.lo && y.lo.has_value();
      if (*x.lo != *y.lo) return *x.lo < *y.lo;
      return x.lo_incl && !y.lo_incl;
    });
    Interval cover = ivs.front();
    for (std::size_t k = 1; k < ivs.size(); ++k) {
      const Interval& next = ivs[k];
      if (!cover.hi) break;  // unbounded above: everything after is covered
      const bool gap = next.lo && (*next.lo > *cover.hi || (*next.lo == *cover.hi && !cover.hi_incl && !next.lo_incl));
      if (gap) {
        Interval hole{cover.hi, next.lo, !cover.hi_incl, !next.lo_incl};
        c.warning("numeric_gap", "indicators/" + spec.name,
                  "values in " + interval_text(hole) + " of '" + spec.name + "' match no rule");
      }
      if (!next.hi || *next.hi > *cover.hi || (*next.hi == *cover.hi && next.hi_incl)) {
        cover.hi = next.hi;
        cover.hi_incl = next.hi_incl;
      }
    }
  }
}

void check_scorecard(Checker& c, const MultiApplicantScorecard& s) {
  std::set<std::string> names;
  bool any_positive = false;
  if (s.parameters.empty()) c.error("no_parameters", "parameters", "scorecard has no parameters");
  for (const auto& p : s.parameters) names.insert(p.name);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < s.parameters.size(); ++i) {
    const auto& p = s.parameters[i];
    if (p.name.empty()) {
      c.error("empty_parameter_name", "parameters/#" + std::to_string(i), "parameter name is empty");
      continue;
    }
    const std::string loc = "parameters/" + p.name;
    if (!seen.insert(p.name).second) c.error("duplicate_parameter", loc, "parameter '" + p.name + "' declared twice");
    if (p.weight.is_negative()) c.error("negative_weight", loc, "weight " + p.weight.to_string() + " is negative");
    if (p.weight > Decimal(0)) any_positive = true;
    const auto& split = p.role_split;
    if (split.primary_pct.is_negative() || split.co_pct.is_negative())
      c.error("negative_role_split", loc + "/role_split", "role split percentages must be non-negative");
    if (split.primary_pct + split.co_pct != Decimal(100))
      c.error("role_split_sum", loc + "/role_split",
              "primary_pct " + split.primary_pct.to_string() + " + co_pct " + split.co_pct.to_string() +
                  " must equal 100");
    if (p.mark_rules.empty()) c.error("empty_mark_rules", loc + "/mark_rules", "parameter has no mark rules");
    for (std::size_t k = 0; k < p.mark_rules.size(); ++k)
      c.check_predicate(p.mark_rules[k].predicate, std::nullopt, names, loc + "/mark_rules/" + std::to_string(k));
  }
  if (!s.parameters.empty() && !any_positive)
    c.error("all_weights_zero", "parameters", "at least one parameter weight must be positive");
}

}  // namespace

std::vector<ValidationFinding> validate_model(const ScoringModel& model) {
  Checker c;
  if (model.model_id <= 0) c.error("invalid_model_id", "model_id", "model_id must be positive");
  if (model.version < 1) c.error("invalid_version", "version", "version must be at least 1");
  if (model.name.empty()) c.error("empty_name", "name", "model name is empty");
  if (const auto* w = std::get_if<WeightedAverageMapper>(&model.algorithm)) check_weighted(c, model, *w);
  else check_scorecard(c, std::get<MultiApplicantScorecard>(model.algorithm));

  std::stable_sort(c.out.begin(), c.out.end(), [](const ValidationFinding& a, const ValidationFinding& b) {
    return std::tie(a.location, a.code, a.message) < std::tie(b.location, b.code, b.message);
  });
  return std::move(c.out);
}

}  // namespace scoring
