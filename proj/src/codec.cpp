#include "scoring/codec.hpp"

#include "scoring/errors.hpp"

namespace scoring {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw MalformedRequest(path + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
  return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::int64_t int_field(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<std::int64_t>();
}

std::vector<std::string> string_list(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) fail(path + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

bool bool_or(const json& obj, const char* key, bool fallback, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) fail(path + "." + key, "expected a boolean");
  return it->get<bool>();
}

// Typed predicate literal: "text", true/false, {"number":"1.5"} or a JSON number.
AttributeValue literal_from_json(const json& v, const std::string& path) {
  if (v.is_object()) {
    auto it = v.find("number");
    if (it == v.end() || v.size() != 1) fail(path, "expected {\"number\": \"<decimal>\"}");
    return AttributeValue(decimal_from_json(*it, path + ".number"));
  }
  return attribute_from_json(v, path);
}

json literal_to_json(const AttributeValue& v) {
  if (v.is_number()) return json{{"number", v.number().to_string()}};
  return attribute_to_json(v);
}

}  // namespace

Decimal decimal_from_json(const json& v, const std::string& path) {
  if (v.is_string()) {
    auto d = Decimal::parse(v.get<std::string>());
    if (!d) fail(path, "invalid decimal '" + v.get<std::string>() + "'");
    return *d;
  }
  if (v.is_number_integer()) {
    if (v.is_number_unsigned()) {
      auto u = v.get<std::uint64_t>();
      return Decimal(Decimal::Rational(Decimal::Integer(u)));
    }
    return Decimal(v.get<std::int64_t>());
  }
  fail(path, "expected a decimal string");
}

AttributeValue attribute_from_json(const json& v, const std::string& path) {
  if (v.is_boolean()) return AttributeValue(v.get<bool>());
  if (v.is_string()) return AttributeValue(v.get<std::string>());
  if (v.is_number_integer()) return AttributeValue(decimal_from_json(v, path));
  if (v.is_number_float()) {
    auto d = Decimal::from_double(v.get<double>());
    if (!d) fail(path, "non-finite number");
    return AttributeValue(std::move(*d));
  }
  fail(path, "expected a number, string or boolean");
}

json attribute_to_json(const AttributeValue& v) {
  switch (v.kind()) {
    case ValueKind::Boolean: return v.boolean();
    case ValueKind::Text: return v.text();
    case ValueKind::Numeric: {
      if (auto i = v.number().to_int64()) return *i;
      return v.number().to_double();
    }
  }
  return nullptr;
}

Record record_from_json(const json& doc, const std::string& path) {
  if (!doc.is_object()) fail(path, "expected an object");
  Record r;
  const json& id = field(doc, "record_id", path);
  if (id.is_string()) r.record_id = id.get<std::string>();
  else if (id.is_number_integer()) r.record_id = id.dump();
  else fail(path + ".record_id", "expected a string");
  if (r.record_id.empty()) fail(path + ".record_id", "must be non-empty");
  const json& attributes = field(doc, "attributes", path);
  if (!attributes.is_object()) fail(path + ".attributes", "expected an object");
  for (const auto& [name, value] : attributes.items())
    r.attributes.emplace(name, attribute_from_json(value, path + ".attributes." + name));
  return r;
}

json record_to_json(const Record& record) {
  json attributes = json::object();
  for (const auto& [name, value] : record.attributes) attributes[name] = attribute_to_json(value);
  return {{"record_id", record.record_id}, {"attributes", std::move(attributes)}};
}

Predicate predicate_from_json(const json& doc, const std::string& path) {
  if (!doc.is_object() || doc.size() != 1)
    fail(path, "expected an object with exactly one of range/equals/in/expr");
  const auto& [key, body] = *doc.items().begin();
  if (key == "range") {
    const std::string p = path + ".range";
    RangePredicate r;
    r.min = decimal_from_json(field(body, "min", p), p + ".min");
    r.max = decimal_from_json(field(body, "max", p), p + ".max");
    r.min_inclusive = bool_or(body, "min_inclusive", true, p);
    r.max_inclusive = bool_or(body, "max_inclusive", true, p);
    return r;
  }
  if (key == "equals") return EqualsPredicate{literal_from_json(body, path + ".equals")};
  if (key == "in") {
    if (!body.is_array() || body.empty()) fail(path + ".in", "expected a non-empty array");
    InSetPredicate s;
    for (std::size_t i = 0; i < body.size(); ++i)
      s.values.push_back(literal_from_json(body[i], path + ".in[" + std::to_string(i) + "]"));
    return s;
  }
  if (key == "expr") {
    if (!body.is_string()) fail(path + ".expr", "expected a string");
    return ExprPredicate::from_source(body.get<std::string>());
  }
  fail(path, "unknown predicate kind '" + key + "'");
}

json predicate_to_json(const Predicate& p) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, RangePredicate>) {
          return {{"range",
                   {{"min", x.min.to_string()},
                    {"max", x.max.to_string()},
                    {"min_inclusive", x.min_inclusive},
                    {"max_inclusive", x.max_inclusive}}}};
        } else if constexpr (std::is_same_v<T, EqualsPredicate>) {
          return {{"equals", literal_to_json(x.value)}};
        } else if constexpr (std::is_same_v<T, InSetPredicate>) {
          json arr = json::array();
          for (const auto& v : x.values) arr.push_back(literal_to_json(v));
          return {{"in", std::move(arr)}};
        } else {
          return {{"expr", x.source}};
        }
      },
      p);
}

ScoringModel model_from_json(const json& doc) {
  const std::string root = "model";
  ScoringModel m;
  m.model_id = int_field(doc, "model_id", root);
  m.name = string_field(doc, "name", root);
  if (doc.contains("version")) m.version = int_field(doc, "version", root);

  const json& alg = field(doc, "algorithm", root);
  const std::string ap = root + ".algorithm";
  const std::string kind = string_field(alg, "kind", ap);
  if (kind == "weighted_average_mapper") {
    WeightedAverageMapper w;
    const json& inds = field(alg, "indicators", ap);
    if (!inds.is_array()) fail(ap + ".indicators", "expected an array");
    for (std::size_t i = 0; i < inds.size(); ++i) {
      const std::string p = ap + ".indicators[" + std::to_string(i) + "]";
      IndicatorSpec spec;
      spec.name = string_field(inds[i], "name", p);
      const std::string vk = string_field(inds[i], "value_kind", p);
      auto parsed = value_kind_from_string(vk);
      if (!parsed) fail(p + ".value_kind", "unknown value kind '" + vk + "'");
      spec.value_kind = *parsed;
      spec.weight = decimal_from_json(field(inds[i], "weight", p), p + ".weight");
      w.indicators.push_back(std::move(spec));
    }
    const json& rules = field(alg, "mapper_rules", ap);
    if (!rules.is_array()) fail(ap + ".mapper_rules", "expected an array");
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const std::string p = ap + ".mapper_rules[" + std::to_string(i) + "]";
      MapperRule rule;
      rule.rule_id = int_field(rules[i], "rule_id", p);
      if (rules[i].contains("priority")) rule.priority = int_field(rules[i], "priority", p);
      const json& conds = field(rules[i], "conditions", p);
      if (!conds.is_object()) fail(p + ".conditions", "expected an object");
      for (const auto& [name, pred] : conds.items())
        rule.conditions.emplace(name, predicate_from_json(pred, p + ".conditions." + name));
      const json& marks = field(rules[i], "marks", p);
      if (!marks.is_object()) fail(p + ".marks", "expected an object");
      for (const auto& [name, mark] : marks.items())
        rule.marks.emplace(name, decimal_from_json(mark, p + ".marks." + name));
      w.mapper_rules.push_back(std::move(rule));
    }
    m.algorithm = std::move(w);
  } else if (kind == "multi_applicant_scorecard") {
    MultiApplicantScorecard s;
    const json& params = field(alg, "parameters", ap);
    if (!params.is_array()) fail(ap + ".parameters", "expected an array");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const std::string p = ap + ".parameters[" + std::to_string(i) + "]";
      ScorecardParameter param;
      param.name = string_field(params[i], "name", p);
      param.weight = decimal_from_json(field(params[i], "weight", p), p + ".weight");
      const json& split = field(params[i], "role_split", p);
      param.role_split.primary_pct = decimal_from_json(field(split, "primary_pct", p + ".role_split"),
                                                       p + ".role_split.primary_pct");
      param.role_split.co_pct =
          decimal_from_json(field(split, "co_pct", p + ".role_split"), p + ".role_split.co_pct");
      const json& mrs = field(params[i], "mark_rules", p);
      if (!mrs.is_array()) fail(p + ".mark_rules", "expected an array");
      for (std::size_t k = 0; k < mrs.size(); ++k) {
        const std::string mp = p + ".mark_rules[" + std::to_string(k) + "]";
        MarkRule mr{predicate_from_json(field(mrs[k], "predicate", mp), mp + ".predicate"),
                    decimal_from_json(field(mrs[k], "mark", mp), mp + ".mark")};
        param.mark_rules.push_back(std::move(mr));
      }
      s.parameters.push_back(std::move(param));
    }
    m.algorithm = std::move(s);
  } else {
    fail(ap + ".kind", "unknown algorithm kind '" + kind + "'");
  }

  if (doc.contains("selection_binding")) {
    const json& b = doc.at("selection_binding");
    const std::string bp = root + ".selection_binding";
    if (!b.is_object()) fail(bp, "expected an object");
    if (b.contains("application_ids"))
      m.selection_binding.application_ids = string_list(b.at("application_ids"), bp + ".application_ids");
    if (b.contains("required_kpis"))
      m.selection_binding.required_kpis = string_list(b.at("required_kpis"), bp + ".required_kpis");
  }
  return m;
}

json model_to_json(const ScoringModel& model) {
  json alg;
  if (const auto* w = std::get_if<WeightedAverageMapper>(&model.algorithm)) {
    json inds = json::array();
    for (const auto& spec : w->indicators)
      inds.push_back({{"name", spec.name},
                      {"value_kind", std::string(to_string(spec.value_kind))},
                      {"weight", spec.weight.to_string()}});
    json rules = json::array();
    for (const auto& rule : w->mapper_rules) {
      json conds = json::object();
      for (const auto& [name, pred] : rule.conditions) conds[name] = predicate_to_json(pred);
      json marks = json::object();
      for (const auto& [name, mark] : rule.marks) marks[name] = mark.to_string();
      rules.push_back(
          {{"rule_id", rule.rule_id}, {"priority", rule.priority}, {"conditions", conds}, {"marks", marks}});
    }
    alg = {{"kind", "weighted_average_mapper"}, {"indicators", inds}, {"mapper_rules", rules}};
  } else {
    const auto& s = std::get<MultiApplicantScorecard>(model.algorithm);
    json params = json::array();
    for (const auto& p : s.parameters) {
      json mrs = json::array();
      for (const auto& mr : p.mark_rules)
        mrs.push_back({{"predicate", predicate_to_json(mr.predicate)}, {"mark", mr.mark.to_string()}});
      params.push_back({{"name", p.name},
                        {"weight", p.weight.to_string()},
                        {"role_split",
                         {{"primary_pct", p.role_split.primary_pct.to_string()},
                          {"co_pct", p.role_split.co_pct.to_string()}}},
                        {"mark_rules", mrs}});
    }
    alg = {{"kind", "multi_applicant_scorecard"}, {"parameters", params}};
  }
  return {{"model_id", model.model_id},
          {"name", model.name},
          {"version", model.version},
          {"algorithm", alg},
          {"selection_binding",
           {{"application_ids", model.selection_binding.application_ids},
            {"required_kpis", model.selection_binding.required_kpis}}}};
}

}  // namespace scoring
