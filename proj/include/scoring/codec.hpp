#pragma once

// JSON encoding of models, predicates and records. Decimals inside model
// documents are JSON strings; record attribute numbers are JSON numbers.

#include "scoring/model.hpp"
#include "scoring/value.hpp"

#include <nlohmann/json.hpp>

namespace scoring {

using nlohmann::json;

// Decoders throw MalformedRequest naming the offending JSON path.
ScoringModel model_from_json(const json& doc);
json model_to_json(const ScoringModel& model);

Predicate predicate_from_json(const json& doc, const std::string& path = "predicate");
json predicate_to_json(const Predicate& p);

// Record attribute: number / string / bool. Non-finite numbers and other JSON
// types are rejected.
AttributeValue attribute_from_json(const json& v, const std::string& path = "value");
json attribute_to_json(const AttributeValue& v);

Record record_from_json(const json& doc, const std::string& path = "record");
json record_to_json(const Record& record);

Decimal decimal_from_json(const json& v, const std::string& path);

}  // namespace scoring
