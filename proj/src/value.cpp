#include "scoring/value.hpp"

namespace scoring {

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Numeric: return "numeric";
    case ValueKind::Text: return "text";
    case ValueKind::Boolean: return "boolean";
  }
  return "unknown";
}

std::optional<ValueKind> value_kind_from_string(std::string_view s) {
  if (s == "numeric") return ValueKind::Numeric;
  if (s == "text") return ValueKind::Text;
  if (s == "boolean") return ValueKind::Boolean;
  return std::nullopt;
}

std::string AttributeValue::display() const {
  switch (kind()) {
    case ValueKind::Numeric: return number().to_string();
    case ValueKind::Text: return text();
    case ValueKind::Boolean: return boolean() ? "true" : "false";
  }
  return {};
}

}  // namespace scoring
