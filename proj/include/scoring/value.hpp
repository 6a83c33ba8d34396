#pragma once

#include "scoring/decimal.hpp"

#include <map>
#include <string>
#include <string_view>
#include <variant>

namespace scoring {

enum class ValueKind { Numeric, Text, Boolean };

std::string_view to_string(ValueKind kind);
// Accepts "numeric", "text", "boolean".
std::optional<ValueKind> value_kind_from_string(std::string_view s);

// A typed record attribute. Text compares byte-for-byte.
class AttributeValue {
public:
  AttributeValue() : v_(Decimal{}) {}
  AttributeValue(Decimal d) : v_(std::move(d)) {}          // NOLINT(implicit)
  AttributeValue(std::int64_t n) : v_(Decimal(n)) {}        // NOLINT(implicit)
  AttributeValue(int n) : v_(Decimal(n)) {}                 // NOLINT(implicit)
  AttributeValue(std::string s) : v_(std::move(s)) {}      // NOLINT(implicit)
  AttributeValue(const char* s) : v_(std::string(s)) {}    // NOLINT(implicit)
  AttributeValue(bool b) : v_(b) {}                         // NOLINT(implicit)

  ValueKind kind() const { return static_cast<ValueKind>(v_.index()); }
  bool is_number() const { return kind() == ValueKind::Numeric; }
  bool is_text() const { return kind() == ValueKind::Text; }
  bool is_bool() const { return kind() == ValueKind::Boolean; }

  const Decimal& number() const { return std::get<Decimal>(v_); }
  const std::string& text() const { return std::get<std::string>(v_); }
  bool boolean() const { return std::get<bool>(v_); }

  // Human-readable rendering: numbers canonical, text as-is, TRUE/FALSE
  // rendered as "true"/"false".
  std::string display() const;

  friend bool operator==(const AttributeValue&, const AttributeValue&) = default;

private:
  std::variant<Decimal, std::string, bool> v_;
};

using AttributeMap = std::map<std::string, AttributeValue, std::less<>>;

struct Record {
  std::string record_id;
  AttributeMap attributes;

  friend bool operator==(const Record&, const Record&) = default;
};

}  // namespace scoring
