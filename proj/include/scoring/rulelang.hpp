#pragma once

// Predicates and the boolean condition language used by mapper rules and
// scorecard mark rules.
//
//   expr       := or
//   or         := and ( "OR" and )*
//   and        := unary ( "AND" unary )*
//   unary      := "NOT" unary | primary
//   primary    := "(" expr ")" | comparison
//   comparison := attr cmp_op literal
//               | attr "BETWEEN" number "AND" number
//               | attr "IN" "(" literal ( "," literal )* ")"
//   attr       := IDENT | "double quoted name"
//   literal    := number | 'single quoted text' | TRUE | FALSE
//
// Keywords are case-insensitive, attribute names are not. BETWEEN is
// inclusive on both ends.

#include "scoring/decimal.hpp"
#include "scoring/value.hpp"

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace scoring {

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CompareOp op);

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct OrExpr {
  ExprPtr lhs, rhs;
};
struct AndExpr {
  ExprPtr lhs, rhs;
};
struct NotExpr {
  ExprPtr operand;
};
struct CompareExpr {
  std::string attr;
  CompareOp op;
  AttributeValue literal;
};
struct BetweenExpr {
  std::string attr;
  Decimal lo, hi;
};
struct InExpr {
  std::string attr;
  std::vector<AttributeValue> values;
};

struct ExprNode {
  std::variant<OrExpr, AndExpr, NotExpr, CompareExpr, BetweenExpr, InExpr> node;
};

// Structural equality (pointees compared, not pointers).
bool operator==(const ExprNode& a, const ExprNode& b);
bool same_ast(const ExprPtr& a, const ExprPtr& b);

ExprPtr make_or(ExprPtr lhs, ExprPtr rhs);
ExprPtr make_and(ExprPtr lhs, ExprPtr rhs);
ExprPtr make_not(ExprPtr operand);
ExprPtr make_compare(std::string attr, CompareOp op, AttributeValue literal);
ExprPtr make_between(std::string attr, Decimal lo, Decimal hi);
ExprPtr make_in(std::string attr, std::vector<AttributeValue> values);

// Referenced attribute names.
std::set<std::string> attrs(const ExprNode& ast);

// Throws ParseError{offset, expected, found}.
ExprPtr parse_expression(std::string_view source);

// Canonical text: upper-case keywords, single spaces, minimal parentheses.
std::string format_expression(const ExprNode& ast);

// Throws MissingAttribute / KindMismatch.
bool evaluate_expression(const ExprNode& ast, const AttributeMap& attributes);

struct RangePredicate {
  Decimal min, max;
  bool min_inclusive = true;
  bool max_inclusive = true;

  bool contains(const Decimal& v) const;
  friend bool operator==(const RangePredicate&, const RangePredicate&) = default;
};

struct EqualsPredicate {
  AttributeValue value;
  friend bool operator==(const EqualsPredicate&, const EqualsPredicate&) = default;
};

struct InSetPredicate {
  std::vector<AttributeValue> values;
  friend bool operator==(const InSetPredicate&, const InSetPredicate&) = default;
};

struct ExprPredicate {
  ExprPtr ast;
  std::string source;

  static ExprPredicate from_source(std::string source);
  friend bool operator==(const ExprPredicate& a, const ExprPredicate& b) {
    return a.source == b.source && same_ast(a.ast, b.ast);
  }
};

using Predicate = std::variant<RangePredicate, EqualsPredicate, InSetPredicate, ExprPredicate>;

// Evaluates `p` for the attribute `subject` of `attributes`. Range, Equals and
// InSet read `subject`; Expr reads whatever it references.
// Throws MissingAttribute / KindMismatch.
bool evaluate_predicate(const Predicate& p, std::string_view subject, const AttributeMap& attributes);

// Attributes the predicate reads when applied to `subject`.
std::set<std::string> predicate_attrs(const Predicate& p, std::string_view subject);

// Short human text, e.g. "range 600-800", "equals 'Bachelor'".
std::string describe(const Predicate& p);

}  // namespace scoring
