#include "scoring/rulelang.hpp"

#include "scoring/errors.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace scoring {

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// AST construction and equality

ExprPtr make_or(ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<const ExprNode>(ExprNode{OrExpr{std::move(lhs), std::move(rhs)}});
}
ExprPtr make_and(ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<const ExprNode>(ExprNode{AndExpr{std::move(lhs), std::move(rhs)}});
}
ExprPtr make_not(ExprPtr operand) {
  return std::make_shared<const ExprNode>(ExprNode{NotExpr{std::move(operand)}});
}
ExprPtr make_compare(std::string attr, CompareOp op, AttributeValue literal) {
  return std::make_shared<const ExprNode>(ExprNode{CompareExpr{std::move(attr), op, std::move(literal)}});
}
ExprPtr make_between(std::string attr, Decimal lo, Decimal hi) {
  return std::make_shared<const ExprNode>(ExprNode{BetweenExpr{std::move(attr), std::move(lo), std::move(hi)}});
}
ExprPtr make_in(std::string attr, std::vector<AttributeValue> values) {
  return std::make_shared<const ExprNode>(ExprNode{InExpr{std::move(attr), std::move(values)}});
}

bool same_ast(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

bool operator==(const ExprNode& a, const ExprNode& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, OrExpr> || std::is_same_v<T, AndExpr>) {
          return same_ast(x.lhs, y.lhs) && same_ast(x.rhs, y.rhs);
        } else if constexpr (std::is_same_v<T, NotExpr>) {
          return same_ast(x.operand, y.operand);
        } else if constexpr (std::is_same_v<T, CompareExpr>) {
          return x.attr == y.attr && x.op == y.op && x.literal == y.literal;
        } else if constexpr (std::is_same_v<T, BetweenExpr>) {
          return x.attr == y.attr && x.lo == y.lo && x.hi == y.hi;
        } else {
          return x.attr == y.attr && x.values == y.values;
        }
      },
      a.node);
}

namespace {

void collect_attrs(const ExprNode& n, std::set<std::string>& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, OrExpr> || std::is_same_v<T, AndExpr>) {
          collect_attrs(*x.lhs, out);
          collect_attrs(*x.rhs, out);
        } else if constexpr (std::is_same_v<T, NotExpr>) {
          collect_attrs(*x.operand, out);
        } else {
          out.insert(x.attr);
        }
      },
      n.node);
}

}  // namespace

std::set<std::string> attrs(const ExprNode& ast) {
  std::set<std::string> out;
  collect_attrs(ast, out);
  return out;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
  End, Ident, QuotedName, Text, Number, LParen, RParen, Comma, Op,
  KwAnd, KwOr, KwNot, KwBetween, KwIn, KwTrue, KwFalse,
};

struct Token {
  Tok kind = Tok::End;
  std::size_t offset = 0;
  std::string_view raw;  // source slice
  std::string text;      // decoded identifier / quoted content
  CompareOp op = CompareOp::Eq;
};

std::string upper(std::string_view s) {
  std::string r(s);
  for (char& c : r) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return r;
}

std::optional<Tok> keyword(std::string_view word) {
  const std::string u = upper(word);
  if (u == "AND") return Tok::KwAnd;
  if (u == "OR") return Tok::KwOr;
  if (u == "NOT") return Tok::KwNot;
  if (u == "BETWEEN") return Tok::KwBetween;
  if (u == "IN") return Tok::KwIn;
  if (u == "TRUE") return Tok::KwTrue;
  if (u == "FALSE") return Tok::KwFalse;
  return std::nullopt;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::string found_text(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + std::string(t.raw) + "'";
}

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {
    end_offset_ = src.size();
    while (end_offset_ > 0 && std::isspace(static_cast<unsigned char>(src[end_offset_ - 1]))) --end_offset_;
  }

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    Token t;
    t.offset = pos_;
    if (pos_ >= src_.size()) {
      t.kind = Tok::End;
      t.offset = end_offset_;
      return t;
    }
    const std::size_t start = pos_;
    const char c = src_[pos_];
    auto finish = [&](Tok kind) {
      t.kind = kind;
      t.raw = src_.substr(start, pos_ - start);
      return t;
    };

    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
      std::string_view word = src_.substr(start, pos_ - start);
      if (auto kw = keyword(word)) return finish(*kw);
      t.text = std::string(word);
      return finish(Tok::Ident);
    }
    if (digit(c) || (c == '-' && pos_ + 1 < src_.size() && digit(src_[pos_ + 1]))) {
      ++pos_;
      while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
      if (pos_ + 1 < src_.size() && src_[pos_] == '.' && digit(src_[pos_ + 1])) {
        ++pos_;
        while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
      }
      return finish(Tok::Number);
    }
    if (c == '\'') {
      ++pos_;
      std::string content;
      for (;;) {
        if (pos_ >= src_.size()) throw ParseError(start, "closing \"'\"", "end of input");
        if (src_[pos_] == '\'') {
          if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '\'') {
            content += '\'';
            pos_ += 2;
            continue;
          }
          ++pos_;
          break;
        }
        content += src_[pos_++];
      }
      t.text = std::move(content);
      return finish(Tok::Text);
    }
    if (c == '"') {
      ++pos_;
      std::string content;
      for (;;) {
        if (pos_ >= src_.size()) throw ParseError(start, "closing '\"'", "end of input");
        char d = src_[pos_];
        if (d == '\\' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '"' || src_[pos_ + 1] == '\\')) {
          content += src_[pos_ + 1];
          pos_ += 2;
          continue;
        }
        if (d == '"') {
          ++pos_;
          break;
        }
        content += d;
        ++pos_;
      }
      if (content.empty()) throw ParseError(start, "attribute name", "'\"\"'");
      t.text = std::move(content);
      return finish(Tok::QuotedName);
    }
    ++pos_;
    switch (c) {
      case '(': return finish(Tok::LParen);
      case ')': return finish(Tok::RParen);
      case ',': return finish(Tok::Comma);
      case '<':
      case '>':
      case '=':
      case '!': {
        const bool eq_follows = pos_ < src_.size() && src_[pos_] == '=';
        if (eq_follows) ++pos_;
        if (c == '<') t.op = eq_follows ? CompareOp::Le : CompareOp::Lt;
        else if (c == '>') t.op = eq_follows ? CompareOp::Ge : CompareOp::Gt;
        else if (!eq_follows) throw ParseError(start, "comparison operator", "'" + std::string(1, c) + "'");
        else t.op = c == '=' ? CompareOp::Eq : CompareOp::Ne;
        return finish(Tok::Op);
      }
      default:
        break;
    }
    throw ParseError(start, "token", "'" + std::string(1, c) + "'");
  }

private:
  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t end_offset_ = 0;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
  explicit Parser(std::string_view src) : lex_(src) { advance(); }

  ExprPtr parse() {
    ExprPtr e = parse_or();
    if (cur_.kind != Tok::End) {
      throw ParseError(cur_.offset, "AND, OR or end of input", found_text(cur_));
    }
    return e;
  }

private:
  void advance() { cur_ = lex_.next(); }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (cur_.kind == Tok::KwOr) {
      advance();
      lhs = make_or(std::move(lhs), parse_and());
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_unary();
    while (cur_.kind == Tok::KwAnd) {
      advance();
      lhs = make_and(std::move(lhs), parse_unary());
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (cur_.kind == Tok::KwNot) {
      advance();
      return make_not(parse_unary());
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    if (cur_.kind == Tok::LParen) {
      advance();
      ExprPtr e = parse_or();
      if (cur_.kind != Tok::RParen) throw ParseError(cur_.offset, "')'", found_text(cur_));
      advance();
      return e;
    }
    return parse_comparison();
  }

  ExprPtr parse_comparison() {
    if (cur_.kind != Tok::Ident && cur_.kind != Tok::QuotedName) {
      throw ParseError(cur_.offset, "attribute name, NOT or '('", found_text(cur_));
    }
    std::string attr = cur_.text;
    advance();
    switch (cur_.kind) {
      case Tok::Op: {
        const CompareOp op = cur_.op;
        advance();
        const Token lit_tok = cur_;
        AttributeValue lit = parse_literal();
        if (op != CompareOp::Eq && op != CompareOp::Ne && !lit.is_number()) {
          throw ParseError(lit_tok.offset, "numeric literal", found_text(lit_tok));
        }
        return make_compare(std::move(attr), op, std::move(lit));
      }
      case Tok::KwBetween: {
        advance();
        Decimal lo = parse_number();
        if (cur_.kind != Tok::KwAnd) throw ParseError(cur_.offset, "AND", found_text(cur_));
        advance();
        Decimal hi = parse_number();
        return make_between(std::move(attr), std::move(lo), std::move(hi));
      }
      case Tok::KwIn: {
        advance();
        if (cur_.kind != Tok::LParen) throw ParseError(cur_.offset, "'('", found_text(cur_));
        advance();
        std::vector<AttributeValue> values;
        for (;;) {
          const Token lit_tok = cur_;
          AttributeValue v = parse_literal();
          if (!values.empty() && v.kind() != values.front().kind()) {
            throw ParseError(lit_tok.offset, std::string(to_string(values.front().kind())) + " literal",
                             found_text(lit_tok));
          }
          values.push_back(std::move(v));
          if (cur_.kind == Tok::Comma) {
            advance();
            continue;
          }
          if (cur_.kind == Tok::RParen) {
            advance();
            break;
          }
          throw ParseError(cur_.offset, "',' or ')'", found_text(cur_));
        }
        return make_in(std::move(attr), std::move(values));
      }
      default:
        throw ParseError(cur_.offset, "comparison operator, BETWEEN or IN", found_text(cur_));
    }
  }

  Decimal parse_number() {
    if (cur_.kind != Tok::Number) throw ParseError(cur_.offset, "number", found_text(cur_));
    Decimal d = Decimal::from_string(cur_.raw);
    advance();
    return d;
  }

  AttributeValue parse_literal() {
    switch (cur_.kind) {
      case Tok::Number: return AttributeValue(parse_number());
      case Tok::Text: {
        AttributeValue v(cur_.text);
        advance();
        return v;
      }
      case Tok::KwTrue:
      case Tok::KwFalse: {
        AttributeValue v(cur_.kind == Tok::KwTrue);
        advance();
        return v;
      }
      default:
        throw ParseError(cur_.offset, "literal", found_text(cur_));
    }
  }

  Lexer lex_;
  Token cur_;
};

}  // namespace

ExprPtr parse_expression(std::string_view source) { return Parser(source).parse(); }

// ---------------------------------------------------------------------------
// Formatter

namespace {

int precedence(const ExprNode& n) {
  if (std::holds_alternative<OrExpr>(n.node)) return 1;
  if (std::holds_alternative<AndExpr>(n.node)) return 2;
  if (std::holds_alternative<NotExpr>(n.node)) return 3;
  return 4;
}

std::string format_attr(const std::string& name) {
  const bool bare = !name.empty() && ident_start(name[0]) &&
                    std::all_of(name.begin(), name.end(), ident_char) && !keyword(name);
  if (bare) return name;
  std::string out = "\"";
  for (char c : name) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string format_literal(const AttributeValue& v) {
  switch (v.kind()) {
    case ValueKind::Numeric: return v.number().to_string();
    case ValueKind::Boolean: return v.boolean() ? "TRUE" : "FALSE";
    case ValueKind::Text: {
      std::string out = "'";
      for (char c : v.text()) {
        if (c == '\'') out += '\'';
        out += c;
      }
      return out + "'";
    }
  }
  return {};
}

void format_into(const ExprNode& n, std::string& out);

void format_child(const ExprNode& child, bool parens, std::string& out) {
  if (parens) out += '(';
  format_into(child, out);
  if (parens) out += ')';
}

void format_into(const ExprNode& n, std::string& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, OrExpr>) {
          format_child(*x.lhs, precedence(*x.lhs) < 1, out);
          out += " OR ";
          format_child(*x.rhs, precedence(*x.rhs) <= 1, out);
        } else if constexpr (std::is_same_v<T, AndExpr>) {
          format_child(*x.lhs, precedence(*x.lhs) < 2, out);
          out += " AND ";
          format_child(*x.rhs, precedence(*x.rhs) <= 2, out);
        } else if constexpr (std::is_same_v<T, NotExpr>) {
          out += "NOT ";
          format_child(*x.operand, precedence(*x.operand) < 3, out);
        } else if constexpr (std::is_same_v<T, CompareExpr>) {
          out += format_attr(x.attr);
          out += ' ';
          out += to_string(x.op);
          out += ' ';
          out += format_literal(x.literal);
        } else if constexpr (std::is_same_v<T, BetweenExpr>) {
          out += format_attr(x.attr) + " BETWEEN " + x.lo.to_string() + " AND " + x.hi.to_string();
        } else {
          out += format_attr(x.attr) + " IN (";
          for (std::size_t i = 0; i < x.values.size(); ++i) {
            if (i) out += ", ";
            out += format_literal(x.values[i]);
          }
          out += ')';
        }
      },
      n.node);
}

}  // namespace

std::string format_expression(const ExprNode& ast) {
  std::string out;
  format_into(ast, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

const AttributeValue& lookup(const AttributeMap& attributes, std::string_view name) {
  auto it = attributes.find(name);
  if (it == attributes.end()) throw MissingAttribute(std::string(name));
  return it->second;
}

const AttributeValue& lookup_kind(const AttributeMap& attributes, std::string_view name, ValueKind kind) {
  const AttributeValue& v = lookup(attributes, name);
  if (v.kind() != kind) {
    throw KindMismatch(std::string(name), std::string(to_string(kind)), std::string(to_string(v.kind())));
  }
  return v;
}

bool compare(const AttributeValue& v, CompareOp op, const AttributeValue& lit) {
  if (v.is_number()) {
    const auto c = v.number() <=> lit.number();
    switch (op) {
      case CompareOp::Eq: return c == 0;
      case CompareOp::Ne: return c != 0;
      case CompareOp::Lt: return c < 0;
      case CompareOp::Le: return c <= 0;
      case CompareOp::Gt: return c > 0;
      case CompareOp::Ge: return c >= 0;
    }
  }
  return op == CompareOp::Eq ? v == lit : v != lit;
}

}  // namespace

// Both operands of AND/OR are always evaluated so that missing or mistyped
// attributes surface regardless of the other operand's value.
bool evaluate_expression(const ExprNode& ast, const AttributeMap& attributes) {
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, OrExpr>) {
          const bool l = evaluate_expression(*x.lhs, attributes);
          const bool r = evaluate_expression(*x.rhs, attributes);
          return l || r;
        } else if constexpr (std::is_same_v<T, AndExpr>) {
          const bool l = evaluate_expression(*x.lhs, attributes);
          const bool r = evaluate_expression(*x.rhs, attributes);
          return l && r;
        } else if constexpr (std::is_same_v<T, NotExpr>) {
          return !evaluate_expression(*x.operand, attributes);
        } else if constexpr (std::is_same_v<T, CompareExpr>) {
          const auto& v = lookup_kind(attributes, x.attr, x.literal.kind());
          return compare(v, x.op, x.literal);
        } else if constexpr (std::is_same_v<T, BetweenExpr>) {
          const auto& v = lookup_kind(attributes, x.attr, ValueKind::Numeric);
          return x.lo <= v.number() && v.number() <= x.hi;
        } else {
          const auto& v = lookup_kind(attributes, x.attr, x.values.front().kind());
          return std::find(x.values.begin(), x.values.end(), v) != x.values.end();
        }
      },
      ast.node);
}

bool RangePredicate::contains(const Decimal& v) const {
  const bool lo_ok = min_inclusive ? min <= v : min < v;
  const bool hi_ok = max_inclusive ? v <= max : v < max;
  return lo_ok && hi_ok;
}

ExprPredicate ExprPredicate::from_source(std::string source) {
  ExprPtr ast = parse_expression(source);
  return ExprPredicate{std::move(ast), std::move(source)};
}

bool evaluate_predicate(const Predicate& p, std::string_view subject, const AttributeMap& attributes) {
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, RangePredicate>) {
          return x.contains(lookup_kind(attributes, subject, ValueKind::Numeric).number());
        } else if constexpr (std::is_same_v<T, EqualsPredicate>) {
          return lookup_kind(attributes, subject, x.value.kind()) == x.value;
        } else if constexpr (std::is_same_v<T, InSetPredicate>) {
          const auto& v = lookup_kind(attributes, subject, x.values.front().kind());
          return std::find(x.values.begin(), x.values.end(), v) != x.values.end();
        } else {
          return evaluate_expression(*x.ast, attributes);
        }
      },
      p);
}

std::set<std::string> predicate_attrs(const Predicate& p, std::string_view subject) {
  if (const auto* e = std::get_if<ExprPredicate>(&p)) return attrs(*e->ast);
  return {std::string(subject)};
}

std::string describe(const Predicate& p) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, RangePredicate>) {
          return std::string("range ") + (x.min_inclusive ? "[" : "(") + x.min.to_string() + ", " +
                 x.max.to_string() + (x.max_inclusive ? "]" : ")");
        } else if constexpr (std::is_same_v<T, EqualsPredicate>) {
          return "equals " + format_literal(x.value);
        } else if constexpr (std::is_same_v<T, InSetPredicate>) {
          std::string s = "in {";
          for (std::size_t i = 0; i < x.values.size(); ++i) {
            if (i) s += ", ";
            s += format_literal(x.values[i]);
          }
          return s + "}";
        } else {
          return "expr " + x.source;
        }
      },
      p);
}

}  // namespace scoring
