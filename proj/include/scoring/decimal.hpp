#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace scoring {

// Exact decimal value. Stored as a rational so that weighted averages stay
// exact; text is always plain decimal notation ("180.25", "-3", "0.5").
class Decimal {
public:
  using Rational = boost::multiprecision::cpp_rational;
  using Integer = boost::multiprecision::cpp_int;

  // Fractional digits kept when a value has no finite decimal expansion.
  static constexpr int kMaxFractionDigits = 18;

  Decimal() = default;
  Decimal(std::int64_t v) : value_(v) {}  // NOLINT(implicit)
  explicit Decimal(Rational r) : value_(std::move(r)) {}

  // Accepts `-?digits(.digits)?` (also `.5` and `5.`). Anything else, including
  // exponents, "nan" and "inf", is rejected.
  static std::optional<Decimal> parse(std::string_view text);
  static Decimal from_string(std::string_view text);  // throws std::invalid_argument

  // Shortest round-trip representation of a finite double.
  static std::optional<Decimal> from_double(double v);

  const Rational& rational() const { return value_; }

  bool is_zero() const { return value_ == 0; }
  bool is_negative() const { return value_ < 0; }
  bool is_integer() const;
  // True when the value has a finite decimal expansion.
  bool terminates() const;

  // Canonical text: no trailing zeros, no exponent, "-0" never produced.
  std::string to_string() const;
  // Exactly `digits` fractional digits, rounded half-to-even.
  std::string to_fixed(int digits) const;
  double to_double() const;
  std::optional<std::int64_t> to_int64() const;

  Decimal operator-() const { return Decimal(Rational(-value_)); }
  Decimal& operator+=(const Decimal& o) { value_ += o.value_; return *this; }
  Decimal& operator-=(const Decimal& o) { value_ -= o.value_; return *this; }
  Decimal& operator*=(const Decimal& o) { value_ *= o.value_; return *this; }
  Decimal& operator/=(const Decimal& o);  // throws std::domain_error on zero

  friend Decimal operator+(Decimal a, const Decimal& b) { return a += b; }
  friend Decimal operator-(Decimal a, const Decimal& b) { return a -= b; }
  friend Decimal operator*(Decimal a, const Decimal& b) { return a *= b; }
  friend Decimal operator/(Decimal a, const Decimal& b) { return a /= b; }

  friend bool operator==(const Decimal& a, const Decimal& b) { return a.value_ == b.value_; }
  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (a.value_ > b.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

private:
  Rational value_{0};
};

// Rounds num/den (den > 0) to an integer, ties to even.
Decimal::Integer round_half_even(const Decimal::Integer& num, const Decimal::Integer& den);

}  // namespace scoring
