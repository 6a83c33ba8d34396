#include "scoring/decimal.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace scoring {

namespace mp = boost::multiprecision;

namespace {

Decimal::Integer pow10(int n) {
  Decimal::Integer r = 1;
  for (int i = 0; i < n; ++i) r *= 10;
  return r;
}

std::string digits_with_point(const Decimal::Integer& scaled, int frac_digits, bool negative) {
  std::string digits = scaled.str();
  if (frac_digits > 0) {
    if (static_cast<int>(digits.size()) <= frac_digits)
      digits.insert(0, static_cast<std::size_t>(frac_digits) - digits.size() + 1, '0');
    digits.insert(digits.size() - static_cast<std::size_t>(frac_digits), 1, '.');
  }
  if (negative) digits.insert(0, 1, '-');
  return digits;
}

}  // namespace

Decimal::Integer round_half_even(const Decimal::Integer& num, const Decimal::Integer& den) {
  Decimal::Integer q = num / den;  // truncates toward zero
  Decimal::Integer r = num % den;
  if (r == 0) return q;
  const bool negative = (num < 0) != (den < 0);
  Decimal::Integer twice = 2 * mp::abs(r);
  Decimal::Integer absden = mp::abs(den);
  bool away = twice > absden || (twice == absden && (q % 2) != 0);
  if (away) q += negative ? -1 : 1;
  return q;
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
    negative = text[i] == '-';
    ++i;
  }
  Integer mantissa = 0;
  int frac = 0;
  bool any_digit = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c >= '0' && c <= '9') {
      mantissa = mantissa * 10 + (c - '0');
      any_digit = true;
      if (seen_point) ++frac;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      return std::nullopt;
    }
  }
  if (!any_digit) return std::nullopt;
  Rational r(mantissa, pow10(frac));
  if (negative) r = -r;
  return Decimal(std::move(r));
}

Decimal Decimal::from_string(std::string_view text) {
  auto d = parse(text);
  if (!d) throw std::invalid_argument("not a decimal: '" + std::string(text) + "'");
  return *d;
}

std::optional<Decimal> Decimal::from_double(double v) {
  if (!std::isfinite(v)) return std::nullopt;
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  if (res.ec != std::errc()) return std::nullopt;
  return parse(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
}

bool Decimal::is_integer() const { return mp::denominator(value_) == 1; }

bool Decimal::terminates() const {
  Integer d = mp::denominator(value_);
  while (d % 2 == 0) d /= 2;
  while (d % 5 == 0) d /= 5;
  return d == 1;
}

std::string Decimal::to_string() const {
  const Integer num = mp::numerator(value_);
  const Integer den = mp::denominator(value_);
  const bool negative = num < 0;
  // Smallest k with den | 10^k; capped only when no such k exists.
  const bool exact = terminates();
  int k = 0;
  Integer scale = 1;
  while (exact && scale % den != 0) {
    scale *= 10;
    ++k;
  }
  Integer scaled;
  if (!exact) {
    k = kMaxFractionDigits;
    scale = pow10(k);
    scaled = round_half_even(mp::abs(num) * scale, den);
  } else {
    scaled = mp::abs(num) * (scale / den);
  }
  while (k > 0 && scaled % 10 == 0) {
    scaled /= 10;
    --k;
  }
  return digits_with_point(scaled, k, negative && scaled != 0);
}

std::string Decimal::to_fixed(int digits) const {
  const Integer num = mp::numerator(value_);
  const Integer den = mp::denominator(value_);
  Integer scaled = round_half_even(num * pow10(digits), den);
  const bool negative = scaled < 0;
  return digits_with_point(mp::abs(scaled), digits, negative);
}

double Decimal::to_double() const { return value_.convert_to<double>(); }

std::optional<std::int64_t> Decimal::to_int64() const {
  if (!is_integer()) return std::nullopt;
  const Integer n = mp::numerator(value_);
  if (n > std::numeric_limits<std::int64_t>::max() || n < std::numeric_limits<std::int64_t>::min())
    return std::nullopt;
  return n.convert_to<std::int64_t>();
}

Decimal& Decimal::operator/=(const Decimal& o) {
  if (o.is_zero()) throw std::domain_error("decimal division by zero");
  value_ /= o.value_;
  return *this;
}

}  // namespace scoring
