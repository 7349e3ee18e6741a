#include "core/money.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "core/error.hpp"

namespace bidride {

namespace {

std::int64_t narrow(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min()) {
    fail(ErrorKind::Overflow, "money overflow");
  }
  return static_cast<std::int64_t>(v);
}

}  // namespace

Money Money::operator+(Money o) const {
  std::int64_t r = 0;
  if (__builtin_add_overflow(cents_, o.cents_, &r)) {
    fail(ErrorKind::Overflow, "money overflow in addition");
  }
  return Money(r);
}

Money Money::operator-(Money o) const {
  std::int64_t r = 0;
  if (__builtin_sub_overflow(cents_, o.cents_, &r)) {
    fail(ErrorKind::Overflow, "money overflow in subtraction");
  }
  return Money(r);
}

Money Money::operator-() const { return Money::zero() - *this; }

Money Money::operator*(std::int64_t k) const {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(cents_, k, &r)) {
    fail(ErrorKind::Overflow, "money overflow in multiplication");
  }
  return Money(r);
}

std::string Money::str() const { return std::to_string(cents_); }

std::ostream& operator<<(std::ostream& os, Money m) { return os << m.cents(); }

Fraction Fraction::from_double(double f) {
  if (!std::isfinite(f) || f < 0.0) {
    fail(ErrorKind::InvalidParameter,
         "fraction must be a finite non-negative number");
  }
  const double scaled = std::round(f * static_cast<double>(kScale));
  if (scaled > 9.0e18) fail(ErrorKind::InvalidParameter, "fraction too large");
  return Fraction(static_cast<std::int64_t>(scaled));
}

__int128 div_round_half_up(__int128 num, __int128 den) {
  // floor((2*num + den) / (2*den)) with floor semantics for negatives.
  const __int128 n = 2 * num + den;
  const __int128 d = 2 * den;
  __int128 q = n / d;
  if ((n % d != 0) && ((n < 0) != (d < 0))) --q;
  return q;
}

Money scale(Money m, Fraction f) {
  const __int128 prod = static_cast<__int128>(m.cents()) * f.ppb();
  return Money::cents(narrow(div_round_half_up(prod, Fraction::kScale)));
}

Money apply_fraction(Money m, Fraction f) {
  if (f.ppb() < 0 || f.ppb() > 10 * Fraction::kScale) {
    fail(ErrorKind::InvalidParameter, "fraction must lie in [0, 10]");
  }
  return scale(m, f);
}

Money apply_fraction(Money m, double f) {
  if (!(f >= 0.0)) fail(ErrorKind::InvalidParameter, "negative fraction");
  return apply_fraction(m, Fraction::from_double(f));
}

}  // namespace bidride
