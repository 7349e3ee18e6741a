#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace bidride {

/// Exact currency amount in integer minor units (cents). All arithmetic is
/// overflow-checked and throws ErrorKind::Overflow instead of wrapping.
class Money {
 public:
  constexpr Money() = default;
  static constexpr Money cents(std::int64_t v) { return Money(v); }
  static constexpr Money zero() { return Money(0); }

  constexpr std::int64_t cents() const { return cents_; }

  Money operator+(Money o) const;
  Money operator-(Money o) const;
  Money operator-() const;
  Money operator*(std::int64_t k) const;
  Money& operator+=(Money o) { return *this = *this + o; }
  Money& operator-=(Money o) { return *this = *this - o; }

  friend constexpr auto operator<=>(Money, Money) = default;

  std::string str() const;

 private:
  constexpr explicit Money(std::int64_t v) : cents_(v) {}
  std::int64_t cents_ = 0;
};

std::ostream& operator<<(std::ostream& os, Money m);

inline Money max(Money a, Money b) { return a < b ? b : a; }
inline Money min(Money a, Money b) { return b < a ? b : a; }

/// Non-negative decimal fraction held in parts per billion. Parsing a double
/// rounds to the nearest 1e-9, so 0.335 is exactly 335000000 ppb.
class Fraction {
 public:
  static constexpr std::int64_t kScale = 1'000'000'000;

  constexpr Fraction() = default;
  static Fraction from_double(double f);
  static constexpr Fraction from_ppb(std::int64_t ppb) { return Fraction(ppb); }

  constexpr std::int64_t ppb() const { return ppb_; }
  double value() const { return static_cast<double>(ppb_) / kScale; }

  friend constexpr auto operator<=>(Fraction, Fraction) = default;

 private:
  constexpr explicit Fraction(std::int64_t ppb) : ppb_(ppb) {}
  std::int64_t ppb_ = 0;
};

/// floor((num + den/2) / den) for den > 0, i.e. round half toward +infinity.
__int128 div_round_half_up(__int128 num, __int128 den);

/// Money scaled by an arbitrary non-negative fraction, rounded half-up.
Money scale(Money m, Fraction f);

/// Percentage rule used everywhere a price share is taken: round-half-up of
/// m * f to the minor unit. Requires 0 <= f <= 10.
Money apply_fraction(Money m, double f);
Money apply_fraction(Money m, Fraction f);

}  // namespace bidride
