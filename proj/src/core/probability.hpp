#pragma once

#include <compare>
#include <cstdint>
#include <string_view>

namespace bidride {

/// Probability in [0, 1] with a fixed resolution of 1e-9. Inputs within
/// 1e-9 outside the interval are clamped; anything further out is rejected.
class Probability {
 public:
  static constexpr std::int64_t kScale = 1'000'000'000;

  constexpr Probability() = default;
  static Probability from_double(double p);
  static constexpr Probability one() { return Probability(kScale); }
  static constexpr Probability zero() { return Probability(0); }
  static Probability from_ppb(std::int64_t ppb);

  constexpr std::int64_t ppb() const { return ppb_; }
  double value() const { return static_cast<double>(ppb_) / kScale; }

  friend constexpr auto operator<=>(Probability, Probability) = default;

 private:
  constexpr explicit Probability(std::int64_t ppb) : ppb_(ppb) {}
  std::int64_t ppb_ = 0;
};

/// How a conditional pair (x|y) of probabilities collapses to one weight.
enum class Combinator { Product, Min, Left };

Combinator parse_combinator(std::string_view name);
std::string_view to_string(Combinator c);

/// Exact weight in units of 1e-18, the result of combining two probabilities.
struct Weight {
  static constexpr std::int64_t kScale = 1'000'000'000'000'000'000;
  std::int64_t units = 0;

  double value() const { return static_cast<double>(units) / 1e18; }
};

Weight combine(Combinator c, Probability x, Probability y);

}  // namespace bidride
