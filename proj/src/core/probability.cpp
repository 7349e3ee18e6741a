#include "core/probability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/error.hpp"

namespace bidride {

Probability Probability::from_double(double p) {
  if (!std::isfinite(p) || p < -1e-9 || p > 1.0 + 1e-9) {
    fail(ErrorKind::InvalidParameter,
         "probability " + std::to_string(p) + " outside [0, 1]");
  }
  const auto ppb = static_cast<std::int64_t>(std::llround(p * kScale));
  return Probability(std::clamp<std::int64_t>(ppb, 0, kScale));
}

Probability Probability::from_ppb(std::int64_t ppb) {
  if (ppb < 0 || ppb > kScale) {
    fail(ErrorKind::InvalidParameter, "probability outside [0, 1]");
  }
  return Probability(ppb);
}

Combinator parse_combinator(std::string_view name) {
  if (name == "product") return Combinator::Product;
  if (name == "min") return Combinator::Min;
  if (name == "left") return Combinator::Left;
  fail(ErrorKind::InvalidParameter,
       "unknown combinator '" + std::string(name) + "'");
}

std::string_view to_string(Combinator c) {
  switch (c) {
    case Combinator::Product: return "product";
    case Combinator::Min: return "min";
    case Combinator::Left: return "left";
  }
  return "?";
}

Weight combine(Combinator c, Probability x, Probability y) {
  switch (c) {
    case Combinator::Product: return {x.ppb() * y.ppb()};
    case Combinator::Min: return {std::min(x.ppb(), y.ppb()) * Probability::kScale};
    case Combinator::Left: return {x.ppb() * Probability::kScale};
  }
  return {};
}

}  // namespace bidride
