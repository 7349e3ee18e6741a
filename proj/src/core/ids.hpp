#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace bidride {

// Distinct integer id types so a driver id can never be passed where a ride
// id is expected.
template <typename Tag>
struct Id {
  std::int64_t value = -1;

  constexpr Id() = default;
  constexpr explicit Id(std::int64_t v) : value(v) {}

  constexpr bool valid() const { return value >= 0; }
  friend constexpr auto operator<=>(Id, Id) = default;
};

using DriverId = Id<struct DriverTag>;
using CustomerId = Id<struct CustomerTag>;
using RideId = Id<struct RideTag>;

// Simulated time, one tick per second.
using Tick = std::int64_t;
using Seconds = std::int64_t;

constexpr Seconds minutes(std::int64_t m) { return m * 60; }
constexpr Seconds hours(std::int64_t h) { return h * 3600; }

}  // namespace bidride

template <typename Tag>
struct std::hash<bidride::Id<Tag>> {
  std::size_t operator()(bidride::Id<Tag> id) const noexcept {
    return std::hash<std::int64_t>{}(id.value);
  }
};
