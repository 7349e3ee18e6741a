#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "core/ids.hpp"

namespace bidride {

/// Half-open interval [from, to) around a won ride.
struct BlockedInterval {
  Tick from = 0;
  Tick to = 0;
  RideId ride;

  bool contains(Tick t) const { return from <= t && t < to; }
  bool overlaps(const BlockedInterval& o) const {
    return from < o.to && o.from < to;
  }
};

/// Shared between concurrent auctions. Reservation is check-and-insert under
/// one lock, so two auctions can never both hand a driver overlapping rides.
class LockoutRegistry {
 public:
  /// Inside a blocked interval, or off duty.
  bool is_blocked(DriverId d, Tick t) const;
  bool is_off_duty(DriverId d) const;

  bool can_reserve(DriverId d, Tick from, Tick to) const;
  /// Writes [t_win - before, t_win + after) unless it would overlap an
  /// existing interval for the driver; returns whether it was written.
  bool reserve(DriverId d, RideId ride, Tick t_win, Seconds before, Seconds after);

  void set_off_duty(DriverId d, Tick since, Seconds min_return_after);
  /// Returns false (and stays off duty) until the minimum time has elapsed.
  bool return_to_duty(DriverId d, Tick now);

  std::vector<BlockedInterval> intervals(DriverId d) const;

  /// First driver holding two overlapping intervals, if any.
  std::optional<DriverId> find_overlap() const;

 private:
  struct OffDuty {
    Tick since = 0;
    Tick earliest_return = 0;
  };

  mutable std::mutex mu_;
  std::map<DriverId, std::vector<BlockedInterval>> blocked_;
  std::map<DriverId, OffDuty> off_duty_;
};

}  // namespace bidride
