#include "mechanisms/lockout.hpp"

#include <algorithm>

namespace bidride {

bool LockoutRegistry::is_blocked(DriverId d, Tick t) const {
  std::lock_guard lock(mu_);
  if (off_duty_.count(d)) return true;
  auto it = blocked_.find(d);
  if (it == blocked_.end()) return false;
  for (const auto& b : it->second) {
    if (b.contains(t)) return true;
  }
  return false;
}

bool LockoutRegistry::is_off_duty(DriverId d) const {
  std::lock_guard lock(mu_);
  return off_duty_.count(d) > 0;
}

bool LockoutRegistry::can_reserve(DriverId d, Tick from, Tick to) const {
  std::lock_guard lock(mu_);
  auto it = blocked_.find(d);
  if (it == blocked_.end()) return true;
  const BlockedInterval probe{from, to, RideId{}};
  for (const auto& b : it->second) {
    if (b.overlaps(probe)) return false;
  }
  return true;
}

bool LockoutRegistry::reserve(DriverId d, RideId ride, Tick t_win, Seconds before,
                              Seconds after) {
  std::lock_guard lock(mu_);
  // A zero-width lockout still occupies the win tick.
  const BlockedInterval next{t_win - before, t_win + std::max<Seconds>(after, 1), ride};
  auto& list = blocked_[d];
  for (const auto& b : list) {
    if (b.overlaps(next)) return false;
  }
  list.push_back(next);
  return true;
}

void LockoutRegistry::set_off_duty(DriverId d, Tick since, Seconds min_return_after) {
  std::lock_guard lock(mu_);
  off_duty_[d] = OffDuty{since, since + min_return_after};
}

bool LockoutRegistry::return_to_duty(DriverId d, Tick now) {
  std::lock_guard lock(mu_);
  auto it = off_duty_.find(d);
  if (it == off_duty_.end()) return true;
  if (now < it->second.earliest_return) return false;
  off_duty_.erase(it);
  return true;
}

std::vector<BlockedInterval> LockoutRegistry::intervals(DriverId d) const {
  std::lock_guard lock(mu_);
  auto it = blocked_.find(d);
  return it == blocked_.end() ? std::vector<BlockedInterval>{} : it->second;
}

std::optional<DriverId> LockoutRegistry::find_overlap() const {
  std::lock_guard lock(mu_);
  for (const auto& [driver, list] : blocked_) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        if (list[i].overlaps(list[j])) return driver;
      }
    }
  }
  return std::nullopt;
}

}  // namespace bidride
