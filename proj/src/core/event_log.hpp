#pragma once

#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "core/ids.hpp"

namespace bidride {

/// Recipient tags: "P" for the platform, "C<id>" for a customer, "D<id>" for a
/// driver.
std::string platform_tag();
std::string customer_tag(CustomerId c);
std::string driver_tag(DriverId d);

struct Event {
  Tick tick = 0;
  std::string kind;
  RideId ride;
  std::vector<std::pair<std::string, std::string>> payload;
  std::vector<std::string> visibility;  // sorted, unique

  std::optional<std::string_view> get(std::string_view key) const;
  std::optional<std::int64_t> get_int(std::string_view key) const;
  bool visible_to(std::string_view tag) const;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Builder for an event's payload; values are written with operator<<.
class Payload {
 public:
  Payload& add(std::string key, std::string value);
  template <std::integral T>
  Payload& add(std::string key, T value) {
    return add(std::move(key), std::to_string(value));
  }
  Payload& add(std::string key, double value);

  std::vector<std::pair<std::string, std::string>> take() { return std::move(items_); }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

/// Append-only. Visibility is fixed when an event is appended and the log
/// only ever hands out const references afterwards.
///
/// Text form, one event per line:
///   tick <TAB> kind <TAB> ride <TAB> k=v;k=v <TAB> P,C1,D4
/// with "-" for an absent ride id or an empty payload.
class EventLog {
 public:
  /// Throws Invariant if tick goes backwards, InvalidParameter if a field
  /// contains a separator character.
  const Event& append(Tick tick, std::string kind, RideId ride,
                      std::vector<std::pair<std::string, std::string>> payload,
                      std::vector<std::string> visibility);

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

  std::string serialize() const;
  void write(std::ostream& os) const;
  static std::string format_line(const Event& e);

  /// Throws Parse with the 1-based line number.
  static EventLog parse(std::string_view text);

 private:
  std::vector<Event> events_;
};

}  // namespace bidride
