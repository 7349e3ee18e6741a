#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "core/event_log.hpp"

namespace bidride {

enum class ViolationKind : std::uint8_t {
  Disclosure,  // event delivered to a party outside the ride's audience
  Ordering,    // identities revealed before the customer paid
  Identity,    // identities revealed to or about someone other than the matched pair
};

std::string_view to_string(ViolationKind k);

struct PrivacyViolation {
  std::size_t event_index = 0;
  Tick tick = 0;
  std::string event_kind;
  RideId ride;
  ViolationKind kind = ViolationKind::Disclosure;
  std::vector<std::string> recipients;  // offending recipient tags

  friend bool operator==(const PrivacyViolation&, const PrivacyViolation&) = default;
};

/// Replays the log against the visibility rules. At most one violation per
/// event; ordering and identity problems take precedence over disclosure.
std::vector<PrivacyViolation> audit_privacy(const EventLog& log);

}  // namespace bidride
