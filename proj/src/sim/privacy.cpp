#include "sim/privacy.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace bidride {

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::Disclosure: return "disclosure";
    case ViolationKind::Ordering: return "ordering";
    case ViolationKind::Identity: return "identity";
  }
  return "?";
}

namespace {

// Kinds that carry the customer's bid or request details.
const std::set<std::string_view> kCustomerBidKinds = {
    "request", "customer_declined", "auction_open", "relay", "customer_revision",
    "relay_revision", "fixed_price_offer", "auction_failed", "sibling_cancelled",
    "price_notice", "payment"};

// Kinds that carry one driver's bid or standing.
const std::set<std::string_view> kDriverKinds = {
    "driver_bid", "no_bid", "bid_rejected", "bid_withdrawn", "late_response",
    "bid_outcome", "no_bid_fee", "assignment", "payout", "logoff", "logon"};

const std::set<std::string_view> kPlatformOnly = {"selection", "settlement", "gps_check",
                                                  "revenue_check"};

struct RideFacts {
  std::string customer;  // tag
  std::set<std::string> selected;
  std::set<std::string> assigned;
  std::set<std::string> primary;
  std::optional<std::size_t> paid_at;  // event index of the payment
};

bool is_customer(std::string_view tag) { return !tag.empty() && tag[0] == 'C'; }
bool is_driver(std::string_view tag) { return !tag.empty() && tag[0] == 'D'; }

std::vector<std::string> split_ids(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto bar = s.find('|', start);
    const auto piece = s.substr(start, bar == std::string_view::npos ? s.npos : bar - start);
    if (!piece.empty()) out.emplace_back(piece);
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return out;
}

}  // namespace

std::vector<PrivacyViolation> audit_privacy(const EventLog& log) {
  const auto& events = log.events();
  std::map<RideId, RideFacts> rides;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (!e.ride.valid()) continue;
    RideFacts& f = rides[e.ride];
    if (f.customer.empty())
      if (auto c = e.get_int("customer")) f.customer = customer_tag(CustomerId(*c));
    if (e.kind == "selection")
      if (auto ids = e.get("drivers"))
        for (const auto& id : split_ids(*ids)) f.selected.insert("D" + id);
    if (e.kind == "assignment")
      if (auto d = e.get_int("driver")) {
        f.assigned.insert(driver_tag(DriverId(*d)));
        if (e.get("role").value_or("primary") == "primary") f.primary.insert(driver_tag(DriverId(*d)));
      }
    if (e.kind == "payment" && !f.paid_at) f.paid_at = i;
  }

  std::vector<PrivacyViolation> out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    const RideFacts* f = nullptr;
    if (e.ride.valid()) f = &rides[e.ride];

    auto report = [&](ViolationKind kind, std::vector<std::string> who) {
      if (who.empty()) return false;
      out.push_back({i, e.tick, e.kind, e.ride, kind, std::move(who)});
      return true;
    };

    // Identity disclosure: a customer sees a driver id or a driver sees a
    // customer id.
    const bool names_driver = e.get("driver").has_value();
    const bool names_customer = e.get("customer").has_value();
    std::vector<std::string> exposed;
    for (const auto& tag : e.visibility)
      if ((is_customer(tag) && names_driver) || (is_driver(tag) && names_customer))
        exposed.push_back(tag);
    if (!exposed.empty()) {
      const bool paid = f && f->paid_at && *f->paid_at < i;
      if (!paid && report(ViolationKind::Ordering, exposed)) continue;
      std::vector<std::string> wrong;
      const std::string driver = names_driver ? "D" + std::string(*e.get("driver")) : "";
      for (const auto& tag : exposed) {
        const bool ok = is_customer(tag) ? (f && tag == f->customer && f->primary.count(driver))
                                         : (f && f->primary.count(tag) &&
                                            customer_tag(CustomerId(e.get_int("customer").value_or(-1))) ==
                                                f->customer);
        if (!ok) wrong.push_back(tag);
      }
      if (report(ViolationKind::Identity, wrong)) continue;
    }

    std::vector<std::string> outside;
    if (kPlatformOnly.count(e.kind)) {
      for (const auto& tag : e.visibility)
        if (tag != platform_tag()) outside.push_back(tag);
    } else if (kDriverKinds.count(e.kind)) {
      const auto d = e.get_int("driver");
      const std::string own = d ? driver_tag(DriverId(*d)) : "";
      for (const auto& tag : e.visibility)
        if (tag != platform_tag() && tag != own) outside.push_back(tag);
    } else if (kCustomerBidKinds.count(e.kind) || f) {
      for (const auto& tag : e.visibility) {
        if (tag == platform_tag()) continue;
        if (is_customer(tag) && f && tag == f->customer) continue;
        if (is_driver(tag) && f && (f->selected.count(tag) || f->assigned.count(tag))) continue;
        outside.push_back(tag);
      }
    }
    report(ViolationKind::Disclosure, outside);
  }
  return out;
}

}  // namespace bidride
