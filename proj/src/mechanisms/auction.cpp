#include "mechanisms/auction.hpp"

#include <algorithm>
#include <limits>

#include "core/error.hpp"
#include "payoffs/payoffs.hpp"

namespace bidride {

std::string_view to_string(BidAction a) {
  switch (a) {
    case BidAction::Manual: return "manual";
    case BidAction::AutoMidpoint: return "auto_midpoint";
    case BidAction::AcceptStandard: return "accept_standard";
    case BidAction::AcceptCustomerPrice: return "accept_customer_price";
    case BidAction::FractionOfPriority: return "fraction_of_priority";
    case BidAction::FractionOfStandard: return "fraction_of_standard";
    case BidAction::NoBid: return "no_bid";
  }
  return "?";
}

std::optional<int> preference_state(MechanismType type, BidAction action) {
  using A = BidAction;
  switch (type) {
    case MechanismType::T1:
      switch (action) {
        case A::Manual: return 1;
        case A::AutoMidpoint: return 2;
        case A::NoBid: return 3;
        default: return std::nullopt;
      }
    case MechanismType::T2:
      switch (action) {
        case A::AcceptStandard: return 1;
        case A::Manual: return 2;
        case A::NoBid: return 3;
        default: return std::nullopt;
      }
    case MechanismType::T3:
    case MechanismType::T5:
      switch (action) {
        case A::AcceptCustomerPrice: return 1;
        case A::FractionOfPriority: return 2;
        case A::AcceptStandard: return 3;
        case A::Manual: return 4;
        case A::NoBid: return 5;
        default: return std::nullopt;
      }
    case MechanismType::T4:
      switch (action) {
        case A::AcceptCustomerPrice: return 1;
        case A::AcceptStandard: return 2;
        case A::FractionOfStandard: return 3;
        case A::Manual: return 4;
        case A::NoBid: return 5;
        default: return std::nullopt;
      }
  }
  return std::nullopt;
}

int revision_limit(MechanismType type) {
  switch (type) {
    case MechanismType::T1: return 2;
    case MechanismType::T2: return 1;
    case MechanismType::T3: return 2;
    case MechanismType::T4: return 0;
    case MechanismType::T5: return 1;
  }
  return 0;
}

PriceQuote quote_prices(const PricingParams& params, const PlatformEconomics& econ,
                        const RouteEstimate& route, Money brand_subsidy) {
  PriceQuote q;
  q.meter = meter_fare(params.meter, route);
  q.standard = params.mechanism_type == MechanismType::T2
                   ? apply_fraction(q.meter, params.standard_cap_factor)
                   : q.meter;
  q.base = compute_base_price(econ, params.expected_fee_split(), brand_subsidy);
  return q;
}

Interval flex_band(Money standard, Fraction band) {
  const Fraction lo = Fraction::from_ppb(Fraction::kScale - band.ppb());
  const Fraction hi = Fraction::from_ppb(Fraction::kScale + band.ppb());
  return {scale(standard, lo), scale(standard, hi)};
}

namespace {

constexpr Money kUnbounded = Money::cents(std::numeric_limits<std::int64_t>::max());
const Money kOneCent = Money::cents(1);

const Fraction kPriorityFractionLo = Fraction::from_ppb(700'000'000);
const Fraction kPriorityFractionHi = Fraction::from_ppb(990'000'000);

[[noreturn]] void invalid_bid(const std::string& what) { fail(ErrorKind::InvalidBid, what); }
[[noreturn]] void rejected(const std::string& what) { fail(ErrorKind::RejectedBid, what); }
[[noreturn]] void revision_rejected(const std::string& what) {
  fail(ErrorKind::RevisionRejected, what);
}

CustomerBid normalized(MechanismType type, CustomerBid bid) {
  if (type != MechanismType::T1) bid.low = bid.cap;
  return bid;
}

}  // namespace

Interval admissible_bid_interval(MechanismType type, const PriceQuote& quote,
                                 const CustomerBid& bid, const PricingParams& params) {
  switch (type) {
    case MechanismType::T1:
      return {quote.base + kOneCent, kUnbounded};
    case MechanismType::T2:
    case MechanismType::T3:
    case MechanismType::T5:
      return {quote.base, bid.cap};
    case MechanismType::T4: {
      const Interval band = flex_band(quote.standard, params.flex_band);
      return {max(band.lo, quote.base + kOneCent), band.hi};
    }
  }
  return {quote.base, bid.cap};
}

void validate_customer_bid(MechanismType type, const PriceQuote& quote,
                           const CustomerBid& bid, const PricingParams& params) {
  if (bid.cap <= max(quote.base, Money::zero()))
    invalid_bid("customer price " + bid.cap.str() + " must exceed base price " +
                quote.base.str());
  switch (type) {
    case MechanismType::T1:
      if (bid.low < Money::zero()) invalid_bid("customer range minimum is negative");
      if (bid.low > bid.cap)
        invalid_bid("customer range minimum " + bid.low.str() + " exceeds maximum " +
                    bid.cap.str());
      break;
    case MechanismType::T2:
      if (bid.cap > quote.standard)
        invalid_bid("customer price " + bid.cap.str() + " exceeds standard price " +
                    quote.standard.str());
      break;
    case MechanismType::T3:
      if (bid.cap <= quote.standard)
        invalid_bid("priority price " + bid.cap.str() +
                    " must exceed standard price " + quote.standard.str());
      break;
    case MechanismType::T4: {
      const Interval band = flex_band(quote.standard, params.flex_band);
      if (!band.contains(bid.cap))
        invalid_bid("flex price " + bid.cap.str() + " outside band [" + band.lo.str() +
                    ", " + band.hi.str() + "]");
      break;
    }
    case MechanismType::T5:
      break;
  }
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Opened: return "opened";
    case Phase::DriversSelected: return "drivers_selected";
    case Phase::Bidding: return "bidding";
    case Phase::Revising: return "revising";
    case Phase::Assigned: return "assigned";
    case Phase::Settled: return "settled";
    case Phase::Failed: return "failed";
  }
  return "?";
}

std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::None: return "none";
    case FailureReason::NoSupply: return "no_supply";
    case FailureReason::NoBids: return "no_bids";
    case FailureReason::NoFeasibleBid: return "no_feasible_bid";
    case FailureReason::Cancelled: return "cancelled";
  }
  return "?";
}

bool AuctionState::is_selected(DriverId d) const {
  return std::any_of(selected.begin(), selected.end(),
                     [&](const DriverSnapshot& s) { return s.id == d; });
}

std::vector<RankedBid> rank_bids(MechanismType type, Money cap,
                                 std::vector<RankedBid> candidates) {
  const bool highest = type == MechanismType::T5;
  if (highest) {
    std::erase_if(candidates, [&](const RankedBid& b) { return b.price >= cap; });
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](const RankedBid& a, const RankedBid& b) {
              if (a.price != b.price) return highest ? a.price > b.price : a.price < b.price;
              if (a.eta != b.eta) return a.eta < b.eta;
              if (a.quality != b.quality) return a.quality > b.quality;
              return a.driver < b.driver;
            });
  return candidates;
}

Auction Auction::open(RideId ride, CustomerId customer, const CustomerBid& bid,
                      const PricingParams& params, const PlatformEconomics& econ,
                      const RouteEstimate& route, Tick now, Money brand_subsidy) {
  params.validate();
  econ.validate();
  return open(ride, customer, bid, quote_prices(params, econ, route, brand_subsidy),
              params, now);
}

Auction Auction::open(RideId ride, CustomerId customer, const CustomerBid& bid,
                      const PriceQuote& quote, const PricingParams& params, Tick now) {
  const MechanismType type = params.mechanism_type;
  CustomerBid b = normalized(type, bid);
  b.revision_count = 0;
  validate_customer_bid(type, quote, b, params);
  if (type == MechanismType::T2 && b.cap != quote.standard)
    invalid_bid("customer must first accept the standard price " + quote.standard.str());

  AuctionState s;
  s.ride_id = ride;
  s.customer = customer;
  s.type = type;
  s.quote = quote;
  s.customer_bid = b;
  s.opened_at = now;
  s.bid_deadline = now + params.bid_window;
  s.revision_deadline = now + params.revision_window;
  return Auction(std::move(s), params);
}

Interval Auction::admissible() const {
  return admissible_bid_interval(state_.type, state_.quote, state_.customer_bid, params_);
}

void Auction::advance(Phase next) {
  if (state_.phase == Phase::Failed || state_.phase == Phase::Settled)
    fail(ErrorKind::Invariant, std::string("auction already ") +
                                   std::string(to_string(state_.phase)));
  if (next != Phase::Failed && next < state_.phase)
    fail(ErrorKind::Invariant, std::string("phase cannot move from ") +
                                   std::string(to_string(state_.phase)) + " to " +
                                   std::string(to_string(next)));
  if (next != state_.phase) state_.history.push_back(next);
  state_.phase = next;
}

void Auction::fail_with(FailureReason reason) {
  advance(Phase::Failed);
  state_.failure = reason;
}

void Auction::mark_settled() {
  if (state_.phase != Phase::Assigned)
    fail(ErrorKind::Invariant, "only an assigned auction can settle");
  advance(Phase::Settled);
}

void Auction::select_drivers(std::span<const DriverSnapshot> fleet,
                             const LockoutRegistry& lockouts, Tick now) {
  if (state_.phase != Phase::Opened)
    fail(ErrorKind::Invariant, "drivers can only be selected once");
  std::vector<DriverSnapshot> eligible;
  for (const DriverSnapshot& d : fleet)
    if (!lockouts.is_blocked(d.id, now)) eligible.push_back(d);
  std::sort(eligible.begin(), eligible.end(),
            [](const DriverSnapshot& a, const DriverSnapshot& b) {
              return a.eta != b.eta ? a.eta < b.eta : a.id < b.id;
            });
  if (eligible.size() > static_cast<std::size_t>(params_.max_selected))
    eligible.resize(static_cast<std::size_t>(params_.max_selected));
  if (eligible.empty()) {
    fail_with(FailureReason::NoSupply);
    return;
  }
  state_.thin_market = eligible.size() < static_cast<std::size_t>(params_.min_selected);
  state_.selected = std::move(eligible);
  state_.bid_deadline = now + params_.bid_window;
  advance(Phase::DriversSelected);
}

Money Auction::price_for(const DriverPreference& pref) const {
  const PriceQuote& q = state_.quote;
  const CustomerBid& c = state_.customer_bid;
  switch (pref.action) {
    case BidAction::Manual:
      if (!pref.manual_price) rejected("manual bid without a price");
      return *pref.manual_price;
    case BidAction::AutoMidpoint:
      return Money::cents(static_cast<std::int64_t>(
          div_round_half_up(static_cast<__int128>(c.low.cents()) + c.cap.cents(), 2)));
    case BidAction::AcceptStandard:
      return q.standard;
    case BidAction::AcceptCustomerPrice:
      return c.cap;
    case BidAction::FractionOfPriority: {
      if (!pref.preset_fraction) rejected("fraction preference without a fraction");
      const Fraction f = *pref.preset_fraction;
      if (f < kPriorityFractionLo || f > kPriorityFractionHi)
        rejected("priority fraction must lie in [0.70, 0.99]");
      const Money p = apply_fraction(c.cap, f);
      if (p <= q.standard)
        rejected("fraction bid " + p.str() + " must exceed standard price " +
                 q.standard.str());
      return p;
    }
    case BidAction::FractionOfStandard: {
      if (!pref.preset_fraction) rejected("fraction preference without a fraction");
      return apply_fraction(q.standard, *pref.preset_fraction);
    }
    case BidAction::NoBid:
      break;
  }
  rejected("no price for a no-bid preference");
}

std::optional<Money> Auction::submit_driver_bid(DriverId driver,
                                                const DriverPreference& pref, Tick now,
                                                const LockoutRegistry& lockouts) {
  const Phase ph = state_.phase;
  if (ph != Phase::DriversSelected && ph != Phase::Bidding && ph != Phase::Revising)
    rejected(std::string("auction is ") + std::string(to_string(ph)));
  if (!state_.is_selected(driver)) rejected("driver was not selected");
  if (!preference_state(state_.type, pref.action))
    rejected(std::string(to_string(pref.action)) + " is not offered for " +
             std::string(to_string(state_.type)));
  if (now > state_.bid_deadline) {
    if (!state_.driver_bids.contains(driver)) state_.declined.insert(driver);
    fail(ErrorKind::LateBid, "bid window closed at tick " +
                                 std::to_string(state_.bid_deadline));
  }
  if (lockouts.is_blocked(driver, now)) rejected("driver is locked out");

  auto existing = state_.driver_bids.find(driver);
  const bool revisable =
      state_.type == MechanismType::T1 || state_.type == MechanismType::T3;
  if (existing != state_.driver_bids.end() && !existing->second.withdrawn) {
    if (!revisable) rejected("driver has already bid");
    if (existing->second.round >= state_.round)
      rejected("driver has already bid in this round");
  }
  if (state_.declined.contains(driver) && !(revisable && state_.round > 0))
    rejected("driver has already declined");

  if (pref.action == BidAction::NoBid) {
    state_.declined.insert(driver);
    if (ph == Phase::DriversSelected) advance(Phase::Bidding);
    return std::nullopt;
  }

  const Money price = price_for(pref);
  const Interval ok = admissible();
  if (!ok.contains(price)) {
    std::string range = "[" + ok.lo.str() + ", " +
                        (ok.hi == kUnbounded ? std::string("inf") : ok.hi.str()) + "]";
    rejected("bid " + price.str() + " outside admissible interval " + range);
  }

  RecordedBid rec;
  rec.price = price;
  rec.action = pref.action;
  rec.round = state_.round;
  rec.placed_at = now;
  if (existing != state_.driver_bids.end()) {
    rec.revision_count = existing->second.revision_count + (existing->second.withdrawn ? 0 : 1);
    existing->second = rec;
  } else {
    state_.driver_bids.emplace(driver, rec);
  }
  state_.declined.erase(driver);
  if (ph == Phase::DriversSelected) advance(Phase::Bidding);
  return price;
}

void Auction::revise_customer_bid(const CustomerBid& new_bid, Tick now) {
  const Phase ph = state_.phase;
  if (ph == Phase::Assigned || ph == Phase::Settled || ph == Phase::Failed)
    revision_rejected(std::string("auction is ") + std::string(to_string(ph)));
  const MechanismType type = state_.type;
  const CustomerBid old = state_.customer_bid;
  const int limit = revision_limit(type);
  if (limit == 0)
    revision_rejected(std::string(to_string(type)) + " does not allow revisions");
  if (old.revision_count >= limit)
    revision_rejected("revision limit of " + std::to_string(limit) + " reached");
  if (now > state_.revision_deadline)
    revision_rejected("revision window closed at tick " +
                      std::to_string(state_.revision_deadline));

  CustomerBid b = normalized(type, new_bid);
  if (type == MechanismType::T2) {
    if (b.cap >= old.cap) revision_rejected("revision must be downward");
    if (b.cap <= state_.quote.base)
      revision_rejected("revised price " + b.cap.str() + " must stay above base price " +
                        state_.quote.base.str());
  } else {
    if (b.cap <= old.cap) revision_rejected("revision must be upward");
    if (b.low < old.low) revision_rejected("range minimum cannot decrease");
  }
  try {
    validate_customer_bid(type, state_.quote, b, params_);
  } catch (const Error& e) {
    revision_rejected(e.what());
  }

  b.revision_count = old.revision_count + 1;
  state_.customer_bid = b;
  state_.round += 1;
  state_.bid_deadline = now + params_.bid_window;

  if (type == MechanismType::T2) {
    const Interval ok = admissible();
    for (auto& [driver, rec] : state_.driver_bids) {
      if (!rec.withdrawn && !ok.contains(rec.price)) {
        rec.withdrawn = true;
        state_.exempt.insert(driver);
      }
    }
  }
  advance(Phase::Revising);
}

void Auction::withdraw_bid(DriverId driver) {
  auto it = state_.driver_bids.find(driver);
  if (it != state_.driver_bids.end()) it->second.withdrawn = true;
  state_.exempt.insert(driver);
}

void Auction::exempt(DriverId driver) { state_.exempt.insert(driver); }

std::vector<RankedBid> Auction::ranked_bids() const {
  std::vector<RankedBid> out;
  for (const DriverSnapshot& d : state_.selected) {
    auto it = state_.driver_bids.find(d.id);
    if (it == state_.driver_bids.end() || it->second.withdrawn) continue;
    out.push_back({d.id, it->second.price, d.eta, d.quality});
  }
  return rank_bids(state_.type, state_.customer_bid.cap, std::move(out));
}

void Auction::assign(Tick now, LockoutRegistry& lockouts) {
  const Phase ph = state_.phase;
  if (ph != Phase::DriversSelected && ph != Phase::Bidding && ph != Phase::Revising)
    fail(ErrorKind::Invariant, std::string("cannot assign an auction that is ") +
                                   std::string(to_string(ph)));
  if (now < state_.bid_deadline) {
    for (const DriverSnapshot& d : state_.selected) {
      auto it = state_.driver_bids.find(d.id);
      const bool answered = state_.declined.contains(d.id) ||
                            (it != state_.driver_bids.end() && !it->second.withdrawn &&
                             it->second.round == state_.round) ||
                            state_.exempt.contains(d.id);
      if (!answered) fail(ErrorKind::Invariant, "bid window is still open");
    }
  }

  const bool any_bid = std::any_of(state_.driver_bids.begin(), state_.driver_bids.end(),
                                   [](const auto& kv) { return !kv.second.withdrawn; });
  if (!any_bid) {
    fail_with(FailureReason::NoBids);
    return;
  }
  const std::vector<RankedBid> ranked = ranked_bids();
  if (ranked.empty()) {
    fail_with(FailureReason::NoFeasibleBid);
    return;
  }
  const ClearingResult clear =
      clearing_price(state_.type, state_.customer_bid.cap, ranked.front().price,
                     state_.quote.base, state_.quote.standard);
  if (!clear.feasible) {
    fail_with(FailureReason::NoFeasibleBid);
    return;
  }

  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const RankedBid& r = ranked[i];
    if (!lockouts.reserve(r.driver, state_.ride_id, now, params_.lockout_before,
                          params_.lockout_after))
      continue;
    state_.primary = r.driver;
    state_.winning_bid = r.price;
    if (i + 1 < ranked.size()) state_.secondary = ranked[i + 1].driver;
    advance(Phase::Assigned);
    return;
  }
  fail_with(FailureReason::NoFeasibleBid);
}

std::vector<DriverId> Auction::no_bid_fee_liable() const {
  std::vector<DriverId> out;
  if (!params_.charge_no_bid_fee) return out;
  for (const DriverSnapshot& d : state_.selected) {
    auto it = state_.driver_bids.find(d.id);
    const bool bid = it != state_.driver_bids.end() && !it->second.withdrawn;
    if (!bid && !state_.exempt.contains(d.id)) out.push_back(d.id);
  }
  return out;
}

}  // namespace bidride
