#include "core/ledger.hpp"

#include "core/error.hpp"

namespace bidride {

std::string_view to_string(Party p) {
  switch (p) {
    case Party::Customer: return "customer";
    case Party::Driver: return "driver";
    case Party::Platform: return "platform";
    case Party::TaxAuthority: return "tax";
    case Party::ThirdParty: return "third_party";
  }
  return "?";
}

std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::RidePayment: return "ride_payment";
    case Reason::FulfillmentFee: return "fulfillment_fee";
    case Reason::DriverFee: return "driver_fee";
    case Reason::FulfillmentShare: return "fulfillment_share";
    case Reason::IncentiveFee: return "incentive_fee";
    case Reason::IncentiveFunding: return "incentive_funding";
    case Reason::ShortfallFunding: return "shortfall_funding";
    case Reason::Taxes: return "taxes";
    case Reason::ThirdPartyFee: return "third_party_fee";
    case Reason::Retention: return "retention";
    case Reason::NoBidFee: return "no_bid_fee";
  }
  return "?";
}

void Ledger::add(Party party, Direction dir, Money amount, Reason reason) {
  if (amount < Money::zero()) {
    fail(ErrorKind::InvalidParameter, "ledger amounts must be non-negative");
  }
  if (amount == Money::zero()) return;
  entries_.push_back({party, dir, amount, reason});
}

Money Ledger::inflow() const {
  Money sum;
  for (const auto& e : entries_) {
    if (e.direction == Direction::In) sum += e.amount;
  }
  return sum;
}

Money Ledger::outflow() const {
  Money sum;
  for (const auto& e : entries_) {
    if (e.direction == Direction::Out) sum += e.amount;
  }
  return sum;
}

Money Ledger::total(Party party, Direction dir) const {
  Money sum;
  for (const auto& e : entries_) {
    if (e.party == party && e.direction == dir) sum += e.amount;
  }
  return sum;
}

Money Ledger::total(Reason reason) const {
  Money sum;
  for (const auto& e : entries_) {
    if (e.reason == reason) sum += e.amount;
  }
  return sum;
}

Ledger settle_ride(Money payment, Money fee, Money taxes, Money third_party) {
  if (payment < Money::zero() || fee < Money::zero() ||
      taxes < Money::zero() || third_party < Money::zero()) {
    fail(ErrorKind::InvalidParameter, "settlement amounts must be non-negative");
  }
  const Money retention = payment - fee - taxes - third_party;
  if (retention < Money::zero()) {
    fail(ErrorKind::InfeasibleSettlement,
         "fee, taxes and third-party fees exceed the payment by " +
             (-retention).str());
  }
  Ledger l;
  l.add(Party::Customer, Direction::In, payment, Reason::RidePayment);
  l.add(Party::Driver, Direction::Out, fee, Reason::DriverFee);
  l.add(Party::TaxAuthority, Direction::Out, taxes, Reason::Taxes);
  l.add(Party::ThirdParty, Direction::Out, third_party, Reason::ThirdPartyFee);
  l.add(Party::Platform, Direction::Out, retention, Reason::Retention);
  return l;
}

Ledger settle(const SettlementTerms& t) {
  const Money in = t.ride_payment + t.fulfillment_fee + t.incentive_fee;
  const Money out_before_retention = t.driver_fee + t.fulfillment_share +
                                     t.incentive_fee + t.taxes + t.third_party;
  Money residual = in - out_before_retention;
  Money shortfall;
  if (residual < Money::zero()) {
    shortfall = -residual;
    residual = Money::zero();
  }
  Ledger l;
  l.add(Party::Customer, Direction::In, t.ride_payment, Reason::RidePayment);
  l.add(Party::Customer, Direction::In, t.fulfillment_fee, Reason::FulfillmentFee);
  l.add(Party::Platform, Direction::In, t.incentive_fee, Reason::IncentiveFunding);
  l.add(Party::Platform, Direction::In, shortfall, Reason::ShortfallFunding);
  l.add(Party::Driver, Direction::Out, t.driver_fee, Reason::DriverFee);
  l.add(Party::Driver, Direction::Out, t.fulfillment_share, Reason::FulfillmentShare);
  l.add(Party::Driver, Direction::Out, t.incentive_fee, Reason::IncentiveFee);
  l.add(Party::TaxAuthority, Direction::Out, t.taxes, Reason::Taxes);
  l.add(Party::ThirdParty, Direction::Out, t.third_party, Reason::ThirdPartyFee);
  l.add(Party::Platform, Direction::Out, residual, Reason::Retention);
  return l;
}

Ledger settle_no_bid_fee(Money fee) {
  Ledger l;
  l.add(Party::Driver, Direction::In, fee, Reason::NoBidFee);
  l.add(Party::Platform, Direction::Out, fee, Reason::Retention);
  return l;
}

}  // namespace bidride
