#pragma once

#include <string_view>
#include <vector>

#include "core/money.hpp"

namespace bidride {

enum class Party { Customer, Driver, Platform, TaxAuthority, ThirdParty };
enum class Direction { In, Out };

enum class Reason {
  RidePayment,
  FulfillmentFee,
  DriverFee,
  FulfillmentShare,
  IncentiveFee,
  IncentiveFunding,
  ShortfallFunding,
  Taxes,
  ThirdPartyFee,
  Retention,
  NoBidFee,
};

std::string_view to_string(Party p);
std::string_view to_string(Reason r);

struct LedgerEntry {
  Party party;
  Direction direction;
  Money amount;
  Reason reason;
};

/// Per-ride settlement record. Every entry moves a non-negative amount into
/// (In) or out of (Out) the ride's settlement pool; a ledger is balanced when
/// the two sides are equal to the minor unit.
class Ledger {
 public:
  void add(Party party, Direction dir, Money amount, Reason reason);

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  Money inflow() const;
  Money outflow() const;
  bool balanced() const { return inflow() == outflow(); }

  /// Sum of amounts matching a party and direction.
  Money total(Party party, Direction dir) const;
  Money total(Reason reason) const;

 private:
  std::vector<LedgerEntry> entries_;
};

/// Strong-budget-balance settlement: the platform keeps the residual.
/// Throws InfeasibleSettlement when fee + taxes + third_party > payment.
Ledger settle_ride(Money payment, Money fee, Money taxes, Money third_party);

/// Full breakdown used once guarantee adjustments are known.
struct SettlementTerms {
  Money ride_payment;        // customer, price after any arrival discount
  Money fulfillment_fee;     // customer, late-arrival charge
  Money driver_fee;          // driver, fee after any discount deduction
  Money fulfillment_share;   // driver, share of the fulfillment fee
  Money incentive_fee;       // driver, platform-funded
  Money taxes;
  Money third_party;
};

/// Books the terms; the platform funds incentives and any shortfall so the
/// retention entry is never negative. Always balanced.
Ledger settle(const SettlementTerms& terms);

/// Driver pays the no-bid fee to the platform.
Ledger settle_no_bid_fee(Money fee);

}  // namespace bidride
