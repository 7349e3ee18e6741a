#include <doctest.h>

#include <random>

#include "core/error.hpp"
#include "mechanisms/auction.hpp"
#include "mechanisms/lockout.hpp"

using namespace bidride;

namespace {

PricingParams params_for(MechanismType t) { return PricingParams::defaults_for(t); }

PriceQuote quote(std::int64_t standard, std::int64_t base) {
  return {Money::cents(standard), Money::cents(standard), Money::cents(base)};
}

std::vector<DriverSnapshot> fleet(int n) {
  std::vector<DriverSnapshot> f;
  for (int i = 0; i < n; ++i) f.push_back({DriverId(i), 100 + 10 * (n - i), 0.5});
  return f;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Invariant;
}

Auction opened(MechanismType t, CustomerBid bid, PriceQuote q, int drivers = 5) {
  Auction a = Auction::open(RideId(1), CustomerId(1), bid, q, params_for(t), 0);
  LockoutRegistry none;
  a.select_drivers(fleet(drivers), none, 0);
  return a;
}

}  // namespace

TEST_CASE("open_auction quotes standard and base") {
  PricingParams p = params_for(MechanismType::T2);
  p.meter.flag_fall = Money::zero();
  p.meter.per_minute = Money::zero();
  p.meter.per_km = Money::cents(100);
  PlatformEconomics econ;
  econ.beta_v = Money::cents(60);
  econ.beta_f = Money::cents(40);
  const PriceQuote q = quote_prices(p, econ, {10'000, 600});
  CHECK(q.meter == Money::cents(1000));
  CHECK(q.standard == Money::cents(800));
  CHECK(q.base == Money::cents(500));

  const Interval band = flex_band(Money::cents(1000), Fraction::from_double(0.2));
  CHECK(band.lo == Money::cents(800));
  CHECK(band.hi == Money::cents(1200));

  CHECK(kind_of([] {
          Auction::open(RideId(1), CustomerId(1), CustomerBid::single(Money::cents(900)),
                        quote(1000, 500), params_for(MechanismType::T3), 0);
        }) == ErrorKind::InvalidBid);
  CHECK(kind_of([] {
          Auction::open(RideId(1), CustomerId(1), CustomerBid::single(Money::cents(1300)),
                        quote(1000, 500), params_for(MechanismType::T4), 0);
        }) == ErrorKind::InvalidBid);
  CHECK(kind_of([] {
          Auction::open(RideId(1), CustomerId(1), CustomerBid::single(Money::cents(400)),
                        quote(1000, 500), params_for(MechanismType::T5), 0);
        }) == ErrorKind::InvalidBid);
}

TEST_CASE("select_drivers takes up to 15 nearest") {
  LockoutRegistry none;
  Auction a = Auction::open(RideId(1), CustomerId(1), CustomerBid::single(Money::cents(1000)),
                            quote(1000, 500), params_for(MechanismType::T2), 0);
  a.select_drivers(fleet(20), none, 0);
  REQUIRE(a.state().selected.size() == 15);
  for (std::size_t i = 1; i < 15; ++i)
    CHECK(a.state().selected[i - 1].eta <= a.state().selected[i].eta);
  CHECK(a.state().selected.front().id == DriverId(19));
  CHECK_FALSE(a.state().thin_market);
  CHECK(a.state().phase == Phase::DriversSelected);

  Auction b = Auction::open(RideId(2), CustomerId(1), CustomerBid::single(Money::cents(1000)),
                            quote(1000, 500), params_for(MechanismType::T2), 0);
  b.select_drivers(fleet(2), none, 0);
  CHECK(b.state().selected.size() == 2);
  CHECK(b.state().thin_market);

  Auction c = Auction::open(RideId(3), CustomerId(1), CustomerBid::single(Money::cents(1000)),
                            quote(1000, 500), params_for(MechanismType::T2), 0);
  c.select_drivers({}, none, 0);
  CHECK(c.state().phase == Phase::Failed);
  CHECK(c.state().failure == FailureReason::NoSupply);
}

TEST_CASE("locked out and off duty drivers are not selected") {
  LockoutRegistry reg;
  CHECK(reg.reserve(DriverId(0), RideId(9), 1000, 1800, 1800));
  reg.set_off_duty(DriverId(1), 0, 1800);
  Auction a = Auction::open(RideId(1), CustomerId(1), CustomerBid::single(Money::cents(1000)),
                            quote(1000, 500), params_for(MechanismType::T2), 500);
  a.select_drivers(fleet(4), reg, 500);
  CHECK_FALSE(a.state().is_selected(DriverId(0)));
  CHECK_FALSE(a.state().is_selected(DriverId(1)));
  CHECK(a.state().selected.size() == 2);
}

TEST_CASE("driver bids follow the preference state") {
  LockoutRegistry none;
  Auction t1 = opened(MechanismType::T1, CustomerBid::range(Money::cents(800), Money::cents(1200)),
                      quote(1000, 500));
  CHECK(t1.submit_driver_bid(DriverId(0), DriverPreference::automatic(BidAction::AutoMidpoint), 1,
                             none) == Money::cents(1000));

  Auction t2 = opened(MechanismType::T2, CustomerBid::single(Money::cents(900)), quote(900, 700));
  CHECK(kind_of([&] { t2.submit_driver_bid(DriverId(0), DriverPreference::manual(Money::cents(650)), 1, none); }) ==
        ErrorKind::RejectedBid);
  CHECK(t2.submit_driver_bid(DriverId(1), DriverPreference::automatic(BidAction::AcceptStandard), 1,
                             none) == Money::cents(900));

  Auction t3 = opened(MechanismType::T3, CustomerBid::single(Money::cents(1500)), quote(1000, 500));
  CHECK(t3.submit_driver_bid(DriverId(0),
                             DriverPreference::with_fraction(BidAction::FractionOfPriority,
                                                             Fraction::from_double(0.80)),
                             1, none) == Money::cents(1200));
  CHECK(kind_of([&] {
          t3.submit_driver_bid(DriverId(1),
                               DriverPreference::with_fraction(BidAction::FractionOfPriority,
                                                               Fraction::from_double(0.5)),
                               1, none);
        }) == ErrorKind::RejectedBid);
  CHECK_FALSE(t3.submit_driver_bid(DriverId(2), DriverPreference::no_bid(), 1, none).has_value());

  // Not selected, late.
  CHECK(kind_of([&] { t3.submit_driver_bid(DriverId(42), DriverPreference::manual(Money::cents(900)), 1, none); }) ==
        ErrorKind::RejectedBid);
  CHECK(kind_of([&] {
          t3.submit_driver_bid(DriverId(3), DriverPreference::manual(Money::cents(900)),
                               t3.state().bid_deadline + 1, none);
        }) == ErrorKind::LateBid);
}

TEST_CASE("preference state numbering per type") {
  CHECK(preference_state(MechanismType::T1, BidAction::AutoMidpoint) == 2);
  CHECK(preference_state(MechanismType::T2, BidAction::AcceptStandard) == 1);
  CHECK(preference_state(MechanismType::T3, BidAction::NoBid) == 5);
  CHECK(preference_state(MechanismType::T4, BidAction::FractionOfStandard) == 3);
  CHECK_FALSE(preference_state(MechanismType::T2, BidAction::FractionOfPriority).has_value());
}

TEST_CASE("customer revisions follow the type rules") {
  Auction t1 = opened(MechanismType::T1, CustomerBid::range(Money::cents(800), Money::cents(1000)),
                      quote(1000, 500));
  t1.revise_customer_bid(CustomerBid::range(Money::cents(800), Money::cents(1100)), 60);
  t1.revise_customer_bid(CustomerBid::range(Money::cents(850), Money::cents(1200)), 120);
  CHECK(t1.state().customer_state() == "S_c3");
  CHECK(kind_of([&] { t1.revise_customer_bid(CustomerBid::range(Money::cents(850), Money::cents(1300)), 180); }) ==
        ErrorKind::RevisionRejected);

  Auction down = opened(MechanismType::T1, CustomerBid::range(Money::cents(800), Money::cents(1000)),
                        quote(1000, 500));
  CHECK(kind_of([&] { down.revise_customer_bid(CustomerBid::range(Money::cents(800), Money::cents(900)), 60); }) ==
        ErrorKind::RevisionRejected);
  CHECK(kind_of([&] {
          down.revise_customer_bid(CustomerBid::range(Money::cents(800), Money::cents(1100)), minutes(11));
        }) == ErrorKind::RevisionRejected);

  Auction t2 = opened(MechanismType::T2, CustomerBid::single(Money::cents(800)), quote(800, 700));
  CHECK(kind_of([&] { t2.revise_customer_bid(CustomerBid::single(Money::cents(650)), 10); }) ==
        ErrorKind::RevisionRejected);
  t2.revise_customer_bid(CustomerBid::single(Money::cents(750)), 10);
  CHECK(kind_of([&] { t2.revise_customer_bid(CustomerBid::single(Money::cents(740)), 20); }) ==
        ErrorKind::RevisionRejected);

  Auction t4 = opened(MechanismType::T4, CustomerBid::single(Money::cents(1000)), quote(1000, 500));
  CHECK(kind_of([&] { t4.revise_customer_bid(CustomerBid::single(Money::cents(1100)), 10); }) ==
        ErrorKind::RevisionRejected);
}

TEST_CASE("adversarial revision sequences never exceed limits") {
  std::mt19937_64 rng(5);
  for (MechanismType t : kAllMechanisms) {
    for (int trial = 0; trial < 300; ++trial) {
      const CustomerBid start = t == MechanismType::T1
                                    ? CustomerBid::range(Money::cents(700), Money::cents(1000))
                                : t == MechanismType::T3 ? CustomerBid::single(Money::cents(1100))
                                                         : CustomerBid::single(Money::cents(1000));
      Auction a = opened(t, start, quote(1000, 500));
      Money prev = a.state().customer_bid.cap;
      for (int step = 0; step < 6; ++step) {
        const Money cap = Money::cents(std::uniform_int_distribution<std::int64_t>(400, 1600)(rng));
        const Tick at = std::uniform_int_distribution<Tick>(0, minutes(12))(rng);
        const CustomerBid nb = t == MechanismType::T1
                                   ? CustomerBid::range(min(Money::cents(700), cap), cap)
                                   : CustomerBid::single(cap);
        try {
          a.revise_customer_bid(nb, at);
          const bool up = t != MechanismType::T2;
          CHECK((up ? cap > prev : cap < prev));
          CHECK(at <= minutes(10));
          prev = cap;
        } catch (const Error& e) {
          CHECK(e.kind() == ErrorKind::RevisionRejected);
        }
        REQUIRE(a.state().customer_bid.revision_count <= revision_limit(t));
      }
    }
  }
}

TEST_CASE("drivers revise at most once per customer revision") {
  LockoutRegistry none;
  Auction a = opened(MechanismType::T3, CustomerBid::single(Money::cents(1200)), quote(1000, 500));
  a.submit_driver_bid(DriverId(0), DriverPreference::manual(Money::cents(1100)), 1, none);
  CHECK(kind_of([&] { a.submit_driver_bid(DriverId(0), DriverPreference::manual(Money::cents(1050)), 2, none); }) ==
        ErrorKind::RejectedBid);
  a.revise_customer_bid(CustomerBid::single(Money::cents(1300)), 30);
  a.submit_driver_bid(DriverId(0), DriverPreference::manual(Money::cents(1250)), 31, none);
  CHECK(kind_of([&] { a.submit_driver_bid(DriverId(0), DriverPreference::manual(Money::cents(1240)), 32, none); }) ==
        ErrorKind::RejectedBid);
}

TEST_CASE("assignment order and tie breaks") {
  LockoutRegistry reg;
  const PriceQuote q = quote(1000, 500);
  Auction a = Auction::open(RideId(1), CustomerId(1), CustomerBid::single(Money::cents(1000)), q,
                            params_for(MechanismType::T2), 0);
  // A = 0 (ETA 5 min), B = 1 (ETA 3 min), C = 2.
  a.select_drivers(std::vector<DriverSnapshot>{{DriverId(0), 300, 0.5}, {DriverId(1), 180, 0.5},
                                               {DriverId(2), 200, 0.5}},
                   reg, 0);
  a.submit_driver_bid(DriverId(0), DriverPreference::manual(Money::cents(900)), 1, reg);
  a.submit_driver_bid(DriverId(1), DriverPreference::manual(Money::cents(900)), 1, reg);
  a.submit_driver_bid(DriverId(2), DriverPreference::manual(Money::cents(950)), 1, reg);
  a.assign(a.state().bid_deadline, reg);
  CHECK(a.state().primary == DriverId(1));
  CHECK(a.state().secondary == DriverId(0));
  CHECK(a.state().winning_bid == Money::cents(900));
  CHECK(a.state().phase == Phase::Assigned);
  CHECK(reg.is_blocked(DriverId(1), a.state().bid_deadline + 60));

  Auction single = opened(MechanismType::T2, CustomerBid::single(Money::cents(1000)), q);
  LockoutRegistry r2;
  single.submit_driver_bid(DriverId(3), DriverPreference::manual(Money::cents(900)), 1, r2);
  single.assign(single.state().bid_deadline, r2);
  CHECK(single.state().primary == DriverId(3));
  CHECK_FALSE(single.state().secondary.has_value());

  Auction t5 = opened(MechanismType::T5, CustomerBid::single(Money::cents(1000)), q);
  LockoutRegistry r3;
  t5.submit_driver_bid(DriverId(0), DriverPreference::manual(Money::cents(800)), 1, r3);
  t5.submit_driver_bid(DriverId(1), DriverPreference::manual(Money::cents(950)), 1, r3);
  t5.submit_driver_bid(DriverId(2), DriverPreference::manual(Money::cents(990)), 1, r3);
  t5.assign(t5.state().bid_deadline, r3);
  CHECK(t5.state().primary == DriverId(2));
  CHECK(t5.state().winning_bid == Money::cents(990));
  CHECK(t5.state().secondary == DriverId(1));

  Auction t5x = opened(MechanismType::T5, CustomerBid::single(Money::cents(1000)), q);
  LockoutRegistry r4;
  t5x.submit_driver_bid(DriverId(0), DriverPreference::manual(Money::cents(1000)), 1, r4);
  t5x.assign(t5x.state().bid_deadline, r4);
  CHECK(t5x.state().failure == FailureReason::NoFeasibleBid);

  Auction empty = opened(MechanismType::T2, CustomerBid::single(Money::cents(1000)), q);
  LockoutRegistry r5;
  empty.assign(empty.state().bid_deadline, r5);
  CHECK(empty.state().failure == FailureReason::NoBids);
}

TEST_CASE("assignment is invariant to uniform scaling") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 2000; ++trial) {
    const MechanismType t = kAllMechanisms[rng() % 5];
    const std::int64_t k = 1 + static_cast<std::int64_t>(rng() % 9);
    std::vector<RankedBid> a, b;
    const Money cap = Money::cents(1000 + static_cast<std::int64_t>(rng() % 500));
    for (int i = 0; i < 6; ++i) {
      const Money p = Money::cents(500 + static_cast<std::int64_t>(rng() % 1000));
      const Seconds eta = static_cast<Seconds>(rng() % 4) * 60;
      const double quality = static_cast<double>(rng() % 3) / 2.0;
      a.push_back({DriverId(i), p, eta, quality});
      b.push_back({DriverId(i), p * k, eta, quality});
    }
    const auto ra = rank_bids(t, cap, a);
    const auto rb = rank_bids(t, cap * k, b);
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size() && i < 2; ++i) CHECK(ra[i].driver == rb[i].driver);
    CHECK(rank_bids(t, cap, a).size() == ra.size());
  }
}

TEST_CASE("no-bid fees") {
  LockoutRegistry none;
  Auction a = opened(MechanismType::T2, CustomerBid::single(Money::cents(1000)), quote(1000, 500), 4);
  a.submit_driver_bid(DriverId(0), DriverPreference::manual(Money::cents(900)), 1, none);
  a.submit_driver_bid(DriverId(1), DriverPreference::no_bid(), 1, none);
  a.withdraw_bid(DriverId(0));
  const auto liable = a.no_bid_fee_liable();
  CHECK(std::find(liable.begin(), liable.end(), DriverId(0)) == liable.end());
  CHECK(std::find(liable.begin(), liable.end(), DriverId(1)) != liable.end());
  CHECK(std::find(liable.begin(), liable.end(), DriverId(2)) != liable.end());

  Auction t1 = opened(MechanismType::T1, CustomerBid::range(Money::cents(800), Money::cents(1000)),
                      quote(1000, 500), 4);
  CHECK(t1.no_bid_fee_liable().empty());
}

TEST_CASE("lockout registry") {
  LockoutRegistry reg;
  CHECK(reg.reserve(DriverId(1), RideId(1), hours(2), hours(1), hours(1)));
  CHECK_FALSE(reg.reserve(DriverId(1), RideId(2), hours(2) + minutes(90), hours(1), hours(1)));
  CHECK(reg.reserve(DriverId(1), RideId(3), hours(4), hours(1), hours(1)));
  CHECK(reg.is_blocked(DriverId(1), hours(1)));
  CHECK(reg.is_blocked(DriverId(1), hours(3)));
  CHECK_FALSE(reg.is_blocked(DriverId(1), hours(5)));
  CHECK_FALSE(reg.find_overlap().has_value());
  reg.set_off_duty(DriverId(2), 100, 1800);
  CHECK(reg.is_off_duty(DriverId(2)));
  CHECK_FALSE(reg.return_to_duty(DriverId(2), 1000));
  CHECK(reg.return_to_duty(DriverId(2), 1900));
  CHECK_FALSE(reg.is_off_duty(DriverId(2)));
}
