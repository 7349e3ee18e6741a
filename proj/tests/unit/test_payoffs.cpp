#include <doctest.h>

#include <random>

#include "core/error.hpp"
#include "payoff_oracle.hpp"
#include "payoffs/payoffs.hpp"
#include "payoffs/welfare.hpp"

using namespace bidride;

namespace {

Money c(std::int64_t v) { return Money::cents(v); }

}  // namespace

TEST_CASE("base price") {
  PlatformEconomics e;
  e.beta_v = c(60);
  e.beta_f = c(40);
  CHECK(compute_base_price(e, Fraction::from_double(0.8), Money::zero()) == c(500));
  e.beta_v = e.beta_f = Money::zero();
  CHECK(compute_base_price(e, Fraction::from_double(0.8), Money::zero()) == c(0));
  e.beta_v = c(100);
  CHECK(compute_base_price(e, Fraction::from_double(0.8), c(600)) == c(0));
  CHECK_THROWS_AS(compute_base_price(e, Fraction::from_double(0.8), c(-1)), Error);
}

TEST_CASE("base price is the smallest break-even price") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    PlatformEconomics e;
    e.beta_v = c(static_cast<std::int64_t>(rng() % 200));
    e.beta_f = c(static_cast<std::int64_t>(rng() % 200));
    e.taxes_rate = Fraction::from_ppb(static_cast<std::int64_t>(rng() % 200'000'000));
    PricingParams p;
    p.payout_fraction = Fraction::from_ppb(750'000'000 + static_cast<std::int64_t>(rng() % 150'000'000));
    const Money base = compute_base_price(e, p.expected_fee_split(), Money::zero());
    // Unrounded retention (1-s)(p(1-t)) - C, scaled by 1e18.
    auto retained = [&](Money price) {
      const __int128 keep = 1'000'000'000 - p.expected_fee_split().ppb();
      const __int128 net = 1'000'000'000 - e.taxes_rate.ppb();
      return keep * net * price.cents() -
             static_cast<__int128>(e.platform_cost().cents()) * 1'000'000'000'000'000'000;
    };
    CHECK(retained(base) >= 0);
    if (base > c(0)) CHECK(retained(base - c(1)) < 0);
  }
}

TEST_CASE("driver fee split") {
  PricingParams p;
  p.blackcar_payout_fraction = Fraction::from_double(0.85);
  p.payout_fraction = Fraction::from_double(0.80);
  CHECK(compute_driver_fee(c(1000), c(100), c(0), p) == c(720));
  CHECK(compute_driver_fee(c(0), c(0), c(0), p) == c(0));
  p.payout_fraction = Fraction::from_double(0.90);
  p.blackcar_payout_fraction = Fraction::from_double(0.75);
  CHECK(compute_driver_fee(c(1000), c(0), c(0), p) == c(750));
  CHECK_THROWS_AS(compute_driver_fee(c(100), c(80), c(30), p), Error);
}

TEST_CASE("clearing price branches") {
  auto r = clearing_price(MechanismType::T1, c(1200), c(900), c(800), c(1000));
  CHECK(r.price == c(900));
  CHECK(r.branch == Branch::Po1);
  CHECK(r.feasible);
  r = clearing_price(MechanismType::T1, c(700), c(900), c(800), c(1000));
  CHECK(r.price == c(900));
  CHECK(r.branch == Branch::Po2);
  CHECK_FALSE(r.feasible);
  r = clearing_price(MechanismType::T1, c(1000), c(1000), c(1000), c(1000));
  CHECK(r.price == c(1000));
  CHECK(r.branch == Branch::Po1);
  CHECK(clearing_price(MechanismType::T2, c(900), c(700), c(800), c(900)).price == c(800));
  CHECK(clearing_price(MechanismType::T3, c(1500), c(900), c(500), c(1000)).price == c(1000));
  CHECK(clearing_price(MechanismType::T5, c(1000), c(990), c(500), c(800)).price == c(990));
}

TEST_CASE("platform payoff") {
  PlatformEconomics e;
  e.beta_v = c(60);
  e.beta_f = c(40);
  CHECK(platform_payoff(c(900), c(720), e, Combinator::Product) == c(80));
  e.beta_id = Probability::zero();
  e.psi_ob = c(100);
  e.beta_ob = Probability::one();
  e.beta_lb = Probability::one();
  CHECK(platform_payoff(c(900), c(720), e, Combinator::Product) == c(0));
  e.beta_id = Probability::from_double(0.5);
  e.beta_ob = Probability::from_double(0.4);
  e.beta_lb = Probability::from_double(0.5);
  CHECK(platform_payoff(c(900), c(720), e, Combinator::Product) == c(20));
  CHECK(platform_payoff_value(c(900), c(720), e, Combinator::Product) == doctest::Approx(20.0));
}

TEST_CASE("driver payoff") {
  DriverEconomics d;
  d.d_v = c(500);
  d.d_f = c(300);
  d.psi_od = c(400);
  d.beta_od = Probability::from_double(0.5);
  d.beta_ld = Probability::one();
  CHECK(driver_payoff(c(2000), d, Combinator::Product) == c(1000));
  CHECK(driver_payoff(c(0), d, Combinator::Product) == c(0));
  CHECK(driver_payoff(c(700), d, Combinator::Product) == c(0));
}

TEST_CASE("driver payoff monotonicity") {
  std::mt19937_64 rng(9);
  auto rnd = [&](std::int64_t hi) { return static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi)); };
  for (int i = 0; i < 5000; ++i) {
    DriverEconomics d;
    d.d_v = c(rnd(2000));
    d.d_f = c(rnd(1000));
    d.psi_od = c(rnd(1000));
    d.beta_od = Probability::from_ppb(rnd(1'000'000'001));
    d.beta_ld = Probability::from_ppb(rnd(1'000'000'001));
    d.beta_id = Probability::from_ppb(rnd(1'000'000'001));
    d.beta_idw = Probability::from_ppb(rnd(1'000'000'001));
    const Combinator comb = static_cast<Combinator>(rnd(3));
    const Money fee = c(rnd(5000));
    const Money base = driver_payoff(fee, d, comb);
    REQUIRE(base >= Money::zero());
    CHECK(driver_payoff(fee + c(1 + rnd(100)), d, comb) >= base);
    DriverEconomics more = d;
    more.d_v += c(1 + rnd(100));
    CHECK(driver_payoff(fee, more, comb) <= base);
    more = d;
    more.d_f += c(1 + rnd(100));
    CHECK(driver_payoff(fee, more, comb) <= base);
    more = d;
    more.psi_od += c(1 + rnd(100));
    CHECK(driver_payoff(fee, more, comb) <= base);
  }
}

TEST_CASE("payoffs agree with the expression-tree oracle") {
  std::mt19937_64 rng(77);
  auto rnd = [&](std::int64_t hi) { return static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi)); };
  for (int i = 0; i < 2000; ++i) {
    const int type = 1 + static_cast<int>(rnd(5));
    const std::int64_t cap = rnd(3000), w = rnd(3000), base = rnd(1500), std_ = rnd(3000);
    const auto got = clearing_price(static_cast<MechanismType>(type), c(cap), c(w), c(base), c(std_));
    const auto want = oracle::clearing_tree(type, cap, w, base, std_);
    REQUIRE(got.price.cents() == oracle::round_half_up(oracle::eval(want.price)));
    REQUIRE(got.feasible == want.feasible);
  }
}

TEST_CASE("welfare metrics") {
  CHECK(surplus_and_dwl({}).deadweight_loss == Money::zero());
  std::vector<TradeRecord> all_trade = {
      {c(1500), c(800), true, c(1000), c(780), c(700)},
      {c(1200), c(900), true, c(1100), c(900), c(800)}};
  auto m = surplus_and_dwl(all_trade);
  CHECK(m.deadweight_loss == Money::zero());
  CHECK(m.consumer_surplus == c(600));
  CHECK(m.producer_surplus == c(180));
  CHECK(m.executed == 2);

  std::vector<TradeRecord> lost = {{c(900), c(700), false, {}, {}, {}},
                                   {c(600), c(700), false, {}, {}, {}}};
  m = surplus_and_dwl(lost);
  CHECK(m.deadweight_loss == c(200));
  CHECK(m.forgone == 1);

  CHECK_THROWS_AS(compare_welfare(1, lost, 2, lost), Error);
  CHECK(compare_welfare(4, lost, 4, lost).baseline.deadweight_loss == c(200));
}

TEST_CASE("driver regret") {
  const Money alt[] = {c(800)};
  CHECK(driver_regret(c(1000), alt) == Money::zero());
  const Money alt2[] = {c(300), c(900)};
  CHECK(driver_regret(c(500), alt2) == c(400));
  CHECK(driver_regret(c(500), {}) == Money::zero());
}
