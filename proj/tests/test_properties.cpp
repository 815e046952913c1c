// Randomized property checks. Every loop is seeded, so failures reproduce.
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mgsim/agents.hpp"
#include "mgsim/energy_models.hpp"
#include "mgsim/metrics.hpp"
#include "mgsim/synthetic.hpp"
#include "support.hpp"

using namespace mgsim;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

PiecewiseLinear power_curve() { return PiecewiseLinear({{0.0, 1.0}, {0.8, 1.0}, {1.0, 0.02}}); }
PiecewiseLinear efficiency_curve() {
  return PiecewiseLinear({{0.0, 0.83}, {0.3, 0.83}, {0.7, 0.9}, {0.8, 0.9}, {1.0, 0.85}});
}

}  // namespace

TEST(Property, TankStaysWithinCapacity) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    ThermalTank tank{uniform(rng, 0.0, 50.0), 0.0, uniform(rng, 0.0, 0.1), uniform(rng, 0.5, 1.0)};
    for (int t = 0; t < 100; ++t) {
      const double demand = uniform(rng, 0.0, 10.0);
      const auto r = tank_step(tank, uniform(rng, -1.5, 1.5), demand, demand + uniform(rng, 0.0, 10.0));
      ASSERT_GE(r.new_stored, 0.0);
      ASSERT_LE(r.new_stored, tank.capacity_kwh);
      ASSERT_LE(r.q_from_storage_to_building, demand + 1e-12);
      tank.stored_energy = r.new_stored;
    }
  }
}

TEST(Property, BatteryStaysWithinCapacity) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const double cap = uniform(rng, 1.0, 100.0);
    Battery b{.capacity_initial = cap, .capacity = cap, .stored_energy = 0.0, .nominal_power = uniform(rng, 0.5, 50.0),
              .c_loss = uniform(rng, 0.0, 1e-3), .loss_coef = uniform(rng, 0.0, 0.01),
              .capacity_power_curve = power_curve(), .power_efficiency_curve = efficiency_curve()};
    for (int t = 0; t < 100; ++t) {
      const auto r = battery_step(b, uniform(rng, -1.5, 1.5));
      ASSERT_GE(r.new_stored, 0.0);
      ASSERT_LE(r.new_stored, r.new_capacity);
      ASSERT_LE(std::abs(r.energy_in_out), battery_max_power(b, b.soc()) + 1e-12);
      b.stored_energy = r.new_stored;
      b.capacity = r.new_capacity;
    }
  }
}

TEST(Property, RoundTripRecoversEfficiencyShare) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const double eta = uniform(rng, 0.5, 1.0);
    const double cap = uniform(rng, 5.0, 100.0);
    Battery b{.capacity_initial = cap, .capacity = cap, .nominal_power = 10.0 * cap, .efficiency = eta};
    const auto c = battery_step(b, uniform(rng, 0.01, 1.0));
    b.stored_energy = c.new_stored;
    const auto d = battery_step(b, -1.0);
    ASSERT_NEAR(-d.grid_side_energy, eta * c.grid_side_energy, 1e-9 * c.grid_side_energy);

    ThermalTank tank{cap, 0.0, 0.0, eta};
    const auto tc = tank_step(tank, uniform(rng, 0.01, 1.0), 0.0, 10.0 * cap);
    tank.stored_energy = tc.new_stored;
    const auto td = tank_step(tank, -1.0, 10.0 * cap, 10.0 * cap);
    ASSERT_NEAR(td.q_from_storage_to_building, eta * tc.q_supply_for_charge, 1e-9 * tc.q_supply_for_charge);
  }
}

TEST(Property, CopMonotoneInsideUnclampedRegion) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    HeatPump hp;
    hp.eta_tech = uniform(rng, 0.15, 0.35);
    hp.t_target_cooling = uniform(rng, 5.0, 12.0);
    hp.t_target_heating = uniform(rng, 45.0, 60.0);
    double prev_c = kCopMax + 1.0, prev_h = 0.0;
    for (double t = -10.0; t <= 45.0; t += 0.25) {
      const double c = cop_cooling(hp, t);
      const double h = cop_heating(hp, t);
      const bool c_free = c > kCopMin && c < kCopMax;
      const bool h_free = h > kCopMin && h < kCopMax;
      if (c_free && prev_c > kCopMin && prev_c < kCopMax) ASSERT_LT(c, prev_c);
      if (h_free && prev_h > kCopMin && prev_h < kCopMax) ASSERT_GT(h, prev_h);
      prev_c = c;
      prev_h = h;
    }
  }
}

TEST(Property, BatteryCapacityNeverGrows) {
  std::mt19937_64 rng(5);
  for (double c_loss : {0.0, 1e-5, 1e-3}) {
    Battery b{.capacity_initial = 50.0, .capacity = 50.0, .nominal_power = 25.0, .c_loss = c_loss};
    for (int t = 0; t < 1000; ++t) {
      const auto r = battery_step(b, uniform(rng, -1.0, 1.0));
      if (c_loss == 0.0) {
        ASSERT_EQ(r.new_capacity, 50.0);
      } else {
        ASSERT_LE(r.new_capacity, b.capacity);
      }
      b.capacity = r.new_capacity;
      b.stored_energy = r.new_stored;
    }
  }
}

TEST(Property, ClampingIsIdempotent) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    ThermalTank tank{uniform(rng, 1.0, 20.0), 0.0, uniform(rng, 0.0, 0.05), uniform(rng, 0.6, 1.0)};
    tank.stored_energy = uniform(rng, 0.0, tank.capacity_kwh);
    const double demand = uniform(rng, 0.0, 8.0);
    const double supply = demand + uniform(rng, 0.0, 8.0);
    const auto first = tank_step(tank, uniform(rng, -2.0, 2.0), demand, supply);
    const auto again = tank_step(tank, first.executed_action, demand, supply);
    ASSERT_NEAR(again.new_stored, first.new_stored, 1e-12);
    ASSERT_NEAR(again.executed_action, first.executed_action, 1e-12);

    Battery b{.capacity_initial = 40.0, .capacity = 40.0, .stored_energy = uniform(rng, 0.0, 40.0),
              .nominal_power = uniform(rng, 1.0, 40.0), .capacity_power_curve = power_curve(),
              .power_efficiency_curve = efficiency_curve()};
    const auto bf = battery_step(b, uniform(rng, -2.0, 2.0));
    const auto ba = battery_step(b, bf.executed_action);
    ASSERT_NEAR(ba.energy_in_out, bf.energy_in_out, 1e-12);
    ASSERT_NEAR(ba.grid_side_energy, bf.grid_side_energy, 1e-12);
  }
}

TEST(Property, ThermalDemandAlwaysMetAndBooksBalance) {
  const auto ds = testsupport::share(generate_synthetic_dataset(4, 24 * 30, 21));
  Environment env(ds);
  env.reset();
  std::mt19937_64 rng(7);
  while (!env.done()) {
    const auto r = env.step(random_actions(env.action_counts(), env.mode(), rng));
    for (const auto& bi : r.info) {
      ASSERT_NEAR(bi.cooling_delivered(), bi.cooling_demand, 1e-9 * std::max(1.0, bi.cooling_demand));
      ASSERT_NEAR(bi.dhw_delivered(), bi.dhw_demand, 1e-9 * std::max(1.0, bi.dhw_demand));
      const double sum = bi.e_cooling + bi.e_dhw + bi.e_appliances - bi.pv_gen + bi.e_battery_grid_side;
      ASSERT_NEAR(bi.e_net, sum, 1e-9 * std::max(1.0, std::abs(sum)));
      ASSERT_NEAR(bi.e_no_storage + bi.e_cooling_storage + bi.e_dhw_storage + bi.e_battery_grid_side, bi.e_net,
                  1e-9 * std::max(1.0, std::abs(bi.e_net)));
      ASSERT_NEAR(bi.e_no_pv_no_storage - bi.pv_gen, bi.e_no_storage, 1e-9 * std::max(1.0, bi.e_no_pv_no_storage));
    }
  }
}

TEST(Property, NoStorageNoPvIsActionIndependent) {
  auto d = generate_synthetic_dataset(2, 96, 13);
  for (auto& b : d.buildings) b.attributes.pv.reset();
  auto ds = testsupport::share(testsupport::without_storage(make_dataset(d.buildings, d.weather, d.solar)));
  Environment a(ds), b(ds);
  a.reset();
  b.reset();
  std::mt19937_64 rng(1);
  while (!a.done()) {
    const auto ra = a.step(random_actions(a.action_counts(), a.mode(), rng));
    const auto rb = b.step(random_actions(b.action_counts(), b.mode(), rng));
    for (std::size_t i = 0; i < ra.info.size(); ++i) ASSERT_EQ(ra.info[i].e_net, rb.info[i].e_net);
  }
}

TEST(Property, IdenticalRunsAreBitIdentical) {
  const auto ds = testsupport::share(generate_synthetic_dataset(3, 200, 17));
  auto run = [&] {
    Environment env(ds);
    std::mt19937_64 rng(11);
    std::vector<StepResult> out;
    out.push_back(StepResult{env.reset(), {}, false, 0.0, {}});
    while (!env.done()) out.push_back(env.step(random_actions(env.action_counts(), env.mode(), rng)));
    return std::make_pair(out, env.trackers());
  };
  const auto [ra, ta] = run();
  const auto [rb, tb] = run();
  ASSERT_EQ(ra.size(), rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ASSERT_EQ(ra[i].states, rb[i].states);
    ASSERT_EQ(ra[i].rewards, rb[i].rewards);
    ASSERT_EQ(ra[i].district_net, rb[i].district_net);
  }
  EXPECT_EQ(ta, tb);
}

TEST(Property, ScoresAreScaleCovariant) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(72), b(72);
    for (auto& v : a) v = uniform(rng, 0.1, 10.0);
    for (auto& v : b) v = uniform(rng, 0.1, 10.0);
    const double k = uniform(rng, 0.1, 10.0);
    std::vector<double> ka(a), kb(b);
    for (auto& v : ka) v *= k;
    for (auto& v : kb) v *= k;
    const auto r1 = score(a, b);
    const auto r2 = score(ka, kb);
    for (std::size_t m = 0; m < r1.scores.size(); ++m) {
      ASSERT_NEAR(r1.scores[m].normalized, r2.scores[m].normalized, 1e-9);
    }
  }
}

TEST(Property, DominatedSeriesNeverCostMore) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> hi(60), lo(60);
    for (std::size_t t = 0; t < hi.size(); ++t) {
      hi[t] = uniform(rng, -2.0, 10.0);
      lo[t] = hi[t] - uniform(rng, 0.0, 3.0);
    }
    for (auto m : {Metric::net_electricity_consumption, Metric::quadratic, Metric::peak_demand,
                   Metric::average_daily_peak}) {
      ASSERT_LE(evaluate(m, lo), evaluate(m, hi)) << to_string(m);
    }
  }
}

TEST(Property, ClippingMatchesPreClippedSeries) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> e(50);
    for (auto& v : e) v = uniform(rng, -5.0, 5.0);
    e[0] = 1.0;  // keep a positive value so the load factor is defined
    const auto c = clip_non_negative(e);
    for (auto m : {Metric::ramping, Metric::one_minus_load_factor, Metric::average_daily_peak, Metric::peak_demand,
                   Metric::net_electricity_consumption, Metric::quadratic}) {
      ASSERT_EQ(evaluate(m, e), evaluate(m, c));
    }
  }
}

TEST(Property, GreedyChoiceInvariantUnderShift) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    QTable q({1}, {{-1.0, 0.0, 1.0}, {-1.0, 1.0}}, {0.1, 0.9, 0.0});
    for (std::size_t i = 0; i < q.action_tuple_count(); ++i) q.set({0}, q.action_key(i), uniform(rng, -5.0, 5.0));
    const auto before = q.greedy({0});
    const double shift = uniform(rng, -100.0, 100.0);
    for (std::size_t i = 0; i < q.action_tuple_count(); ++i) {
      q.set({0}, q.action_key(i), q.value({0}, q.action_key(i)) + shift);
    }
    ASSERT_EQ(q.greedy({0}), before);
  }
}
