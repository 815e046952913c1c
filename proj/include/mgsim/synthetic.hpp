#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgsim/dataset.hpp"

namespace mgsim {

namespace detail {

// Uniform in [0, 1) from the raw 64-bit engine output; std distributions are
// not bit-reproducible across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double symmetric_noise(std::mt19937_64& rng, double half_width) {
  return (2.0 * unit_uniform(rng) - 1.0) * half_width;
}

struct Calendar {
  int month;
  int day_of_year;  // 0-based
  int hour;         // 1..24
  int day_type;     // 1 = Sunday .. 7 = Saturday
  int dst;
};

inline Calendar calendar_at(std::size_t t) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const auto day = static_cast<int>(t / 24);
  const int doy = day % 365;
  int month = 1, acc = 0;
  for (int m = 0; m < 12; ++m) {
    if (doy < acc + kDays[m]) {
      month = m + 1;
      break;
    }
    acc += kDays[m];
  }
  return {month, doy, static_cast<int>(t % 24) + 1, day % 7 + 1, (month >= 3 && month <= 10) ? 1 : 0};
}

}  // namespace detail

/// Seeded synthetic district: sinusoidal weather and loads with bounded noise.
/// Identical arguments give bit-identical datasets.
inline Dataset generate_synthetic_dataset(std::size_t n_buildings, std::size_t horizon, std::uint64_t seed) {
  if (n_buildings < 1) throw DatasetError("synthetic dataset needs at least one building");
  if (horizon < 24) throw DatasetError("synthetic dataset horizon must be at least 24 hours");

  using std::numbers::pi;
  std::mt19937_64 rng(seed);

  WeatherSeries weather;
  SolarProfile solar;
  weather.records.reserve(horizon);
  solar.generation_per_kw.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto cal = detail::calendar_at(t);
    const double season = std::sin(2.0 * pi * (cal.day_of_year - 110) / 365.0);
    const double daily = std::sin(2.0 * pi * (cal.hour - 9) / 24.0);
    const double daylight = std::max(0.0, std::sin(pi * (cal.hour - 6) / 14.0));
    const double clearness = 0.75 + 0.25 * detail::unit_uniform(rng);

    WeatherRecord w;
    w.t_out = 20.0 + 9.0 * season + 5.0 * daily + detail::symmetric_noise(rng, 1.0);
    w.rh_out = std::clamp(62.0 - 18.0 * daily + detail::symmetric_noise(rng, 5.0), 5.0, 100.0);
    const double radiation = daylight * (0.8 + 0.2 * season);
    w.direct_solar = 650.0 * radiation * clearness;
    w.diffuse_solar = 140.0 * radiation * (1.2 - 0.2 * clearness);
    weather.records.push_back(w);
    solar.generation_per_kw.push_back(0.75 * radiation * clearness);
  }

  std::vector<BuildingData> buildings;
  buildings.reserve(n_buildings);
  for (std::size_t b = 0; b < n_buildings; ++b) {
    const double scale = 0.6 + 0.8 * detail::unit_uniform(rng);
    const double occupancy_shift = detail::symmetric_noise(rng, 2.0);
    const bool office = b % 3 == 0;

    BuildingData bd;
    bd.loads.building_id = "Building_" + std::to_string(b + 1);
    bd.loads.records.reserve(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      const auto cal = detail::calendar_at(t);
      const auto& w = weather.records[t];
      const double hour = cal.hour + occupancy_shift;
      const double occupied = office ? ((hour >= 8 && hour <= 19 && cal.day_type != 1 && cal.day_type != 7) ? 1.0 : 0.2)
                                     : (0.5 + 0.5 * std::max(0.0, std::cos(2.0 * pi * (hour - 19) / 24.0)));
      const double morning = std::exp(-0.5 * std::pow((hour - 7.5) / 1.2, 2.0));
      const double evening = std::exp(-0.5 * std::pow((hour - 19.5) / 1.5, 2.0));

      LoadRecord r;
      r.month = cal.month;
      r.hour = cal.hour;
      r.day_type = cal.day_type;
      r.daylight_savings_status = cal.dst;
      r.cooling_load = scale * std::max(0.0, 2.2 * (w.t_out - 16.0) * (0.4 + 0.6 * occupied) +
                                                 detail::symmetric_noise(rng, 1.5));
      r.dhw_heating = scale * std::max(0.0, 0.4 + 3.5 * morning + 2.5 * evening + detail::symmetric_noise(rng, 0.3));
      r.equipment_electric_power = scale * std::max(0.1, 4.0 + 8.0 * occupied + detail::symmetric_noise(rng, 0.8));
      r.indoor_temp = 23.0 + 0.1 * std::max(0.0, w.t_out - 25.0) + detail::symmetric_noise(rng, 0.3);
      r.avg_unmet_setpoint = std::max(0.0, 0.05 * (w.t_out - 30.0) + detail::symmetric_noise(rng, 0.05));
      r.indoor_rh = std::clamp(45.0 + 0.2 * (w.rh_out - 60.0) + detail::symmetric_noise(rng, 2.0), 0.0, 100.0);
      bd.loads.records.push_back(r);
    }

    auto& a = bd.attributes;
    a.heat_pump = {0.2 + 0.1 * detail::unit_uniform(rng), 7.0 + 3.0 * detail::unit_uniform(rng), 50.0};
    if (b % 4 != 3) a.electric_heater = ElectricHeaterAttributes{0.9 + 0.08 * detail::unit_uniform(rng)};
    a.cooling_tank = ThermalTankAttributes{3.0, 0.006, 0.9};
    a.dhw_tank = ThermalTankAttributes{3.0, 0.008, 0.9};
    BatteryAttributes bat;
    bat.capacity_kwh = std::round(40.0 * scale);
    bat.nominal_power = std::round(20.0 * scale);
    bat.c_loss = 1e-5;
    bat.loss_coef = 1e-4;
    bat.efficiency = 0.9;
    bat.capacity_power_curve = PiecewiseLinear({{0.0, 1.0}, {0.8, 1.0}, {1.0, 0.02}});
    bat.power_efficiency_curve = PiecewiseLinear({{0.0, 0.83}, {0.3, 0.83}, {0.7, 0.9}, {0.8, 0.9}, {1.0, 0.85}});
    a.battery = std::move(bat);
    a.pv = PvAttributes{std::round(4.0 + 16.0 * detail::unit_uniform(rng))};
    bd.state_actions = default_state_actions(a);
    buildings.push_back(std::move(bd));
  }

  return make_dataset(std::move(buildings), std::move(weather), std::move(solar));
}

}  // namespace mgsim
