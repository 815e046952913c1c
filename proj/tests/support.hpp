#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mgsim/dataset.hpp"

namespace testsupport {

struct SimpleBuilding {
  std::vector<double> cooling;
  std::vector<double> dhw;
  std::vector<double> appliances;
  mgsim::BuildingAttributes attributes;
  std::optional<mgsim::StateActionConfig> state_actions;
};

// Hand-built dataset: month 1 throughout, hour = t % 24 + 1, solar per kW as given.
inline mgsim::Dataset make_dataset(std::vector<SimpleBuilding> specs, const std::vector<double>& t_out,
                                   const std::vector<double>& solar_per_kw,
                                   std::optional<mgsim::Period> period = std::nullopt,
                                   mgsim::ControlMode mode = mgsim::ControlMode::decentralized, std::uint64_t seed = 0) {
  std::vector<mgsim::BuildingData> buildings;
  for (std::size_t b = 0; b < specs.size(); ++b) {
    auto& s = specs[b];
    mgsim::BuildingData bd;
    bd.loads.building_id = "B" + std::to_string(b + 1);
    for (std::size_t t = 0; t < s.cooling.size(); ++t) {
      mgsim::LoadRecord r;
      r.month = 1;
      r.hour = static_cast<int>(t % 24) + 1;
      r.day_type = static_cast<int>(t / 24) % 7 + 1;
      r.daylight_savings_status = 0;
      r.indoor_temp = 23.0;
      r.avg_unmet_setpoint = 0.1 * static_cast<double>(t % 3);
      r.indoor_rh = 50.0;
      r.cooling_load = s.cooling[t];
      r.dhw_heating = s.dhw.empty() ? 0.0 : s.dhw[t];
      r.equipment_electric_power = s.appliances.empty() ? 0.0 : s.appliances[t];
      bd.loads.records.push_back(r);
    }
    bd.attributes = s.attributes;
    bd.state_actions = s.state_actions ? *s.state_actions : mgsim::default_state_actions(s.attributes);
    buildings.push_back(std::move(bd));
  }
  mgsim::WeatherSeries weather;
  for (double v : t_out) weather.records.push_back({v, 60.0, 100.0, 300.0});
  mgsim::SolarProfile solar{solar_per_kw};
  return mgsim::make_dataset(std::move(buildings), std::move(weather), std::move(solar), period, mode, seed);
}

inline std::shared_ptr<const mgsim::Dataset> share(mgsim::Dataset ds) {
  return std::make_shared<const mgsim::Dataset>(std::move(ds));
}

// Copy with every storage capacity removed (tanks sized 0, battery capacity 0).
inline mgsim::Dataset without_storage(mgsim::Dataset ds) {
  for (auto& b : ds.buildings) {
    if (b.attributes.cooling_tank) b.attributes.cooling_tank->capacity_multiple = 0.0;
    if (b.attributes.dhw_tank) b.attributes.dhw_tank->capacity_multiple = 0.0;
    if (b.attributes.battery) {
      b.attributes.battery->capacity_kwh = 0.0;
    }
  }
  return ds;
}

}  // namespace testsupport
