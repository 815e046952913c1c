#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgsim/dataset.hpp"
#include "mgsim/energy_models.hpp"
#include "mgsim/forecast.hpp"
#include "mgsim/types.hpp"

namespace mgsim {

/// Energy balance of one building for one hour.
///
/// Identity: e_net = e_cooling + e_dhw + e_appliances + e_battery_grid_side - pv_gen.
struct BuildingStepResult {
  double e_net = 0.0;
  double e_building = 0.0;  // e_net without the battery flow
  double e_cooling = 0.0;
  double e_dhw = 0.0;
  double e_appliances = 0.0;
  double e_battery_grid_side = 0.0;
  double pv_gen = 0.0;

  // Share of e_cooling / e_dhw caused by storage charge (> 0) or saved by
  // storage discharge (< 0).
  double e_cooling_storage = 0.0;
  double e_dhw_storage = 0.0;
  // Counterfactual net consumption without any storage, and without PV too.
  double e_no_storage = 0.0;
  double e_no_pv_no_storage = 0.0;

  // Thermal bookkeeping (kWh).
  double cooling_demand = 0.0;
  double cooling_supply = 0.0;        // heat pump output, including tank charge
  double cooling_from_storage = 0.0;  // tank discharge delivered to the building
  double cooling_to_storage = 0.0;    // supply-side energy spent charging
  double dhw_demand = 0.0;
  double dhw_supply = 0.0;
  double dhw_from_storage = 0.0;
  double dhw_to_storage = 0.0;

  double cop_cooling = 0.0;
  double dhw_efficiency = 0.0;  // heater efficiency or heating COP

  /// Clamped actions actually applied, in the building's enabled-action order.
  std::vector<double> executed_actions;

  double cooling_delivered() const { return cooling_supply - cooling_to_storage + cooling_from_storage; }
  double dhw_delivered() const { return dhw_supply - dhw_to_storage + dhw_from_storage; }
};

/// A building: pre-simulated loads plus its energy supply and storage devices.
/// Devices are sized from the series peaks so demand can always be met.
class Building {
 public:
  Building(std::shared_ptr<const Dataset> dataset, std::size_t index)
      : dataset_(std::move(dataset)), index_(index) {
    if (!dataset_ || index_ >= dataset_->buildings.size()) {
      throw std::out_of_range("building index out of range");
    }
    const auto& d = data();
    const auto& a = d.attributes;

    heat_pump_.eta_tech = a.heat_pump.eta_tech;
    heat_pump_.t_target_cooling = a.heat_pump.t_target_cooling;
    heat_pump_.t_target_heating = a.heat_pump.t_target_heating.value_or(0.0);
    heat_pump_.nominal_thermal_power_cooling = d.peak_cooling;

    if (a.electric_heater) {
      electric_heater_ = ElectricHeater{a.electric_heater->efficiency, d.peak_dhw};
    } else if (a.heat_pump.t_target_heating) {
      heat_pump_.nominal_thermal_power_heating = d.peak_dhw;
    }
    if (a.cooling_tank) {
      cooling_tank_ = ThermalTank{a.cooling_tank->capacity_multiple * d.peak_cooling, 0.0,
                                  a.cooling_tank->loss_coef, a.cooling_tank->round_trip_eff};
    }
    if (a.dhw_tank) {
      dhw_tank_ = ThermalTank{a.dhw_tank->capacity_multiple * d.peak_dhw, 0.0, a.dhw_tank->loss_coef,
                              a.dhw_tank->round_trip_eff};
    }
    if (a.battery) {
      const auto& b = *a.battery;
      battery_ = Battery{.capacity_initial = b.capacity_kwh,
                         .capacity = b.capacity_kwh,
                         .stored_energy = 0.0,
                         .nominal_power = b.nominal_power,
                         .c_loss = b.c_loss,
                         .loss_coef = b.loss_coef,
                         .capacity_power_curve = b.capacity_power_curve,
                         .power_efficiency_curve = b.power_efficiency_curve,
                         .efficiency = b.efficiency};
    }
    if (a.pv) pv_ = PVArray{a.pv->capacity_kw};
  }

  const std::string& id() const { return data().id(); }
  const BuildingData& data() const { return dataset_->buildings[index_]; }
  const StateActionConfig& config() const { return data().state_actions; }
  std::size_t action_count() const { return config().actions.size(); }
  std::size_t state_count() const { return config().states.size(); }

  const HeatPump& heat_pump() const { return heat_pump_; }
  const std::optional<ElectricHeater>& electric_heater() const { return electric_heater_; }
  const std::optional<ThermalTank>& cooling_tank() const { return cooling_tank_; }
  const std::optional<ThermalTank>& dhw_tank() const { return dhw_tank_; }
  const std::optional<Battery>& battery() const { return battery_; }
  const std::optional<PVArray>& pv() const { return pv_; }
  double last_net() const { return last_net_; }

  /// Empties all storage, restores battery capacity, clears step history.
  void reset() {
    if (cooling_tank_) cooling_tank_->stored_energy = 0.0;
    if (dhw_tank_) dhw_tank_->stored_energy = 0.0;
    if (battery_) battery_->reset();
    last_net_ = 0.0;
  }

  /// Advances the building through hour `t` with one action per enabled action.
  /// Actions are clamped to [-1, 1] and overridden where they would leave any
  /// thermal demand unmet.
  BuildingStepResult step(std::size_t t, std::span<const double> actions) {
    if (actions.size() != action_count()) {
      throw std::invalid_argument(id() + ": expected " + std::to_string(action_count()) + " actions, got " +
                                  std::to_string(actions.size()));
    }
    const auto& row = data().loads.records.at(t);
    const auto& weather = dataset_->weather.records.at(t);

    double a_cooling = 0.0, a_dhw = 0.0, a_battery = 0.0;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      switch (config().actions[i]) {
        case ActionId::cooling_storage: a_cooling = actions[i]; break;
        case ActionId::dhw_storage: a_dhw = actions[i]; break;
        case ActionId::battery_storage: a_battery = actions[i]; break;
      }
    }

    BuildingStepResult r;

    // Cooling: heat pump, optionally buffered by the chilled-water tank.
    r.cooling_demand = row.cooling_load;
    r.cop_cooling = cop_cooling(heat_pump_, weather.t_out);
    double exec_cooling = 0.0;
    if (cooling_tank_) {
      const auto tr = tank_step(*cooling_tank_, a_cooling, r.cooling_demand,
                                heat_pump_.nominal_thermal_power_cooling);
      cooling_tank_->stored_energy = tr.new_stored;
      r.cooling_from_storage = tr.q_from_storage_to_building;
      r.cooling_to_storage = tr.q_supply_for_charge;
      exec_cooling = tr.executed_action;
    }
    r.cooling_supply = std::max(0.0, r.cooling_demand - r.cooling_from_storage) + r.cooling_to_storage;
    r.e_cooling = heat_pump_electricity(r.cooling_supply, r.cop_cooling);
    const double e_cooling_direct = heat_pump_electricity(r.cooling_demand, r.cop_cooling);
    r.e_cooling_storage = r.e_cooling - e_cooling_direct;

    // DHW: electric heater if present, else heat pump in heating mode.
    r.dhw_demand = row.dhw_heating;
    double dhw_supply_max = 0.0;
    if (electric_heater_) {
      r.dhw_efficiency = electric_heater_->efficiency;
      dhw_supply_max = electric_heater_->nominal_power;
    } else if (data().attributes.heat_pump.t_target_heating) {
      r.dhw_efficiency = cop_heating(heat_pump_, weather.t_out);
      dhw_supply_max = heat_pump_.nominal_thermal_power_heating;
    } else {
      r.dhw_efficiency = 1.0;  // no DHW demand by validation
    }
    double exec_dhw = 0.0;
    if (dhw_tank_) {
      const auto tr = tank_step(*dhw_tank_, a_dhw, r.dhw_demand, dhw_supply_max);
      dhw_tank_->stored_energy = tr.new_stored;
      r.dhw_from_storage = tr.q_from_storage_to_building;
      r.dhw_to_storage = tr.q_supply_for_charge;
      exec_dhw = tr.executed_action;
    }
    r.dhw_supply = std::max(0.0, r.dhw_demand - r.dhw_from_storage) + r.dhw_to_storage;
    r.e_dhw = r.dhw_supply / r.dhw_efficiency;
    const double e_dhw_direct = r.dhw_demand / r.dhw_efficiency;
    r.e_dhw_storage = r.e_dhw - e_dhw_direct;

    // Battery: no load-based limits.
    double exec_battery = 0.0;
    if (battery_) {
      const auto br = battery_step(*battery_, a_battery);
      battery_->stored_energy = br.new_stored;
      battery_->capacity = br.new_capacity;
      r.e_battery_grid_side = br.grid_side_energy;
      exec_battery = br.executed_action;
    }

    r.e_appliances = row.equipment_electric_power;
    r.pv_gen = pv_ ? pv_generation(*pv_, dataset_->solar.generation_per_kw.at(t)) : 0.0;
    r.e_building = r.e_cooling + r.e_dhw + r.e_appliances - r.pv_gen;
    r.e_net = r.e_building + r.e_battery_grid_side;
    r.e_no_storage = e_cooling_direct + e_dhw_direct + r.e_appliances - r.pv_gen;
    r.e_no_pv_no_storage = e_cooling_direct + e_dhw_direct + r.e_appliances;

    r.executed_actions.reserve(action_count());
    for (auto a : config().actions) {
      switch (a) {
        case ActionId::cooling_storage: r.executed_actions.push_back(exec_cooling); break;
        case ActionId::dhw_storage: r.executed_actions.push_back(exec_dhw); break;
        case ActionId::battery_storage: r.executed_actions.push_back(exec_battery); break;
      }
    }
    last_net_ = r.e_net;
    return r;
  }

  /// Value of one state variable at hour `t` (clamped to the series end).
  /// net_electricity_consumption reports the previous step (0 after reset).
  double state_value(StateId s, std::size_t t, const Forecaster& forecaster) const {
    const std::size_t horizon = dataset_->horizon();
    const std::size_t ti = std::min(t, horizon - 1);
    const auto& row = data().loads.records[ti];
    const auto& weather = dataset_->weather;
    const auto& w = weather.records[ti];
    auto pred = [&](ForecastLead lead, WeatherVariable v) { return forecaster.forecast(weather, ti, lead, v); };
    using L = ForecastLead;
    using V = WeatherVariable;
    switch (s) {
      case StateId::month: return row.month;
      case StateId::day: return row.day_type;
      case StateId::hour: return row.hour;
      case StateId::daylight_savings_status: return row.daylight_savings_status;
      case StateId::t_out: return w.t_out;
      case StateId::t_out_pred_6h: return pred(L::h6, V::t_out);
      case StateId::t_out_pred_12h: return pred(L::h12, V::t_out);
      case StateId::t_out_pred_24h: return pred(L::h24, V::t_out);
      case StateId::rh_out: return w.rh_out;
      case StateId::rh_out_pred_6h: return pred(L::h6, V::rh_out);
      case StateId::rh_out_pred_12h: return pred(L::h12, V::rh_out);
      case StateId::rh_out_pred_24h: return pred(L::h24, V::rh_out);
      case StateId::diffuse_solar_rad: return w.diffuse_solar;
      case StateId::diffuse_solar_rad_pred_6h: return pred(L::h6, V::diffuse_solar);
      case StateId::diffuse_solar_rad_pred_12h: return pred(L::h12, V::diffuse_solar);
      case StateId::diffuse_solar_rad_pred_24h: return pred(L::h24, V::diffuse_solar);
      case StateId::direct_solar_rad: return w.direct_solar;
      case StateId::direct_solar_rad_pred_6h: return pred(L::h6, V::direct_solar);
      case StateId::direct_solar_rad_pred_12h: return pred(L::h12, V::direct_solar);
      case StateId::direct_solar_rad_pred_24h: return pred(L::h24, V::direct_solar);
      case StateId::t_in: return row.indoor_temp;
      case StateId::avg_unmet_setpoint: return row.avg_unmet_setpoint;
      case StateId::rh_in: return row.indoor_rh;
      case StateId::non_shiftable_load: return row.equipment_electric_power;
      case StateId::solar_gen: return pv_ ? pv_generation(*pv_, dataset_->solar.generation_per_kw[ti]) : 0.0;
      case StateId::cooling_storage_soc: return cooling_tank_ ? cooling_tank_->soc() : 0.0;
      case StateId::dhw_storage_soc: return dhw_tank_ ? dhw_tank_->soc() : 0.0;
      case StateId::net_electricity_consumption: return last_net_;
    }
    return 0.0;
  }

  /// Enabled states at hour `t`, in canonical order.
  std::vector<double> assemble_state(std::size_t t, const Forecaster& forecaster) const {
    std::vector<double> out;
    out.reserve(state_count());
    for (auto s : config().states) out.push_back(state_value(s, t, forecaster));
    return out;
  }

 private:
  std::shared_ptr<const Dataset> dataset_;
  std::size_t index_;
  HeatPump heat_pump_;
  std::optional<ElectricHeater> electric_heater_;
  std::optional<ThermalTank> cooling_tank_;
  std::optional<ThermalTank> dhw_tank_;
  std::optional<Battery> battery_;
  std::optional<PVArray> pv_;
  double last_net_ = 0.0;
};

}  // namespace mgsim
