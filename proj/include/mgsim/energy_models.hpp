#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "mgsim/curve.hpp"

namespace mgsim {

inline constexpr double kKelvinOffset = 273.15;
inline constexpr double kCopMin = 1.0;
inline constexpr double kCopMax = 20.0;

// ---------------------------------------------------------------------------
// Heat pump

/// Air-to-water heat pump. Nominal thermal powers are sized from the peak
/// hourly loads the pump serves.
struct HeatPump {
  double eta_tech = 0.22;
  double t_target_cooling = 8.0;
  double t_target_heating = 50.0;
  double nominal_thermal_power_cooling = 0.0;
  double nominal_thermal_power_heating = 0.0;
};

namespace detail {

inline double clamp_cop(double numerator_k, double denominator_k, double eta_tech) {
  if (denominator_k <= 0.0) return kCopMax;
  return std::clamp(eta_tech * numerator_k / denominator_k, kCopMin, kCopMax);
}

}  // namespace detail

/// Carnot-style cooling COP, temperatures in °C, clamped to [1, 20].
inline double cop_cooling(const HeatPump& hp, double t_out) {
  const double target_k = hp.t_target_cooling + kKelvinOffset;
  const double out_k = t_out + kKelvinOffset;
  return detail::clamp_cop(target_k, out_k - target_k, hp.eta_tech);
}

/// Carnot-style heating COP, temperatures in °C, clamped to [1, 20].
inline double cop_heating(const HeatPump& hp, double t_out) {
  const double target_k = hp.t_target_heating + kKelvinOffset;
  const double out_k = t_out + kKelvinOffset;
  return detail::clamp_cop(target_k, target_k - out_k, hp.eta_tech);
}

inline double heat_pump_electricity(double q_thermal, double cop) { return q_thermal / cop; }

// ---------------------------------------------------------------------------
// Electric heater

struct ElectricHeater {
  double efficiency = 0.9;
  double nominal_power = 0.0;
};

inline double heater_electricity(double q_thermal, double efficiency) { return q_thermal / efficiency; }

// ---------------------------------------------------------------------------
// Thermal storage

struct ThermalTank {
  double capacity_kwh = 0.0;
  double stored_energy = 0.0;
  double loss_coef = 0.0;
  double round_trip_eff = 1.0;

  double soc() const { return capacity_kwh > 0.0 ? stored_energy / capacity_kwh : 0.0; }
};

/// Thermal flows for one hour. Supply-side quantities are what the heat pump
/// or heater must produce; store-side quantities are changes in tank content.
struct TankStepResult {
  double q_from_storage_to_building = 0.0;  // delivered to the building load
  double q_into_storage = 0.0;              // store-side energy added
  double q_supply_for_charge = 0.0;         // supply-side energy spent charging
  double q_removed_from_storage = 0.0;      // store-side energy drawn for discharge
  double new_stored = 0.0;
  double executed_action = 0.0;             // applied store-side change / capacity
};

/// One hour of tank operation under the backup controller: standby loss on
/// carried-over energy, then the requested change (action × capacity) is
/// clamped so the building demand is always met first. Charging is limited by
/// spare supply capacity and tank headroom; discharging by the demand and by
/// the stored energy. Each leg carries a factor of sqrt(round_trip_eff).
inline TankStepResult tank_step(const ThermalTank& tank, double action, double q_demand, double q_supply_max) {
  TankStepResult r;
  const double a = std::clamp(action, -1.0, 1.0);
  const double after_loss = tank.stored_energy * (1.0 - tank.loss_coef);
  const double leg_eff = std::sqrt(tank.round_trip_eff);
  const double request = a * tank.capacity_kwh;

  if (request > 0.0) {
    const double spare_supply = std::max(0.0, q_supply_max - q_demand);
    const double headroom = std::max(0.0, tank.capacity_kwh - after_loss);
    r.q_into_storage = std::min({request, spare_supply * leg_eff, headroom});
    r.q_supply_for_charge = r.q_into_storage / leg_eff;
  } else if (request < 0.0) {
    r.q_removed_from_storage = std::min({-request, q_demand / leg_eff, after_loss});
    r.q_from_storage_to_building = std::min(q_demand, r.q_removed_from_storage * leg_eff);
  }

  r.new_stored = std::clamp(after_loss + r.q_into_storage - r.q_removed_from_storage, 0.0, tank.capacity_kwh);
  if (tank.capacity_kwh > 0.0) {
    r.executed_action = (r.q_into_storage - r.q_removed_from_storage) / tank.capacity_kwh;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Battery

struct Battery {
  double capacity_initial = 0.0;  // C0, kWh
  double capacity = 0.0;          // current capacity, kWh
  double stored_energy = 0.0;
  double nominal_power = 0.0;  // kW
  double c_loss = 0.0;         // capacity loss per cycle
  double loss_coef = 0.0;      // standby loss per hour
  std::optional<PiecewiseLinear> capacity_power_curve;
  std::optional<PiecewiseLinear> power_efficiency_curve;
  double efficiency = 1.0;  // used when no power_efficiency_curve

  double soc() const { return capacity > 0.0 ? stored_energy / capacity : 0.0; }

  void reset() {
    capacity = capacity_initial;
    stored_energy = 0.0;
  }
};

/// Maximum charge/discharge power (kW) at the given state of charge.
inline double battery_max_power(const Battery& b, double soc) {
  if (!b.capacity_power_curve) return b.nominal_power;
  return (*b.capacity_power_curve)(std::clamp(soc, 0.0, 1.0)) * b.nominal_power;
}

/// Round-trip efficiency at a power level expressed as a fraction of nominal.
inline double battery_efficiency(const Battery& b, double power_fraction) {
  if (!b.power_efficiency_curve) return b.efficiency;
  return (*b.power_efficiency_curve)(std::clamp(power_fraction, 0.0, 1.0));
}

struct BatteryStepResult {
  double energy_in_out = 0.0;     // store-side change, < 0 when discharging
  double grid_side_energy = 0.0;  // electricity drawn (> 0) or supplied (< 0)
  double efficiency = 1.0;
  double new_stored = 0.0;
  double new_capacity = 0.0;
  double executed_action = 0.0;
};

/// One step of the battery. The requested change (action × current capacity)
/// is limited by the power curve at the starting state of charge, by headroom
/// and by the stored energy after standby loss. Capacity then fades by
/// c_loss·C0·|E|/(2C).
inline BatteryStepResult battery_step(const Battery& b, double action, double dt_hours = 1.0) {
  BatteryStepResult r;
  const double a = std::clamp(action, -1.0, 1.0);
  const double max_energy = battery_max_power(b, b.soc()) * dt_hours;
  const double after_loss = b.stored_energy * (1.0 - b.loss_coef);
  const double request = a * b.capacity;

  double e = 0.0;
  if (request > 0.0) {
    e = std::min({request, max_energy, std::max(0.0, b.capacity - after_loss)});
  } else if (request < 0.0) {
    e = std::max({request, -max_energy, -after_loss});
  }
  r.energy_in_out = e;

  const double nominal_energy = b.nominal_power * dt_hours;
  const double fraction = nominal_energy > 0.0 ? std::min(1.0, std::abs(e) / nominal_energy) : 0.0;
  r.efficiency = battery_efficiency(b, fraction);
  const double leg_eff = std::sqrt(r.efficiency);
  r.grid_side_energy = e >= 0.0 ? e / leg_eff : e * leg_eff;

  const double fade = b.capacity > 0.0 ? b.c_loss * b.capacity_initial * std::abs(e) / (2.0 * b.capacity) : 0.0;
  r.new_capacity = std::max(0.0, b.capacity - fade);
  r.new_stored = std::clamp(after_loss + e, 0.0, r.new_capacity);
  if (b.capacity > 0.0) r.executed_action = e / b.capacity;
  return r;
}

// ---------------------------------------------------------------------------
// Photovoltaics

struct PVArray {
  double capacity_kw = 0.0;
};

inline double pv_generation(const PVArray& pv, double profile_value) { return pv.capacity_kw * profile_value; }

}  // namespace mgsim
