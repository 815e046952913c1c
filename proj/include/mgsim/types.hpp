#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mgsim {

/// Observable state variables, in canonical output order.
enum class StateId : std::size_t {
  month,
  day,
  hour,
  daylight_savings_status,
  t_out,
  t_out_pred_6h,
  t_out_pred_12h,
  t_out_pred_24h,
  rh_out,
  rh_out_pred_6h,
  rh_out_pred_12h,
  rh_out_pred_24h,
  diffuse_solar_rad,
  diffuse_solar_rad_pred_6h,
  diffuse_solar_rad_pred_12h,
  diffuse_solar_rad_pred_24h,
  direct_solar_rad,
  direct_solar_rad_pred_6h,
  direct_solar_rad_pred_12h,
  direct_solar_rad_pred_24h,
  t_in,
  avg_unmet_setpoint,
  rh_in,
  non_shiftable_load,
  solar_gen,
  cooling_storage_soc,
  dhw_storage_soc,
  net_electricity_consumption,
};

inline constexpr std::size_t kStateCount = 28;

inline constexpr std::array<std::string_view, kStateCount> kStateNames = {
    "month",
    "day",
    "hour",
    "daylight_savings_status",
    "t_out",
    "t_out_pred_6h",
    "t_out_pred_12h",
    "t_out_pred_24h",
    "rh_out",
    "rh_out_pred_6h",
    "rh_out_pred_12h",
    "rh_out_pred_24h",
    "diffuse_solar_rad",
    "diffuse_solar_rad_pred_6h",
    "diffuse_solar_rad_pred_12h",
    "diffuse_solar_rad_pred_24h",
    "direct_solar_rad",
    "direct_solar_rad_pred_6h",
    "direct_solar_rad_pred_12h",
    "direct_solar_rad_pred_24h",
    "t_in",
    "avg_unmet_setpoint",
    "rh_in",
    "non_shiftable_load",
    "solar_gen",
    "cooling_storage_soc",
    "dhw_storage_soc",
    "net_electricity_consumption",
};

inline std::string_view to_string(StateId s) { return kStateNames.at(static_cast<std::size_t>(s)); }

inline std::optional<StateId> parse_state(std::string_view name) {
  for (std::size_t i = 0; i < kStateCount; ++i) {
    if (kStateNames[i] == name) return static_cast<StateId>(i);
  }
  return std::nullopt;
}

/// Calendar and weather states are identical for every building; in central
/// mode they are emitted once.
inline constexpr bool is_shared(StateId s) { return s < StateId::t_in; }

enum class ActionId : std::size_t { cooling_storage, dhw_storage, battery_storage };

inline constexpr std::size_t kActionCount = 3;

inline constexpr std::array<std::string_view, kActionCount> kActionNames = {
    "cooling_storage", "dhw_storage", "battery_storage"};

inline std::string_view to_string(ActionId a) { return kActionNames.at(static_cast<std::size_t>(a)); }

inline std::optional<ActionId> parse_action(std::string_view name) {
  for (std::size_t i = 0; i < kActionCount; ++i) {
    if (kActionNames[i] == name) return static_cast<ActionId>(i);
  }
  return std::nullopt;
}

enum class ControlMode { decentralized, central };

inline std::string_view to_string(ControlMode m) {
  return m == ControlMode::central ? "central" : "decentralized";
}

inline ControlMode parse_mode(std::string_view s) {
  if (s == "central") return ControlMode::central;
  if (s == "decentralized") return ControlMode::decentralized;
  throw std::invalid_argument("unknown control mode: " + std::string(s));
}

/// Closed interval [low, high] of one state or action dimension.
struct Bounds {
  double low = 0.0;
  double high = 0.0;
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

}  // namespace mgsim
