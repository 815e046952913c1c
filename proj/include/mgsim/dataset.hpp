#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mgsim/csv.hpp"
#include "mgsim/curve.hpp"
#include "mgsim/types.hpp"

namespace mgsim {

/// Raised for any missing, malformed, or inconsistent input data.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Pre-simulated series

/// One hour of pre-simulated building data. Energies are kWh per hour.
struct LoadRecord {
  int month = 1;
  int hour = 1;
  int day_type = 1;
  int daylight_savings_status = 0;
  double indoor_temp = 0.0;
  double avg_unmet_setpoint = 0.0;
  double indoor_rh = 0.0;
  double equipment_electric_power = 0.0;
  double dhw_heating = 0.0;
  double cooling_load = 0.0;

  friend bool operator==(const LoadRecord&, const LoadRecord&) = default;
};

struct BuildingLoadSeries {
  std::string building_id;
  std::vector<LoadRecord> records;

  friend bool operator==(const BuildingLoadSeries&, const BuildingLoadSeries&) = default;
};

struct WeatherRecord {
  double t_out = 0.0;
  double rh_out = 0.0;
  double diffuse_solar = 0.0;
  double direct_solar = 0.0;

  friend bool operator==(const WeatherRecord&, const WeatherRecord&) = default;
};

struct WeatherSeries {
  std::vector<WeatherRecord> records;
  friend bool operator==(const WeatherSeries&, const WeatherSeries&) = default;
};

/// PV output per kW of installed capacity, kWh per hour.
struct SolarProfile {
  std::vector<double> generation_per_kw;
  friend bool operator==(const SolarProfile&, const SolarProfile&) = default;
};

inline const std::vector<std::string> kLoadColumns = {
    "month",      "hour",     "day_type",          "daylight_savings_status",
    "indoor_temp", "avg_unmet_setpoint", "indoor_rh", "equipment_electric_power",
    "dhw_heating", "cooling_load"};
inline const std::vector<std::string> kWeatherColumns = {"t_out", "rh_out", "diffuse_solar",
                                                         "direct_solar"};
inline const std::vector<std::string> kSolarColumns = {"generation_per_kw"};

// ---------------------------------------------------------------------------
// Device attributes

struct HeatPumpAttributes {
  double eta_tech = 0.22;
  double t_target_cooling = 8.0;
  std::optional<double> t_target_heating;
  friend bool operator==(const HeatPumpAttributes&, const HeatPumpAttributes&) = default;
};

struct ElectricHeaterAttributes {
  double efficiency = 0.9;
  friend bool operator==(const ElectricHeaterAttributes&, const ElectricHeaterAttributes&) = default;
};

/// Tank capacity is `capacity_multiple` times the peak hourly load it serves.
struct ThermalTankAttributes {
  double capacity_multiple = 0.0;
  double loss_coef = 0.0;
  double round_trip_eff = 1.0;
  friend bool operator==(const ThermalTankAttributes&, const ThermalTankAttributes&) = default;
};

struct BatteryAttributes {
  double capacity_kwh = 0.0;
  double nominal_power = 0.0;
  double c_loss = 0.0;
  double loss_coef = 0.0;
  std::optional<PiecewiseLinear> capacity_power_curve;
  std::optional<PiecewiseLinear> power_efficiency_curve;
  double efficiency = 1.0;
  friend bool operator==(const BatteryAttributes&, const BatteryAttributes&) = default;
};

struct PvAttributes {
  double capacity_kw = 0.0;
  friend bool operator==(const PvAttributes&, const PvAttributes&) = default;
};

struct BuildingAttributes {
  HeatPumpAttributes heat_pump;
  std::optional<ElectricHeaterAttributes> electric_heater;
  std::optional<ThermalTankAttributes> cooling_tank;
  std::optional<ThermalTankAttributes> dhw_tank;
  std::optional<BatteryAttributes> battery;
  std::optional<PvAttributes> pv;
  friend bool operator==(const BuildingAttributes&, const BuildingAttributes&) = default;
};

/// Enabled states and actions, always held in canonical order.
struct StateActionConfig {
  std::vector<StateId> states;
  std::vector<ActionId> actions;

  bool has(StateId s) const { return std::find(states.begin(), states.end(), s) != states.end(); }
  bool has(ActionId a) const { return std::find(actions.begin(), actions.end(), a) != actions.end(); }

  void normalize() {
    std::sort(states.begin(), states.end());
    states.erase(std::unique(states.begin(), states.end()), states.end());
    std::sort(actions.begin(), actions.end());
    actions.erase(std::unique(actions.begin(), actions.end()), actions.end());
  }

  friend bool operator==(const StateActionConfig&, const StateActionConfig&) = default;
};

// ---------------------------------------------------------------------------
// Configuration and the assembled dataset

/// Inclusive range of hour indices into the series.
struct Period {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t length() const { return end - start + 1; }
  friend bool operator==(const Period&, const Period&) = default;
};

struct SimulationConfig {
  std::filesystem::path data_path;
  std::string building_attributes = "building_attributes.json";
  std::string weather_file = "weather.csv";
  std::string solar_profile = "solar_generation_1kW.csv";
  std::string buildings_states_actions = "buildings_state_action_space.json";
  /// Empty means every building in the attributes file, in file order.
  std::vector<std::string> building_ids;
  /// Unset means the whole horizon.
  std::optional<Period> simulation_period;
  std::vector<std::string> cost_functions = {"ramping", "1-load_factor", "average_daily_peak",
                                             "peak_demand", "net_electricity_consumption"};
  bool central_agent = false;
  int verbose = 0;
  std::uint64_t seed = 0;
};

struct BuildingData {
  BuildingLoadSeries loads;
  BuildingAttributes attributes;
  StateActionConfig state_actions;
  // Device sizing inputs, computed from the full series.
  double peak_cooling = 0.0;
  double peak_dhw = 0.0;
  double peak_appliances = 0.0;

  const std::string& id() const { return loads.building_id; }
  friend bool operator==(const BuildingData&, const BuildingData&) = default;
};

struct Dataset {
  std::vector<BuildingData> buildings;
  WeatherSeries weather;
  SolarProfile solar;
  Period period;
  ControlMode mode = ControlMode::decentralized;
  std::uint64_t seed = 0;

  std::size_t horizon() const { return weather.records.size(); }
  std::size_t building_count() const { return buildings.size(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw DatasetError(msg);
}

inline void validate_tank(const ThermalTankAttributes& t, const std::string& where) {
  require(t.capacity_multiple >= 0.0, where + ": capacity_multiple must be >= 0");
  require(t.loss_coef >= 0.0 && t.loss_coef < 1.0, where + ": loss_coef must be in [0, 1)");
  require(t.round_trip_eff > 0.0 && t.round_trip_eff <= 1.0,
          where + ": round_trip_eff must be in (0, 1]");
}

inline void validate_building(const BuildingData& b, std::size_t horizon) {
  const std::string& id = b.id();
  require(!id.empty(), "building id must not be empty");
  require(b.loads.records.size() == horizon,
          id + ": horizon mismatch (" + std::to_string(b.loads.records.size()) + " rows, expected " +
              std::to_string(horizon) + ")");
  for (std::size_t t = 0; t < b.loads.records.size(); ++t) {
    const auto& r = b.loads.records[t];
    const std::string at = id + " row " + std::to_string(t) + ": ";
    require(r.month >= 1 && r.month <= 12, at + "month out of range");
    require(r.hour >= 1 && r.hour <= 24, at + "hour out of range");
    require(r.day_type >= 1 && r.day_type <= 8, at + "day_type out of range");
    require(r.daylight_savings_status == 0 || r.daylight_savings_status == 1,
            at + "daylight_savings_status must be 0 or 1");
    require(r.equipment_electric_power >= 0.0 && r.dhw_heating >= 0.0 && r.cooling_load >= 0.0,
            at + "energy fields must be >= 0");
  }

  const auto& a = b.attributes;
  require(a.heat_pump.eta_tech > 0.0 && a.heat_pump.eta_tech <= 1.0,
          id + ": heat_pump eta_tech must be in (0, 1]");
  if (a.electric_heater) {
    require(a.electric_heater->efficiency > 0.0 && a.electric_heater->efficiency <= 1.0,
            id + ": electric_heater efficiency must be in (0, 1]");
  }
  if (a.cooling_tank) validate_tank(*a.cooling_tank, id + " cooling_tank");
  if (a.dhw_tank) validate_tank(*a.dhw_tank, id + " dhw_tank");
  if (a.battery) {
    const auto& bat = *a.battery;
    require(bat.capacity_kwh >= 0.0, id + ": battery capacity_kwh must be >= 0");
    require(bat.nominal_power >= 0.0, id + ": battery nominal_power must be >= 0");
    require(bat.c_loss >= 0.0, id + ": battery c_loss must be >= 0");
    require(bat.loss_coef >= 0.0 && bat.loss_coef < 1.0, id + ": battery loss_coef must be in [0, 1)");
    require(bat.efficiency > 0.0 && bat.efficiency <= 1.0,
            id + ": battery efficiency must be in (0, 1]");
    if (bat.power_efficiency_curve) {
      for (const auto& [x, y] : bat.power_efficiency_curve->knots()) {
        require(y > 0.0 && y <= 1.0, id + ": power_efficiency_curve efficiency must be in (0, 1]");
      }
    }
    if (bat.capacity_power_curve) {
      for (const auto& [x, y] : bat.capacity_power_curve->knots()) {
        require(y >= 0.0, id + ": capacity_power_curve power fraction must be >= 0");
      }
    }
  }
  if (a.pv) require(a.pv->capacity_kw >= 0.0, id + ": pv capacity_kw must be >= 0");

  const bool dhw_supply = a.electric_heater.has_value() || a.heat_pump.t_target_heating.has_value();
  if (!dhw_supply) {
    require(b.peak_dhw == 0.0 && !a.dhw_tank,
            id + ": DHW demand or DHW tank present but no electric heater and no heating target");
  }

  const auto& sa = b.state_actions;
  if (sa.has(ActionId::cooling_storage)) {
    require(a.cooling_tank.has_value(), id + ": action without device (cooling_storage)");
  }
  if (sa.has(ActionId::dhw_storage)) {
    require(a.dhw_tank.has_value(), id + ": action without device (dhw_storage)");
  }
  if (sa.has(ActionId::battery_storage)) {
    require(a.battery.has_value(), id + ": action without device (battery_storage)");
  }
}

}  // namespace detail

/// Validates every invariant, computes sizing peaks, and resolves the period.
/// Returns the finished dataset; throws DatasetError on any violation.
inline Dataset make_dataset(std::vector<BuildingData> buildings, WeatherSeries weather,
                            SolarProfile solar, std::optional<Period> period = std::nullopt,
                            ControlMode mode = ControlMode::decentralized, std::uint64_t seed = 0) {
  Dataset ds;
  ds.buildings = std::move(buildings);
  ds.weather = std::move(weather);
  ds.solar = std::move(solar);
  ds.mode = mode;
  ds.seed = seed;

  detail::require(!ds.buildings.empty(), "dataset needs at least one building");
  const std::size_t horizon = ds.weather.records.size();
  detail::require(horizon >= 1, "weather series is empty");
  detail::require(ds.solar.generation_per_kw.size() == horizon,
                  "horizon mismatch: solar profile has " +
                      std::to_string(ds.solar.generation_per_kw.size()) + " rows, weather has " +
                      std::to_string(horizon));
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto& w = ds.weather.records[t];
    detail::require(w.rh_out >= 0.0 && w.rh_out <= 100.0,
                    "weather row " + std::to_string(t) + ": rh_out outside [0, 100]");
    detail::require(w.diffuse_solar >= 0.0 && w.direct_solar >= 0.0,
                    "weather row " + std::to_string(t) + ": solar radiation must be >= 0");
    detail::require(ds.solar.generation_per_kw[t] >= 0.0,
                    "solar row " + std::to_string(t) + ": generation must be >= 0");
  }

  for (std::size_t i = 0; i < ds.buildings.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      detail::require(ds.buildings[i].id() != ds.buildings[j].id(),
                      "duplicate building id " + ds.buildings[i].id());
    }
  }

  for (auto& b : ds.buildings) {
    b.state_actions.normalize();
    b.peak_cooling = b.peak_dhw = b.peak_appliances = 0.0;
    for (const auto& r : b.loads.records) {
      b.peak_cooling = std::max(b.peak_cooling, r.cooling_load);
      b.peak_dhw = std::max(b.peak_dhw, r.dhw_heating);
      b.peak_appliances = std::max(b.peak_appliances, r.equipment_electric_power);
    }
    detail::validate_building(b, horizon);
  }

  ds.period = period.value_or(Period{0, horizon - 1});
  detail::require(ds.period.start <= ds.period.end && ds.period.end <= horizon - 1,
                  "simulation_period (" + std::to_string(ds.period.start) + ", " +
                      std::to_string(ds.period.end) + ") outside horizon of " +
                      std::to_string(horizon) + " hours");
  return ds;
}

// ---------------------------------------------------------------------------
// JSON documents

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline double get_number(const ordered_json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw DatasetError(where + ": missing numeric field '" + key + "'");
  }
  return j.at(key).get<double>();
}

inline PiecewiseLinear parse_curve(const ordered_json& j, const std::string& where) {
  if (!j.is_array()) throw DatasetError(where + ": curve must be a list of [x, y] pairs");
  std::vector<PiecewiseLinear::Knot> knots;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw DatasetError(where + ": curve must be a list of [x, y] pairs");
    }
    knots.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  try {
    return PiecewiseLinear(std::move(knots));
  } catch (const std::invalid_argument& e) {
    throw DatasetError(where + ": " + e.what());
  }
}

inline ordered_json curve_to_json(const PiecewiseLinear& c) {
  auto arr = ordered_json::array();
  for (const auto& [x, y] : c.knots()) arr.push_back({x, y});
  return arr;
}

inline ThermalTankAttributes parse_tank(const ordered_json& j, const std::string& where) {
  return {get_number(j, "capacity_multiple", where), get_number(j, "loss_coef", where),
          get_number(j, "round_trip_eff", where)};
}

inline ordered_json tank_to_json(const ThermalTankAttributes& t) {
  return {{"capacity_multiple", t.capacity_multiple},
          {"loss_coef", t.loss_coef},
          {"round_trip_eff", t.round_trip_eff}};
}

}  // namespace detail

inline BuildingAttributes attributes_from_json(const nlohmann::ordered_json& j, const std::string& id) {
  using detail::get_number;
  BuildingAttributes a;
  if (!j.contains("heat_pump")) throw DatasetError(id + ": missing heat_pump");
  const auto& hp = j.at("heat_pump");
  a.heat_pump.eta_tech = get_number(hp, "eta_tech", id + " heat_pump");
  a.heat_pump.t_target_cooling = get_number(hp, "t_target_cooling", id + " heat_pump");
  if (hp.contains("t_target_heating") && !hp.at("t_target_heating").is_null()) {
    a.heat_pump.t_target_heating = get_number(hp, "t_target_heating", id + " heat_pump");
  }
  if (j.contains("electric_heater")) {
    a.electric_heater = ElectricHeaterAttributes{
        get_number(j.at("electric_heater"), "efficiency", id + " electric_heater")};
  }
  if (j.contains("cooling_tank")) a.cooling_tank = detail::parse_tank(j.at("cooling_tank"), id + " cooling_tank");
  if (j.contains("dhw_tank")) a.dhw_tank = detail::parse_tank(j.at("dhw_tank"), id + " dhw_tank");
  if (j.contains("battery")) {
    const auto& b = j.at("battery");
    const std::string where = id + " battery";
    BatteryAttributes bat;
    bat.capacity_kwh = get_number(b, "capacity_kwh", where);
    bat.nominal_power = get_number(b, "nominal_power", where);
    bat.c_loss = get_number(b, "c_loss", where);
    bat.loss_coef = get_number(b, "loss_coef", where);
    if (b.contains("efficiency")) bat.efficiency = get_number(b, "efficiency", where);
    if (b.contains("capacity_power_curve")) {
      bat.capacity_power_curve = detail::parse_curve(b.at("capacity_power_curve"), where + " capacity_power_curve");
    }
    if (b.contains("power_efficiency_curve")) {
      bat.power_efficiency_curve =
          detail::parse_curve(b.at("power_efficiency_curve"), where + " power_efficiency_curve");
    }
    a.battery = std::move(bat);
  }
  if (j.contains("pv")) a.pv = PvAttributes{get_number(j.at("pv"), "capacity_kw", id + " pv")};
  return a;
}

inline nlohmann::ordered_json attributes_to_json(const BuildingAttributes& a) {
  nlohmann::ordered_json j;
  j["heat_pump"] = {{"eta_tech", a.heat_pump.eta_tech}, {"t_target_cooling", a.heat_pump.t_target_cooling}};
  if (a.heat_pump.t_target_heating) j["heat_pump"]["t_target_heating"] = *a.heat_pump.t_target_heating;
  if (a.electric_heater) j["electric_heater"] = {{"efficiency", a.electric_heater->efficiency}};
  if (a.cooling_tank) j["cooling_tank"] = detail::tank_to_json(*a.cooling_tank);
  if (a.dhw_tank) j["dhw_tank"] = detail::tank_to_json(*a.dhw_tank);
  if (a.battery) {
    const auto& b = *a.battery;
    nlohmann::ordered_json jb = {{"capacity_kwh", b.capacity_kwh},
                                 {"nominal_power", b.nominal_power},
                                 {"c_loss", b.c_loss},
                                 {"loss_coef", b.loss_coef},
                                 {"efficiency", b.efficiency}};
    if (b.capacity_power_curve) jb["capacity_power_curve"] = detail::curve_to_json(*b.capacity_power_curve);
    if (b.power_efficiency_curve) jb["power_efficiency_curve"] = detail::curve_to_json(*b.power_efficiency_curve);
    j["battery"] = std::move(jb);
  }
  if (a.pv) j["pv"] = {{"capacity_kw", a.pv->capacity_kw}};
  return j;
}

inline StateActionConfig state_actions_from_json(const nlohmann::ordered_json& j, const std::string& id) {
  StateActionConfig sa;
  if (j.contains("states")) {
    for (const auto& s : j.at("states")) {
      const auto name = s.get<std::string>();
      auto parsed = parse_state(name);
      if (!parsed) throw DatasetError(id + ": unknown state name '" + name + "'");
      sa.states.push_back(*parsed);
    }
  }
  if (j.contains("actions")) {
    for (const auto& s : j.at("actions")) {
      const auto name = s.get<std::string>();
      auto parsed = parse_action(name);
      if (!parsed) throw DatasetError(id + ": unknown action name '" + name + "'");
      sa.actions.push_back(*parsed);
    }
  }
  sa.normalize();
  return sa;
}

inline nlohmann::ordered_json state_actions_to_json(const StateActionConfig& sa) {
  nlohmann::ordered_json j;
  j["states"] = nlohmann::ordered_json::array();
  for (auto s : sa.states) j["states"].push_back(std::string(to_string(s)));
  j["actions"] = nlohmann::ordered_json::array();
  for (auto a : sa.actions) j["actions"].push_back(std::string(to_string(a)));
  return j;
}

/// Every state, plus every action whose device is present.
inline StateActionConfig default_state_actions(const BuildingAttributes& a) {
  StateActionConfig sa;
  for (std::size_t i = 0; i < kStateCount; ++i) sa.states.push_back(static_cast<StateId>(i));
  if (a.cooling_tank) sa.actions.push_back(ActionId::cooling_storage);
  if (a.dhw_tank) sa.actions.push_back(ActionId::dhw_storage);
  if (a.battery) sa.actions.push_back(ActionId::battery_storage);
  return sa;
}

// ---------------------------------------------------------------------------
// Series CSV

inline BuildingLoadSeries read_load_series(std::istream& in, const std::string& id) {
  auto table = csv::read_table(in, kLoadColumns, id + " load series");
  BuildingLoadSeries s;
  s.building_id = id;
  s.records.reserve(table.rows.size());
  for (std::size_t t = 0; t < table.rows.size(); ++t) {
    const auto& r = table.rows[t];
    auto as_int = [&](double v, const char* name) {
      if (v != std::floor(v)) {
        throw DatasetError(id + " row " + std::to_string(t) + ": " + name + " must be an integer");
      }
      return static_cast<int>(v);
    };
    s.records.push_back(LoadRecord{as_int(r[0], "month"), as_int(r[1], "hour"), as_int(r[2], "day_type"),
                                   as_int(r[3], "daylight_savings_status"), r[4], r[5], r[6], r[7], r[8],
                                   r[9]});
  }
  return s;
}

inline void write_load_series(std::ostream& out, const BuildingLoadSeries& s) {
  using csv::format_double;
  csv::write_header(out, kLoadColumns);
  for (const auto& r : s.records) {
    out << r.month << ',' << r.hour << ',' << r.day_type << ',' << r.daylight_savings_status << ','
        << format_double(r.indoor_temp) << ',' << format_double(r.avg_unmet_setpoint) << ','
        << format_double(r.indoor_rh) << ',' << format_double(r.equipment_electric_power) << ','
        << format_double(r.dhw_heating) << ',' << format_double(r.cooling_load) << '\n';
  }
}

inline WeatherSeries read_weather(std::istream& in) {
  auto table = csv::read_table(in, kWeatherColumns, "weather");
  WeatherSeries w;
  w.records.reserve(table.rows.size());
  for (const auto& r : table.rows) w.records.push_back({r[0], r[1], r[2], r[3]});
  return w;
}

inline void write_weather(std::ostream& out, const WeatherSeries& w) {
  using csv::format_double;
  csv::write_header(out, kWeatherColumns);
  for (const auto& r : w.records) {
    out << format_double(r.t_out) << ',' << format_double(r.rh_out) << ',' << format_double(r.diffuse_solar)
        << ',' << format_double(r.direct_solar) << '\n';
  }
}

inline SolarProfile read_solar(std::istream& in) {
  auto table = csv::read_table(in, kSolarColumns, "solar profile");
  SolarProfile s;
  s.generation_per_kw.reserve(table.rows.size());
  for (const auto& r : table.rows) s.generation_per_kw.push_back(r[0]);
  return s;
}

inline void write_solar(std::ostream& out, const SolarProfile& s) {
  csv::write_header(out, kSolarColumns);
  for (double v : s.generation_per_kw) out << csv::format_double(v) << '\n';
}

// ---------------------------------------------------------------------------
// Directory load / save

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw DatasetError("missing file: " + p.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw DatasetError("cannot write file: " + p.string());
  return out;
}

inline nlohmann::ordered_json read_json(const std::filesystem::path& p) {
  auto in = open_input(p);
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(p.string() + ": " + e.what());
  }
}

}  // namespace detail

inline std::filesystem::path load_file_name(const std::string& building_id) { return building_id + ".csv"; }

/// Reads every input file under `config.data_path` and returns the validated
/// dataset. The state/action document is optional; when absent every state and
/// every action with a present device is enabled.
inline Dataset load_dataset(const SimulationConfig& config) {
  const auto& dir = config.data_path;
  const auto attrs = detail::read_json(dir / config.building_attributes);
  if (!attrs.is_object()) throw DatasetError("building attributes must be an object keyed by building id");

  std::vector<std::string> ids = config.building_ids;
  if (ids.empty()) {
    for (auto it = attrs.begin(); it != attrs.end(); ++it) ids.push_back(it.key());
  }
  if (ids.empty()) throw DatasetError("no buildings configured");

  std::optional<nlohmann::ordered_json> sa_doc;
  const auto sa_path = dir / config.buildings_states_actions;
  if (std::filesystem::exists(sa_path)) sa_doc = detail::read_json(sa_path);

  std::vector<BuildingData> buildings;
  for (const auto& id : ids) {
    if (!attrs.contains(id)) throw DatasetError("attributes file does not list building " + id);
    BuildingData b;
    b.attributes = attributes_from_json(attrs.at(id), id);
    if (sa_doc) {
      if (!sa_doc->contains(id)) throw DatasetError("state/action file does not list building " + id);
      b.state_actions = state_actions_from_json(sa_doc->at(id), id);
    } else {
      b.state_actions = default_state_actions(b.attributes);
    }
    auto in = detail::open_input(dir / load_file_name(id));
    try {
      b.loads = read_load_series(in, id);
    } catch (const DatasetError&) {
      throw;
    } catch (const std::runtime_error& e) {
      throw DatasetError(e.what());
    }
    buildings.push_back(std::move(b));
  }

  WeatherSeries weather;
  SolarProfile solar;
  try {
    auto win = detail::open_input(dir / config.weather_file);
    weather = read_weather(win);
    auto sin = detail::open_input(dir / config.solar_profile);
    solar = read_solar(sin);
  } catch (const DatasetError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw DatasetError(e.what());
  }

  return make_dataset(std::move(buildings), std::move(weather), std::move(solar), config.simulation_period,
                      config.central_agent ? ControlMode::central : ControlMode::decentralized, config.seed);
}

/// Writes the dataset as a directory that `load_dataset` reads back unchanged.
inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const SimulationConfig names;
  nlohmann::ordered_json attrs = nlohmann::ordered_json::object();
  nlohmann::ordered_json sa = nlohmann::ordered_json::object();
  for (const auto& b : ds.buildings) {
    attrs[b.id()] = attributes_to_json(b.attributes);
    sa[b.id()] = state_actions_to_json(b.state_actions);
    auto out = detail::open_output(dir / load_file_name(b.id()));
    write_load_series(out, b.loads);
  }
  {
    auto out = detail::open_output(dir / names.building_attributes);
    out << attrs.dump(2) << '\n';
  }
  {
    auto out = detail::open_output(dir / names.buildings_states_actions);
    out << sa.dump(2) << '\n';
  }
  {
    auto out = detail::open_output(dir / names.weather_file);
    write_weather(out, ds.weather);
  }
  {
    auto out = detail::open_output(dir / names.solar_profile);
    write_solar(out, ds.solar);
  }
}

}  // namespace mgsim
