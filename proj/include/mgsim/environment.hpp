#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgsim/building.hpp"
#include "mgsim/dataset.hpp"
#include "mgsim/forecast.hpp"
#include "mgsim/types.hpp"

namespace mgsim {

/// Per-building lists in decentralized mode; a single row in central mode.
using States = std::vector<std::vector<double>>;
using Actions = std::vector<std::vector<double>>;

/// Maps the per-building net consumptions of one step to rewards: one per
/// building in decentralized mode, exactly one in central mode.
using RewardFunction = std::function<std::vector<double>(std::span<const double> building_net)>;

inline RewardFunction default_reward(ControlMode mode) {
  if (mode == ControlMode::central) {
    return [](std::span<const double> net) {
      const double total = std::accumulate(net.begin(), net.end(), 0.0);
      return std::vector<double>{-std::max(0.0, total)};
    };
  }
  return [](std::span<const double> net) {
    std::vector<double> r;
    r.reserve(net.size());
    for (double e : net) r.push_back(-std::max(0.0, e));
    return r;
  };
}

/// District net electricity: sum over buildings of building consumption plus
/// battery grid-side flow. Negative totals mean export from the microgrid.
inline double microgrid_net(std::span<const double> building_consumption, std::span<const double> battery_grid_side) {
  if (building_consumption.size() != battery_grid_side.size()) {
    throw std::invalid_argument("microgrid_net: length mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < building_consumption.size(); ++i) {
    total += building_consumption[i] + battery_grid_side[i];
  }
  return total;
}

/// District-level hourly series recorded during an episode. Values are signed.
struct TrackerSeries {
  std::vector<double> net_electric_consumption;
  std::vector<double> net_electric_consumption_no_storage;
  std::vector<double> net_electric_consumption_no_pv_no_storage;
  std::vector<double> electric_consumption_cooling_storage;
  std::vector<double> electric_consumption_dhw_storage;
  std::vector<double> electric_consumption_cooling;  // total cooling-device electricity
  std::vector<double> electric_consumption_dhw;      // total DHW-device electricity
  std::vector<double> electric_consumption_appliances;
  std::vector<double> electric_generation;

  static const std::vector<std::string>& names() {
    static const std::vector<std::string> n = {"net_electric_consumption",
                                               "net_electric_consumption_no_storage",
                                               "net_electric_consumption_no_pv_no_storage",
                                               "electric_consumption_cooling_storage",
                                               "electric_consumption_dhw_storage",
                                               "electric_consumption_cooling",
                                               "electric_consumption_dhw",
                                               "electric_consumption_appliances",
                                               "electric_generation"};
    return n;
  }

  std::vector<const std::vector<double>*> columns() const {
    return {&net_electric_consumption,        &net_electric_consumption_no_storage,
            &net_electric_consumption_no_pv_no_storage, &electric_consumption_cooling_storage,
            &electric_consumption_dhw_storage, &electric_consumption_cooling,
            &electric_consumption_dhw,        &electric_consumption_appliances,
            &electric_generation};
  }

  std::size_t size() const { return net_electric_consumption.size(); }

  void clear() { *this = TrackerSeries{}; }

  friend bool operator==(const TrackerSeries&, const TrackerSeries&) = default;
};

struct StepResult {
  States states;
  std::vector<double> rewards;
  bool done = false;
  double district_net = 0.0;
  std::vector<BuildingStepResult> info;
};

/// Observation and action bounds, shaped like States / Actions.
struct StateActionSpaces {
  std::vector<std::vector<Bounds>> states;
  std::vector<std::vector<Bounds>> actions;
  /// State names per row, parallel to `states`.
  std::vector<std::vector<std::string>> state_names;
};

struct BuildingSummary {
  std::string id;
  double cooling_storage_capacity = 0.0;
  double dhw_storage_capacity = 0.0;
  double battery_capacity = 0.0;
  double battery_nominal_power = 0.0;
  double pv_capacity = 0.0;
  double heat_pump_nominal_cooling = 0.0;
  double peak_cooling_load = 0.0;
  double peak_dhw_load = 0.0;
  double peak_appliance_load = 0.0;
  double mean_total_load = 0.0;
};

struct BuildingInformation {
  std::vector<BuildingSummary> buildings;
  /// Pearson correlation of total thermal + appliance load between buildings.
  std::vector<std::vector<double>> load_correlation;
};

struct EnvironmentOptions {
  ControlMode mode = ControlMode::decentralized;
  std::uint64_t seed = 0;
  ForecastBands forecast_bands{};
  /// Empty selects the default reward for `mode`.
  RewardFunction reward;

  static EnvironmentOptions from(const Dataset& ds) {
    EnvironmentOptions o;
    o.mode = ds.mode;
    o.seed = ds.seed;
    return o;
  }
};

class Environment {
 public:
  Environment(std::shared_ptr<const Dataset> dataset, EnvironmentOptions options)
      : dataset_(std::move(dataset)), options_(std::move(options)), forecaster_(options_.seed, options_.forecast_bands) {
    if (!dataset_) throw std::invalid_argument("null dataset");
    if (!options_.reward) options_.reward = default_reward(options_.mode);
    buildings_.reserve(dataset_->buildings.size());
    for (std::size_t i = 0; i < dataset_->buildings.size(); ++i) buildings_.emplace_back(dataset_, i);
    for (const auto& b : buildings_) {
      for (auto s : b.config().states) {
        if (is_shared(s) && std::find(shared_states_.begin(), shared_states_.end(), s) == shared_states_.end()) {
          shared_states_.push_back(s);
        }
      }
    }
    std::sort(shared_states_.begin(), shared_states_.end());
    clock_ = dataset_->period.start;
  }

  explicit Environment(std::shared_ptr<const Dataset> dataset)
      : Environment(dataset, EnvironmentOptions::from(*dataset)) {}

  /// Starts a new episode: clock at period start, storage empty, battery
  /// capacity restored, trackers cleared.
  States reset() {
    clock_ = dataset_->period.start;
    done_ = false;
    started_ = true;
    for (auto& b : buildings_) b.reset();
    trackers_.clear();
    return states();
  }

  StepResult step(const Actions& actions) {
    if (!started_) throw std::logic_error("step called before reset()");
    if (done_) throw std::logic_error("step called after the episode ended; call reset()");
    const auto per_building = split_actions(actions);

    StepResult result;
    result.info.reserve(buildings_.size());
    std::vector<double> consumption(buildings_.size()), battery(buildings_.size()), net(buildings_.size());
    double no_storage = 0.0, no_pv_no_storage = 0.0, cooling_storage = 0.0, dhw_storage = 0.0, cooling = 0.0,
           dhw = 0.0, appliances = 0.0, generation = 0.0;
    for (std::size_t i = 0; i < buildings_.size(); ++i) {
      auto r = buildings_[i].step(clock_, per_building[i]);
      consumption[i] = r.e_building;
      battery[i] = r.e_battery_grid_side;
      net[i] = r.e_net;
      no_storage += r.e_no_storage;
      no_pv_no_storage += r.e_no_pv_no_storage;
      cooling_storage += r.e_cooling_storage;
      dhw_storage += r.e_dhw_storage;
      cooling += r.e_cooling;
      dhw += r.e_dhw;
      appliances += r.e_appliances;
      generation += r.pv_gen;
      result.info.push_back(std::move(r));
    }
    result.district_net = microgrid_net(consumption, battery);

    trackers_.net_electric_consumption.push_back(result.district_net);
    trackers_.net_electric_consumption_no_storage.push_back(no_storage);
    trackers_.net_electric_consumption_no_pv_no_storage.push_back(no_pv_no_storage);
    trackers_.electric_consumption_cooling_storage.push_back(cooling_storage);
    trackers_.electric_consumption_dhw_storage.push_back(dhw_storage);
    trackers_.electric_consumption_cooling.push_back(cooling);
    trackers_.electric_consumption_dhw.push_back(dhw);
    trackers_.electric_consumption_appliances.push_back(appliances);
    trackers_.electric_generation.push_back(generation);

    result.rewards = options_.reward(net);
    const std::size_t want = options_.mode == ControlMode::central ? 1 : buildings_.size();
    if (result.rewards.size() != want) {
      throw std::logic_error("reward function returned " + std::to_string(result.rewards.size()) +
                             " rewards, expected " + std::to_string(want));
    }

    ++clock_;
    done_ = clock_ > dataset_->period.end;
    result.done = done_;
    result.states = states();
    return result;
  }

  /// Observation at the current clock.
  States states() const {
    if (options_.mode == ControlMode::decentralized) {
      States s;
      s.reserve(buildings_.size());
      for (const auto& b : buildings_) s.push_back(b.assemble_state(clock_, forecaster_));
      return s;
    }
    std::vector<double> flat;
    for (auto sid : shared_states_) {
      for (const auto& b : buildings_) {
        if (b.config().has(sid)) {
          flat.push_back(b.state_value(sid, clock_, forecaster_));
          break;
        }
      }
    }
    for (const auto& b : buildings_) {
      for (auto sid : b.config().states) {
        if (!is_shared(sid)) flat.push_back(b.state_value(sid, clock_, forecaster_));
      }
    }
    return {std::move(flat)};
  }

  StateActionSpaces state_action_spaces() const {
    StateActionSpaces sp;
    if (options_.mode == ControlMode::decentralized) {
      for (const auto& b : buildings_) {
        std::vector<Bounds> sb;
        std::vector<std::string> names;
        for (auto sid : b.config().states) {
          sb.push_back(state_bounds(b, sid));
          names.emplace_back(to_string(sid));
        }
        sp.states.push_back(std::move(sb));
        sp.state_names.push_back(std::move(names));
        sp.actions.emplace_back(b.action_count(), Bounds{-1.0, 1.0});
      }
      return sp;
    }
    std::vector<Bounds> sb;
    std::vector<std::string> names;
    for (auto sid : shared_states_) {
      for (const auto& b : buildings_) {
        if (b.config().has(sid)) {
          sb.push_back(state_bounds(b, sid));
          names.emplace_back(to_string(sid));
          break;
        }
      }
    }
    std::size_t n_actions = 0;
    for (const auto& b : buildings_) {
      for (auto sid : b.config().states) {
        if (!is_shared(sid)) {
          sb.push_back(state_bounds(b, sid));
          names.push_back(b.id() + "/" + std::string(to_string(sid)));
        }
      }
      n_actions += b.action_count();
    }
    sp.states.push_back(std::move(sb));
    sp.state_names.push_back(std::move(names));
    sp.actions.emplace_back(n_actions, Bounds{-1.0, 1.0});
    return sp;
  }

  BuildingInformation building_information() const {
    BuildingInformation info;
    std::vector<std::vector<double>> totals;
    for (const auto& b : buildings_) {
      BuildingSummary s;
      s.id = b.id();
      s.cooling_storage_capacity = b.cooling_tank() ? b.cooling_tank()->capacity_kwh : 0.0;
      s.dhw_storage_capacity = b.dhw_tank() ? b.dhw_tank()->capacity_kwh : 0.0;
      s.battery_capacity = b.battery() ? b.battery()->capacity_initial : 0.0;
      s.battery_nominal_power = b.battery() ? b.battery()->nominal_power : 0.0;
      s.pv_capacity = b.pv() ? b.pv()->capacity_kw : 0.0;
      s.heat_pump_nominal_cooling = b.heat_pump().nominal_thermal_power_cooling;
      s.peak_cooling_load = b.data().peak_cooling;
      s.peak_dhw_load = b.data().peak_dhw;
      s.peak_appliance_load = b.data().peak_appliances;
      std::vector<double> total;
      total.reserve(b.data().loads.records.size());
      for (const auto& r : b.data().loads.records) {
        total.push_back(r.cooling_load + r.dhw_heating + r.equipment_electric_power);
      }
      s.mean_total_load = total.empty() ? 0.0 : std::accumulate(total.begin(), total.end(), 0.0) / total.size();
      info.buildings.push_back(std::move(s));
      totals.push_back(std::move(total));
    }
    const std::size_t n = totals.size();
    info.load_correlation.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double c = i == j ? 1.0 : pearson(totals[i], totals[j]);
        info.load_correlation[i][j] = info.load_correlation[j][i] = c;
      }
    }
    return info;
  }

  bool done() const { return done_; }
  std::size_t clock() const { return clock_; }
  /// Hour of day (1..24) of the hour the next step will simulate.
  int current_hour() const {
    const std::size_t t = std::min(clock_, dataset_->horizon() - 1);
    return dataset_->buildings.front().loads.records[t].hour;
  }
  const Period& period() const { return dataset_->period; }
  ControlMode mode() const { return options_.mode; }
  const EnvironmentOptions& options() const { return options_; }
  const Dataset& dataset() const { return *dataset_; }
  std::shared_ptr<const Dataset> dataset_ptr() const { return dataset_; }
  const std::vector<Building>& buildings() const { return buildings_; }
  const TrackerSeries& trackers() const { return trackers_; }
  const Forecaster& forecaster() const { return forecaster_; }

  std::vector<std::size_t> action_counts() const {
    std::vector<std::size_t> c;
    for (const auto& b : buildings_) c.push_back(b.action_count());
    return c;
  }

  /// Months of the simulated period, for monthly metric windows.
  std::vector<int> period_months() const {
    std::vector<int> m;
    const auto& rows = dataset_->buildings.front().loads.records;
    for (std::size_t t = period().start; t <= period().end; ++t) m.push_back(rows[t].month);
    return m;
  }

 private:
  std::vector<std::vector<double>> split_actions(const Actions& actions) const {
    const auto counts = action_counts();
    if (options_.mode == ControlMode::decentralized) {
      if (actions.size() != buildings_.size()) {
        throw std::invalid_argument("expected " + std::to_string(buildings_.size()) + " action lists, got " +
                                    std::to_string(actions.size()));
      }
      for (std::size_t i = 0; i < counts.size(); ++i) {
        if (actions[i].size() != counts[i]) {
          throw std::invalid_argument("building " + buildings_[i].id() + ": expected " + std::to_string(counts[i]) +
                                      " actions, got " + std::to_string(actions[i].size()));
        }
      }
      return actions;
    }
    const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    if (actions.size() != 1 || actions[0].size() != total) {
      throw std::invalid_argument("central mode expects one flat list of " + std::to_string(total) + " actions");
    }
    std::vector<std::vector<double>> out;
    std::size_t offset = 0;
    for (auto c : counts) {
      out.emplace_back(actions[0].begin() + offset, actions[0].begin() + offset + c);
      offset += c;
    }
    return out;
  }

  static double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    if (x.size() != y.size() || x.empty()) return 0.0;
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
      syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
  }

  Bounds state_bounds(const Building& b, StateId sid) const {
    const auto& weather = dataset_->weather.records;
    const auto& rows = b.data().loads.records;
    auto range = [](auto first, auto last, auto proj) {
      Bounds bd{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
      for (auto it = first; it != last; ++it) {
        bd.low = std::min(bd.low, proj(*it));
        bd.high = std::max(bd.high, proj(*it));
      }
      return bd;
    };
    auto weather_range = [&](WeatherVariable v) {
      return range(weather.begin(), weather.end(), [v](const WeatherRecord& r) { return weather_value(r, v); });
    };
    auto widened = [&](WeatherVariable v, ForecastLead lead) {
      Bounds bd = weather_range(v);
      const double band = options_.forecast_bands.band(v, lead);
      if (ForecastBands::is_relative(v)) return Bounds{bd.low * (1.0 - band), bd.high * (1.0 + band)};
      return Bounds{bd.low - band, bd.high + band};
    };
    auto row_range = [&](auto proj) { return range(rows.begin(), rows.end(), proj); };
    using L = ForecastLead;
    using V = WeatherVariable;
    switch (sid) {
      case StateId::month: return {1, 12};
      case StateId::day: return {1, 8};
      case StateId::hour: return {1, 24};
      case StateId::daylight_savings_status: return {0, 1};
      case StateId::t_out: return weather_range(V::t_out);
      case StateId::t_out_pred_6h: return widened(V::t_out, L::h6);
      case StateId::t_out_pred_12h: return widened(V::t_out, L::h12);
      case StateId::t_out_pred_24h: return widened(V::t_out, L::h24);
      case StateId::rh_out: return weather_range(V::rh_out);
      case StateId::rh_out_pred_6h: return widened(V::rh_out, L::h6);
      case StateId::rh_out_pred_12h: return widened(V::rh_out, L::h12);
      case StateId::rh_out_pred_24h: return widened(V::rh_out, L::h24);
      case StateId::diffuse_solar_rad: return weather_range(V::diffuse_solar);
      case StateId::diffuse_solar_rad_pred_6h: return widened(V::diffuse_solar, L::h6);
      case StateId::diffuse_solar_rad_pred_12h: return widened(V::diffuse_solar, L::h12);
      case StateId::diffuse_solar_rad_pred_24h: return widened(V::diffuse_solar, L::h24);
      case StateId::direct_solar_rad: return weather_range(V::direct_solar);
      case StateId::direct_solar_rad_pred_6h: return widened(V::direct_solar, L::h6);
      case StateId::direct_solar_rad_pred_12h: return widened(V::direct_solar, L::h12);
      case StateId::direct_solar_rad_pred_24h: return widened(V::direct_solar, L::h24);
      case StateId::t_in: return row_range([](const LoadRecord& r) { return r.indoor_temp; });
      case StateId::avg_unmet_setpoint: return row_range([](const LoadRecord& r) { return r.avg_unmet_setpoint; });
      case StateId::rh_in: return row_range([](const LoadRecord& r) { return r.indoor_rh; });
      case StateId::non_shiftable_load:
        return row_range([](const LoadRecord& r) { return r.equipment_electric_power; });
      case StateId::solar_gen: {
        const auto& g = dataset_->solar.generation_per_kw;
        const double peak = g.empty() ? 0.0 : *std::max_element(g.begin(), g.end());
        return {0.0, b.pv() ? pv_generation(*b.pv(), peak) : 0.0};
      }
      case StateId::cooling_storage_soc:
      case StateId::dhw_storage_soc: return {0.0, 1.0};
      case StateId::net_electricity_consumption: return net_bounds(b);
    }
    return {0.0, 0.0};
  }

  Bounds net_bounds(const Building& b) const {
    const auto& d = b.data();
    double high = b.heat_pump().nominal_thermal_power_cooling + d.peak_appliances;  // COP >= 1
    if (b.electric_heater()) {
      high += b.electric_heater()->nominal_power / b.electric_heater()->efficiency;
    } else {
      high += b.heat_pump().nominal_thermal_power_heating;
    }
    double low = 0.0;
    if (b.pv()) {
      const auto& g = dataset_->solar.generation_per_kw;
      low -= pv_generation(*b.pv(), g.empty() ? 0.0 : *std::max_element(g.begin(), g.end()));
    }
    if (b.battery()) {
      const auto& bat = *b.battery();
      double min_eff = bat.efficiency;
      if (bat.power_efficiency_curve) {
        min_eff = 1.0;
        for (const auto& [x, y] : bat.power_efficiency_curve->knots()) min_eff = std::min(min_eff, y);
      }
      double max_fraction = 1.0;
      if (bat.capacity_power_curve) {
        max_fraction = 0.0;
        for (const auto& [x, y] : bat.capacity_power_curve->knots()) max_fraction = std::max(max_fraction, y);
      }
      const double p = bat.nominal_power * max_fraction;
      high += p / std::sqrt(min_eff);
      low -= p;
    }
    return {low, high};
  }

  std::shared_ptr<const Dataset> dataset_;
  EnvironmentOptions options_;
  Forecaster forecaster_;
  std::vector<Building> buildings_;
  std::vector<StateId> shared_states_;
  TrackerSeries trackers_;
  std::size_t clock_ = 0;
  bool done_ = false;
  bool started_ = false;
};

}  // namespace mgsim
