#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>

#include "mgsim/dataset.hpp"

namespace mgsim {

enum class WeatherVariable : std::uint8_t { t_out, rh_out, diffuse_solar, direct_solar };

enum class ForecastLead : std::uint8_t { h6, h12, h24 };

inline constexpr std::size_t lead_hours(ForecastLead lead) {
  switch (lead) {
    case ForecastLead::h6: return 6;
    case ForecastLead::h12: return 12;
    case ForecastLead::h24: return 24;
  }
  return 0;
}

inline ForecastLead lead_from_hours(int hours) {
  switch (hours) {
    case 6: return ForecastLead::h6;
    case 12: return ForecastLead::h12;
    case 24: return ForecastLead::h24;
    default: throw std::invalid_argument("forecast lead must be 6, 12 or 24 hours");
  }
}

/// Forecast error half-widths per lead (6h, 12h, 24h). Temperature bands are
/// absolute (°C); humidity and radiation bands are relative to the true value.
struct ForecastBands {
  std::array<double, 3> t_out{0.3, 0.65, 1.35};
  std::array<double, 3> rh_out{0.025, 0.05, 0.10};
  std::array<double, 3> diffuse_solar{0.025, 0.05, 0.10};
  std::array<double, 3> direct_solar{0.025, 0.05, 0.10};

  static ForecastBands none() {
    ForecastBands b;
    b.t_out = b.rh_out = b.diffuse_solar = b.direct_solar = {0.0, 0.0, 0.0};
    return b;
  }

  double band(WeatherVariable v, ForecastLead lead) const {
    const auto i = static_cast<std::size_t>(lead);
    switch (v) {
      case WeatherVariable::t_out: return t_out[i];
      case WeatherVariable::rh_out: return rh_out[i];
      case WeatherVariable::diffuse_solar: return diffuse_solar[i];
      case WeatherVariable::direct_solar: return direct_solar[i];
    }
    return 0.0;
  }

  static constexpr bool is_relative(WeatherVariable v) { return v != WeatherVariable::t_out; }
};

inline double weather_value(const WeatherRecord& r, WeatherVariable v) {
  switch (v) {
    case WeatherVariable::t_out: return r.t_out;
    case WeatherVariable::rh_out: return r.rh_out;
    case WeatherVariable::diffuse_solar: return r.diffuse_solar;
    case WeatherVariable::direct_solar: return r.direct_solar;
  }
  return 0.0;
}

namespace detail {

// splitmix64 finalizer
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Noisy look-ahead of the weather series. The noise for a given
/// (seed, hour, lead, variable) is fixed, so repeated queries agree.
class Forecaster {
 public:
  explicit Forecaster(std::uint64_t seed = 0, ForecastBands bands = {}) : seed_(seed), bands_(bands) {}

  /// Uniform deviate in the open interval (-1, 1).
  double unit_noise(std::size_t t, ForecastLead lead, WeatherVariable v) const {
    std::uint64_t h = detail::mix64(seed_);
    h = detail::mix64(h ^ static_cast<std::uint64_t>(t));
    h = detail::mix64(h ^ (static_cast<std::uint64_t>(lead) << 8 | static_cast<std::uint64_t>(v)));
    const double u = (static_cast<double>(h >> 12) + 0.5) * 0x1.0p-52;  // (0, 1), exact
    return 2.0 * u - 1.0;
  }

  double forecast(const WeatherSeries& series, std::size_t t, ForecastLead lead, WeatherVariable v) const {
    if (series.records.empty()) throw std::invalid_argument("empty weather series");
    const std::size_t last = series.records.size() - 1;
    const std::size_t idx = std::min(t + lead_hours(lead), last);
    const double truth = weather_value(series.records[idx], v);
    const double band = bands_.band(v, lead);
    if (band == 0.0) return truth;
    const double noise = unit_noise(t, lead, v) * band;
    return ForecastBands::is_relative(v) ? truth * (1.0 + noise) : truth + noise;
  }

  std::uint64_t seed() const { return seed_; }
  const ForecastBands& bands() const { return bands_; }

 private:
  std::uint64_t seed_;
  ForecastBands bands_;
};

}  // namespace mgsim
