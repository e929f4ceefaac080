#pragma once

#include <cstdint>
#include <vector>

#include "psuq/timeseries.hpp"

namespace psuq::synth {

// Reproducible hourly demand/wind generator used wherever real reanalysis
// data would otherwise be needed. Demand per demand bus is
//   base + seasonal*cos(year phase) + diurnal*cos(day phase, peak 18:00) + a_t
// with a_t a stationary AR(1) anomaly (independent across buses). Wind
// capacity factors are Beta draws with a seasonally shifted mean, smoothed by
// a trailing moving average for persistence, always inside [0,1].
struct SynthConfig {
  int years = 1;
  std::uint64_t seed = 1;
  int num_buses = 6;
  std::vector<int> demand_buses = {2, 4, 5, 6};
  std::vector<int> wind_buses = {2, 5, 6};

  double demand_base_mw = 1000.0;
  double seasonal_amplitude_mw = 200.0;  // annual cosine, peak at new year
  double diurnal_amplitude_mw = 100.0;   // daily cosine, peak at 18:00
  double ar1_coef = 0.9;                 // anomaly persistence, in [0,1)
  double noise_sigma_mw = 50.0;          // anomaly innovation sigma

  double wind_mean_cf = 0.4;             // annual mean capacity factor
  double wind_seasonal_swing = 0.15;     // winter-positive swing of the mean
  double wind_concentration = 5.0;       // Beta alpha+beta
  int wind_smooth_hours = 24;            // trailing moving-average window

  void validate() const;
};

TimeSeriesTable synth_generate(const SynthConfig& cfg);

// Exact first/second moments of the generator (clamping at zero demand is
// ignored; with the default parameters it is a >6-sigma event).
double synth_demand_bus_mean(const SynthConfig& cfg);       // = demand_base_mw
double synth_systemwide_mean(const SynthConfig& cfg);       // base * #demand buses
double synth_anomaly_variance(const SynthConfig& cfg);      // stationary AR(1) variance

// Variance of the systemwide demand mean over a window of n hours, exact for
// the stationary AR(1) anomaly (deterministic cycles cancel over whole years).
double synth_mean_variance(const SynthConfig& cfg, std::int64_t n_hours);

}  // namespace psuq::synth
