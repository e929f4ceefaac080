#include "psuq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "psuq/errors.hpp"
#include "psuq/rng.hpp"

namespace psuq::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Stream ids keep every bus's randomness independent of the bus lists'
// order and of how many buses are enabled.
std::uint64_t demand_stream(int bus) { return 1000 + static_cast<std::uint64_t>(bus); }
std::uint64_t wind_stream(int bus) { return 2000 + static_cast<std::uint64_t>(bus); }

}  // namespace

void SynthConfig::validate() const {
  if (years < 1) throw ConfigError("synth: years must be >= 1");
  if (num_buses < 1) throw ConfigError("synth: num_buses must be >= 1");
  if (!(ar1_coef >= 0.0 && ar1_coef < 1.0)) throw ConfigError("synth: ar1_coef must lie in [0,1)");
  if (noise_sigma_mw < 0.0) throw ConfigError("synth: noise sigma must be >= 0");
  if (demand_base_mw < 0.0) throw ConfigError("synth: demand base must be >= 0");
  if (!(wind_mean_cf > 0.0 && wind_mean_cf < 1.0)) throw ConfigError("synth: wind_mean_cf must lie in (0,1)");
  if (wind_concentration <= 0.0) throw ConfigError("synth: wind_concentration must be positive");
  if (wind_smooth_hours < 1) throw ConfigError("synth: wind_smooth_hours must be >= 1");
  for (int r : demand_buses)
    if (r < 1 || r > num_buses) throw ConfigError("synth: demand bus out of range");
  for (int r : wind_buses)
    if (r < 1 || r > num_buses) throw ConfigError("synth: wind bus out of range");
}

TimeSeriesTable synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t n = static_cast<std::size_t>(cfg.years) * cal::kHoursPerYear;

  TimeSeriesTable table;
  table.start_hour = 0;
  for (int r = 1; r <= cfg.num_buses; ++r) table.bus_ids.push_back(std::to_string(r));
  table.demand_mw.assign(table.bus_ids.size(), std::vector<double>(n, 0.0));
  table.wind_cf.assign(table.bus_ids.size(), std::vector<double>(n, 0.0));

  const auto in = [](const std::vector<int>& v, int r) {
    return std::find(v.begin(), v.end(), r) != v.end();
  };

  for (int r = 1; r <= cfg.num_buses; ++r) {
    const std::size_t c = static_cast<std::size_t>(r - 1);
    if (in(cfg.demand_buses, r)) {
      Rng rng(derive_stream_seed(cfg.seed, demand_stream(r)));
      const double stat_sd =
          cfg.noise_sigma_mw / std::sqrt(1.0 - cfg.ar1_coef * cfg.ar1_coef);
      double a = stat_sd * rng.normal();  // stationary start
      auto& col = table.demand_mw[c];
      for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) a = cfg.ar1_coef * a + cfg.noise_sigma_mw * rng.normal();
        const double hour_of_year = static_cast<double>(t % cal::kHoursPerYear);
        const double hour_of_day = static_cast<double>(t % cal::kHoursPerDay);
        const double d = cfg.demand_base_mw +
                         cfg.seasonal_amplitude_mw * std::cos(kTwoPi * hour_of_year / cal::kHoursPerYear) +
                         cfg.diurnal_amplitude_mw * std::cos(kTwoPi * (hour_of_day - 18.0) / cal::kHoursPerDay) +
                         a;
        col[t] = std::max(d, 0.0);
      }
    }
    if (in(cfg.wind_buses, r)) {
      Rng rng(derive_stream_seed(cfg.seed, wind_stream(r)));
      auto& col = table.wind_cf[c];
      const int w = cfg.wind_smooth_hours;
      std::vector<double> window(static_cast<std::size_t>(w), 0.0);
      double wsum = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        const double hour_of_year = static_cast<double>(t % cal::kHoursPerYear);
        const double mu = std::clamp(
            cfg.wind_mean_cf + cfg.wind_seasonal_swing * std::cos(kTwoPi * hour_of_year / cal::kHoursPerYear),
            0.02, 0.98);
        const double draw = rng.beta(mu * cfg.wind_concentration, (1.0 - mu) * cfg.wind_concentration);
        const std::size_t slot = t % static_cast<std::size_t>(w);
        if (t < static_cast<std::size_t>(w)) {
          window[slot] = draw;
          wsum += draw;
          col[t] = wsum / static_cast<double>(t + 1);
        } else {
          wsum += draw - window[slot];
          window[slot] = draw;
          col[t] = wsum / static_cast<double>(w);
        }
        col[t] = std::clamp(col[t], 0.0, 1.0);
      }
    }
  }
  return table;
}

double synth_demand_bus_mean(const SynthConfig& cfg) { return cfg.demand_base_mw; }

double synth_systemwide_mean(const SynthConfig& cfg) {
  return cfg.demand_base_mw * static_cast<double>(cfg.demand_buses.size());
}

double synth_anomaly_variance(const SynthConfig& cfg) {
  return cfg.noise_sigma_mw * cfg.noise_sigma_mw / (1.0 - cfg.ar1_coef * cfg.ar1_coef);
}

double synth_mean_variance(const SynthConfig& cfg, std::int64_t n_hours) {
  if (n_hours < 1) throw DegenerateInputError("window must cover at least one hour");
  // Mean of a stationary AR(1) over n points:
  //   Var = (s2/n^2) * sum_{i,j} rho^|i-j|
  //       = (s2/n) * [ (1+rho)/(1-rho) - (2 rho (1-rho^n)) / (n (1-rho)^2) ]
  // (s2 = stationary variance). Buses are independent, so the systemwide
  // total scales by the bus count.
  const double rho = cfg.ar1_coef;
  const double s2 = synth_anomaly_variance(cfg);
  const double n = static_cast<double>(n_hours);
  double per_bus;
  if (rho == 0.0) {
    per_bus = s2 / n;
  } else {
    const double corr = (1.0 + rho) / (1.0 - rho) -
                        2.0 * rho * (1.0 - std::pow(rho, n)) / (n * (1.0 - rho) * (1.0 - rho));
    per_bus = s2 / n * corr;
  }
  return per_bus * static_cast<double>(cfg.demand_buses.size());
}

}  // namespace psuq::synth
