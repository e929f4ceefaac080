#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "psuq/engine.hpp"

namespace psuq::diag {

struct DiagnosticOptions {
  // "Roughly unchanged" quantified: the max/min ratio of the 1-year-equivalent
  // sigma estimates across the grid must stay at or below this.
  double stability_ratio = 1.5;
  // Grid points shorter than this are flagged and excluded from the verdict
  // (as long as two unflagged points remain).
  std::int64_t short_sample_hours = 672;
  engine::BootstrapOptions bootstrap;
};

struct GridResult {
  SampleScheme scheme;
  std::int64_t n_s_hours = 0;
  bool short_flagged = false;
  std::vector<double> sigma_1yr;  // per output, rescaled to a 1-year target
};

struct DiagnosticReport {
  std::vector<std::string> names;
  std::vector<std::string> units;
  std::vector<GridResult> grid;
  std::vector<double> spread_ratio;  // per output, max/min over counted points
  std::vector<bool> stable;          // per output verdict
  double stability_ratio = 1.5;
};

// Runs the bootstrap at every grid point and checks that the rescaled sigma
// estimates hold still across sample lengths. A drifting sigma means the
// resampling statistic is not trustworthy for that output (extremes are the
// classic case); a flat profile is necessary but not sufficient evidence.
DiagnosticReport run_diagnostic(const engine::OutputFn& fn, const TimeSeriesTable& table,
                                const std::vector<SampleScheme>& grid,
                                const DiagnosticOptions& opts = {});

// Conventional grid: weeks {4,12,24,36,48} plus months {1,2,3} years, trimmed
// to lengths the table can support; integer-heavy variants cap at one year.
// Per-point seeds derive from `seed`, K = `num_samples` everywhere.
std::vector<SampleScheme> default_grid(std::int64_t table_hours, int num_samples,
                                       std::uint64_t seed, bool cap_at_one_year);

nlohmann::json diagnostic_to_json(const DiagnosticReport& rep);
void write_diagnostic_csv(const DiagnosticReport& rep, const std::filesystem::path& path);

// Ground-truth spread from disjoint same-length series: the sample standard
// deviation of the outputs across series, with a percentile-bootstrap 95% CI.
struct McSigma {
  std::vector<std::string> names;
  std::vector<std::string> units;
  std::vector<double> sigma;
  std::vector<double> ci_lo, ci_hi;
  std::vector<std::vector<double>> per_series;  // [series][output] audit
  int bootstrap_rounds = 0;
};

McSigma disjoint_mc_sigma(const engine::OutputFn& fn, const std::vector<TimeSeriesTable>& series,
                          int bootstrap_rounds = 2000, std::uint64_t seed = 0, int jobs = 1);

nlohmann::json mc_sigma_to_json(const McSigma& mc);

}  // namespace psuq::diag
