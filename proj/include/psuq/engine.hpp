#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "psuq/adapter.hpp"
#include "psuq/psm.hpp"
#include "psuq/resampler.hpp"
#include "psuq/timeseries.hpp"

namespace psuq::engine {

enum class SolverChoice { Embedded, Adapter };

// The statistic under study: any map from a (possibly resampled) table to a
// set of named outputs. The engine never looks inside — the benchmark models
// and cheap pseudo-outputs plug in through the same seam.
struct OutputFn {
  std::string description;
  std::function<psm::OutputSet(const TimeSeriesTable&)> eval;
};

struct PsmOutputFnOptions {
  SolverChoice solver = SolverChoice::Embedded;
  opt::MilpOptions milp;
  opt::AdapterConfig adapter;
  // When > 0 the table is cut into consecutive windows of this many hours,
  // each solved independently; extensive outputs recombine time-weighted,
  // peaks/capacities take the max. Keeps instances desk-scale on long series.
  int horizon_split_hours = 0;
};

OutputFn make_psm_output_fn(const psm::PsmSpec& spec, const PsmOutputFnOptions& opts = {});

// Hourly mean of systemwide demand (MW) — a solver-free statistic for
// calibration and validation studies.
OutputFn make_demand_mean_fn();

// Unbiased sample variance; needs at least two values.
double sample_variance(const std::vector<double>& values);

// Variance extrapolation from sample length n_s to target length n_o:
// sigma_o = sqrt(var_s * n_s / n_o).
double extrapolate_sigma(double var_s, double n_s_hours, double n_o_hours);

struct LengthPlan {
  double hours = 0.0;
  double years = 0.0;
  int years_ceil = 0;
};

// Sample length needed to push the output sigma down to `target_sigma`:
// n = n_s * var_s / target^2.
LengthPlan required_sample_length(double var_s, double n_s_hours, double target_sigma);

struct BootstrapOptions {
  int jobs = 1;
  double max_failure_frac = 0.01;  // above this the run aborts
};

struct SampleRecord {
  int index = 0;
  bool ok = false;
  std::string error;           // populated when !ok
  std::vector<double> values;  // aligned with output names when ok
};

struct BootstrapReport {
  SampleScheme scheme;
  std::uint64_t table_fingerprint = 0;
  std::int64_t n_s_hours = 0;
  std::int64_t n_o_hours = 0;
  int k_requested = 0;
  int k_used = 0;
  int failures = 0;
  std::string fn_description;

  std::vector<std::string> names;
  std::vector<std::string> units;
  std::vector<double> point;      // estimate from the full series
  std::vector<double> sigma_s;    // spread across samples at n_s
  std::vector<double> sigma_hat;  // extrapolated to n_o

  std::vector<SampleRecord> samples;  // audit trail, index order
  std::vector<std::string> warnings;
};

// Single evaluation on the full series.
psm::OutputSet point_estimate(const OutputFn& fn, const TimeSeriesTable& table);

// Draws K plans, evaluates them (in parallel when jobs > 1; results are
// keyed by sample index so the report is independent of scheduling), and
// extrapolates the per-output spread to the full-series length.
BootstrapReport run_bootstrap(const OutputFn& fn, const TimeSeriesTable& table,
                              const SampleScheme& scheme, const BootstrapOptions& opts = {});

nlohmann::json report_to_json(const BootstrapReport& report);
void write_report_csv(const BootstrapReport& report, const std::filesystem::path& path);

}  // namespace psuq::engine
