#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "psuq/timeseries.hpp"

namespace psuq {

// Stratified block resampling scheme. Months: samples are whole synthetic
// years laid out [Jan][Feb]...[Dec], each slot filled uniformly (with
// replacement) from the source pool for that calendar month. Weeks: samples
// are sequences of 168 h blocks cycling the season strata DJF,MAM,JJA,SON,
// each slot drawn from that season's pool. Blocks carry all buses jointly, so
// cross-bus correlation within a block is preserved.
struct SampleScheme {
  enum class Kind { Months, Weeks };
  Kind kind = Kind::Months;
  int target_years = 1;   // Months: n_S = 8760 * target_years
  int target_weeks = 4;   // Weeks:  n_S = 168 * target_weeks
  int num_samples = 100;  // K
  std::uint64_t seed = 0;

  void validate() const;
  std::int64_t sample_hours() const;
  std::string describe() const;  // e.g. "months:2y" / "weeks:12w"
};

// One sample's recipe: the exact source blocks, in order. Serializable so a
// run can be audited or replayed; the fingerprint ties it to the data it was
// drawn from.
struct SamplePlan {
  int sample_index = 0;
  std::int64_t n_s_hours = 0;
  std::uint64_t table_fingerprint = 0;
  std::vector<CalendarBlock> blocks;
};

// Draw all K plans. Deterministic in (table, scheme): plan k depends only on
// the master seed and k, never on evaluation order. Throws EmptyStratumError
// naming the first stratum with no candidates.
std::vector<SamplePlan> draw_plans(const TimeSeriesTable& table, const SampleScheme& scheme);

// Concatenate a plan's blocks into a synthetic contiguous table (start hour
// re-anchored; data copied verbatim). Throws ValidationError if the plan's
// fingerprint does not match the table.
TimeSeriesTable assemble(const TimeSeriesTable& table, const SamplePlan& plan);

nlohmann::json plan_to_json(const SamplePlan& plan);
SamplePlan plan_from_json(const nlohmann::json& j);

nlohmann::json scheme_to_json(const SampleScheme& scheme);
SampleScheme scheme_from_json(const nlohmann::json& j);

}  // namespace psuq
