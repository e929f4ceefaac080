#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "psuq/optproblem.hpp"
#include "psuq/timeseries.hpp"

namespace psuq::psm {

enum class Variant { LpPlan, MilpPlan, Operate };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& s);

// Economics of one technology. Costs are quoted per kW (the model's decision
// variables are MW, bridged by a factor 1000 when the objective is built).
struct TechParams {
  std::string id;                    // nuclear | ccgt | ocgt | wind | unmet
  double install_cost_kw_yr = 0.0;   // £/kW/yr, annualised
  double gen_cost_kwh = 0.0;         // £/kWh
  double emissions_g_kwh = 0.0;      // gCO2e/kWh
  std::vector<int> buses;            // 1-based bus numbers this tech may occupy
};

struct LinkSpec {
  int from = 0, to = 0;              // 1-based bus numbers, from < to
  double install_cost_kw_yr = 0.0;   // £/kW/yr
};

struct FixedGenCap {
  std::string tech;
  int bus = 0;
  double mw = 0.0;
};

struct FixedTrCap {
  int from = 0, to = 0;
  double mw = 0.0;
};

// Full description of one benchmark system. The planning variants size
// capacities; Operate runs a fixed fleet (fixed_* required) with
// semi-continuous nuclear commitment.
struct PsmSpec {
  Variant variant = Variant::LpPlan;
  int num_buses = 6;
  std::vector<std::string> bus_names;   // table column ids, index = bus-1
  std::vector<TechParams> technologies; // 'unmet' must be present (feasibility)
  std::vector<int> demand_buses;        // buses whose table demand is served
  std::vector<LinkSpec> links;
  double nuclear_block_mw = 3000.0;     // MilpPlan build granularity
  double nuclear_ramp_frac = 0.2;       // |Δgen| ≤ frac·cap per hour
  double nuclear_min_load_frac = 0.5;   // Operate: gen ∈ {0} ∪ [frac·cap, cap]
  std::vector<FixedGenCap> fixed_gen_caps;  // Operate only
  std::vector<FixedTrCap> fixed_tr_caps;    // Operate only

  const TechParams* tech(const std::string& id) const;
  void validate() const;  // throws SpecError
};

// Benchmark economics and 6-bus topology with the given variant.
// Operate specs still need fixed capacities supplied by the caller.
PsmSpec default_spec(Variant v);

nlohmann::json spec_to_json(const PsmSpec& spec);
PsmSpec spec_from_json(const nlohmann::json& j);
PsmSpec load_spec_file(const std::filesystem::path& path);

// Replaces the spec's fixed capacities from a JSON document of the form
// {"gen": [{"tech","bus","mw"}...], "tr": [{"from","to","mw"}...]}.
void apply_fixed_caps(PsmSpec& spec, const nlohmann::json& j);
void load_fixed_caps_file(PsmSpec& spec, const std::filesystem::path& path);

// Uniformly scales every fixed capacity (stress/tightening studies).
void scale_fixed_caps(PsmSpec& spec, double factor);

struct Output {
  std::string name;
  double value = 0.0;
  std::string unit;
};

// Named model outputs in a deterministic order. Extensive quantities
// (energy, cost, emissions) are annualised by 8760/T.
struct OutputSet {
  std::vector<Output> items;

  const Output* find(const std::string& name) const;
  double value_of(const std::string& name) const;  // throws ValidationError if absent
};

nlohmann::json outputs_to_json(const OutputSet& outputs);
void write_outputs_csv(const OutputSet& outputs, const std::filesystem::path& path);

// A built optimization instance plus the variable layout needed to read a
// solution back. `problem` is self-contained; the id tables below mirror the
// order of spec.technologies/links.
struct PsmProblem {
  PsmSpec spec;
  std::int64_t horizon_hours = 0;

  opt::OptProblem problem;

  // cap_var[tech_idx][k]: capacity variable for the k-th bus of that tech
  // (planning variants; empty for Operate and for 'unmet').
  std::vector<std::vector<int>> cap_var;
  std::vector<int> cap_tr_var;                       // per link (planning)
  std::vector<int> nuclear_block_var;                // MilpPlan: integer block counts
  // gen_var[tech_idx][k][t]; flows trp/trm[link][t]; commit_var[k][t] for
  // Operate nuclear units with nonzero capacity (otherwise empty).
  std::vector<std::vector<std::vector<int>>> gen_var;
  std::vector<std::vector<int>> trp_var, trm_var;
  std::vector<std::vector<std::vector<int>>> commit_var;
  std::vector<std::vector<double>> fixed_cap_mw;     // Operate: aligned with cap_var layout
  std::vector<double> fixed_tr_mw;                   // Operate: per link
};

// Encodes the spec over the table's horizon. Every block of the table is
// treated as contiguous time (ramping spans sample-block joins).
PsmProblem build_problem(const PsmSpec& spec, const TimeSeriesTable& table);

// Maps a solve result to named annualised outputs.
OutputSet extract_outputs(const PsmProblem& built, const opt::SolveResult& result);

}  // namespace psuq::psm
