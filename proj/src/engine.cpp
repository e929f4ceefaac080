#include "psuq/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "psuq/errors.hpp"
#include "psuq/parallel.hpp"

namespace psuq::engine {

namespace {

// Recombine per-window output sets from a split-horizon evaluation.
// Extensive annualised outputs average time-weighted (equivalent to summing
// the raw horizon quantities and annualising once); peaks and capacities
// take the maximum across windows.
psm::OutputSet combine_windows(const std::vector<psm::OutputSet>& sets,
                               const std::vector<double>& weights) {
  if (sets.size() == 1) return sets[0];
  psm::OutputSet out = sets[0];
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  for (std::size_t oi = 0; oi < out.items.size(); ++oi) {
    const std::string& name = out.items[oi].name;
    const bool take_max = name.rfind("cap_", 0) == 0 || name.rfind("peak_", 0) == 0;
    double acc = take_max ? 0.0 : sets[0].items[oi].value * weights[0] / wsum;
    if (take_max) acc = sets[0].items[oi].value;
    for (std::size_t si = 1; si < sets.size(); ++si) {
      if (sets[si].items.size() != out.items.size() || sets[si].items[oi].name != name)
        throw Error(ErrorCode::Internal, "Internal", "window outputs disagree on names");
      const double v = sets[si].items[oi].value;
      if (take_max)
        acc = std::max(acc, v);
      else
        acc += v * weights[si] / wsum;
    }
    out.items[oi].value = acc;
  }
  return out;
}

}  // namespace

OutputFn make_psm_output_fn(const psm::PsmSpec& spec, const PsmOutputFnOptions& opts) {
  spec.validate();
  OutputFn fn;
  fn.description = std::string("psm:") + psm::variant_name(spec.variant);
  if (opts.horizon_split_hours > 0)
    fn.description += ";split=" + std::to_string(opts.horizon_split_hours) + "h";
  fn.eval = [spec, opts](const TimeSeriesTable& table) -> psm::OutputSet {
    const std::size_t total = table.size();
    const std::size_t win =
        opts.horizon_split_hours > 0 ? static_cast<std::size_t>(opts.horizon_split_hours) : total;
    std::vector<psm::OutputSet> sets;
    std::vector<double> weights;
    for (std::size_t at = 0; at < total; at += win) {
      const std::size_t len = std::min(win, total - at);
      const TimeSeriesTable piece = len == total ? table : slice(table, at, len);
      psm::PsmProblem built = psm::build_problem(spec, piece);
      opt::SolveResult res = opts.solver == SolverChoice::Adapter
                                 ? opt::external_solve(built.problem, opts.adapter)
                                 : opt::solve_auto(built.problem, opts.milp);
      if (res.status != opt::SolveStatus::Optimal)
        throw SolverError(std::string("model solve ended with status ") + opt::status_name(res.status));
      sets.push_back(psm::extract_outputs(built, res));
      weights.push_back(static_cast<double>(len));
    }
    return combine_windows(sets, weights);
  };
  return fn;
}

OutputFn make_demand_mean_fn() {
  OutputFn fn;
  fn.description = "demand-mean";
  fn.eval = [](const TimeSeriesTable& table) -> psm::OutputSet {
    validate_table(table);
    double sum = 0.0;
    for (const auto& col : table.demand_mw)
      for (double v : col) sum += v;
    psm::OutputSet out;
    out.items.push_back({"demand_mean_systemwide", sum / static_cast<double>(table.size()), "MW"});
    return out;
  };
  return fn;
}

double sample_variance(const std::vector<double>& values) {
  const std::size_t k = values.size();
  if (k < 2) throw DegenerateInputError("sample variance needs at least 2 values, got " + std::to_string(k));
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(k);
  double ss = 0.0;
  for (double v : values) {
    const double d = v - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(k - 1);
}

double extrapolate_sigma(double var_s, double n_s_hours, double n_o_hours) {
  if (var_s < 0.0) throw DegenerateInputError("negative variance");
  if (n_s_hours <= 0.0 || n_o_hours <= 0.0) throw DegenerateInputError("sample lengths must be positive");
  return std::sqrt(var_s * (n_s_hours / n_o_hours));
}

LengthPlan required_sample_length(double var_s, double n_s_hours, double target_sigma) {
  if (target_sigma <= 0.0) throw ValidationError("target sigma must be positive");
  if (var_s < 0.0) throw DegenerateInputError("negative variance");
  if (n_s_hours <= 0.0) throw DegenerateInputError("sample length must be positive");
  LengthPlan plan;
  plan.hours = n_s_hours * var_s / (target_sigma * target_sigma);
  plan.years = plan.hours / static_cast<double>(cal::kHoursPerYear);
  plan.years_ceil = static_cast<int>(std::ceil(plan.years));
  return plan;
}

psm::OutputSet point_estimate(const OutputFn& fn, const TimeSeriesTable& table) {
  return fn.eval(table);
}

BootstrapReport run_bootstrap(const OutputFn& fn, const TimeSeriesTable& table,
                              const SampleScheme& scheme, const BootstrapOptions& opts) {
  scheme.validate();
  validate_table(table);

  BootstrapReport rep;
  rep.scheme = scheme;
  rep.table_fingerprint = table.fingerprint();
  rep.n_s_hours = scheme.sample_hours();
  rep.n_o_hours = static_cast<std::int64_t>(table.size());
  rep.k_requested = scheme.num_samples;
  rep.fn_description = fn.description;

  const psm::OutputSet point = fn.eval(table);
  for (const auto& o : point.items) {
    rep.names.push_back(o.name);
    rep.units.push_back(o.unit);
    rep.point.push_back(o.value);
  }

  const auto plans = draw_plans(table, scheme);
  const int k = static_cast<int>(plans.size());
  rep.samples.assign(static_cast<std::size_t>(k), {});

  parallel_for(k, opts.jobs, [&](int i) {
    SampleRecord& rec = rep.samples[static_cast<std::size_t>(i)];
    rec.index = i;
    try {
      const TimeSeriesTable sample = assemble(table, plans[static_cast<std::size_t>(i)]);
      const psm::OutputSet got = fn.eval(sample);
      if (got.items.size() != rep.names.size())
        throw Error(ErrorCode::Internal, "Internal", "sample produced a different output list");
      rec.values.reserve(got.items.size());
      for (std::size_t oi = 0; oi < got.items.size(); ++oi) {
        if (got.items[oi].name != rep.names[oi])
          throw Error(ErrorCode::Internal, "Internal", "sample output order mismatch");
        rec.values.push_back(got.items[oi].value);
      }
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
  });

  for (const auto& rec : rep.samples)
    if (!rec.ok) ++rep.failures;
  if (rep.failures > 0) {
    const double frac = static_cast<double>(rep.failures) / static_cast<double>(k);
    std::string first;
    for (const auto& rec : rep.samples)
      if (!rec.ok) {
        first = rec.error;
        break;
      }
    if (frac > opts.max_failure_frac)
      throw TooManyFailuresError(std::to_string(rep.failures) + " of " + std::to_string(k) +
                                 " sample evaluations failed; first error: " + first);
    rep.warnings.push_back(std::to_string(rep.failures) + " sample(s) failed and were excluded; first error: " +
                           first);
  }
  rep.k_used = k - rep.failures;
  if (rep.k_used < 2)
    throw DegenerateInputError("fewer than 2 usable samples after failures");
  if (rep.n_s_hours > rep.n_o_hours)
    rep.warnings.push_back("sample length exceeds the source series length; extrapolation runs backwards");

  std::vector<double> col;
  col.reserve(static_cast<std::size_t>(rep.k_used));
  for (std::size_t oi = 0; oi < rep.names.size(); ++oi) {
    col.clear();
    for (const auto& rec : rep.samples)
      if (rec.ok) col.push_back(rec.values[oi]);
    const double var = sample_variance(col);
    rep.sigma_s.push_back(std::sqrt(var));
    rep.sigma_hat.push_back(extrapolate_sigma(var, static_cast<double>(rep.n_s_hours),
                                              static_cast<double>(rep.n_o_hours)));
  }
  return rep;
}

nlohmann::json report_to_json(const BootstrapReport& rep) {
  nlohmann::json j;
  j["schema"] = "bootstrap-report/1";
  j["scheme"] = scheme_to_json(rep.scheme);
  j["statistic"] = rep.fn_description;
  j["table_fingerprint"] = rep.table_fingerprint;
  j["n_s_hours"] = rep.n_s_hours;
  j["n_o_hours"] = rep.n_o_hours;
  j["k_requested"] = rep.k_requested;
  j["k_used"] = rep.k_used;
  j["failures"] = rep.failures;
  auto& outs = j["outputs"] = nlohmann::json::array();
  for (std::size_t oi = 0; oi < rep.names.size(); ++oi) {
    const double lo = rep.point[oi] - 2.0 * rep.sigma_hat[oi];
    const double hi = rep.point[oi] + 2.0 * rep.sigma_hat[oi];
    outs.push_back({{"name", rep.names[oi]},
                    {"unit", rep.units[oi]},
                    {"point", rep.point[oi]},
                    {"sigma_s", rep.sigma_s[oi]},
                    {"sigma_hat", rep.sigma_hat[oi]},
                    {"lo", lo},
                    {"hi", hi},
                    {"lo_clamped", std::max(lo, 0.0)}});
  }
  auto& samples = j["samples"] = nlohmann::json::array();
  for (const auto& rec : rep.samples) {
    nlohmann::json sj;
    sj["index"] = rec.index;
    sj["ok"] = rec.ok;
    if (rec.ok)
      sj["values"] = rec.values;
    else
      sj["error"] = rec.error;
    samples.push_back(std::move(sj));
  }
  j["warnings"] = rep.warnings;
  return j;
}

void write_report_csv(const BootstrapReport& rep, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << "name,unit,point,sigma_s,sigma_hat,lo,hi,lo_clamped\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << ',' << buf;
  };
  for (std::size_t oi = 0; oi < rep.names.size(); ++oi) {
    os << rep.names[oi] << ',' << rep.units[oi];
    put(rep.point[oi]);
    put(rep.sigma_s[oi]);
    put(rep.sigma_hat[oi]);
    const double lo = rep.point[oi] - 2.0 * rep.sigma_hat[oi];
    put(lo);
    put(rep.point[oi] + 2.0 * rep.sigma_hat[oi]);
    put(std::max(lo, 0.0));
    os << '\n';
  }
  if (!os.flush()) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace psuq::engine
