#include "psuq/diagnostic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "psuq/errors.hpp"
#include "psuq/parallel.hpp"
#include "psuq/rng.hpp"

namespace psuq::diag {

namespace {

constexpr double kZeroFloor = 1e-300;

}  // namespace

DiagnosticReport run_diagnostic(const engine::OutputFn& fn, const TimeSeriesTable& table,
                                const std::vector<SampleScheme>& grid, const DiagnosticOptions& opts) {
  if (grid.size() < 2)
    throw InsufficientGridError("diagnostic needs at least 2 sample lengths, got " +
                                std::to_string(grid.size()));

  DiagnosticReport rep;
  rep.stability_ratio = opts.stability_ratio;

  for (const auto& scheme : grid) {
    engine::BootstrapReport boot = engine::run_bootstrap(fn, table, scheme, opts.bootstrap);
    if (rep.names.empty()) {
      rep.names = boot.names;
      rep.units = boot.units;
    } else if (boot.names != rep.names) {
      throw Error(ErrorCode::Internal, "Internal", "grid points disagree on output names");
    }
    GridResult gr;
    gr.scheme = scheme;
    gr.n_s_hours = boot.n_s_hours;
    gr.short_flagged = boot.n_s_hours < opts.short_sample_hours;
    gr.sigma_1yr.reserve(rep.names.size());
    for (std::size_t oi = 0; oi < rep.names.size(); ++oi) {
      const double var = boot.sigma_s[oi] * boot.sigma_s[oi];
      gr.sigma_1yr.push_back(engine::extrapolate_sigma(var, static_cast<double>(boot.n_s_hours),
                                                       static_cast<double>(cal::kHoursPerYear)));
    }
    rep.grid.push_back(std::move(gr));
  }

  // Verdicts. Short grid points are advisory unless excluding them would
  // leave fewer than two estimates.
  std::size_t unflagged = 0;
  for (const auto& gr : rep.grid)
    if (!gr.short_flagged) ++unflagged;
  const bool use_all = unflagged < 2;

  for (std::size_t oi = 0; oi < rep.names.size(); ++oi) {
    double lo = opt::kInf, hi = 0.0;
    for (const auto& gr : rep.grid) {
      if (!use_all && gr.short_flagged) continue;
      lo = std::min(lo, gr.sigma_1yr[oi]);
      hi = std::max(hi, gr.sigma_1yr[oi]);
    }
    double ratio;
    if (hi <= kZeroFloor)
      ratio = 1.0;  // identically zero everywhere: nothing to destabilize
    else if (lo <= kZeroFloor)
      ratio = opt::kInf;
    else
      ratio = hi / lo;
    rep.spread_ratio.push_back(ratio);
    rep.stable.push_back(ratio <= opts.stability_ratio);
  }
  return rep;
}

std::vector<SampleScheme> default_grid(std::int64_t table_hours, int num_samples, std::uint64_t seed,
                                       bool cap_at_one_year) {
  std::vector<SampleScheme> grid;
  std::uint64_t stream = 100;
  for (int weeks : {4, 12, 24, 36, 48}) {
    SampleScheme s;
    s.kind = SampleScheme::Kind::Weeks;
    s.target_weeks = weeks;
    s.num_samples = num_samples;
    s.seed = derive_stream_seed(seed, stream++);
    if (s.sample_hours() <= table_hours) grid.push_back(s);
  }
  for (int years : {1, 2, 3}) {
    if (cap_at_one_year && years > 1) break;
    SampleScheme s;
    s.kind = SampleScheme::Kind::Months;
    s.target_years = years;
    s.num_samples = num_samples;
    s.seed = derive_stream_seed(seed, stream++);
    if (s.sample_hours() <= table_hours) grid.push_back(s);
  }
  return grid;
}

nlohmann::json diagnostic_to_json(const DiagnosticReport& rep) {
  nlohmann::json j;
  j["schema"] = "diagnostic-report/1";
  j["stability_ratio"] = rep.stability_ratio;
  auto& grid = j["grid"] = nlohmann::json::array();
  for (const auto& gr : rep.grid) {
    grid.push_back({{"scheme", scheme_to_json(gr.scheme)},
                    {"n_s_hours", gr.n_s_hours},
                    {"short_flagged", gr.short_flagged},
                    {"sigma_1yr", gr.sigma_1yr}});
  }
  auto& outs = j["outputs"] = nlohmann::json::array();
  for (std::size_t oi = 0; oi < rep.names.size(); ++oi) {
    outs.push_back({{"name", rep.names[oi]},
                    {"unit", rep.units[oi]},
                    {"spread_ratio", std::isfinite(rep.spread_ratio[oi])
                                         ? nlohmann::json(rep.spread_ratio[oi])
                                         : nlohmann::json("inf")},
                    {"verdict", rep.stable[oi] ? "stable" : "unstable"}});
  }
  return j;
}

void write_diagnostic_csv(const DiagnosticReport& rep, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << "output,scheme,n_s_hours,short_flag,sigma_1yr_equiv,spread_ratio,verdict\n";
  char buf[40];
  for (std::size_t oi = 0; oi < rep.names.size(); ++oi) {
    for (const auto& gr : rep.grid) {
      std::snprintf(buf, sizeof buf, "%.17g", gr.sigma_1yr[oi]);
      os << rep.names[oi] << ',' << gr.scheme.describe() << ',' << gr.n_s_hours << ','
         << (gr.short_flagged ? 1 : 0) << ',' << buf << ',';
      if (std::isfinite(rep.spread_ratio[oi])) {
        std::snprintf(buf, sizeof buf, "%.17g", rep.spread_ratio[oi]);
        os << buf;
      } else {
        os << "inf";
      }
      os << ',' << (rep.stable[oi] ? "stable" : "unstable") << '\n';
    }
  }
  if (!os.flush()) throw IoError("write failed for '" + path.string() + "'");
}

McSigma disjoint_mc_sigma(const engine::OutputFn& fn, const std::vector<TimeSeriesTable>& series,
                          int bootstrap_rounds, std::uint64_t seed, int jobs) {
  if (series.size() < 8)
    throw DegenerateInputError("disjoint estimate needs at least 8 series, got " +
                               std::to_string(series.size()));
  if (bootstrap_rounds < 100) throw ConfigError("bootstrap_rounds must be at least 100");

  const int n = static_cast<int>(series.size());
  McSigma mc;
  mc.bootstrap_rounds = bootstrap_rounds;
  mc.per_series.assign(series.size(), {});

  std::vector<psm::OutputSet> sets(series.size());
  parallel_for(n, jobs, [&](int i) { sets[static_cast<std::size_t>(i)] = fn.eval(series[static_cast<std::size_t>(i)]); });

  for (const auto& o : sets[0].items) {
    mc.names.push_back(o.name);
    mc.units.push_back(o.unit);
  }
  for (std::size_t si = 0; si < sets.size(); ++si) {
    if (sets[si].items.size() != mc.names.size())
      throw Error(ErrorCode::Internal, "Internal", "series outputs disagree on names");
    auto& row = mc.per_series[si];
    row.reserve(mc.names.size());
    for (std::size_t oi = 0; oi < mc.names.size(); ++oi) {
      if (sets[si].items[oi].name != mc.names[oi])
        throw Error(ErrorCode::Internal, "Internal", "series output order mismatch");
      row.push_back(sets[si].items[oi].value);
    }
  }

  const std::size_t nb = static_cast<std::size_t>(bootstrap_rounds);
  for (std::size_t oi = 0; oi < mc.names.size(); ++oi) {
    std::vector<double> vals;
    vals.reserve(series.size());
    for (const auto& row : mc.per_series) vals.push_back(row[oi]);
    mc.sigma.push_back(std::sqrt(engine::sample_variance(vals)));

    // Percentile bootstrap of the standard deviation. Sorting first makes the
    // CI invariant to the order the series were passed in.
    std::sort(vals.begin(), vals.end());
    Rng rng(derive_stream_seed(seed, 7000 + oi));
    std::vector<double> stds;
    stds.reserve(nb);
    std::vector<double> pick(vals.size());
    for (std::size_t b = 0; b < nb; ++b) {
      for (auto& v : pick) v = vals[rng.bounded(static_cast<std::uint64_t>(vals.size()))];
      stds.push_back(std::sqrt(engine::sample_variance(pick)));
    }
    std::sort(stds.begin(), stds.end());
    const auto idx = [&](double q) {
      return std::clamp<std::size_t>(static_cast<std::size_t>(q * static_cast<double>(nb - 1)), 0, nb - 1);
    };
    mc.ci_lo.push_back(stds[idx(0.025)]);
    mc.ci_hi.push_back(stds[static_cast<std::size_t>(
        std::min<double>(static_cast<double>(nb - 1), std::ceil(0.975 * static_cast<double>(nb - 1))))]);
  }
  return mc;
}

nlohmann::json mc_sigma_to_json(const McSigma& mc) {
  nlohmann::json j;
  j["schema"] = "disjoint-mc/1";
  j["num_series"] = mc.per_series.size();
  j["bootstrap_rounds"] = mc.bootstrap_rounds;
  auto& outs = j["outputs"] = nlohmann::json::array();
  for (std::size_t oi = 0; oi < mc.names.size(); ++oi) {
    outs.push_back({{"name", mc.names[oi]},
                    {"unit", mc.units[oi]},
                    {"sigma", mc.sigma[oi]},
                    {"ci95_lo", mc.ci_lo[oi]},
                    {"ci95_hi", mc.ci_hi[oi]}});
  }
  j["per_series"] = mc.per_series;
  return j;
}

}  // namespace psuq::diag
