// psuq — command-line front end for the uncertainty-quantification toolkit.
//
// Subcommands:
//   synth        generate a reproducible synthetic demand/wind table
//   point        evaluate the statistic once on the full series
//   bootstrap    resample K short samples and extrapolate the output spread
//   plan-length  turn a measured spread into a required sample length
//   diagnose     check sigma stability across a grid of sample lengths
//   validate     compare bootstrap sigma against disjoint same-length series
//
// Conventions shared by every subcommand: configuration comes from an
// optional --config JSON file with flags overriding individual keys; seeds
// are always explicit (there is no wall-clock fallback, so a repeated
// invocation is bit-identical); outputs land in --out-dir together with a
// manifest.json that echoes the effective configuration; files are written
// to a .tmp sibling and renamed so readers never observe a partial file.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "psuq/calendar.hpp"
#include "psuq/diagnostic.hpp"
#include "psuq/engine.hpp"
#include "psuq/errors.hpp"
#include "psuq/psm.hpp"
#include "psuq/resampler.hpp"
#include "psuq/rng.hpp"
#include "psuq/synth.hpp"
#include "psuq/timeseries.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Effective run configuration. One flat struct for all subcommands keeps the
// JSON config format trivial: every key has exactly the same name as the
// corresponding long flag (dashes swapped for underscores).

struct CliConfig {
  // shared
  std::string data_file;
  std::string out_dir;
  std::string detrend = "none";  // none | per-year-mean
  int jobs = 1;
  std::optional<std::uint64_t> seed;

  // statistic under study
  std::string statistic = "psm";  // psm | demand-mean
  std::string variant = "lpplan";
  std::string spec_file;
  std::string caps_file;
  double caps_scale = 1.0;
  int split_hours = 0;
  int node_limit = 20000;
  std::string solver = "embedded";  // embedded | adapter
  std::string adapter_cmd;
  std::vector<std::string> adapter_args;
  double adapter_timeout_sec = 600.0;

  // resampling scheme
  std::string scheme = "months";  // months | weeks
  int n_s_years = 1;
  int n_s_weeks = 4;
  int k = 100;
  double max_failure_frac = 0.01;
  bool svg = false;

  // plan-length
  double sigma_s = 0.0;
  bool sigma_s_set = false;
  double plan_n_s_years = 0.0;
  double plan_n_s_hours = 0.0;
  double target_sigma = 0.0;
  std::string report_file;
  std::string output_name;

  // diagnose
  std::vector<int> grid_weeks;
  std::vector<int> grid_years;
  double stability_ratio = 1.5;
  std::int64_t short_sample_hours = 672;

  // validate
  int mc_rounds = 2000;
  std::int64_t window_hours = 8760;  // disjoint instance = first W hours of each year

  // synth
  std::string out_file;
  int synth_years = 1;
  double demand_base = 1000.0;
  double seasonal_amplitude = 200.0;
  double diurnal_amplitude = 100.0;
  double ar1_coef = 0.9;
  double noise_sigma = 50.0;
  double wind_mean = 0.4;
  double wind_swing = 0.15;
  double wind_concentration = 5.0;
  int wind_smooth_hours = 24;
};

template <typename T>
void take(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

void apply_config_json(CliConfig& cfg, const json& j, const std::string& origin) {
  if (!j.is_object()) throw psuq::ConfigError("config file " + origin + " must hold a JSON object");
  take(j, "data", cfg.data_file);
  take(j, "out_dir", cfg.out_dir);
  take(j, "detrend", cfg.detrend);
  take(j, "jobs", cfg.jobs);
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();

  take(j, "statistic", cfg.statistic);
  take(j, "variant", cfg.variant);
  take(j, "spec_file", cfg.spec_file);
  take(j, "caps_file", cfg.caps_file);
  take(j, "caps_scale", cfg.caps_scale);
  take(j, "split_hours", cfg.split_hours);
  take(j, "node_limit", cfg.node_limit);
  take(j, "solver", cfg.solver);
  take(j, "adapter_cmd", cfg.adapter_cmd);
  take(j, "adapter_args", cfg.adapter_args);
  take(j, "adapter_timeout_sec", cfg.adapter_timeout_sec);

  take(j, "scheme", cfg.scheme);
  take(j, "n_s_years", cfg.n_s_years);
  take(j, "n_s_weeks", cfg.n_s_weeks);
  take(j, "k", cfg.k);
  take(j, "max_failure_frac", cfg.max_failure_frac);
  take(j, "svg", cfg.svg);

  if (j.contains("sigma_s")) {
    cfg.sigma_s = j.at("sigma_s").get<double>();
    cfg.sigma_s_set = true;
  }
  take(j, "plan_n_s_years", cfg.plan_n_s_years);
  take(j, "plan_n_s_hours", cfg.plan_n_s_hours);
  take(j, "target_sigma", cfg.target_sigma);
  take(j, "report", cfg.report_file);
  take(j, "output", cfg.output_name);

  take(j, "grid_weeks", cfg.grid_weeks);
  take(j, "grid_years", cfg.grid_years);
  take(j, "stability_ratio", cfg.stability_ratio);
  take(j, "short_sample_hours", cfg.short_sample_hours);

  take(j, "mc_rounds", cfg.mc_rounds);
  take(j, "window_hours", cfg.window_hours);

  take(j, "out", cfg.out_file);
  take(j, "synth_years", cfg.synth_years);
  take(j, "demand_base", cfg.demand_base);
  take(j, "seasonal_amplitude", cfg.seasonal_amplitude);
  take(j, "diurnal_amplitude", cfg.diurnal_amplitude);
  take(j, "ar1_coef", cfg.ar1_coef);
  take(j, "noise_sigma", cfg.noise_sigma);
  take(j, "wind_mean", cfg.wind_mean);
  take(j, "wind_swing", cfg.wind_swing);
  take(j, "wind_concentration", cfg.wind_concentration);
  take(j, "wind_smooth_hours", cfg.wind_smooth_hours);
}

// The manifest must be enough to replay the run, so it echoes every effective
// knob, not just the ones that were set explicitly.
json config_to_json(const CliConfig& c) {
  json j;
  j["data"] = c.data_file;
  j["out_dir"] = c.out_dir;
  j["detrend"] = c.detrend;
  j["jobs"] = c.jobs;
  if (c.seed) j["seed"] = *c.seed;
  j["statistic"] = c.statistic;
  j["variant"] = c.variant;
  j["spec_file"] = c.spec_file;
  j["caps_file"] = c.caps_file;
  j["caps_scale"] = c.caps_scale;
  j["split_hours"] = c.split_hours;
  j["node_limit"] = c.node_limit;
  j["solver"] = c.solver;
  j["adapter_cmd"] = c.adapter_cmd;
  j["adapter_args"] = c.adapter_args;
  j["adapter_timeout_sec"] = c.adapter_timeout_sec;
  j["scheme"] = c.scheme;
  j["n_s_years"] = c.n_s_years;
  j["n_s_weeks"] = c.n_s_weeks;
  j["k"] = c.k;
  j["max_failure_frac"] = c.max_failure_frac;
  j["svg"] = c.svg;
  if (c.sigma_s_set) j["sigma_s"] = c.sigma_s;
  j["plan_n_s_years"] = c.plan_n_s_years;
  j["plan_n_s_hours"] = c.plan_n_s_hours;
  j["target_sigma"] = c.target_sigma;
  j["report"] = c.report_file;
  j["output"] = c.output_name;
  j["grid_weeks"] = c.grid_weeks;
  j["grid_years"] = c.grid_years;
  j["stability_ratio"] = c.stability_ratio;
  j["short_sample_hours"] = c.short_sample_hours;
  j["mc_rounds"] = c.mc_rounds;
  j["window_hours"] = c.window_hours;
  j["out"] = c.out_file;
  j["synth_years"] = c.synth_years;
  j["demand_base"] = c.demand_base;
  j["seasonal_amplitude"] = c.seasonal_amplitude;
  j["diurnal_amplitude"] = c.diurnal_amplitude;
  j["ar1_coef"] = c.ar1_coef;
  j["noise_sigma"] = c.noise_sigma;
  j["wind_mean"] = c.wind_mean;
  j["wind_swing"] = c.wind_swing;
  j["wind_concentration"] = c.wind_concentration;
  j["wind_smooth_hours"] = c.wind_smooth_hours;
  return j;
}

// ---------------------------------------------------------------------------
// File plumbing.

void atomic_write_text(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw psuq::IoError("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw psuq::IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw psuq::IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void write_json_file(const fs::path& path, const json& j) {
  atomic_write_text(path, j.dump(2) + "\n");
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw psuq::IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw psuq::ParseError(path.string() + ": " + e.what());
  }
  return j;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string fmtg(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Builders: config -> library objects.

psuq::DetrendMethod detrend_from_config(const CliConfig& cfg) {
  if (cfg.detrend == "none") return psuq::DetrendMethod::None;
  if (cfg.detrend == "per-year-mean") return psuq::DetrendMethod::PerYearMeanRescale;
  throw psuq::ConfigError("unknown detrend method '" + cfg.detrend +
                          "' (expected none | per-year-mean)");
}

psuq::TimeSeriesTable load_table(const CliConfig& cfg) {
  if (cfg.data_file.empty()) throw psuq::ConfigError("no input data: pass --data FILE");
  auto table = psuq::load_csv(cfg.data_file);
  auto method = detrend_from_config(cfg);
  if (method != psuq::DetrendMethod::None) table = psuq::detrend_demand(table, method);
  return table;
}

std::uint64_t require_seed(const CliConfig& cfg) {
  // Deliberately no wall-clock fallback: every stochastic run must name its
  // seed so the manifest alone can reproduce it.
  if (!cfg.seed) throw psuq::ConfigError("a seed is required: pass --seed N (or \"seed\" in --config)");
  return *cfg.seed;
}

psuq::SampleScheme scheme_from_config(const CliConfig& cfg) {
  psuq::SampleScheme s;
  if (cfg.scheme == "months") {
    s.kind = psuq::SampleScheme::Kind::Months;
  } else if (cfg.scheme == "weeks") {
    s.kind = psuq::SampleScheme::Kind::Weeks;
  } else {
    throw psuq::ConfigError("unknown scheme '" + cfg.scheme + "' (expected months | weeks)");
  }
  s.target_years = cfg.n_s_years;
  s.target_weeks = cfg.n_s_weeks;
  s.num_samples = cfg.k;
  s.seed = require_seed(cfg);
  s.validate();
  return s;
}

psuq::psm::PsmSpec spec_from_config(const CliConfig& cfg) {
  psuq::psm::PsmSpec spec;
  if (!cfg.spec_file.empty()) {
    spec = psuq::psm::load_spec_file(cfg.spec_file);
    // The file fixes the topology/economics; the variant flag still picks the
    // formulation so one spec file serves all three benchmark models.
    spec.variant = psuq::psm::variant_from_name(cfg.variant);
  } else {
    spec = psuq::psm::default_spec(psuq::psm::variant_from_name(cfg.variant));
  }
  if (!cfg.caps_file.empty()) psuq::psm::load_fixed_caps_file(spec, cfg.caps_file);
  if (cfg.caps_scale != 1.0) psuq::psm::scale_fixed_caps(spec, cfg.caps_scale);
  spec.validate();
  return spec;
}

psuq::engine::OutputFn fn_from_config(const CliConfig& cfg) {
  if (cfg.statistic == "demand-mean") return psuq::engine::make_demand_mean_fn();
  if (cfg.statistic != "psm")
    throw psuq::ConfigError("unknown statistic '" + cfg.statistic + "' (expected psm | demand-mean)");

  psuq::engine::PsmOutputFnOptions opts;
  if (cfg.solver == "embedded") {
    opts.solver = psuq::engine::SolverChoice::Embedded;
  } else if (cfg.solver == "adapter") {
    opts.solver = psuq::engine::SolverChoice::Adapter;
  } else {
    throw psuq::ConfigError("unknown solver '" + cfg.solver + "' (expected embedded | adapter)");
  }
  opts.milp.node_limit = cfg.node_limit;
  opts.adapter.command = cfg.adapter_cmd;
  opts.adapter.args = cfg.adapter_args;
  opts.adapter.timeout_sec = cfg.adapter_timeout_sec;
  opts.horizon_split_hours = cfg.split_hours;
  return psuq::engine::make_psm_output_fn(spec_from_config(cfg), opts);
}

json manifest_base(const CliConfig& cfg, const std::string& command) {
  json m;
  m["tool"] = "psuq";
  m["version"] = kVersion;
  m["command"] = command;
  json c = config_to_json(cfg);
  // FNV-1a over the serialized config: a quick equality check between runs.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : c.dump()) h = (h ^ ch) * 1099511628211ull;
  m["config"] = std::move(c);
  m["config_hash"] = hex64(h);
  return m;
}

void finish_manifest(json& m, const fs::path& out_dir, std::vector<std::string> files) {
  files.push_back("manifest.json");
  m["files"] = files;
  write_json_file(out_dir / "manifest.json", m);
}

fs::path require_out_dir(const CliConfig& cfg) {
  if (cfg.out_dir.empty()) throw psuq::ConfigError("no output directory: pass --out-dir DIR");
  fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw psuq::IoError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

// ---------------------------------------------------------------------------
// Report rendering helpers.

// Minimal self-contained error-bar chart: one row per output, the interval
// point +/- 2*sigma_hat drawn on a per-row scale spanning +/- 3*sigma_hat.
// Rows with sigma_hat == 0 collapse to a dot.
void write_report_svg(const psuq::engine::BootstrapReport& rep, const fs::path& path) {
  const int n = static_cast<int>(rep.names.size());
  const int row_h = 34, top = 46, left = 280, plot_w = 420, right_pad = 200;
  const int width = left + plot_w + right_pad;
  const int height = top + n * row_h + 24;

  std::ostringstream s;
  s << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
    << "' font-family='monospace' font-size='12'>\n";
  s << "<rect width='100%' height='100%' fill='white'/>\n";
  s << "<text x='12' y='22' font-size='14'>" << rep.fn_description
    << " — point ± 2·sigma_hat (n_s=" << rep.n_s_hours << " h, K=" << rep.k_used << ")</text>\n";
  for (int i = 0; i < n; ++i) {
    const double p = rep.point[static_cast<std::size_t>(i)];
    const double sig = rep.sigma_hat[static_cast<std::size_t>(i)];
    const int cy = top + i * row_h + row_h / 2;
    const double span = sig > 0.0 ? 3.0 * sig : 1.0;
    auto xpos = [&](double v) {
      return left + (v - (p - span)) / (2.0 * span) * plot_w;
    };
    s << "<text x='12' y='" << cy + 4 << "'>" << rep.names[static_cast<std::size_t>(i)]
      << "</text>\n";
    s << "<line x1='" << left << "' y1='" << cy << "' x2='" << left + plot_w << "' y2='" << cy
      << "' stroke='#ddd'/>\n";
    if (sig > 0.0) {
      const double x0 = xpos(p - 2.0 * sig), x1 = xpos(p + 2.0 * sig);
      s << "<line x1='" << x0 << "' y1='" << cy << "' x2='" << x1 << "' y2='" << cy
        << "' stroke='#336' stroke-width='2'/>\n";
      s << "<line x1='" << x0 << "' y1='" << cy - 6 << "' x2='" << x0 << "' y2='" << cy + 6
        << "' stroke='#336' stroke-width='2'/>\n";
      s << "<line x1='" << x1 << "' y1='" << cy - 6 << "' x2='" << x1 << "' y2='" << cy + 6
        << "' stroke='#336' stroke-width='2'/>\n";
    }
    s << "<circle cx='" << xpos(p) << "' cy='" << cy << "' r='3.5' fill='#c33'/>\n";
    s << "<text x='" << left + plot_w + 10 << "' y='" << cy + 4 << "'>" << fmtg(p) << " ± "
      << fmtg(2.0 * sig) << " " << rep.units[static_cast<std::size_t>(i)] << "</text>\n";
  }
  s << "</svg>\n";
  atomic_write_text(path, s.str());
}

void print_report_summary(const psuq::engine::BootstrapReport& rep) {
  std::printf("bootstrap: %s, K=%d used (%d failed), n_s=%" PRId64 " h -> n_o=%" PRId64 " h\n",
              rep.scheme.describe().c_str(), rep.k_used, rep.failures, rep.n_s_hours,
              rep.n_o_hours);
  for (std::size_t i = 0; i < rep.names.size(); ++i) {
    std::printf("  %-28s %14s  sigma_s %-12s sigma_hat %-12s [%s, %s] %s\n",
                rep.names[i].c_str(), fmtg(rep.point[i]).c_str(), fmtg(rep.sigma_s[i]).c_str(),
                fmtg(rep.sigma_hat[i]).c_str(), fmtg(rep.point[i] - 2.0 * rep.sigma_hat[i]).c_str(),
                fmtg(rep.point[i] + 2.0 * rep.sigma_hat[i]).c_str(), rep.units[i].c_str());
  }
  for (const auto& w : rep.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

// ---------------------------------------------------------------------------
// Subcommand bodies.

int run_synth(const CliConfig& cfg) {
  if (cfg.out_file.empty()) throw psuq::ConfigError("no output path: pass --out FILE");
  psuq::synth::SynthConfig sc;
  sc.years = cfg.synth_years;
  sc.seed = require_seed(cfg);
  sc.demand_base_mw = cfg.demand_base;
  sc.seasonal_amplitude_mw = cfg.seasonal_amplitude;
  sc.diurnal_amplitude_mw = cfg.diurnal_amplitude;
  sc.ar1_coef = cfg.ar1_coef;
  sc.noise_sigma_mw = cfg.noise_sigma;
  sc.wind_mean_cf = cfg.wind_mean;
  sc.wind_seasonal_swing = cfg.wind_swing;
  sc.wind_concentration = cfg.wind_concentration;
  sc.wind_smooth_hours = cfg.wind_smooth_hours;
  sc.validate();

  auto table = psuq::synth::synth_generate(sc);
  fs::path out(cfg.out_file);
  if (out.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(out.parent_path(), ec);
    if (ec) throw psuq::IoError("cannot create " + out.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = out;
  tmp += ".tmp";
  psuq::write_csv(table, tmp);
  std::error_code ec;
  fs::rename(tmp, out, ec);
  if (ec) throw psuq::IoError("cannot rename " + tmp.string() + ": " + ec.message());

  json m = manifest_base(cfg, "synth");
  m["data_fingerprint"] = hex64(table.fingerprint());
  m["files"] = json::array({out.filename().string()});
  write_json_file(out.string() + ".manifest.json", m);

  std::printf("synth: wrote %zu h x %zu buses to %s (fingerprint %s)\n", table.size(),
              table.num_buses(), out.string().c_str(), hex64(table.fingerprint()).c_str());
  return 0;
}

int run_point(const CliConfig& cfg) {
  auto table = load_table(cfg);
  auto dir = require_out_dir(cfg);
  auto fn = fn_from_config(cfg);
  auto outputs = psuq::engine::point_estimate(fn, table);

  json j;
  j["format"] = "point-estimate/1";
  j["fn"] = fn.description;
  j["data_fingerprint"] = hex64(table.fingerprint());
  j["hours"] = table.size();
  j["outputs"] = psuq::psm::outputs_to_json(outputs);
  write_json_file(dir / "outputs.json", j);

  fs::path csv_tmp = dir / "outputs.csv.tmp";
  psuq::psm::write_outputs_csv(outputs, csv_tmp);
  std::error_code ec;
  fs::rename(csv_tmp, dir / "outputs.csv", ec);
  if (ec) throw psuq::IoError("cannot rename " + csv_tmp.string() + ": " + ec.message());

  json m = manifest_base(cfg, "point");
  m["data_fingerprint"] = hex64(table.fingerprint());
  finish_manifest(m, dir, {"outputs.json", "outputs.csv"});

  std::printf("point: %s on %zu h\n", fn.description.c_str(), table.size());
  for (const auto& o : outputs.items)
    std::printf("  %-28s %14s %s\n", o.name.c_str(), fmtg(o.value).c_str(), o.unit.c_str());
  return 0;
}

int run_bootstrap(const CliConfig& cfg) {
  auto table = load_table(cfg);
  auto dir = require_out_dir(cfg);
  auto fn = fn_from_config(cfg);
  auto scheme = scheme_from_config(cfg);

  psuq::engine::BootstrapOptions opts;
  opts.jobs = cfg.jobs;
  opts.max_failure_frac = cfg.max_failure_frac;
  auto report = psuq::engine::run_bootstrap(fn, table, scheme, opts);

  write_json_file(dir / "report.json", psuq::engine::report_to_json(report));
  fs::path csv_tmp = dir / "report.csv.tmp";
  psuq::engine::write_report_csv(report, csv_tmp);
  std::error_code ec;
  fs::rename(csv_tmp, dir / "report.csv", ec);
  if (ec) throw psuq::IoError("cannot rename " + csv_tmp.string() + ": " + ec.message());

  std::vector<std::string> files = {"report.json", "report.csv"};
  if (cfg.svg) {
    write_report_svg(report, dir / "report.svg");
    files.push_back("report.svg");
  }
  json m = manifest_base(cfg, "bootstrap");
  m["data_fingerprint"] = hex64(table.fingerprint());
  m["scheme"] = psuq::scheme_to_json(report.scheme);
  finish_manifest(m, dir, files);

  print_report_summary(report);
  return 0;
}

int run_plan_length(const CliConfig& cfg) {
  // Two entry points: feed the numbers directly, or pull sigma_s / n_s for a
  // named output out of a bootstrap report.
  double sigma_s = 0.0, n_s_hours = 0.0;
  std::string label;
  if (!cfg.report_file.empty()) {
    if (cfg.output_name.empty())
      throw psuq::ConfigError("--report also needs --output NAME to pick the row");
    json rep = read_json_file(cfg.report_file);
    if (!rep.contains("outputs"))
      throw psuq::ParseError(cfg.report_file + ": not a bootstrap report (no \"outputs\")");
    bool found = false;
    for (const auto& o : rep.at("outputs")) {
      if (o.at("name").get<std::string>() == cfg.output_name) {
        sigma_s = o.at("sigma_s").get<double>();
        found = true;
        break;
      }
    }
    if (!found)
      throw psuq::ConfigError("output '" + cfg.output_name + "' not in " + cfg.report_file);
    n_s_hours = rep.at("n_s_hours").get<double>();
    label = cfg.output_name;
  } else {
    if (!cfg.sigma_s_set) throw psuq::ConfigError("pass --sigma-s X (or --report FILE)");
    sigma_s = cfg.sigma_s;
    if (cfg.plan_n_s_hours > 0.0) {
      n_s_hours = cfg.plan_n_s_hours;
    } else if (cfg.plan_n_s_years > 0.0) {
      n_s_hours = cfg.plan_n_s_years * psuq::cal::kHoursPerYear;
    } else {
      throw psuq::ConfigError("pass --n-s-years Y or --n-s-hours H");
    }
    label = "direct";
  }
  if (cfg.target_sigma <= 0.0) throw psuq::ConfigError("pass --target X with X > 0");
  if (sigma_s < 0.0) throw psuq::ConfigError("sigma_s must be >= 0");

  auto plan = psuq::engine::required_sample_length(sigma_s * sigma_s, n_s_hours, cfg.target_sigma);
  std::printf("plan-length (%s): sigma_s=%s at n_s=%s h, target=%s\n", label.c_str(),
              fmtg(sigma_s).c_str(), fmtg(n_s_hours).c_str(), fmtg(cfg.target_sigma).c_str());
  std::printf("  required length: %s h = %s years (whole years: %d)\n", fmtg(plan.hours).c_str(),
              fmtg(plan.years).c_str(), plan.years_ceil);

  if (!cfg.out_dir.empty()) {
    auto dir = require_out_dir(cfg);
    json j;
    j["format"] = "length-plan/1";
    j["output"] = label;
    j["sigma_s"] = sigma_s;
    j["n_s_hours"] = n_s_hours;
    j["target_sigma"] = cfg.target_sigma;
    j["required_hours"] = plan.hours;
    j["required_years"] = plan.years;
    j["required_years_ceil"] = plan.years_ceil;
    write_json_file(dir / "plan.json", j);
    json m = manifest_base(cfg, "plan-length");
    finish_manifest(m, dir, {"plan.json"});
  }
  return 0;
}

int run_diagnose(const CliConfig& cfg) {
  auto table = load_table(cfg);
  auto dir = require_out_dir(cfg);
  auto fn = fn_from_config(cfg);
  const std::uint64_t seed = require_seed(cfg);

  std::vector<psuq::SampleScheme> grid;
  if (!cfg.grid_weeks.empty() || !cfg.grid_years.empty()) {
    // Custom grid; per-point seeds use the same derivation as the default
    // grid so runs stay reproducible under grid edits.
    int idx = 0;
    for (int w : cfg.grid_weeks) {
      psuq::SampleScheme s;
      s.kind = psuq::SampleScheme::Kind::Weeks;
      s.target_weeks = w;
      s.num_samples = cfg.k;
      s.seed = psuq::derive_stream_seed(seed, 100 + idx++);
      grid.push_back(s);
    }
    for (int y : cfg.grid_years) {
      psuq::SampleScheme s;
      s.kind = psuq::SampleScheme::Kind::Months;
      s.target_years = y;
      s.num_samples = cfg.k;
      s.seed = psuq::derive_stream_seed(seed, 100 + idx++);
      grid.push_back(s);
    }
  } else {
    const bool cap_one_year = cfg.statistic == "psm" && cfg.variant != "lpplan";
    grid = psuq::diag::default_grid(static_cast<std::int64_t>(table.size()), cfg.k, seed,
                                    cap_one_year);
  }

  psuq::diag::DiagnosticOptions opts;
  opts.stability_ratio = cfg.stability_ratio;
  opts.short_sample_hours = cfg.short_sample_hours;
  opts.bootstrap.jobs = cfg.jobs;
  opts.bootstrap.max_failure_frac = cfg.max_failure_frac;
  auto rep = psuq::diag::run_diagnostic(fn, table, grid, opts);

  write_json_file(dir / "diagnostic.json", psuq::diag::diagnostic_to_json(rep));
  fs::path csv_tmp = dir / "diagnostic.csv.tmp";
  psuq::diag::write_diagnostic_csv(rep, csv_tmp);
  std::error_code ec;
  fs::rename(csv_tmp, dir / "diagnostic.csv", ec);
  if (ec) throw psuq::IoError("cannot rename " + csv_tmp.string() + ": " + ec.message());

  json m = manifest_base(cfg, "diagnose");
  m["data_fingerprint"] = hex64(table.fingerprint());
  finish_manifest(m, dir, {"diagnostic.json", "diagnostic.csv"});

  std::printf("diagnose: %zu grid points, stability ratio <= %s required\n", rep.grid.size(),
              fmtg(rep.stability_ratio).c_str());
  bool all_stable = true;
  for (std::size_t i = 0; i < rep.names.size(); ++i) {
    std::printf("  %-28s %-8s spread ratio %s\n", rep.names[i].c_str(),
                rep.stable[i] ? "stable" : "UNSTABLE", fmtg(rep.spread_ratio[i]).c_str());
    all_stable = all_stable && rep.stable[i];
  }
  std::printf("diagnose: %s\n", all_stable ? "all outputs stable" : "instability detected");
  return 0;
}

// Whole calendar years inside the table, used as disjoint ground-truth series.
std::vector<psuq::TimeSeriesTable> split_whole_years(const psuq::TimeSeriesTable& table) {
  using psuq::cal::kHoursPerYear;
  auto c = psuq::cal::civil_from_hour(table.start_hour);
  std::int64_t first = table.start_hour;
  if (!(c.month == 1 && c.day == 1 && c.hour == 0))
    first = psuq::cal::hour_index({c.year + 1, 1, 1, 0});
  std::vector<psuq::TimeSeriesTable> years;
  for (std::int64_t h = first; h + kHoursPerYear <= table.end_hour(); h += kHoursPerYear)
    years.push_back(psuq::slice(table, static_cast<std::size_t>(h - table.start_hour),
                                static_cast<std::size_t>(kHoursPerYear)));
  return years;
}

int run_validate(const CliConfig& cfg) {
  auto table = load_table(cfg);
  auto dir = require_out_dir(cfg);
  auto fn = fn_from_config(cfg);
  auto scheme = scheme_from_config(cfg);

  if (cfg.window_hours < 1 || cfg.window_hours > psuq::cal::kHoursPerYear)
    throw psuq::ConfigError("--window-hours must be in [1, 8760]");
  auto years = split_whole_years(table);
  if (years.size() < 8)
    throw psuq::InsufficientDataError(
        "validate needs at least 8 whole calendar years of data, found " +
        std::to_string(years.size()));
  // The disjoint ground-truth instances are the first `window_hours` of each
  // calendar year: one independent draw of the statistic per year, at the
  // same horizon the bootstrap sigma is rescaled to below.
  std::vector<psuq::TimeSeriesTable> instances;
  instances.reserve(years.size());
  for (const auto& y : years)
    instances.push_back(psuq::slice(y, 0, static_cast<std::size_t>(cfg.window_hours)));

  const std::uint64_t seed = require_seed(cfg);
  auto mc = psuq::diag::disjoint_mc_sigma(fn, instances, cfg.mc_rounds,
                                          psuq::derive_stream_seed(seed, 1), cfg.jobs);

  psuq::engine::BootstrapOptions opts;
  opts.jobs = cfg.jobs;
  opts.max_failure_frac = cfg.max_failure_frac;
  auto report = psuq::engine::run_bootstrap(fn, table, scheme, opts);

  json rows = json::array();
  std::printf("validate: %zu disjoint %" PRId64 " h instances vs %s bootstrap (K=%d)\n",
              instances.size(), cfg.window_hours, report.scheme.describe().c_str(),
              report.k_used);
  std::printf("  %-28s %-14s %-14s %-30s %s\n", "output", "sigma_boot", "mc_sigma",
              "mc 95% CI", "inside");
  bool all_inside = true;
  for (std::size_t i = 0; i < report.names.size(); ++i) {
    const double sig_w = psuq::engine::extrapolate_sigma(
        report.sigma_s[i] * report.sigma_s[i], static_cast<double>(report.n_s_hours),
        static_cast<double>(cfg.window_hours));
    const bool inside = mc.ci_lo[i] <= sig_w && sig_w <= mc.ci_hi[i];
    all_inside = all_inside && inside;
    json row;
    row["name"] = report.names[i];
    row["unit"] = report.units[i];
    row["sigma_boot"] = sig_w;
    row["mc_sigma"] = mc.sigma[i];
    row["mc_ci_lo"] = mc.ci_lo[i];
    row["mc_ci_hi"] = mc.ci_hi[i];
    row["inside_ci"] = inside;
    rows.push_back(row);
    char ci[72];
    std::snprintf(ci, sizeof ci, "[%s, %s]", fmtg(mc.ci_lo[i]).c_str(), fmtg(mc.ci_hi[i]).c_str());
    std::printf("  %-28s %-14s %-14s %-30s %s\n", report.names[i].c_str(), fmtg(sig_w).c_str(),
                fmtg(mc.sigma[i]).c_str(), ci, inside ? "yes" : "NO");
  }
  std::printf("validate: %s\n",
              all_inside ? "bootstrap sigma inside every CI" : "bootstrap sigma outside some CI");

  json j;
  j["format"] = "validate-report/1";
  j["fn"] = fn.description;
  j["data_fingerprint"] = hex64(table.fingerprint());
  j["num_instances"] = instances.size();
  j["window_hours"] = cfg.window_hours;
  j["rows"] = rows;
  j["mc"] = psuq::diag::mc_sigma_to_json(mc);
  j["bootstrap"] = psuq::engine::report_to_json(report);
  write_json_file(dir / "validate.json", j);

  std::ostringstream csv;
  csv << "name,unit,sigma_boot,mc_sigma,mc_ci_lo,mc_ci_hi,inside_ci\n";
  for (const auto& row : rows)
    csv << row.at("name").get<std::string>() << "," << row.at("unit").get<std::string>() << ","
        << fmtg(row.at("sigma_boot").get<double>()) << ","
        << fmtg(row.at("mc_sigma").get<double>()) << "," << fmtg(row.at("mc_ci_lo").get<double>())
        << "," << fmtg(row.at("mc_ci_hi").get<double>()) << ","
        << (row.at("inside_ci").get<bool>() ? "yes" : "no") << "\n";
  atomic_write_text(dir / "validate.csv", csv.str());

  json m = manifest_base(cfg, "validate");
  m["data_fingerprint"] = hex64(table.fingerprint());
  finish_manifest(m, dir, {"validate.json", "validate.csv"});
  return 0;
}

// ---------------------------------------------------------------------------
// Flag wiring. Flags write straight into the CliConfig that was pre-loaded
// from --config, so "flag beats file beats default" falls out of parse order.

void add_model_flags(CLI::App* sub, CliConfig& cfg) {
  sub->add_option("--data", cfg.data_file, "input CSV (timestamp,bus,demand_mw,wind_cf)");
  sub->add_option("--detrend", cfg.detrend, "demand detrend: none | per-year-mean");
  sub->add_option("--statistic", cfg.statistic, "statistic: psm | demand-mean");
  sub->add_option("--variant", cfg.variant, "model variant: lpplan | milpplan | operate");
  sub->add_option("--spec", cfg.spec_file, "model spec JSON (replaces built-in benchmark spec)");
  sub->add_option("--caps", cfg.caps_file, "fixed capacities JSON (operate variant)");
  sub->add_option("--caps-scale", cfg.caps_scale, "scale factor applied to fixed capacities");
  sub->add_option("--split", cfg.split_hours, "solve in windows of this many hours (0 = whole)");
  sub->add_option("--node-limit", cfg.node_limit, "branch-and-bound node budget");
  sub->add_option("--solver", cfg.solver, "solver backend: embedded | adapter");
  sub->add_option("--adapter-cmd", cfg.adapter_cmd, "external solver command (PSUQ_ADAPTER overrides)");
  sub->add_option("--adapter-arg", cfg.adapter_args, "extra adapter argument (repeatable)");
  sub->add_option("--adapter-timeout", cfg.adapter_timeout_sec, "adapter timeout, seconds");
}

void add_scheme_flags(CLI::App* sub, CliConfig& cfg) {
  sub->add_option("--scheme", cfg.scheme, "resampling scheme: months | weeks");
  sub->add_option("--n-s-years", cfg.n_s_years, "sample length, years (months scheme)");
  sub->add_option("--n-s-weeks", cfg.n_s_weeks, "sample length, weeks (weeks scheme)");
  sub->add_option("--k", cfg.k, "number of bootstrap samples");
  sub->add_option("--max-failure-frac", cfg.max_failure_frac,
                  "abort when more than this fraction of samples fail");
}

}  // namespace

int main(int argc, char** argv) {
  CliConfig cfg;

  // --config is honoured before CLI11 runs so that explicit flags override
  // file values purely by assignment order.
  try {
    for (int i = 1; i < argc; ++i) {
      std::string a = argv[i];
      std::string path;
      if (a == "--config" && i + 1 < argc) {
        path = argv[i + 1];
      } else if (a.rfind("--config=", 0) == 0) {
        path = a.substr(9);
      }
      if (!path.empty()) apply_config_json(cfg, read_json_file(path), path);
    }
  } catch (const psuq::Error& e) {
    json err;
    err["error"] = {{"type", e.type()}, {"message", e.what()}, {"exit_code", static_cast<int>(e.code())}};
    std::cerr << err.dump() << "\n";
    return static_cast<int>(e.code());
  }

  CLI::App app{"psuq — sampling uncertainty of power-system-model outputs"};
  app.set_version_flag("--version", std::string("psuq ") + kVersion);
  app.require_subcommand(1);
  std::string config_dummy;
  app.add_option("--config", config_dummy, "JSON config file; flags override its keys");

  std::optional<std::uint64_t>& seed = cfg.seed;

  auto* synth = app.add_subcommand("synth", "generate a synthetic demand/wind table");
  synth->add_option("--out", cfg.out_file, "output CSV path");
  synth->add_option("--years", cfg.synth_years, "number of years to generate");
  synth->add_option("--seed", seed, "master seed (required)");
  synth->add_option("--demand-base", cfg.demand_base, "per-bus mean demand, MW");
  synth->add_option("--seasonal", cfg.seasonal_amplitude, "annual cosine amplitude, MW");
  synth->add_option("--diurnal", cfg.diurnal_amplitude, "daily cosine amplitude, MW");
  synth->add_option("--ar1", cfg.ar1_coef, "anomaly AR(1) coefficient");
  synth->add_option("--noise", cfg.noise_sigma, "anomaly innovation sigma, MW");
  synth->add_option("--wind-mean", cfg.wind_mean, "annual mean wind capacity factor");
  synth->add_option("--wind-swing", cfg.wind_swing, "seasonal swing of the wind mean");
  synth->add_option("--wind-conc", cfg.wind_concentration, "Beta concentration (alpha+beta)");
  synth->add_option("--wind-smooth", cfg.wind_smooth_hours, "trailing moving-average window, h");

  auto* point = app.add_subcommand("point", "evaluate the statistic on the full series");
  add_model_flags(point, cfg);
  point->add_option("--out-dir", cfg.out_dir, "output directory");

  auto* boot = app.add_subcommand("bootstrap", "resample and extrapolate output spread");
  add_model_flags(boot, cfg);
  add_scheme_flags(boot, cfg);
  boot->add_option("--seed", seed, "master seed (required)");
  boot->add_option("--jobs", cfg.jobs, "worker threads");
  boot->add_flag("--svg", cfg.svg, "also write an error-bar chart (report.svg)");
  boot->add_option("--out-dir", cfg.out_dir, "output directory");

  auto* plan = app.add_subcommand("plan-length", "required sample length for a target sigma");
  plan->add_option("--sigma-s", cfg.sigma_s, "measured spread at the short length")
      ->each([&cfg](const std::string&) { cfg.sigma_s_set = true; });
  plan->add_option("--n-s-years", cfg.plan_n_s_years, "short length, years");
  plan->add_option("--n-s-hours", cfg.plan_n_s_hours, "short length, hours");
  plan->add_option("--target", cfg.target_sigma, "target sigma on the output");
  plan->add_option("--report", cfg.report_file, "bootstrap report.json to read sigma_s from");
  plan->add_option("--output", cfg.output_name, "output name inside --report");
  plan->add_option("--out-dir", cfg.out_dir, "optional output directory for plan.json");

  auto* diag = app.add_subcommand("diagnose", "sigma stability across sample lengths");
  add_model_flags(diag, cfg);
  diag->add_option("--k", cfg.k, "samples per grid point");
  diag->add_option("--seed", seed, "master seed (required)");
  diag->add_option("--jobs", cfg.jobs, "worker threads");
  diag->add_option("--grid-weeks", cfg.grid_weeks, "custom grid: week lengths");
  diag->add_option("--grid-years", cfg.grid_years, "custom grid: year lengths");
  diag->add_option("--stability-ratio", cfg.stability_ratio, "max allowed max/min sigma ratio");
  diag->add_option("--short-hours", cfg.short_sample_hours, "flag grid points shorter than this");
  diag->add_option("--max-failure-frac", cfg.max_failure_frac,
                   "abort when more than this fraction of samples fail");
  diag->add_option("--out-dir", cfg.out_dir, "output directory");

  auto* val = app.add_subcommand("validate", "bootstrap sigma vs disjoint-years ground truth");
  add_model_flags(val, cfg);
  add_scheme_flags(val, cfg);
  val->add_option("--seed", seed, "master seed (required)");
  val->add_option("--jobs", cfg.jobs, "worker threads");
  val->add_option("--mc-rounds", cfg.mc_rounds, "bootstrap rounds for the ground-truth CI");
  val->add_option("--window-hours", cfg.window_hours,
                  "disjoint instance length: first W hours of each calendar year");
  val->add_option("--out-dir", cfg.out_dir, "output directory");

  // Accept --config in subcommand position as well (it was already consumed
  // by the pre-parse above; these bindings only keep CLI11 from rejecting it).
  for (CLI::App* sub : {synth, point, boot, plan, diag, val})
    sub->add_option("--config", config_dummy, "JSON config file; flags override its keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    json err;
    err["error"] = {{"type", "ConfigError"},
                    {"message", std::string("usage: ") + e.what()},
                    {"exit_code", static_cast<int>(psuq::ErrorCode::Config)}};
    std::cerr << err.dump() << "\n";
    return static_cast<int>(psuq::ErrorCode::Config);
  }

  try {
    if (synth->parsed()) return run_synth(cfg);
    if (point->parsed()) return run_point(cfg);
    if (boot->parsed()) return run_bootstrap(cfg);
    if (plan->parsed()) return run_plan_length(cfg);
    if (diag->parsed()) return run_diagnose(cfg);
    if (val->parsed()) return run_validate(cfg);
    throw psuq::ConfigError("no subcommand selected");
  } catch (const psuq::Error& e) {
    json err;
    err["error"] = {{"type", e.type()}, {"message", e.what()}, {"exit_code", static_cast<int>(e.code())}};
    std::cerr << err.dump() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    json err;
    err["error"] = {{"type", "Internal"}, {"message", e.what()}, {"exit_code", 1}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
