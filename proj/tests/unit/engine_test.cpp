#include <doctest.h>

#include <cmath>
#include <vector>

#include "psuq/diagnostic.hpp"
#include "psuq/engine.hpp"
#include "psuq/errors.hpp"
#include "psuq/rng.hpp"
#include "psuq/synth.hpp"

using namespace psuq;
using namespace psuq::engine;

namespace {

TimeSeriesTable two_bus_table() {
  TimeSeriesTable t;
  t.start_hour = 0;
  t.bus_ids = {"1", "2"};
  t.demand_mw = {{1.0, 2.0, 3.0, 4.0}, {10.0, 20.0, 30.0, 40.0}};
  t.wind_cf = {{0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}};
  return t;
}

}  // namespace

TEST_CASE("sample variance and sigma extrapolation match hand arithmetic") {
  CHECK(sample_variance({1.0, 2.0, 3.0}) == 1.0);  // exact
  CHECK(sample_variance({1.0, 2.0, 3.0, 4.0}) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(sample_variance({42.0}), DegenerateInputError);

  CHECK(extrapolate_sigma(4.0, 8760.0, 4.0 * 8760.0) == 1.0);  // exact
  CHECK(extrapolate_sigma(121.0, 8760.0, 8760.0) == doctest::Approx(11.0));
  CHECK_THROWS_AS(extrapolate_sigma(-1.0, 1.0, 1.0), DegenerateInputError);
  CHECK_THROWS_AS(extrapolate_sigma(1.0, 0.0, 1.0), DegenerateInputError);
}

TEST_CASE("required length reproduces the planning arithmetic") {
  // sigma 11 at one year, target 5: 8760 * 121 / 25 hours.
  const LengthPlan plan = required_sample_length(121.0, 8760.0, 5.0);
  CHECK(plan.hours == doctest::Approx(42398.4).epsilon(1e-12));
  CHECK(plan.years == doctest::Approx(4.84).epsilon(1e-12));
  CHECK(plan.years_ceil == 5);
  CHECK_THROWS_AS(required_sample_length(121.0, 8760.0, 0.0), ValidationError);
}

TEST_CASE("demand-mean statistic averages the system load") {
  const OutputFn fn = make_demand_mean_fn();
  const auto out = fn.eval(two_bus_table());
  REQUIRE(out.items.size() == 1);
  CHECK(out.items[0].name == "demand_mean_systemwide");
  CHECK(out.items[0].value == doctest::Approx(27.5));  // mean of {11,22,33,44}
  CHECK(point_estimate(fn, two_bus_table()).items[0].value == doctest::Approx(27.5));
}

TEST_CASE("bootstrap report wires lengths, counts and identities through") {
  synth::SynthConfig cfg;
  cfg.years = 3;
  cfg.seed = 11;
  const TimeSeriesTable table = synth::synth_generate(cfg);

  SampleScheme scheme;
  scheme.kind = SampleScheme::Kind::Months;
  scheme.target_years = 1;
  scheme.num_samples = 30;
  scheme.seed = 42;

  const OutputFn fn = make_demand_mean_fn();
  const BootstrapReport rep = run_bootstrap(fn, table, scheme);

  CHECK(rep.n_s_hours == 8760);
  CHECK(rep.n_o_hours == 3 * 8760);
  CHECK(rep.k_requested == 30);
  CHECK(rep.k_used == 30);
  CHECK(rep.failures == 0);
  CHECK(rep.table_fingerprint == table.fingerprint());
  REQUIRE(rep.names.size() == 1);
  CHECK(rep.point[0] == doctest::Approx(point_estimate(fn, table).items[0].value));
  // sigma_hat is sigma_s carried down to the full-series length
  CHECK(rep.sigma_hat[0] ==
        doctest::Approx(rep.sigma_s[0] * std::sqrt(8760.0 / (3.0 * 8760.0))).epsilon(1e-12));
  CHECK(rep.sigma_s[0] > 0.0);
  REQUIRE(rep.samples.size() == 30);
  for (int i = 0; i < 30; ++i) {
    CHECK(rep.samples[(std::size_t)i].index == i);
    CHECK(rep.samples[(std::size_t)i].ok);
    REQUIRE(rep.samples[(std::size_t)i].values.size() == 1);
  }
}

TEST_CASE("bootstrap is independent of the worker count") {
  synth::SynthConfig cfg;
  cfg.years = 2;
  cfg.seed = 99;
  const TimeSeriesTable table = synth::synth_generate(cfg);

  SampleScheme scheme;
  scheme.kind = SampleScheme::Kind::Weeks;
  scheme.target_weeks = 8;
  scheme.num_samples = 24;
  scheme.seed = 7;

  const OutputFn fn = make_demand_mean_fn();
  BootstrapOptions one;
  one.jobs = 1;
  BootstrapOptions three;
  three.jobs = 3;
  const auto a = run_bootstrap(fn, table, scheme, one);
  const auto b = run_bootstrap(fn, table, scheme, three);
  CHECK(report_to_json(a).dump() == report_to_json(b).dump());
}

TEST_CASE("occasional sample failures are tolerated, many abort the run") {
  synth::SynthConfig cfg;
  cfg.years = 2;
  cfg.seed = 5;
  const TimeSeriesTable table = synth::synth_generate(cfg);

  SampleScheme scheme;
  scheme.kind = SampleScheme::Kind::Weeks;
  scheme.target_weeks = 4;
  scheme.num_samples = 100;
  scheme.seed = 3;

  // With jobs=1 evaluations run in a fixed order: the point estimate first,
  // then samples 0..K-1. A call counter makes the failures deterministic.
  int calls = 0;
  int fail_from = 1000, fail_count = 0;
  OutputFn flaky = make_demand_mean_fn();
  const auto inner = flaky.eval;
  flaky.eval = [&](const TimeSeriesTable& t) {
    const int c = calls++;
    if (c >= fail_from && c < fail_from + fail_count) throw SolverError("injected failure");
    return inner(t);
  };

  BootstrapOptions opts;
  opts.jobs = 1;

  calls = 0;
  fail_from = 8;  // sample index 7 only
  fail_count = 1;
  const auto rep = run_bootstrap(flaky, table, scheme, opts);
  CHECK(rep.failures == 1);
  CHECK(rep.k_used == 99);
  CHECK(!rep.samples[7].ok);
  CHECK(rep.samples[7].error == "injected failure");
  REQUIRE(rep.warnings.size() == 1);
  CHECK(rep.warnings[0].find("1 sample(s) failed") != std::string::npos);

  calls = 0;
  fail_count = 3;  // 3% > the 1% default budget
  CHECK_THROWS_AS(run_bootstrap(flaky, table, scheme, opts), TooManyFailuresError);
}

TEST_CASE("week and month samples agree on stationary data") {
  // With no seasonal trend the variance of the sample mean scales like 1/n,
  // so sigma_s^2 * n_s should be roughly flat across schemes and lengths.
  synth::SynthConfig cfg;
  cfg.years = 3;
  cfg.seed = 21;
  cfg.seasonal_amplitude_mw = 0.0;
  const TimeSeriesTable table = synth::synth_generate(cfg);
  const OutputFn fn = make_demand_mean_fn();

  SampleScheme months;
  months.kind = SampleScheme::Kind::Months;
  months.target_years = 1;
  months.num_samples = 80;
  months.seed = 1;

  SampleScheme weeks;
  weeks.kind = SampleScheme::Kind::Weeks;
  weeks.target_weeks = 13;
  weeks.num_samples = 80;
  weeks.seed = 2;

  const auto a = run_bootstrap(fn, table, months);
  const auto b = run_bootstrap(fn, table, weeks);
  const double scaled_a = a.sigma_s[0] * a.sigma_s[0] * (double)a.n_s_hours;
  const double scaled_b = b.sigma_s[0] * b.sigma_s[0] * (double)b.n_s_hours;
  CHECK(scaled_a / scaled_b > 0.5);
  CHECK(scaled_a / scaled_b < 2.0);
}

TEST_CASE("split-horizon evaluation equals whole-horizon on a separable model") {
  // An Operate fleet with no ramp coupling decomposes hour by hour, so
  // cutting the series into windows must not change any output.
  psm::PsmSpec spec;
  spec.variant = psm::Variant::Operate;
  spec.num_buses = 1;
  spec.bus_names = {"1"};
  spec.technologies = {
      {"ccgt", 100.0, 0.035, 400.0, {1}},
      {"unmet", 0.0, 6.0, 0.0, {1}},
  };
  spec.demand_buses = {1};
  spec.fixed_gen_caps = {{"ccgt", 1, 300.0}};

  TimeSeriesTable t;
  t.start_hour = 0;
  t.bus_ids = {"1"};
  Rng rng(8);
  std::vector<double> d(48);
  for (auto& v : d) v = 100.0 + 250.0 * rng.uniform01();  // sometimes above cap
  t.demand_mw = {d};
  t.wind_cf = {std::vector<double>(48, 0.0)};

  PsmOutputFnOptions whole;
  PsmOutputFnOptions split;
  split.horizon_split_hours = 12;
  const auto a = make_psm_output_fn(spec, whole).eval(t);
  const auto b = make_psm_output_fn(spec, split).eval(t);
  REQUIRE(a.items.size() == b.items.size());
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    CHECK(a.items[i].name == b.items[i].name);
    CHECK(b.items[i].value ==
          doctest::Approx(a.items[i].value).epsilon(1e-9).scale(std::max(1.0, std::abs(a.items[i].value))));
  }
}

TEST_CASE("samples longer than the source carry a warning") {
  synth::SynthConfig cfg;
  cfg.years = 1;
  cfg.seed = 2;
  const TimeSeriesTable table = synth::synth_generate(cfg);

  SampleScheme scheme;
  scheme.kind = SampleScheme::Kind::Months;
  scheme.target_years = 2;  // twice the source
  scheme.num_samples = 10;
  scheme.seed = 4;

  const auto rep = run_bootstrap(make_demand_mean_fn(), table, scheme);
  bool warned = false;
  for (const auto& w : rep.warnings) warned |= w.find("extrapolation runs backwards") != std::string::npos;
  CHECK(warned);
}
