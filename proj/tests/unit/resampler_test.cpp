#include <doctest.h>

#include <cmath>
#include <map>

#include "psuq/errors.hpp"
#include "psuq/resampler.hpp"

using namespace psuq;

namespace {

TimeSeriesTable years_table(int start_year, int years) {
  TimeSeriesTable t;
  t.start_hour = cal::hour_index({start_year, 1, 1, 0});
  t.bus_ids = {"a"};
  t.demand_mw.resize(1);
  t.wind_cf.resize(1);
  const std::size_t n = static_cast<std::size_t>(years) * cal::kHoursPerYear;
  for (std::size_t i = 0; i < n; ++i) {
    t.demand_mw[0].push_back(50.0 + static_cast<double>(i % 1000));
    t.wind_cf[0].push_back(0.25);
  }
  return t;
}

}  // namespace

TEST_CASE("months scheme: a 2-year target is 24 blocks cycling Jan..Dec") {
  const auto t = years_table(2001, 3);
  SampleScheme s;
  s.kind = SampleScheme::Kind::Months;
  s.target_years = 2;
  s.num_samples = 5;
  s.seed = 42;
  const auto plans = draw_plans(t, s);
  REQUIRE(plans.size() == 5);
  for (const auto& p : plans) {
    REQUIRE(p.blocks.size() == 24);
    CHECK(p.n_s_hours == 2 * cal::kHoursPerYear);
    for (int i = 0; i < 24; ++i) {
      CHECK(p.blocks[static_cast<std::size_t>(i)].month == (i % 12) + 1);
      CHECK(p.blocks[static_cast<std::size_t>(i)].kind == CalendarBlock::Kind::CalendarMonth);
    }
    std::int64_t total = 0;
    for (const auto& b : p.blocks) total += b.length_hours;
    CHECK(total == p.n_s_hours);  // month lengths always add up to whole years
  }
}

TEST_CASE("weeks scheme: 8 weeks cycle the season strata") {
  const auto t = years_table(2001, 3);
  SampleScheme s;
  s.kind = SampleScheme::Kind::Weeks;
  s.target_weeks = 8;  // 56 days
  s.num_samples = 3;
  s.seed = 7;
  const auto plans = draw_plans(t, s);
  const cal::Season expect[8] = {cal::Season::DJF, cal::Season::MAM, cal::Season::JJA,
                                 cal::Season::SON, cal::Season::DJF, cal::Season::MAM,
                                 cal::Season::JJA, cal::Season::SON};
  for (const auto& p : plans) {
    REQUIRE(p.blocks.size() == 8);
    CHECK(p.n_s_hours == 8 * cal::kHoursPerWeek);
    for (int i = 0; i < 8; ++i) {
      CHECK(p.blocks[static_cast<std::size_t>(i)].kind == CalendarBlock::Kind::SeasonWeek);
      CHECK(p.blocks[static_cast<std::size_t>(i)].season == expect[i]);
    }
  }
}

TEST_CASE("plans are deterministic in (table, scheme)") {
  const auto t = years_table(2001, 4);
  SampleScheme s;
  s.kind = SampleScheme::Kind::Months;
  s.target_years = 1;
  s.num_samples = 20;
  s.seed = 123;
  const auto a = draw_plans(t, s);
  const auto b = draw_plans(t, s);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].blocks == b[i].blocks);

  s.seed = 124;  // a different seed must change at least one plan
  const auto c = draw_plans(t, s);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) any_diff = any_diff || !(a[i].blocks == c[i].blocks);
  CHECK(any_diff);
}

TEST_CASE("single-candidate pools make every sample identical") {
  const auto t = years_table(2001, 1);
  SampleScheme s;
  s.kind = SampleScheme::Kind::Months;
  s.target_years = 1;
  s.num_samples = 4;
  s.seed = 99;
  const auto plans = draw_plans(t, s);
  for (const auto& p : plans) CHECK(p.blocks == plans[0].blocks);
  // and each is January..December of the one source year, verbatim
  for (int m = 0; m < 12; ++m) CHECK(plans[0].blocks[static_cast<std::size_t>(m)].year == 2001);
}

TEST_CASE("draws are uniform over the stratum pool") {
  const auto t = years_table(2001, 10);
  SampleScheme s;
  s.kind = SampleScheme::Kind::Months;
  s.target_years = 1;
  s.num_samples = 1000;
  s.seed = 2024;
  const auto plans = draw_plans(t, s);

  // Count which source January each sample picked: 10 candidates, K = 1000,
  // expected frequency 0.1 with 3-sigma half-width ~0.028.
  std::map<int, int> counts;
  for (const auto& p : plans) counts[p.blocks[0].year] += 1;
  CHECK(counts.size() == 10);
  for (const auto& [year, c] : counts) {
    const double freq = static_cast<double>(c) / 1000.0;
    INFO("source year ", year, " freq ", freq);
    CHECK(freq > 0.1 - 0.03);
    CHECK(freq < 0.1 + 0.03);
  }
}

TEST_CASE("empty stratum is reported by name") {
  const auto t = years_table(2001, 1);
  SampleScheme s;
  s.kind = SampleScheme::Kind::Weeks;
  s.target_weeks = 4;
  s.num_samples = 2;
  s.seed = 1;

  // truncate to March..May only: DJF/JJA/SON pools vanish
  auto spring = slice(t, static_cast<std::size_t>(cal::hour_index({2001, 3, 1, 0}) - t.start_hour),
                      92 * 24);
  CHECK_THROWS_WITH_AS(draw_plans(spring, s), doctest::Contains("DJF"), EmptyStratumError);
}

TEST_CASE("scheme validation") {
  SampleScheme s;
  s.num_samples = 1;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.num_samples = 2;
  s.kind = SampleScheme::Kind::Weeks;
  s.target_weeks = 0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.target_weeks = 13;  // any whole number of weeks is a valid target
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("assemble: identity resample reproduces the source year") {
  const auto t = years_table(2001, 1);
  const auto idx = index_blocks(t);
  SamplePlan plan;
  plan.sample_index = 0;
  plan.n_s_hours = cal::kHoursPerYear;
  plan.table_fingerprint = t.fingerprint();
  for (int m = 0; m < 12; ++m) plan.blocks.push_back(idx.months[m][0]);

  const auto out = assemble(t, plan);
  CHECK(out.size() == static_cast<std::size_t>(cal::kHoursPerYear));
  CHECK(out.demand_mw == t.demand_mw);
  CHECK(out.wind_cf == t.wind_cf);
}

TEST_CASE("assemble: sample length equals the scheme target") {
  const auto t = years_table(2001, 2);
  SampleScheme s;
  s.kind = SampleScheme::Kind::Weeks;
  s.target_weeks = 8;
  s.num_samples = 3;
  s.seed = 5;
  for (const auto& plan : draw_plans(t, s)) {
    const auto sample = assemble(t, plan);
    CHECK(sample.size() == 8 * 168);
  }
}

TEST_CASE("assemble rejects plans from different data") {
  const auto t1 = years_table(2001, 1);
  auto t2 = t1;
  t2.demand_mw[0][0] += 1.0;
  SampleScheme s;
  s.kind = SampleScheme::Kind::Months;
  s.target_years = 1;
  s.num_samples = 2;
  s.seed = 3;
  const auto plans = draw_plans(t1, s);
  CHECK_THROWS_AS(assemble(t2, plans[0]), ValidationError);
}

TEST_CASE("plans survive a JSON round trip") {
  const auto t = years_table(2001, 2);
  SampleScheme s;
  s.kind = SampleScheme::Kind::Weeks;
  s.target_weeks = 5;
  s.num_samples = 2;
  s.seed = 77;
  const auto plans = draw_plans(t, s);
  const auto j = plan_to_json(plans[1]);
  const auto back = plan_from_json(j);
  CHECK(back.sample_index == plans[1].sample_index);
  CHECK(back.n_s_hours == plans[1].n_s_hours);
  CHECK(back.table_fingerprint == plans[1].table_fingerprint);
  CHECK(back.blocks == plans[1].blocks);
  // and the rebuilt plan still assembles
  CHECK(assemble(t, back).size() == 5 * 168);
}

TEST_CASE("scheme JSON round trip") {
  SampleScheme s;
  s.kind = SampleScheme::Kind::Months;
  s.target_years = 3;
  s.num_samples = 250;
  s.seed = 31337;
  const auto back = scheme_from_json(scheme_to_json(s));
  CHECK(back.kind == s.kind);
  CHECK(back.target_years == s.target_years);
  CHECK(back.num_samples == s.num_samples);
  CHECK(back.seed == s.seed);
}
