#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "psuq/errors.hpp"
#include "psuq/timeseries.hpp"

using namespace psuq;
namespace fs = std::filesystem;

namespace {

// Deterministic synthetic table: demand/cf are simple functions of (bus, t).
TimeSeriesTable make_table(cal::CivilTime start, std::size_t hours,
                           std::vector<std::string> buses) {
  TimeSeriesTable t;
  t.start_hour = cal::hour_index(start);
  t.bus_ids = std::move(buses);
  t.demand_mw.resize(t.bus_ids.size());
  t.wind_cf.resize(t.bus_ids.size());
  for (std::size_t b = 0; b < t.bus_ids.size(); ++b) {
    for (std::size_t i = 0; i < hours; ++i) {
      t.demand_mw[b].push_back(100.0 + 10.0 * static_cast<double>(b) +
                               std::sin(0.01 * static_cast<double>(i)) * 5.0);
      t.wind_cf[b].push_back(0.5 + 0.4 * std::sin(0.003 * static_cast<double>(i + b)));
    }
  }
  return t;
}

fs::path temp_file(const char* name) {
  return fs::temp_directory_path() / (std::string("psuq_ts_test_") + name);
}

}  // namespace

TEST_CASE("CSV round-trip preserves values exactly") {
  const auto table = make_table({2001, 1, 1, 0}, 48, {"a", "b"});
  const auto path = temp_file("roundtrip.csv");
  write_csv(table, path);
  const auto loaded = load_csv(path);
  CHECK(loaded.size() == 48);
  CHECK(loaded.bus_ids == table.bus_ids);
  CHECK(loaded.start_hour == table.start_hour);
  CHECK(loaded.demand_mw == table.demand_mw);  // %.17g survives the trip bit-exact
  CHECK(loaded.wind_cf == table.wind_cf);
  CHECK(loaded.fingerprint() == table.fingerprint());
  fs::remove(path);
}

TEST_CASE("loader rejects out-of-range and malformed input") {
  const auto path = temp_file("bad.csv");

  SUBCASE("wind_cf above 1") {
    std::ofstream f(path);
    f << "timestamp,bus,demand_mw,wind_cf\n"
      << "2001-01-01T00:00:00,a,100,0.5\n"
      << "2001-01-01T01:00:00,a,100,1.2\n";
    f.close();
    CHECK_THROWS_AS(load_csv(path), ValidationError);
  }
  SUBCASE("negative demand") {
    std::ofstream f(path);
    f << "timestamp,bus,demand_mw,wind_cf\n"
      << "2001-01-01T00:00:00,a,-5,0.5\n";
    f.close();
    CHECK_THROWS_AS(load_csv(path), ValidationError);
  }
  SUBCASE("gap in hours") {
    std::ofstream f(path);
    f << "timestamp,bus,demand_mw,wind_cf\n"
      << "2001-01-01T00:00:00,a,100,0.5\n"
      << "2001-01-01T02:00:00,a,100,0.5\n";  // 01:00 missing
    f.close();
    CHECK_THROWS_AS(load_csv(path), ValidationError);
  }
  SUBCASE("missing bus in a timestamp group") {
    std::ofstream f(path);
    f << "timestamp,bus,demand_mw,wind_cf\n"
      << "2001-01-01T00:00:00,a,100,0.5\n"
      << "2001-01-01T00:00:00,b,100,0.5\n"
      << "2001-01-01T01:00:00,a,100,0.5\n";
    f.close();
    CHECK_THROWS_AS(load_csv(path), ValidationError);
  }
  SUBCASE("bad field count") {
    std::ofstream f(path);
    f << "timestamp,bus,demand_mw,wind_cf\n"
      << "2001-01-01T00:00:00,a,100\n";
    f.close();
    CHECK_THROWS_AS(load_csv(path), ParseError);
  }
  SUBCASE("bad header") {
    std::ofstream f(path);
    f << "time,bus,load,cf\n";
    f.close();
    CHECK_THROWS_AS(load_csv(path), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_csv(temp_file("does_not_exist.csv")), IoError);
  }
  fs::remove(path);
}

TEST_CASE("loader drops Feb 29 rows and keeps the series contiguous") {
  const auto path = temp_file("leap.csv");
  std::ofstream f(path);
  f << "timestamp,bus,demand_mw,wind_cf\n";
  // 2004 is a real-calendar leap year: Feb 28 23:00, all of Feb 29, Mar 1 00:00
  f << "2004-02-28T23:00:00,a,100,0.5\n";
  for (int h = 0; h < 24; ++h) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "2004-02-29T%02d:00:00,a,999,0.9\n", h);
    f << buf;
  }
  f << "2004-03-01T00:00:00,a,101,0.5\n";
  f.close();

  const auto t = load_csv(path);
  CHECK(t.size() == 2);  // the 24 leap rows vanished
  CHECK(t.demand_mw[0][0] == 100.0);
  CHECK(t.demand_mw[0][1] == 101.0);
  CHECK(t.hour_at(1) - t.hour_at(0) == 1);
  fs::remove(path);
}

TEST_CASE("detrend None is the identity") {
  const auto table = make_table({2001, 1, 1, 0}, 100, {"a"});
  const auto out = detrend_demand(table, DetrendMethod::None);
  CHECK(out.demand_mw == table.demand_mw);
}

TEST_CASE("per-year mean rescale hits the documented factors") {
  // Two full years with demand means 100 and 110 -> whole-sample mean 105,
  // so year 1 scales by 1.05 and year 2 by 105/110.
  TimeSeriesTable t;
  t.start_hour = cal::hour_index({2001, 1, 1, 0});
  t.bus_ids = {"a"};
  t.demand_mw.resize(1);
  t.wind_cf.resize(1);
  for (int i = 0; i < 2 * cal::kHoursPerYear; ++i) {
    t.demand_mw[0].push_back(i < cal::kHoursPerYear ? 100.0 : 110.0);
    t.wind_cf[0].push_back(0.3);
  }
  const auto out = detrend_demand(t, DetrendMethod::PerYearMeanRescale);
  CHECK(out.demand_mw[0][0] == doctest::Approx(105.0).epsilon(1e-12));
  CHECK(out.demand_mw[0][2 * cal::kHoursPerYear - 1] == doctest::Approx(105.0).epsilon(1e-12));
  // wind untouched
  CHECK(out.wind_cf == t.wind_cf);

  // overall mean is preserved
  double before = 0, after = 0;
  for (double v : t.demand_mw[0]) before += v;
  for (double v : out.demand_mw[0]) after += v;
  CHECK(after == doctest::Approx(before).epsilon(1e-9));
}

TEST_CASE("a constant series is a detrend fixed point") {
  TimeSeriesTable t;
  t.start_hour = cal::hour_index({2001, 1, 1, 0});
  t.bus_ids = {"a"};
  t.demand_mw = {std::vector<double>(cal::kHoursPerYear, 77.0)};
  t.wind_cf = {std::vector<double>(cal::kHoursPerYear, 0.4)};
  const auto out = detrend_demand(t, DetrendMethod::PerYearMeanRescale);
  for (double v : out.demand_mw[0]) CHECK(v == 77.0);
}

TEST_CASE("detrend needs at least one complete calendar year") {
  const auto t = make_table({2001, 3, 1, 0}, 5000, {"a"});  // partial year only
  CHECK_THROWS_AS(detrend_demand(t, DetrendMethod::PerYearMeanRescale), InsufficientDataError);
}

TEST_CASE("block index over one calendar year") {
  const auto t = make_table({2001, 1, 1, 0}, cal::kHoursPerYear, {"a"});
  const auto idx = index_blocks(t);

  // every calendar month present exactly once
  for (int m = 0; m < 12; ++m) {
    REQUIRE(idx.months[m].size() == 1);
    CHECK(idx.months[m][0].month == m + 1);
    CHECK(idx.months[m][0].length_hours == cal::days_in_month(m + 1) * 24);
  }

  // week pools: the front winter is truncated (Dec of the previous year is
  // missing), so DJF has fewer candidates than the fully-covered JJA
  const auto djf = idx.weeks[static_cast<int>(cal::Season::DJF)].size();
  const auto jja = idx.weeks[static_cast<int>(cal::Season::JJA)].size();
  CHECK(djf < jja);
  CHECK(jja == 13);
  CHECK(idx.weeks[static_cast<int>(cal::Season::MAM)].size() == 13);
  CHECK(idx.weeks[static_cast<int>(cal::Season::SON)].size() == 13);

  // all week tiles are 168 h and lie within the table
  for (const auto& pool : idx.weeks)
    for (const auto& b : pool) {
      CHECK(b.length_hours == 168);
      CHECK(b.start_hour >= t.start_hour);
      CHECK(b.start_hour + b.length_hours <= t.end_hour());
    }
}

TEST_CASE("block index over ten years has ten candidates per month") {
  const auto t = make_table({2001, 1, 1, 0}, 10 * cal::kHoursPerYear, {"a"});
  const auto idx = index_blocks(t);
  for (int m = 0; m < 12; ++m) CHECK(idx.months[m].size() == 10);
  // interior winters are complete: 9 full DJF instances * 12 tiles + 1
  // truncated front winter (Jan+Feb 2001, tiles falling wholly inside)
  CHECK(idx.weeks[static_cast<int>(cal::Season::DJF)].size() >= 9 * 12);
}

TEST_CASE("tables shorter than any block give empty pools") {
  const auto t = make_table({2001, 1, 5, 0}, 100, {"a"});  // 100 h mid-January
  const auto idx = index_blocks(t);
  for (const auto& pool : idx.months) CHECK(pool.empty());
  for (const auto& pool : idx.weeks) CHECK(pool.empty());
}

TEST_CASE("extract copies the exact block") {
  const auto t = make_table({2001, 1, 1, 0}, cal::kHoursPerYear, {"a", "b"});
  const auto idx = index_blocks(t);
  const auto feb = idx.months[1][0];
  const auto sub = extract(t, feb);
  CHECK(sub.size() == 28 * 24);
  CHECK(sub.start_hour == feb.start_hour);
  CHECK(sub.demand_mw[0][0] == t.demand_mw[0][feb.start_index]);
  CHECK(sub.demand_mw[1][5] == t.demand_mw[1][feb.start_index + 5]);

  CalendarBlock outside = feb;
  outside.start_hour = t.start_hour - 100;
  CHECK_THROWS_AS(extract(t, outside), OutOfRangeError);
}

TEST_CASE("slice bounds are checked") {
  const auto t = make_table({2001, 1, 1, 0}, 100, {"a"});
  CHECK(slice(t, 10, 20).size() == 20);
  CHECK(slice(t, 10, 20).start_hour == t.start_hour + 10);
  CHECK_THROWS_AS(slice(t, 90, 20), OutOfRangeError);
}

TEST_CASE("fingerprint reacts to any data change") {
  auto t = make_table({2001, 1, 1, 0}, 50, {"a"});
  const auto fp = t.fingerprint();
  t.demand_mw[0][17] += 1e-9;
  CHECK(t.fingerprint() != fp);
}
