#include "psuq/resampler.hpp"

#include <algorithm>

#include "psuq/errors.hpp"
#include "psuq/rng.hpp"

namespace psuq {

void SampleScheme::validate() const {
  if (num_samples < 2)
    throw ValidationError("num_samples must be >= 2, got " + std::to_string(num_samples));
  if (kind == Kind::Months) {
    if (target_years < 1)
      throw ValidationError("months scheme needs target_years >= 1, got " +
                            std::to_string(target_years));
  } else {
    if (target_weeks < 1)
      throw ValidationError("weeks scheme needs target_weeks >= 1, got " +
                            std::to_string(target_weeks));
  }
}

std::int64_t SampleScheme::sample_hours() const {
  return kind == Kind::Months ? static_cast<std::int64_t>(target_years) * cal::kHoursPerYear
                              : static_cast<std::int64_t>(target_weeks) * cal::kHoursPerWeek;
}

std::string SampleScheme::describe() const {
  return kind == Kind::Months ? "months:" + std::to_string(target_years) + "y"
                              : "weeks:" + std::to_string(target_weeks) + "w";
}

std::vector<SamplePlan> draw_plans(const TimeSeriesTable& table, const SampleScheme& scheme) {
  scheme.validate();
  const BlockIndex idx = index_blocks(table);
  const std::uint64_t fp = table.fingerprint();

  if (scheme.kind == SampleScheme::Kind::Months) {
    static const char* kMonthNames[12] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                          "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    for (int m = 0; m < 12; ++m)
      if (idx.months[m].empty())
        throw EmptyStratumError(std::string("no complete ") + kMonthNames[m] +
                                " in source table; months scheme needs every calendar month");
  } else {
    for (int s = 0; s < 4; ++s)
      if (idx.weeks[s].empty())
        throw EmptyStratumError(std::string("no complete ") +
                                cal::season_name(static_cast<cal::Season>(s)) +
                                " week in source table; weeks scheme needs every season");
  }

  std::vector<SamplePlan> plans;
  plans.reserve(static_cast<std::size_t>(scheme.num_samples));
  for (int k = 0; k < scheme.num_samples; ++k) {
    // Independent stream per sample: plan k never depends on how many other
    // plans were drawn or in what order they get evaluated.
    Rng rng(derive_stream_seed(scheme.seed, static_cast<std::uint64_t>(k)));
    SamplePlan plan;
    plan.sample_index = k;
    plan.n_s_hours = scheme.sample_hours();
    plan.table_fingerprint = fp;

    if (scheme.kind == SampleScheme::Kind::Months) {
      plan.blocks.reserve(static_cast<std::size_t>(scheme.target_years) * 12);
      for (int y = 0; y < scheme.target_years; ++y) {
        for (int m = 0; m < 12; ++m) {
          const auto& pool = idx.months[m];
          plan.blocks.push_back(pool[rng.bounded(pool.size())]);
        }
      }
    } else {
      plan.blocks.reserve(static_cast<std::size_t>(scheme.target_weeks));
      for (int w = 0; w < scheme.target_weeks; ++w) {
        const auto& pool = idx.weeks[w % 4];  // DJF, MAM, JJA, SON, DJF, ...
        plan.blocks.push_back(pool[rng.bounded(pool.size())]);
      }
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

TimeSeriesTable assemble(const TimeSeriesTable& table, const SamplePlan& plan) {
  if (plan.table_fingerprint != table.fingerprint())
    throw ValidationError("sample plan was drawn from different data (fingerprint mismatch)");
  if (plan.blocks.empty()) throw ValidationError("sample plan has no blocks");

  std::int64_t total = 0;
  for (const auto& b : plan.blocks) total += b.length_hours;
  if (total != plan.n_s_hours)
    throw ValidationError("sample plan block lengths sum to " + std::to_string(total) +
                          " but n_s_hours is " + std::to_string(plan.n_s_hours));

  TimeSeriesTable out;
  out.start_hour = 0;  // synthetic series; re-anchored at the calendar origin
  out.bus_ids = table.bus_ids;
  out.demand_mw.resize(table.num_buses());
  out.wind_cf.resize(table.num_buses());
  for (std::size_t b = 0; b < table.num_buses(); ++b) {
    out.demand_mw[b].reserve(static_cast<std::size_t>(total));
    out.wind_cf[b].reserve(static_cast<std::size_t>(total));
  }
  for (const auto& blk : plan.blocks) {
    const std::int64_t off = blk.start_hour - table.start_hour;
    if (off < 0 || blk.length_hours <= 0 ||
        off + blk.length_hours > static_cast<std::int64_t>(table.size()))
      throw OutOfRangeError("plan block " + blk.label() + " outside table range");
    const auto o = static_cast<std::size_t>(off);
    const auto len = static_cast<std::size_t>(blk.length_hours);
    for (std::size_t b = 0; b < table.num_buses(); ++b) {
      out.demand_mw[b].insert(out.demand_mw[b].end(), table.demand_mw[b].begin() + o,
                              table.demand_mw[b].begin() + o + len);
      out.wind_cf[b].insert(out.wind_cf[b].end(), table.wind_cf[b].begin() + o,
                            table.wind_cf[b].begin() + o + len);
    }
  }
  return out;
}

namespace {

nlohmann::json block_to_json(const CalendarBlock& b) {
  nlohmann::json j;
  j["start_hour"] = b.start_hour;
  j["start_index"] = b.start_index;
  j["length_hours"] = b.length_hours;
  j["label"] = b.label();
  if (b.kind == CalendarBlock::Kind::CalendarMonth) {
    j["kind"] = "month";
    j["year"] = b.year;
    j["month"] = b.month;
  } else {
    j["kind"] = "week";
    j["year"] = b.year;
    j["season"] = cal::season_name(b.season);
    j["week_in_season"] = b.week_in_season;
  }
  return j;
}

CalendarBlock block_from_json(const nlohmann::json& j) {
  CalendarBlock b;
  const std::string kind = j.at("kind").get<std::string>();
  b.start_hour = j.at("start_hour").get<std::int64_t>();
  b.start_index = j.at("start_index").get<std::size_t>();
  b.length_hours = j.at("length_hours").get<int>();
  b.year = j.at("year").get<int>();
  if (kind == "month") {
    b.kind = CalendarBlock::Kind::CalendarMonth;
    b.month = j.at("month").get<int>();
  } else if (kind == "week") {
    b.kind = CalendarBlock::Kind::SeasonWeek;
    const auto s = cal::season_from_name(j.at("season").get<std::string>());
    if (!s) throw ParseError("bad season in plan block");
    b.season = *s;
    b.week_in_season = j.at("week_in_season").get<int>();
  } else {
    throw ParseError("bad block kind '" + kind + "'");
  }
  return b;
}

}  // namespace

nlohmann::json plan_to_json(const SamplePlan& plan) {
  nlohmann::json j;
  j["sample_index"] = plan.sample_index;
  j["n_s_hours"] = plan.n_s_hours;
  j["table_fingerprint"] = plan.table_fingerprint;
  auto& arr = j["blocks"] = nlohmann::json::array();
  for (const auto& b : plan.blocks) arr.push_back(block_to_json(b));
  return j;
}

SamplePlan plan_from_json(const nlohmann::json& j) {
  try {
    SamplePlan plan;
    plan.sample_index = j.at("sample_index").get<int>();
    plan.n_s_hours = j.at("n_s_hours").get<std::int64_t>();
    plan.table_fingerprint = j.at("table_fingerprint").get<std::uint64_t>();
    for (const auto& bj : j.at("blocks")) plan.blocks.push_back(block_from_json(bj));
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad sample plan JSON: ") + e.what());
  }
}

nlohmann::json scheme_to_json(const SampleScheme& scheme) {
  nlohmann::json j;
  j["kind"] = scheme.kind == SampleScheme::Kind::Months ? "months" : "weeks";
  if (scheme.kind == SampleScheme::Kind::Months)
    j["target_years"] = scheme.target_years;
  else
    j["target_weeks"] = scheme.target_weeks;
  j["num_samples"] = scheme.num_samples;
  j["seed"] = scheme.seed;
  return j;
}

SampleScheme scheme_from_json(const nlohmann::json& j) {
  try {
    SampleScheme s;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "months") {
      s.kind = SampleScheme::Kind::Months;
      s.target_years = j.at("target_years").get<int>();
    } else if (kind == "weeks") {
      s.kind = SampleScheme::Kind::Weeks;
      s.target_weeks = j.at("target_weeks").get<int>();
    } else {
      throw ParseError("bad scheme kind '" + kind + "'");
    }
    s.num_samples = j.at("num_samples").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad scheme JSON: ") + e.what());
  }
}

}  // namespace psuq
