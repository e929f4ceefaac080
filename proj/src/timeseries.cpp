#include "psuq/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "psuq/errors.hpp"

namespace psuq {

namespace {

struct Fnv1a {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001B3ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
};

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

int TimeSeriesTable::bus_index(const std::string& id) const {
  for (std::size_t i = 0; i < bus_ids.size(); ++i)
    if (bus_ids[i] == id) return static_cast<int>(i);
  return -1;
}

std::uint64_t TimeSeriesTable::fingerprint() const {
  Fnv1a f;
  f.u64(static_cast<std::uint64_t>(start_hour));
  f.u64(bus_ids.size());
  for (const auto& id : bus_ids) f.str(id);
  f.u64(size());
  for (std::size_t b = 0; b < bus_ids.size(); ++b) {
    for (double v : demand_mw[b]) f.f64(v);
    for (double v : wind_cf[b]) f.f64(v);
  }
  return f.h;
}

void validate_table(const TimeSeriesTable& table) {
  if (table.bus_ids.empty()) throw ValidationError("table has no buses");
  if (table.demand_mw.size() != table.bus_ids.size() ||
      table.wind_cf.size() != table.bus_ids.size()) {
    throw ValidationError("table column count does not match bus count");
  }
  const std::size_t n = table.demand_mw[0].size();
  if (n == 0) throw ValidationError("table has no rows");
  for (std::size_t b = 0; b < table.bus_ids.size(); ++b) {
    if (table.demand_mw[b].size() != n || table.wind_cf[b].size() != n)
      throw ValidationError("ragged columns for bus " + table.bus_ids[b]);
    for (std::size_t t = 0; t < n; ++t) {
      const double d = table.demand_mw[b][t];
      const double w = table.wind_cf[b][t];
      if (!std::isfinite(d) || !std::isfinite(w))
        throw ValidationError("non-finite value at bus " + table.bus_ids[b] + " hour " +
                              cal::format_iso_hour(table.hour_at(t)));
      if (d < 0.0)
        throw ValidationError("negative demand " + std::to_string(d) + " at bus " +
                              table.bus_ids[b] + " hour " + cal::format_iso_hour(table.hour_at(t)));
      if (w < 0.0 || w > 1.0)
        throw ValidationError("wind_cf " + std::to_string(w) + " outside [0,1] at bus " +
                              table.bus_ids[b] + " hour " + cal::format_iso_hour(table.hour_at(t)));
    }
  }
}

TimeSeriesTable load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "timestamp,bus,demand_mw,wind_cf")
    throw ParseError(path.string() + ": bad header '" + line + "'");

  TimeSeriesTable table;
  bool have_start = false;
  std::int64_t expected_hour = 0;

  // One timestamp group under construction.
  struct Row {
    std::string bus;
    double demand;
    double cf;
  };
  std::vector<Row> group;
  std::int64_t group_hour = 0;
  bool in_group = false;
  std::string group_stamp;
  std::size_t lineno = 1;

  auto flush_group = [&]() {
    if (!in_group) return;
    in_group = false;
    if (!have_start) {
      table.start_hour = group_hour;
      for (const auto& r : group) {
        table.bus_ids.push_back(r.bus);
        table.demand_mw.emplace_back();
        table.wind_cf.emplace_back();
      }
      have_start = true;
      expected_hour = group_hour;
    }
    if (group_hour != expected_hour)
      throw ValidationError(path.string() + ": gap in hours, expected " +
                            cal::format_iso_hour(expected_hour) + " but found " + group_stamp);
    if (group.size() != table.bus_ids.size())
      throw ValidationError(path.string() + ": timestamp " + group_stamp + " has " +
                            std::to_string(group.size()) + " rows, expected " +
                            std::to_string(table.bus_ids.size()));
    for (std::size_t b = 0; b < table.bus_ids.size(); ++b) {
      const auto it = std::find_if(group.begin(), group.end(),
                                   [&](const Row& r) { return r.bus == table.bus_ids[b]; });
      if (it == group.end())
        throw ValidationError(path.string() + ": timestamp " + group_stamp + " missing bus " +
                              table.bus_ids[b]);
      table.demand_mw[b].push_back(it->demand);
      table.wind_cf[b].push_back(it->cf);
    }
    group.clear();
    ++expected_hour;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    // split into exactly 4 fields
    std::array<std::string_view, 4> f;
    std::string_view sv = line;
    std::size_t nf = 0;
    while (nf < 4) {
      const std::size_t comma = sv.find(',');
      if (comma == std::string_view::npos) {
        f[nf++] = sv;
        sv = {};
        break;
      }
      f[nf++] = sv.substr(0, comma);
      sv = sv.substr(comma + 1);
    }
    if (nf != 4 || !sv.empty() || f[3].find(',') != std::string_view::npos)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 4 fields");

    const auto stamp = cal::parse_iso_hour(f[0]);
    if (!stamp)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad timestamp '" +
                       std::string(f[0]) + "'");
    if (stamp->is_feb29) {
      // Real-calendar leap rows have no home in the noleap year: drop them.
      flush_group();
      continue;
    }
    Row row;
    row.bus = std::string(f[1]);
    if (row.bus.empty())
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": empty bus id");
    if (!parse_double(f[2], row.demand) || !parse_double(f[3], row.cf))
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad numeric field");

    const bool same_group = in_group && stamp->hour == group_hour;
    if (!same_group) {
      flush_group();
      in_group = true;
      group_hour = stamp->hour;
      group_stamp = std::string(f[0]);
      if (have_start && group_hour < expected_hour)
        throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                              ": timestamps out of order at " + group_stamp);
    } else {
      for (const auto& r : group)
        if (r.bus == row.bus)
          throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": duplicate bus " +
                                row.bus + " at " + group_stamp);
    }
    group.push_back(std::move(row));
  }
  flush_group();

  if (!have_start) throw ParseError(path.string() + ": no data rows");
  validate_table(table);
  return table;
}

void write_csv(const TimeSeriesTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "timestamp,bus,demand_mw,wind_cf\n";
  char num[2][32];
  const std::size_t n = table.size();
  for (std::size_t t = 0; t < n; ++t) {
    const std::string stamp = cal::format_iso_hour(table.hour_at(t));
    for (std::size_t b = 0; b < table.bus_ids.size(); ++b) {
      std::snprintf(num[0], sizeof num[0], "%.17g", table.demand_mw[b][t]);
      std::snprintf(num[1], sizeof num[1], "%.17g", table.wind_cf[b][t]);
      out << stamp << ',' << table.bus_ids[b] << ',' << num[0] << ',' << num[1] << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

TimeSeriesTable detrend_demand(const TimeSeriesTable& table, DetrendMethod method) {
  validate_table(table);
  if (method == DetrendMethod::None) return table;

  const std::size_t n = table.size();

  // Year group boundaries: [start index, one-past-end index) per civil year.
  struct Group {
    int year;
    std::size_t begin, end;
  };
  std::vector<Group> groups;
  std::size_t t = 0;
  while (t < n) {
    const int y = cal::year_of_hour(table.hour_at(t));
    const std::int64_t next_year_start = cal::hour_index({y + 1, 1, 1, 0});
    std::size_t end = t + static_cast<std::size_t>(
                              std::min<std::int64_t>(next_year_start - table.hour_at(t),
                                                     static_cast<std::int64_t>(n - t)));
    groups.push_back({y, t, end});
    t = end;
  }

  const bool any_full_year = std::any_of(groups.begin(), groups.end(), [&](const Group& g) {
    return g.end - g.begin == static_cast<std::size_t>(cal::kHoursPerYear) &&
           cal::hour_of_year(table.hour_at(g.begin)) == 0;
  });
  if (!any_full_year)
    throw InsufficientDataError(
        "per-year mean rescale needs at least one fully-covered calendar year");

  TimeSeriesTable out = table;
  for (std::size_t b = 0; b < table.num_buses(); ++b) {
    const auto& d = table.demand_mw[b];
    double total = 0.0;
    for (double v : d) total += v;
    const double overall_mean = total / static_cast<double>(n);

    for (const auto& g : groups) {
      double sum = 0.0;
      for (std::size_t i = g.begin; i < g.end; ++i) sum += d[i];
      const double year_mean = sum / static_cast<double>(g.end - g.begin);
      double factor;
      if (year_mean == 0.0) {
        if (overall_mean == 0.0) {
          factor = 1.0;  // all-zero bus: nothing to rescale
        } else {
          throw ValidationError("bus " + table.bus_ids[b] + " year " + std::to_string(g.year) +
                                " has zero mean demand; cannot rescale to nonzero target");
        }
      } else {
        factor = overall_mean / year_mean;
      }
      for (std::size_t i = g.begin; i < g.end; ++i) out.demand_mw[b][i] = d[i] * factor;
    }
  }
  return out;
}

std::string CalendarBlock::label() const {
  char buf[32];
  if (kind == Kind::CalendarMonth) {
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%s-w%02d", year, cal::season_name(season),
                  week_in_season);
  }
  return buf;
}

BlockIndex index_blocks(const TimeSeriesTable& table) {
  validate_table(table);
  BlockIndex idx;
  const std::int64_t lo = table.start_hour;
  const std::int64_t hi = table.end_hour();

  // Whole civil months.
  {
    cal::CivilTime c = cal::civil_from_hour(lo);
    int y = c.year, m = c.month;
    while (true) {
      const std::int64_t mstart = cal::hour_index({y, m, 1, 0});
      if (mstart >= hi) break;
      const int len = cal::days_in_month(m) * cal::kHoursPerDay;
      if (mstart >= lo && mstart + len <= hi) {
        CalendarBlock b;
        b.kind = CalendarBlock::Kind::CalendarMonth;
        b.year = y;
        b.month = m;
        b.start_hour = mstart;
        b.start_index = static_cast<std::size_t>(mstart - lo);
        b.length_hours = len;
        idx.months[m - 1].push_back(b);
      }
      if (++m > 12) {
        m = 1;
        ++y;
      }
    }
  }

  // 168 h tiles within each season instance.
  {
    const int y_lo = cal::year_of_hour(lo) - 1;
    const int y_hi = cal::year_of_hour(hi - 1);
    for (int ay = y_lo; ay <= y_hi; ++ay) {
      for (int si = 0; si < 4; ++si) {
        const auto s = static_cast<cal::Season>(si);
        const std::int64_t sstart = cal::hour_index(cal::season_instance_start(ay, s));
        const int tiles = cal::season_length_days(s) / 7;
        for (int k = 0; k < tiles; ++k) {
          const std::int64_t wstart = sstart + static_cast<std::int64_t>(k) * cal::kHoursPerWeek;
          if (wstart < lo || wstart + cal::kHoursPerWeek > hi) continue;
          CalendarBlock b;
          b.kind = CalendarBlock::Kind::SeasonWeek;
          b.year = ay;
          b.season = s;
          b.week_in_season = k;
          b.start_hour = wstart;
          b.start_index = static_cast<std::size_t>(wstart - lo);
          b.length_hours = cal::kHoursPerWeek;
          idx.weeks[si].push_back(b);
        }
      }
    }
  }
  return idx;
}

TimeSeriesTable slice(const TimeSeriesTable& table, std::size_t start_index, std::size_t length) {
  if (length == 0) throw OutOfRangeError("slice length must be positive");
  if (start_index + length > table.size())
    throw OutOfRangeError("slice [" + std::to_string(start_index) + ", +" +
                          std::to_string(length) + ") outside table of " +
                          std::to_string(table.size()) + " rows");
  TimeSeriesTable out;
  out.start_hour = table.hour_at(start_index);
  out.bus_ids = table.bus_ids;
  out.demand_mw.resize(table.num_buses());
  out.wind_cf.resize(table.num_buses());
  for (std::size_t b = 0; b < table.num_buses(); ++b) {
    out.demand_mw[b].assign(table.demand_mw[b].begin() + start_index,
                            table.demand_mw[b].begin() + start_index + length);
    out.wind_cf[b].assign(table.wind_cf[b].begin() + start_index,
                          table.wind_cf[b].begin() + start_index + length);
  }
  return out;
}

TimeSeriesTable extract(const TimeSeriesTable& table, const CalendarBlock& block) {
  const std::int64_t off = block.start_hour - table.start_hour;
  if (off < 0 || block.length_hours <= 0 ||
      off + block.length_hours > static_cast<std::int64_t>(table.size()))
    throw OutOfRangeError("block " + block.label() + " outside table range");
  return slice(table, static_cast<std::size_t>(off), static_cast<std::size_t>(block.length_hours));
}

}  // namespace psuq
