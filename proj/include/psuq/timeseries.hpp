#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "psuq/calendar.hpp"

namespace psuq {

// Hourly demand + wind capacity-factor series for a set of buses, contiguous
// on the noleap calendar. Column-major per bus.
struct TimeSeriesTable {
  std::int64_t start_hour = 0;                    // noleap hour index of row 0
  std::vector<std::string> bus_ids;               // stable order
  std::vector<std::vector<double>> demand_mw;     // [bus][t], MW
  std::vector<std::vector<double>> wind_cf;       // [bus][t], 0..1

  std::size_t size() const { return bus_ids.empty() ? 0 : demand_mw[0].size(); }
  std::size_t num_buses() const { return bus_ids.size(); }
  std::int64_t hour_at(std::size_t t) const { return start_hour + static_cast<std::int64_t>(t); }
  std::int64_t end_hour() const { return start_hour + static_cast<std::int64_t>(size()); }

  // Index of a bus id, or -1.
  int bus_index(const std::string& id) const;

  // FNV-1a over the exact byte content (start hour, bus ids, values).
  // Stamped into sample plans so a plan can't silently be replayed against
  // different data.
  std::uint64_t fingerprint() const;
};

// Structural invariants: equal column lengths, wind_cf within [0,1],
// demand >= 0, all values finite, at least one bus and one row.
void validate_table(const TimeSeriesTable& table);

// Long-format CSV: header `timestamp,bus,demand_mw,wind_cf`, rows grouped by
// timestamp (every bus present in each group, same order throughout), hours
// contiguous. Feb 29 rows are dropped whole. Throws ParseError on malformed
// rows, ValidationError on gaps/range violations, IoError on unreadable files.
TimeSeriesTable load_csv(const std::filesystem::path& path);
void write_csv(const TimeSeriesTable& table, const std::filesystem::path& path);

enum class DetrendMethod { None, PerYearMeanRescale };

// PerYearMeanRescale: per bus, scale each calendar-year group of demand rows
// (partial years included) so the group mean equals that bus's whole-sample
// mean. Wind is untouched. Requires at least one fully-covered calendar year.
TimeSeriesTable detrend_demand(const TimeSeriesTable& table, DetrendMethod method);

// A calendar-aligned block of source rows (a whole civil month, or one 168 h
// week tile within a season instance).
struct CalendarBlock {
  enum class Kind { CalendarMonth, SeasonWeek };
  Kind kind = Kind::CalendarMonth;
  int year = 0;        // civil year (month blocks) / season anchor year (week blocks)
  int month = 0;       // 1..12 for month blocks
  cal::Season season = cal::Season::DJF;  // week blocks
  int week_in_season = 0;                 // 0-based tile number within the season instance
  std::int64_t start_hour = 0;            // noleap hour of block start
  std::size_t start_index = 0;            // row offset in the source table
  int length_hours = 0;

  std::string label() const;
  friend bool operator==(const CalendarBlock&, const CalendarBlock&) = default;
};

// Candidate pools per stratum. months[m-1] holds every fully-covered civil
// month with label m; weeks[(int)s] holds every fully-covered 168 h tile of
// season s. Tiles are anchored at each season instance's calendar start, so
// pools within a stratum never overlap.
struct BlockIndex {
  std::array<std::vector<CalendarBlock>, 12> months;
  std::array<std::vector<CalendarBlock>, 4> weeks;
};

BlockIndex index_blocks(const TimeSeriesTable& table);

// Copy out a block's rows. Throws OutOfRangeError if the block lies outside
// the table.
TimeSeriesTable extract(const TimeSeriesTable& table, const CalendarBlock& block);

// Copy rows [start_index, start_index + length).
TimeSeriesTable slice(const TimeSeriesTable& table, std::size_t start_index, std::size_t length);

}  // namespace psuq
