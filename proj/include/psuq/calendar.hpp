#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace psuq::cal {

// All series live on a timezone-naive "noleap" calendar: every year has 365
// days / 8760 hours and Feb 29 does not exist. Leap rows are dropped at CSV
// ingest so downstream block arithmetic never sees a 8784-hour year.

inline constexpr int kHoursPerDay = 24;
inline constexpr int kHoursPerWeek = 168;
inline constexpr int kDaysPerYear = 365;
inline constexpr int kHoursPerYear = 8760;

struct CivilTime {
  int year = 2000;
  int month = 1;  // 1..12
  int day = 1;    // 1..days_in_month(month)
  int hour = 0;   // 0..23
  friend bool operator==(const CivilTime&, const CivilTime&) = default;
};

// Month lengths in the noleap calendar (index 1..12).
int days_in_month(int month);

// Hours since 2000-01-01T00:00 in the noleap calendar. Works for any year
// (negative before 2000). Throws ValidationError on out-of-range fields.
std::int64_t hour_index(const CivilTime& t);
CivilTime civil_from_hour(std::int64_t hour);

inline int year_of_hour(std::int64_t hour) { return civil_from_hour(hour).year; }

// Hour offset within the civil year, 0..8759.
int hour_of_year(std::int64_t hour);

// Meteorological seasons; December belongs to the *following* winter, so the
// DJF instance labeled with anchor year Y spans Y-12-01 .. (Y+1)-02-28.
enum class Season { DJF = 0, MAM = 1, JJA = 2, SON = 3 };

Season season_of_month(int month);
const char* season_name(Season s);
std::optional<Season> season_from_name(std::string_view name);

// Calendar start of the season instance containing the given civil month.
// For January/February this is December 1 of the previous year.
CivilTime season_start_containing(int year, int month);

// Start of the season instance with the given anchor year (DJF anchored at
// its December). Used to enumerate season instances over a table's span.
CivilTime season_instance_start(int anchor_year, Season s);
int season_length_days(Season s);

// "YYYY-MM-DDTHH:00:00"
std::string format_iso_hour(std::int64_t hour);

struct ParsedStamp {
  bool is_feb29 = false;       // real-calendar leap row; caller drops it
  std::int64_t hour = 0;       // valid when !is_feb29
};

// Accepts "YYYY-MM-DD HH:MM[:SS]" with 'T' or ' ' separator; minutes/seconds
// must be zero (hourly data). Returns nullopt on malformed text.
std::optional<ParsedStamp> parse_iso_hour(std::string_view text);

}  // namespace psuq::cal
