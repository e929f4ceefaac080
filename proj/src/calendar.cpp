#include "psuq/calendar.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

#include "psuq/errors.hpp"

namespace psuq::cal {

namespace {

// Cumulative days before each month, noleap (index 0 unused).
constexpr std::array<int, 13> kMonthDays = {0, 31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

constexpr std::array<int, 13> make_cumulative() {
  std::array<int, 13> c{};
  for (int m = 1; m <= 12; ++m) c[m] = c[m - 1] + kMonthDays[m];
  return c;
}
constexpr std::array<int, 13> kCumDays = make_cumulative();

}  // namespace

int days_in_month(int month) {
  if (month < 1 || month > 12) throw ValidationError("month out of range: " + std::to_string(month));
  return kMonthDays[month];
}

std::int64_t hour_index(const CivilTime& t) {
  if (t.month < 1 || t.month > 12 || t.day < 1 || t.day > kMonthDays[t.month] || t.hour < 0 ||
      t.hour > 23) {
    throw ValidationError("invalid civil time " + std::to_string(t.year) + "-" +
                          std::to_string(t.month) + "-" + std::to_string(t.day) + "T" +
                          std::to_string(t.hour));
  }
  const std::int64_t days =
      static_cast<std::int64_t>(t.year - 2000) * kDaysPerYear + kCumDays[t.month - 1] + (t.day - 1);
  return days * kHoursPerDay + t.hour;
}

CivilTime civil_from_hour(std::int64_t hour) {
  // floor division so pre-2000 hours work too
  std::int64_t days = hour / kHoursPerDay;
  int h = static_cast<int>(hour % kHoursPerDay);
  if (h < 0) {
    h += kHoursPerDay;
    days -= 1;
  }
  std::int64_t year_off = days / kDaysPerYear;
  int doy = static_cast<int>(days % kDaysPerYear);
  if (doy < 0) {
    doy += kDaysPerYear;
    year_off -= 1;
  }
  CivilTime t;
  t.year = static_cast<int>(2000 + year_off);
  t.month = 1;
  while (doy >= kCumDays[t.month]) ++t.month;
  t.day = doy - kCumDays[t.month - 1] + 1;
  t.hour = h;
  return t;
}

int hour_of_year(std::int64_t hour) {
  const CivilTime t = civil_from_hour(hour);
  return (kCumDays[t.month - 1] + t.day - 1) * kHoursPerDay + t.hour;
}

Season season_of_month(int month) {
  if (month < 1 || month > 12) throw ValidationError("month out of range: " + std::to_string(month));
  if (month == 12 || month <= 2) return Season::DJF;
  if (month <= 5) return Season::MAM;
  if (month <= 8) return Season::JJA;
  return Season::SON;
}

const char* season_name(Season s) {
  switch (s) {
    case Season::DJF: return "DJF";
    case Season::MAM: return "MAM";
    case Season::JJA: return "JJA";
    case Season::SON: return "SON";
  }
  return "?";
}

std::optional<Season> season_from_name(std::string_view name) {
  if (name == "DJF") return Season::DJF;
  if (name == "MAM") return Season::MAM;
  if (name == "JJA") return Season::JJA;
  if (name == "SON") return Season::SON;
  return std::nullopt;
}

CivilTime season_start_containing(int year, int month) {
  const Season s = season_of_month(month);
  int anchor = year;
  if (s == Season::DJF && month != 12) anchor = year - 1;  // Jan/Feb belong to prev Dec's winter
  return season_instance_start(anchor, s);
}

CivilTime season_instance_start(int anchor_year, Season s) {
  switch (s) {
    case Season::DJF: return {anchor_year, 12, 1, 0};
    case Season::MAM: return {anchor_year, 3, 1, 0};
    case Season::JJA: return {anchor_year, 6, 1, 0};
    case Season::SON: return {anchor_year, 9, 1, 0};
  }
  throw ValidationError("bad season");
}

int season_length_days(Season s) {
  switch (s) {
    case Season::DJF: return 31 + 31 + 28;        // Dec+Jan+Feb
    case Season::MAM: return 31 + 30 + 31;
    case Season::JJA: return 30 + 31 + 31;
    case Season::SON: return 30 + 31 + 30;
  }
  throw ValidationError("bad season");
}

std::string format_iso_hour(std::int64_t hour) {
  const CivilTime t = civil_from_hour(hour);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00:00", t.year, t.month, t.day, t.hour);
  return buf;
}

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

std::optional<ParsedStamp> parse_iso_hour(std::string_view text) {
  // YYYY-MM-DD[T ]HH:MM[:SS]
  if (text.size() < 16) return std::nullopt;
  if (text[4] != '-' || text[7] != '-') return std::nullopt;
  const char sep = text[10];
  if (sep != 'T' && sep != ' ') return std::nullopt;
  if (text[13] != ':') return std::nullopt;

  int year, month, day, hour, minute, second = 0;
  if (!parse_int(text.substr(0, 4), year) || !parse_int(text.substr(5, 2), month) ||
      !parse_int(text.substr(8, 2), day) || !parse_int(text.substr(11, 2), hour) ||
      !parse_int(text.substr(14, 2), minute)) {
    return std::nullopt;
  }
  if (text.size() == 16) {
    // no seconds
  } else if (text.size() == 19 && text[16] == ':') {
    if (!parse_int(text.substr(17, 2), second)) return std::nullopt;
  } else {
    return std::nullopt;
  }
  if (minute != 0 || second != 0) return std::nullopt;
  if (month < 1 || month > 12 || hour < 0 || hour > 23) return std::nullopt;

  ParsedStamp ps;
  if (month == 2 && day == 29) {
    ps.is_feb29 = true;
    return ps;
  }
  if (day < 1 || day > kMonthDays[month]) return std::nullopt;
  ps.hour = hour_index({year, month, day, hour});
  return ps;
}

}  // namespace psuq::cal
