#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "polarlens/error.hpp"

namespace polarlens::detail {

// Proleptic Gregorian day arithmetic (Howard Hinnant's algorithms).
inline int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097LL + static_cast<int64_t>(doe) - 719468;
}

struct CivilDate {
  int year;
  unsigned month;
  unsigned day;
};

inline CivilDate civil_from_days(int64_t z) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int64_t y = static_cast<int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), m, d};
}

inline int64_t utc_midnight(int64_t epoch) {
  int64_t day = epoch >= 0 ? epoch / 86400 : (epoch - 86399) / 86400;
  return day * 86400;
}

inline std::string iso_date(int64_t epoch) {
  auto cd = civil_from_days(epoch >= 0 ? epoch / 86400 : (epoch - 86399) / 86400);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", cd.year, cd.month, cd.day);
  return buf;
}

// "YYYY-MM-DD" -> UTC midnight epoch seconds.
inline int64_t parse_iso_date(const std::string& s) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (std::sscanf(s.c_str(), "%d-%u-%u", &y, &m, &d) != 3 || m < 1 || m > 12 ||
      d < 1 || d > 31) {
    throw ConfigError("bad ISO date '" + s + "'");
  }
  return days_from_civil(y, m, d) * 86400;
}

// Legacy timestamp layout: "Wed Oct 10 20:19:24 +0000 2018".
inline bool parse_legacy_timestamp(const std::string& s, int64_t& out) {
  char mon[4] = {0};
  char dow[4] = {0};
  char tz[8] = {0};
  int day = 0, hh = 0, mm = 0, ss = 0, year = 0;
  if (std::sscanf(s.c_str(), "%3s %3s %d %d:%d:%d %7s %d", dow, mon, &day, &hh,
                  &mm, &ss, tz, &year) != 8) {
    return false;
  }
  static const char* kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                  "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  int month = 0;
  for (int i = 0; i < 12; ++i) {
    if (std::string(mon) == kMonths[i]) {
      month = i + 1;
      break;
    }
  }
  if (month == 0 || day < 1 || day > 31 || hh < 0 || hh > 23 || mm < 0 ||
      mm > 59 || ss < 0 || ss > 60) {
    return false;
  }
  int64_t t = days_from_civil(year, static_cast<unsigned>(month),
                              static_cast<unsigned>(day)) *
                  86400 +
              hh * 3600 + mm * 60 + ss;
  // offset "+HHMM"/"-HHMM"
  if ((tz[0] == '+' || tz[0] == '-') && std::isdigit(tz[1])) {
    int oh = (tz[1] - '0') * 10 + (tz[2] - '0');
    int om = (tz[3] - '0') * 10 + (tz[4] - '0');
    int64_t off = oh * 3600 + om * 60;
    t += (tz[0] == '+') ? -off : off;
  }
  out = t;
  return true;
}

}  // namespace polarlens::detail
