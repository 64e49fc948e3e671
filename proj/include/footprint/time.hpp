#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace footprint {

// Seconds since the Unix epoch, UTC. All archive timestamps are reduced to
// this before anything downstream sees them.
using UtcTime = std::int64_t;

struct CivilDateTime {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    int hour = 0;
    int minute = 0;
    int second = 0;
};

// Days between 1970-01-01 and y-m-d in the proleptic Gregorian calendar.
std::int64_t days_from_civil(int y, int m, int d);

CivilDateTime civil_from_utc(UtcTime t);
UtcTime utc_from_civil(const CivilDateTime& c);
UtcTime make_utc(int y, int mo, int d, int h = 0, int mi = 0, int s = 0);

// Calendar month addition; day-of-month clamps to the target month's length
// (Jan 31 + 1 month = Feb 28/29). Time of day is preserved.
UtcTime add_months(UtcTime t, int months);

bool is_leap_year(int y);
int days_in_month(int y, int m);

// Accepted layouts:
//   YYYY-MM-DD
//   YYYY-MM-DD HH:MM[:SS]
//   YYYY-MM-DDTHH:MM[:SS][Z]
//   M/D/YYYY H:MM  (archive exports that use US-style dates)
std::optional<UtcTime> parse_time(const std::string& s);

// "YYYY-MM-DD HH:MM:SS"
std::string format_time(UtcTime t);

}  // namespace footprint
