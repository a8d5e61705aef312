#pragma once

#include <cstdint>
#include <string>

namespace btm {

// Hours since 1970-01-01T00:00, timezone-naive local clock time (no DST).
using HourStamp = std::int64_t;

int hour_of_day(HourStamp h);
int day_of_year(HourStamp h);   // 1..366
int weekday_index(HourStamp h); // 0 = Monday .. 6 = Sunday

HourStamp hours_from_date(int year, int month, int day, int hour = 0);

// "2021-01-01T13:00:00" (seconds and minutes must be zero if present).
HourStamp parse_hour_stamp(const std::string& iso);
std::string format_hour_stamp(HourStamp h);

// "2021-01-01" -> stamp of that midnight.
HourStamp parse_date(const std::string& iso_date);
std::string format_date(HourStamp h);

} // namespace btm
