#include "btm/timestamp.hpp"

#include <chrono>
#include <cstdio>

#include "btm/errors.hpp"

namespace btm {

namespace {

constexpr std::int64_t hours_per_day = 24;

// Floor division so negative stamps (pre-1970) stay consistent.
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if (a % b != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

std::chrono::sys_days day_of(HourStamp h) {
    return std::chrono::sys_days(std::chrono::days(floor_div(h, hours_per_day)));
}

} // namespace

int hour_of_day(HourStamp h) {
    std::int64_t m = h % hours_per_day;
    if (m < 0) m += hours_per_day;
    return static_cast<int>(m);
}

int day_of_year(HourStamp h) {
    using namespace std::chrono;
    sys_days d = day_of(h);
    year_month_day ymd(d);
    sys_days jan1 = sys_days(ymd.year() / January / 1);
    return static_cast<int>((d - jan1).count()) + 1;
}

int weekday_index(HourStamp h) {
    using namespace std::chrono;
    weekday wd(day_of(h));
    return static_cast<int>(wd.iso_encoding()) - 1;
}

HourStamp hours_from_date(int year, int month, int day, int hour) {
    using namespace std::chrono;
    year_month_day ymd(std::chrono::year(year), std::chrono::month(static_cast<unsigned>(month)),
                       std::chrono::day(static_cast<unsigned>(day)));
    if (!ymd.ok()) throw ConfigError("invalid calendar date");
    if (hour < 0 || hour > 23) throw ConfigError("hour out of range");
    sys_days d(ymd);
    return static_cast<HourStamp>(d.time_since_epoch().count()) * hours_per_day + hour;
}

HourStamp parse_hour_stamp(const std::string& iso) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    int n = std::sscanf(iso.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &s);
    if (n < 4) throw IoError("cannot parse timestamp '" + iso + "'");
    if (mi != 0 || s != 0) throw IoError("timestamp '" + iso + "' is not hour-aligned");
    return hours_from_date(y, mo, d, h);
}

std::string format_hour_stamp(HourStamp h) {
    using namespace std::chrono;
    year_month_day ymd(day_of(h));
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:00:00", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hour_of_day(h));
    return buf;
}

HourStamp parse_date(const std::string& iso_date) {
    int y = 0, mo = 0, d = 0;
    if (std::sscanf(iso_date.c_str(), "%d-%d-%d", &y, &mo, &d) != 3)
        throw IoError("cannot parse date '" + iso_date + "'");
    return hours_from_date(y, mo, d, 0);
}

std::string format_date(HourStamp h) {
    using namespace std::chrono;
    year_month_day ymd(day_of(h));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

} // namespace btm
