#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "btm/timestamp.hpp"

namespace btm {

// Hourly power time series in kW. values[i] is the reading for the hour
// starting at stamp_at(i). Immutable by convention once built.
struct HourlySeries {
    HourStamp start = 0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    HourStamp stamp_at(std::size_t i) const { return start + static_cast<HourStamp>(i); }
};

// Partition of the 24 clock hours into nocturnal and diurnal sets.
struct DayNightMask {
    std::array<bool, 24> nocturnal{};

    // 21:00 through 04:59 ({21,22,23,0,1,2,3,4}); the 05:00 endpoint is
    // excluded so the night block spans exactly 8 hours.
    static DayNightMask standard();
    static DayNightMask from_hours(const std::vector<int>& night_hours);

    bool is_night(int hod) const { return nocturnal[static_cast<std::size_t>(hod)]; }
    int night_hours_per_day() const;
};

// Half-open index range [start, start+length) into a series.
struct Window {
    std::size_t start = 0;
    std::size_t length = 0;
};

// Tile [0, total_hours) with windows of window_hours. A trailing remainder
// shorter than min_tail_hours is merged into the preceding window; otherwise
// it becomes a final short window. window_hours must be at least 168.
std::vector<Window> tile_windows(std::size_t total_hours, std::size_t window_hours,
                                 std::size_t min_tail_hours = 24);

HourlySeries slice(const HourlySeries& s, const Window& w);

// Elementwise sum of aligned series.
HourlySeries aggregate_group(const std::vector<HourlySeries>& series);

// Window values split by hour-of-day membership: (night, day).
std::pair<std::vector<double>, std::vector<double>>
split_day_night(const HourlySeries& s, const DayNightMask& mask, const Window& w);

// Divides by the series maximum; returns (normalized, peak). The peak must
// be strictly positive.
std::pair<HourlySeries, double> normalize_to_peak(const HourlySeries& s);

void require_aligned(const HourlySeries& a, const HourlySeries& b, const char* what);

} // namespace btm
