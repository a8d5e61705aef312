#include "btm/series.hpp"

#include <algorithm>
#include <string>

#include "btm/errors.hpp"

namespace btm {

DayNightMask DayNightMask::standard() {
    return from_hours({21, 22, 23, 0, 1, 2, 3, 4});
}

DayNightMask DayNightMask::from_hours(const std::vector<int>& night_hours) {
    if (night_hours.empty()) throw ConfigError("nocturnal hour set must be nonempty");
    DayNightMask m;
    for (int h : night_hours) {
        if (h < 0 || h > 23) throw ConfigError("nocturnal hour out of range: " + std::to_string(h));
        m.nocturnal[static_cast<std::size_t>(h)] = true;
    }
    if (m.night_hours_per_day() == 24) throw ConfigError("nocturnal hour set covers the whole day");
    return m;
}

int DayNightMask::night_hours_per_day() const {
    int n = 0;
    for (bool b : nocturnal) n += b ? 1 : 0;
    return n;
}

std::vector<Window> tile_windows(std::size_t total_hours, std::size_t window_hours,
                                 std::size_t min_tail_hours) {
    if (window_hours < 168) throw ConfigError("window length must be at least 168 hours");
    if (total_hours < 24) throw ConfigError("series too short to window (need >= 24 hours)");
    std::vector<Window> out;
    if (total_hours <= window_hours) {
        out.push_back({0, total_hours});
        return out;
    }
    std::size_t full = total_hours / window_hours;
    std::size_t tail = total_hours - full * window_hours;
    for (std::size_t i = 0; i < full; ++i) out.push_back({i * window_hours, window_hours});
    if (tail >= min_tail_hours) {
        out.push_back({full * window_hours, tail});
    } else if (tail > 0) {
        out.back().length += tail;
    }
    return out;
}

HourlySeries slice(const HourlySeries& s, const Window& w) {
    if (w.start + w.length > s.size()) throw AlignmentError("window exceeds series span");
    HourlySeries out;
    out.start = s.stamp_at(w.start);
    out.values.assign(s.values.begin() + static_cast<std::ptrdiff_t>(w.start),
                      s.values.begin() + static_cast<std::ptrdiff_t>(w.start + w.length));
    return out;
}

void require_aligned(const HourlySeries& a, const HourlySeries& b, const char* what) {
    if (a.start != b.start || a.size() != b.size())
        throw AlignmentError(std::string(what) + ": series are not aligned");
}

HourlySeries aggregate_group(const std::vector<HourlySeries>& series) {
    if (series.empty()) throw AlignmentError("aggregate_group: empty group");
    HourlySeries out = series.front();
    for (std::size_t i = 1; i < series.size(); ++i) {
        require_aligned(out, series[i], "aggregate_group");
        for (std::size_t t = 0; t < out.size(); ++t) out.values[t] += series[i].values[t];
    }
    return out;
}

std::pair<std::vector<double>, std::vector<double>>
split_day_night(const HourlySeries& s, const DayNightMask& mask, const Window& w) {
    if (w.start + w.length > s.size()) throw AlignmentError("split_day_night: window exceeds series");
    std::vector<double> night, day;
    night.reserve(w.length / 2);
    day.reserve(w.length);
    for (std::size_t i = w.start; i < w.start + w.length; ++i) {
        if (mask.is_night(hour_of_day(s.stamp_at(i))))
            night.push_back(s.values[i]);
        else
            day.push_back(s.values[i]);
    }
    if (night.empty() || day.empty())
        throw DegenerateDataError("split_day_night: window has an empty day or night partition");
    return {std::move(night), std::move(day)};
}

std::pair<HourlySeries, double> normalize_to_peak(const HourlySeries& s) {
    if (s.empty()) throw DegenerateDataError("normalize_to_peak: empty series");
    double peak = *std::max_element(s.values.begin(), s.values.end());
    if (!(peak > 0.0)) throw DegenerateDataError("normalize_to_peak: nonpositive peak");
    HourlySeries out;
    out.start = s.start;
    out.values.resize(s.size());
    for (std::size_t t = 0; t < s.size(); ++t) out.values[t] = s.values[t] / peak;
    return {std::move(out), peak};
}

} // namespace btm
