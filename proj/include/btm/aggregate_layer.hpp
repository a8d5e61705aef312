#pragma once

#include <vector>

#include "btm/meter_panel.hpp"
#include "btm/series.hpp"

namespace btm {

// One window's aggregate-level estimate. g_w_hat = p_w_hat - p_w_prime holds
// exactly by construction; hourly values of g_w_hat may be negative
// (estimation error is kept, never clipped).
struct AggregateEstimate {
    double r_hat = 0.0;
    HourlySeries p_w_hat; // estimated aggregate native demand of C_w, kW
    HourlySeries g_w_hat; // estimated aggregate PV generation of C_w, kW
    Window window;
};

// Nocturnal demand ratio between the two groups over one window:
// sum of C_w net demand over night hours / sum of C_o native demand over
// night hours. PV is dark at night, so the numerator equals C_w's native
// demand there.
double estimate_ratio(const HourlySeries& p_w_prime, const HourlySeries& p_o,
                      const DayNightMask& mask, const Window& window);

// p_o scaled by the ratio.
HourlySeries estimate_aggregate_native(const HourlySeries& p_o, double r_hat);

// Elementwise p_w_hat - p_w_prime.
HourlySeries estimate_aggregate_generation(const HourlySeries& p_w_hat,
                                           const HourlySeries& p_w_prime);

// Ratio recomputed per window from that window's nights only.
std::vector<AggregateEstimate> run_aggregate_layer(const MeterPanel& panel,
                                                   const DayNightMask& mask,
                                                   const std::vector<Window>& windows);

// Windowed estimates stitched back into full-span series (p_w_hat, g_w_hat).
std::pair<HourlySeries, HourlySeries>
concat_aggregate_estimates(const std::vector<AggregateEstimate>& estimates);

} // namespace btm
