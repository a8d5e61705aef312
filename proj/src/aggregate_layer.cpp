#include "btm/aggregate_layer.hpp"

#include <string>

#include "btm/errors.hpp"

namespace btm {

double estimate_ratio(const HourlySeries& p_w_prime, const HourlySeries& p_o,
                      const DayNightMask& mask, const Window& window) {
    require_aligned(p_w_prime, p_o, "estimate_ratio");
    auto [net_night, net_day] = split_day_night(p_w_prime, mask, window);
    auto [nat_night, nat_day] = split_day_night(p_o, mask, window);
    (void)net_day;
    (void)nat_day;

    double num = 0.0, den = 0.0;
    for (double v : net_night) num += v;
    for (double v : nat_night) den += v;

    if (!(den > 0.0))
        throw DegenerateDataError("estimate_ratio: nocturnal demand of C_o is not positive");
    if (num < 0.0)
        throw DegenerateDataError(
            "estimate_ratio: negative nocturnal net demand of C_w (nighttime export violates "
            "the no-night-generation premise)");
    double r = num / den;
    if (!(r > 0.0)) throw DegenerateDataError("estimate_ratio: degenerate zero ratio");
    return r;
}

HourlySeries estimate_aggregate_native(const HourlySeries& p_o, double r_hat) {
    if (!(r_hat > 0.0)) throw DegenerateDataError("estimate_aggregate_native: ratio must be positive");
    HourlySeries out;
    out.start = p_o.start;
    out.values.resize(p_o.size());
    for (std::size_t t = 0; t < p_o.size(); ++t) out.values[t] = p_o.values[t] * r_hat;
    return out;
}

HourlySeries estimate_aggregate_generation(const HourlySeries& p_w_hat,
                                           const HourlySeries& p_w_prime) {
    require_aligned(p_w_hat, p_w_prime, "estimate_aggregate_generation");
    HourlySeries out;
    out.start = p_w_hat.start;
    out.values.resize(p_w_hat.size());
    for (std::size_t t = 0; t < p_w_hat.size(); ++t)
        out.values[t] = p_w_hat.values[t] - p_w_prime.values[t];
    return out;
}

std::vector<AggregateEstimate> run_aggregate_layer(const MeterPanel& panel,
                                                   const DayNightMask& mask,
                                                   const std::vector<Window>& windows) {
    panel.validate();
    HourlySeries p_w_prime = aggregate_group(panel.pv_net);
    HourlySeries p_o = aggregate_group(panel.nopv_native);

    std::vector<AggregateEstimate> out;
    out.reserve(windows.size());
    for (std::size_t w = 0; w < windows.size(); ++w) {
        try {
            AggregateEstimate est;
            est.window = windows[w];
            est.r_hat = estimate_ratio(p_w_prime, p_o, mask, windows[w]);
            est.p_w_hat = estimate_aggregate_native(slice(p_o, windows[w]), est.r_hat);
            est.g_w_hat = estimate_aggregate_generation(est.p_w_hat, slice(p_w_prime, windows[w]));
            out.push_back(std::move(est));
        } catch (const Error& e) {
            throw DegenerateDataError("aggregate layer failed in window " + std::to_string(w) +
                                      ": " + e.what());
        }
    }
    return out;
}

std::pair<HourlySeries, HourlySeries>
concat_aggregate_estimates(const std::vector<AggregateEstimate>& estimates) {
    if (estimates.empty()) throw DegenerateDataError("no aggregate estimates to concatenate");
    HourlySeries p, g;
    p.start = estimates.front().p_w_hat.start;
    g.start = estimates.front().g_w_hat.start;
    for (const auto& est : estimates) {
        p.values.insert(p.values.end(), est.p_w_hat.values.begin(), est.p_w_hat.values.end());
        g.values.insert(g.values.end(), est.g_w_hat.values.begin(), est.g_w_hat.values.end());
    }
    return {std::move(p), std::move(g)};
}

} // namespace btm
