#include "btm/noise.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "btm/errors.hpp"
#include "btm/rng.hpp"

namespace btm {

void NoiseSpec::validate() const {
    if (packet_loss_rate < 0.0 || packet_loss_rate > 1.0)
        throw ConfigError("noise: packet loss rate must be in [0, 1]");
    if (measurement_error < 0.0 || measurement_error >= 1.0)
        throw ConfigError("noise: measurement error must be in [0, 1)");
}

MeterPanel apply_noise(const MeterPanel& panel, const NoiseSpec& spec) {
    spec.validate();
    panel.validate();
    if (spec.is_identity()) return panel;

    MeterPanel out = panel;
    out.noisy_measurements = true;

    const std::size_t hours = panel.hours();
    const std::size_t n_w = out.pv_net.size();
    const std::size_t total = (n_w + out.nopv_native.size()) * hours;
    auto reading = [&](std::size_t flat) -> double& {
        std::size_t customer = flat / hours;
        std::size_t t = flat % hours;
        return customer < n_w ? out.pv_net[customer].values[t]
                              : out.nopv_native[customer - n_w].values[t];
    };

    Rng rng(spec.seed);

    // Partial Fisher-Yates over the flat index space gives the exact loss
    // count with positions sampled without replacement.
    std::size_t losses = static_cast<std::size_t>(std::llround(spec.packet_loss_rate *
                                                               static_cast<double>(total)));
    std::vector<std::size_t> index(total);
    std::iota(index.begin(), index.end(), std::size_t{0});
    for (std::size_t i = 0; i < losses; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
        std::swap(index[i], index[j]);
    }
    std::vector<bool> zeroed(total, false);
    for (std::size_t i = 0; i < losses; ++i) zeroed[index[i]] = true;

    for (std::size_t flat = 0; flat < total; ++flat) {
        if (zeroed[flat]) {
            reading(flat) = 0.0;
        } else if (spec.measurement_error > 0.0) {
            reading(flat) *= rng.uniform(1.0 - spec.measurement_error, 1.0 + spec.measurement_error);
        }
    }
    return out;
}

} // namespace btm
