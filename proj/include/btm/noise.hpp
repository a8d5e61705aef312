#pragma once

#include <cstdint>

#include "btm/meter_panel.hpp"

namespace btm {

// Measurement and communication corruption applied to the metered series
// (C_w net demand and C_o native demand). Ground truth is never touched.
struct NoiseSpec {
    double packet_loss_rate = 0.0;    // fraction of readings forced to exactly 0
    double measurement_error = 0.005; // +-0.5% uniform multiplicative
    std::uint64_t seed = 1;

    void validate() const;
    bool is_identity() const { return packet_loss_rate == 0.0 && measurement_error == 0.0; }
};

// Exactly round(rate * readings) positions are zeroed, sampled without
// replacement across both groups; every surviving reading is scaled by a
// factor drawn uniformly from [1 - e, 1 + e].
MeterPanel apply_noise(const MeterPanel& panel, const NoiseSpec& spec);

} // namespace btm
