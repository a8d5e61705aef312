#include "btm/meter_panel.hpp"

#include <cmath>
#include <string>

#include "btm/errors.hpp"

namespace btm {

void MeterPanel::validate() const {
    if (pv_ids.empty() || nopv_ids.empty())
        throw DegenerateDataError("panel needs at least one customer in each group");
    if (pv_ids.size() != pv_net.size() || nopv_ids.size() != nopv_native.size())
        throw AlignmentError("panel: id list and series list sizes differ");

    const HourlySeries& ref = pv_net.front();
    if (ref.size() < 24) throw DegenerateDataError("panel series shorter than 24 hours");
    for (const auto& s : pv_net) require_aligned(ref, s, "panel C_w");
    for (const auto& s : nopv_native) require_aligned(ref, s, "panel C_o");

    if (!truth_native.empty()) {
        if (truth_native.size() != pv_ids.size() || truth_generation.size() != pv_ids.size())
            throw AlignmentError("panel: ground truth must cover every C_w customer");
        for (std::size_t i = 0; i < pv_ids.size(); ++i) {
            require_aligned(ref, truth_native[i], "panel truth native");
            require_aligned(ref, truth_generation[i], "panel truth generation");
            if (noisy_measurements) continue; // corrupted readings no longer match truth
            for (std::size_t t = 0; t < ref.size(); ++t) {
                double expect = truth_native[i].values[t] - truth_generation[i].values[t];
                double scale = std::max({1.0, std::fabs(truth_native[i].values[t]),
                                         std::fabs(truth_generation[i].values[t])});
                if (std::fabs(pv_net[i].values[t] - expect) > 1e-9 * scale)
                    throw AlignmentError("panel truth violates net = native - generation for customer " +
                                         pv_ids[i]);
            }
        }
    } else if (!truth_generation.empty()) {
        throw AlignmentError("panel: partial ground truth (generation without native)");
    }
}

} // namespace btm
