#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "btm/series.hpp"

namespace btm {

// The full dataset: net demand for the PV-owning group C_w, native demand for
// the PV-free group C_o, and (for synthetic data) the per-PV-customer ground
// truth. All series share start and length.
//
// Sign convention: native demand and PV output are both positive, so
// net = native - generation and net may go negative when a PV exports.
struct MeterPanel {
    std::vector<std::string> pv_ids;       // customer ids in C_w
    std::vector<HourlySeries> pv_net;      // metered net demand, one per C_w customer

    std::vector<std::string> nopv_ids;     // customer ids in C_o
    std::vector<HourlySeries> nopv_native; // metered native demand, one per C_o customer

    // Ground truth, index-aligned with pv_ids. Empty when unavailable.
    std::vector<HourlySeries> truth_native;
    std::vector<HourlySeries> truth_generation;

    // Set once measurement/communication noise has been injected; the
    // net = native - generation identity then no longer ties measurements
    // to the (untouched) ground truth.
    bool noisy_measurements = false;

    bool has_truth() const { return !truth_native.empty(); }
    std::size_t hours() const { return pv_net.empty() ? 0 : pv_net.front().size(); }
    HourStamp start() const { return pv_net.empty() ? 0 : pv_net.front().start; }

    // Checks alignment, group sizes, minimum length, and (when truth is
    // present) the identity net = native - generation.
    void validate() const;
};

} // namespace btm
