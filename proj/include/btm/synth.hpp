#pragma once

#include <vector>

#include "btm/meter_panel.hpp"
#include "btm/scenario.hpp"
#include "btm/series.hpp"

namespace btm {

// Hourly PV output for one array: capacity x clear-sky plane-of-array
// fraction x shared cloud attenuation. Linear in capacity, exactly zero
// whenever the sun is below the horizon.
HourlySeries simulate_pv(const ScenarioConfig& config, double capacity_kw, double azimuth_deg,
                         const CloudField& cloud);

// Hourly native demand for one customer. customer_index addresses a global
// deterministic stream: [0, n_with_pv) are the PV owners, the rest are the
// PV-free group. With noise_sigma = 0 and shape_jitter = 0 every customer is
// an exact scalar multiple of the shared profile.
HourlySeries simulate_native_load(const ScenarioConfig& config, int customer_index);

// Per-customer capacities and azimuths drawn from the configured mix.
struct FleetAssignment {
    std::vector<double> capacities_kw;
    std::vector<double> azimuths_deg;
};
FleetAssignment assign_fleet(const ScenarioConfig& config);

// Full synthetic dataset with ground truth retained.
MeterPanel build_panel(const ScenarioConfig& config);

// Cloud-free normalized (peak = 1) generation curve for the given azimuth,
// spanning the scenario calendar: the training material for the candidate
// regression, standing in for an external PV simulator.
HourlySeries pvwatts_surrogate(double azimuth_deg, const ScenarioConfig& config);

} // namespace btm
