#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "btm/series.hpp"
#include "btm/timestamp.hpp"

namespace btm {

struct AzimuthShare {
    double azimuth_deg = 180.0;
    double weight = 1.0;
};

struct PvConfig {
    double capacity_min_kw = 3.0;
    double capacity_max_kw = 8.0;
    double tilt_deg = 30.0;
    // Orientation mix across the fleet; weights are normalized internally.
    std::vector<AzimuthShare> azimuth_mix = {
        {90.0, 0.08}, {135.0, 0.07}, {180.0, 0.70}, {225.0, 0.07}, {270.0, 0.08}};
};

struct LoadConfig {
    double base_kw = 1.2;            // fleet-average hourly demand
    double scale_spread = 0.35;      // customer size ~ U[1-s, 1+s] around 1
    double shape_jitter = 0.15;      // per-customer morning/evening skew
    double noise_sigma = 0.18;       // hourly lognormal multiplicative noise
    double seasonal_amplitude = 0.08;
    double weekend_factor = 1.08;
};

struct CloudConfig {
    double mean_bias = -0.3;   // AR(1) mean; negative keeps most hours clear
    double correlation = 0.85; // lag-1 coefficient
    double sigma = 0.35;       // innovation scale
    double floor = 0.05;       // minimum attenuation under heavy cloud
};

// Everything needed to generate one deterministic synthetic dataset.
struct ScenarioConfig {
    std::uint64_t seed = 7;
    double latitude_deg = 35.0;
    HourStamp start = 0; // set via start_date; defaults to 2021-01-01
    int days = 365;
    int n_with_pv = 100;
    int n_without_pv = 115;
    PvConfig pv;
    LoadConfig load;
    CloudConfig cloud;

    ScenarioConfig();

    int hours() const { return days * 24; }
    void validate() const;

    static ScenarioConfig from_json_file(const std::string& path);
    static ScenarioConfig from_json_string(const std::string& text);
    std::string to_json() const;
};

// Shared hourly attenuation factors in [floor, 1]; one field per scenario so
// every PV sees the same weather.
struct CloudField {
    HourlySeries attenuation;
};

CloudField make_cloud_field(const ScenarioConfig& config);

} // namespace btm
