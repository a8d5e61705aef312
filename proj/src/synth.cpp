#include "btm/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "btm/errors.hpp"
#include "btm/rng.hpp"
#include "btm/solar.hpp"

namespace btm {

namespace {

// Fork ids for the per-scenario substreams.
constexpr std::uint64_t stream_capacity = 0xCA9;
constexpr std::uint64_t stream_azimuth = 0xA21;
constexpr std::uint64_t stream_load = 0x10AD;

// Residential double-peak weekday profile, later normalized to mean 1.
// Nighttime trough sits slightly below the midday dip so duration-curve
// minima behave like the real data this generator imitates.
constexpr std::array<double, 24> base_shape = {
    0.62, 0.55, 0.52, 0.50, 0.52, 0.60, 0.80, 1.10, 1.15, 1.00, 0.92, 0.90,
    0.92, 0.90, 0.88, 0.92, 1.05, 1.30, 1.55, 1.60, 1.50, 1.30, 1.05, 0.80};

// Morning-positive / evening-negative pattern used for per-customer shape
// heterogeneity.
constexpr std::array<double, 24> skew_basis = {
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0,  1.0,  1.0,
    0.0, 0.0, 0.0, 0.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, 0.0, 0.0};

std::array<double, 24> customer_shape(double jitter) {
    std::array<double, 24> shape{};
    double sum = 0.0;
    for (int h = 0; h < 24; ++h) {
        shape[h] = base_shape[h] * (1.0 + jitter * skew_basis[h]);
        sum += shape[h];
    }
    for (double& v : shape) v *= 24.0 / sum;
    return shape;
}

double weekday_factor(int weekday, double weekend_factor) {
    double weekday_level = (7.0 - 2.0 * weekend_factor) / 5.0;
    return weekday >= 5 ? weekend_factor : weekday_level;
}

double seasonal_factor(int doy, double amplitude) {
    return 1.0 + amplitude * std::cos(2.0 * 3.14159265358979323846 * (doy - 197) / 365.0);
}

std::string padded_id(const char* prefix, int index, int count) {
    int width = 1;
    for (int n = count - 1; n >= 10; n /= 10) ++width;
    std::string num = std::to_string(index + 1);
    std::string out = prefix;
    out.append(static_cast<std::size_t>(std::max(0, width - static_cast<int>(num.size()))), '0');
    out += num;
    return out;
}

} // namespace

HourlySeries simulate_pv(const ScenarioConfig& config, double capacity_kw, double azimuth_deg,
                         const CloudField& cloud) {
    config.validate();
    if (capacity_kw < 0.0) throw ConfigError("simulate_pv: negative capacity");
    if (cloud.attenuation.size() != static_cast<std::size_t>(config.hours()))
        throw AlignmentError("simulate_pv: cloud field does not span the scenario");

    HourlySeries out;
    out.start = config.start;
    out.values.resize(static_cast<std::size_t>(config.hours()));
    for (std::size_t t = 0; t < out.values.size(); ++t) {
        HourStamp stamp = out.stamp_at(t);
        double frac = clear_sky_fraction(config.latitude_deg, config.pv.tilt_deg, azimuth_deg,
                                         day_of_year(stamp), hour_of_day(stamp) + 0.5);
        out.values[t] = capacity_kw * frac * cloud.attenuation.values[t];
    }
    return out;
}

HourlySeries simulate_native_load(const ScenarioConfig& config, int customer_index) {
    config.validate();
    if (customer_index < 0 || customer_index >= config.n_with_pv + config.n_without_pv)
        throw ConfigError("simulate_native_load: customer index out of range");

    Rng rng = Rng(config.seed).fork(stream_load).fork(static_cast<std::uint64_t>(customer_index));
    double scale = rng.uniform(1.0 - config.load.scale_spread, 1.0 + config.load.scale_spread);
    double jitter = rng.uniform(-config.load.shape_jitter, config.load.shape_jitter);
    std::array<double, 24> shape = customer_shape(jitter);

    HourlySeries out;
    out.start = config.start;
    out.values.resize(static_cast<std::size_t>(config.hours()));
    for (std::size_t t = 0; t < out.values.size(); ++t) {
        HourStamp stamp = out.stamp_at(t);
        double level = config.load.base_kw * scale * shape[static_cast<std::size_t>(hour_of_day(stamp))] *
                       weekday_factor(weekday_index(stamp), config.load.weekend_factor) *
                       seasonal_factor(day_of_year(stamp), config.load.seasonal_amplitude);
        out.values[t] = level * rng.lognormal_unit_mean(config.load.noise_sigma);
    }
    return out;
}

FleetAssignment assign_fleet(const ScenarioConfig& config) {
    config.validate();
    const int n = config.n_with_pv;
    FleetAssignment fleet;
    fleet.capacities_kw.resize(static_cast<std::size_t>(n));
    fleet.azimuths_deg.resize(static_cast<std::size_t>(n));

    Rng cap_rng = Rng(config.seed).fork(stream_capacity);
    for (auto& c : fleet.capacities_kw)
        c = cap_rng.uniform(config.pv.capacity_min_kw, config.pv.capacity_max_kw);

    // Largest-remainder apportionment of the azimuth mix, then a seeded
    // shuffle so orientation does not correlate with customer index.
    double wsum = 0.0;
    for (const auto& a : config.pv.azimuth_mix) wsum += a.weight;
    std::vector<int> counts(config.pv.azimuth_mix.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    int assigned = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        double exact = n * config.pv.azimuth_mix[k].weight / wsum;
        counts[k] = static_cast<int>(exact);
        assigned += counts[k];
        remainders.push_back({exact - counts[k], k});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int i = 0; i < n - assigned; ++i) counts[remainders[static_cast<std::size_t>(i)].second]++;

    std::size_t pos = 0;
    for (std::size_t k = 0; k < counts.size(); ++k)
        for (int i = 0; i < counts[k]; ++i) fleet.azimuths_deg[pos++] = config.pv.azimuth_mix[k].azimuth_deg;

    Rng az_rng = Rng(config.seed).fork(stream_azimuth);
    for (std::size_t i = fleet.azimuths_deg.size(); i > 1; --i)
        std::swap(fleet.azimuths_deg[i - 1], fleet.azimuths_deg[az_rng.below(i)]);
    return fleet;
}

MeterPanel build_panel(const ScenarioConfig& config) {
    config.validate();
    CloudField cloud = make_cloud_field(config);
    FleetAssignment fleet = assign_fleet(config);

    MeterPanel panel;
    panel.pv_ids.reserve(static_cast<std::size_t>(config.n_with_pv));
    for (int i = 0; i < config.n_with_pv; ++i) {
        panel.pv_ids.push_back(padded_id("pv", i, config.n_with_pv));
        HourlySeries native = simulate_native_load(config, i);
        HourlySeries gen = simulate_pv(config, fleet.capacities_kw[static_cast<std::size_t>(i)],
                                       fleet.azimuths_deg[static_cast<std::size_t>(i)], cloud);
        HourlySeries net;
        net.start = native.start;
        net.values.resize(native.size());
        for (std::size_t t = 0; t < native.size(); ++t)
            net.values[t] = native.values[t] - gen.values[t];
        panel.pv_net.push_back(std::move(net));
        panel.truth_native.push_back(std::move(native));
        panel.truth_generation.push_back(std::move(gen));
    }
    for (int i = 0; i < config.n_without_pv; ++i) {
        panel.nopv_ids.push_back(padded_id("np", i, config.n_without_pv));
        panel.nopv_native.push_back(simulate_native_load(config, config.n_with_pv + i));
    }
    panel.validate();
    return panel;
}

HourlySeries pvwatts_surrogate(double azimuth_deg, const ScenarioConfig& config) {
    ScenarioConfig clear = config;
    clear.cloud.mean_bias = -1e9; // attenuation pinned at 1
    CloudField cloudless = make_cloud_field(clear);
    std::fill(cloudless.attenuation.values.begin(), cloudless.attenuation.values.end(), 1.0);
    HourlySeries raw = simulate_pv(config, 1.0, azimuth_deg, cloudless);
    return normalize_to_peak(raw).first;
}

} // namespace btm
