#include "btm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "btm/errors.hpp"
#include "btm/rng.hpp"

namespace btm {

using nlohmann::json;

ScenarioConfig::ScenarioConfig() : start(hours_from_date(2021, 1, 1)) {}

void ScenarioConfig::validate() const {
    if (days < 7) throw ConfigError("scenario: days must be >= 7");
    if (n_with_pv < 1 || n_without_pv < 1)
        throw ConfigError("scenario: both customer groups must be nonempty");
    if (latitude_deg < -66.0 || latitude_deg > 66.0)
        throw ConfigError("scenario: latitude outside supported band (|lat| <= 66)");
    if (pv.capacity_min_kw < 0.0 || pv.capacity_max_kw < pv.capacity_min_kw)
        throw ConfigError("scenario: PV capacities must be nonnegative and ordered");
    if (pv.azimuth_mix.empty()) throw ConfigError("scenario: azimuth mix must be nonempty");
    double wsum = 0.0;
    for (const auto& a : pv.azimuth_mix) {
        if (a.azimuth_deg < 0.0 || a.azimuth_deg > 360.0)
            throw ConfigError("scenario: azimuth out of [0, 360]");
        if (a.weight < 0.0) throw ConfigError("scenario: azimuth weight must be nonnegative");
        wsum += a.weight;
    }
    if (!(wsum > 0.0)) throw ConfigError("scenario: azimuth weights sum to zero");
    if (!(load.base_kw > 0.0)) throw ConfigError("scenario: base load must be positive");
    if (load.scale_spread < 0.0 || load.scale_spread >= 1.0)
        throw ConfigError("scenario: load scale spread must be in [0, 1)");
    if (load.noise_sigma < 0.0 || load.shape_jitter < 0.0 || load.seasonal_amplitude < 0.0)
        throw ConfigError("scenario: load noise parameters must be nonnegative");
    if (cloud.correlation < 0.0 || cloud.correlation >= 1.0)
        throw ConfigError("scenario: cloud correlation must be in [0, 1)");
    if (cloud.floor < 0.0 || cloud.floor > 1.0)
        throw ConfigError("scenario: cloud floor must be in [0, 1]");
}

namespace {

template <typename T>
void maybe_get(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

ScenarioConfig ScenarioConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_json_string(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError("scenario config '" + path + "': " + e.what());
    }
}

ScenarioConfig ScenarioConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad JSON: ") + e.what());
    }
    ScenarioConfig c;
    try {
        maybe_get(j, "seed", c.seed);
        maybe_get(j, "latitude_deg", c.latitude_deg);
        maybe_get(j, "days", c.days);
        if (j.contains("start_date")) c.start = parse_date(j.at("start_date").get<std::string>());
        maybe_get(j, "customers_with_pv", c.n_with_pv);
        maybe_get(j, "customers_without_pv", c.n_without_pv);
        if (j.contains("pv")) {
            const json& p = j.at("pv");
            maybe_get(p, "capacity_min_kw", c.pv.capacity_min_kw);
            maybe_get(p, "capacity_max_kw", c.pv.capacity_max_kw);
            maybe_get(p, "tilt_deg", c.pv.tilt_deg);
            if (p.contains("azimuth_mix")) {
                c.pv.azimuth_mix.clear();
                for (const auto& a : p.at("azimuth_mix"))
                    c.pv.azimuth_mix.push_back(
                        {a.at("azimuth_deg").get<double>(), a.at("weight").get<double>()});
            }
        }
        if (j.contains("load")) {
            const json& l = j.at("load");
            maybe_get(l, "base_kw", c.load.base_kw);
            maybe_get(l, "scale_spread", c.load.scale_spread);
            maybe_get(l, "shape_jitter", c.load.shape_jitter);
            maybe_get(l, "noise_sigma", c.load.noise_sigma);
            maybe_get(l, "seasonal_amplitude", c.load.seasonal_amplitude);
            maybe_get(l, "weekend_factor", c.load.weekend_factor);
        }
        if (j.contains("cloud")) {
            const json& cl = j.at("cloud");
            maybe_get(cl, "mean_bias", c.cloud.mean_bias);
            maybe_get(cl, "correlation", c.cloud.correlation);
            maybe_get(cl, "sigma", c.cloud.sigma);
            maybe_get(cl, "floor", c.cloud.floor);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad scenario field: ") + e.what());
    }
    c.validate();
    return c;
}

std::string ScenarioConfig::to_json() const {
    json mix = json::array();
    for (const auto& a : pv.azimuth_mix)
        mix.push_back({{"azimuth_deg", a.azimuth_deg}, {"weight", a.weight}});
    json j = {
        {"seed", seed},
        {"latitude_deg", latitude_deg},
        {"start_date", format_date(start)},
        {"days", days},
        {"customers_with_pv", n_with_pv},
        {"customers_without_pv", n_without_pv},
        {"pv",
         {{"capacity_min_kw", pv.capacity_min_kw},
          {"capacity_max_kw", pv.capacity_max_kw},
          {"tilt_deg", pv.tilt_deg},
          {"azimuth_mix", mix}}},
        {"load",
         {{"base_kw", load.base_kw},
          {"scale_spread", load.scale_spread},
          {"shape_jitter", load.shape_jitter},
          {"noise_sigma", load.noise_sigma},
          {"seasonal_amplitude", load.seasonal_amplitude},
          {"weekend_factor", load.weekend_factor}}},
        {"cloud",
         {{"mean_bias", cloud.mean_bias},
          {"correlation", cloud.correlation},
          {"sigma", cloud.sigma},
          {"floor", cloud.floor}}}};
    return j.dump(2);
}

CloudField make_cloud_field(const ScenarioConfig& config) {
    Rng rng = Rng(config.seed).fork(0x10c0);
    const double rho = config.cloud.correlation;
    const double stat_sd = config.cloud.sigma / std::sqrt(std::max(1e-12, 1.0 - rho * rho));

    CloudField field;
    field.attenuation.start = config.start;
    field.attenuation.values.resize(static_cast<std::size_t>(config.hours()));

    double z = config.cloud.mean_bias + stat_sd * rng.normal();
    for (auto& v : field.attenuation.values) {
        v = std::clamp(1.0 - std::max(0.0, z), config.cloud.floor, 1.0);
        z = config.cloud.mean_bias * (1.0 - rho) + rho * z + config.cloud.sigma * rng.normal();
    }
    return field;
}

} // namespace btm
