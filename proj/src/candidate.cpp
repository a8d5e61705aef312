#include "btm/candidate.hpp"

#include <algorithm>

#include "btm/errors.hpp"
#include "btm/synth.hpp"

namespace btm {

AzimuthCase azimuth_case_from_string(const std::string& name) {
    if (name == "I" || name == "i" || name == "1") return AzimuthCase::I;
    if (name == "II" || name == "ii" || name == "2") return AzimuthCase::II;
    if (name == "III" || name == "iii" || name == "3") return AzimuthCase::III;
    throw ConfigError("unknown azimuth case '" + name + "' (expected I, II, or III)");
}

std::string to_string(AzimuthCase c) {
    switch (c) {
    case AzimuthCase::I: return "I";
    case AzimuthCase::II: return "II";
    case AzimuthCase::III: return "III";
    }
    return "?";
}

std::vector<double> non_south_azimuths(AzimuthCase c) {
    switch (c) {
    case AzimuthCase::I: return {};
    case AzimuthCase::II: return {90.0, 270.0};
    case AzimuthCase::III: return {90.0, 135.0, 225.0, 270.0};
    }
    return {};
}

std::vector<GprModel> train_candidate_models(const ScenarioConfig& scenario,
                                             const std::vector<double>& ns_azimuths,
                                             const GprTrainOptions& options) {
    HourlySeries south = pvwatts_surrogate(180.0, scenario);
    std::vector<GprModel> models;
    models.reserve(ns_azimuths.size());
    for (double az : ns_azimuths) {
        HourlySeries target = pvwatts_surrogate(az, scenario);
        models.push_back(train_azimuth_model(south, target, std::to_string(static_cast<int>(az)),
                                             options));
    }
    return models;
}

CandidateSet build_candidate_set(const HourlySeries& g_w_hat,
                                 const std::vector<double>& ns_azimuths,
                                 const std::vector<const GprModel*>& models,
                                 const DayNightMask& mask) {
    if (ns_azimuths.size() != models.size())
        throw AlignmentError("build_candidate_set: one model per non-south azimuth required");

    auto [g_s_raw, peak] = normalize_to_peak(g_w_hat);
    (void)peak;

    // Post-processing applies to the south column too: the aggregate estimate
    // can dip slightly negative, and candidates represent physical output.
    HourlySeries g_s = g_s_raw;
    for (std::size_t t = 0; t < g_s.size(); ++t) {
        if (mask.is_night(hour_of_day(g_s.stamp_at(t))))
            g_s.values[t] = 0.0;
        else
            g_s.values[t] = std::clamp(g_s.values[t], 0.0, 1.0);
    }

    CandidateSet set;
    set.start = g_w_hat.start;
    set.g_e.resize(static_cast<Eigen::Index>(g_w_hat.size()),
                   static_cast<Eigen::Index>(1 + models.size()));
    set.azimuths.push_back(180.0);
    for (std::size_t t = 0; t < g_s.size(); ++t)
        set.g_e(static_cast<Eigen::Index>(t), 0) = g_s.values[t];

    for (std::size_t m = 0; m < models.size(); ++m) {
        HourlySeries candidate = infer_candidate(*models[m], g_s, mask);
        for (std::size_t t = 0; t < candidate.size(); ++t)
            set.g_e(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m + 1)) =
                candidate.values[t];
        set.azimuths.push_back(ns_azimuths[m]);
    }
    return set;
}

} // namespace btm
