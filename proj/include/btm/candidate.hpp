#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "btm/gpr.hpp"
#include "btm/scenario.hpp"
#include "btm/series.hpp"

namespace btm {

// Candidate-curve grids used throughout the experiments:
//   I   south only
//   II  east, south, west
//   III east, southeast, south, southwest, west
enum class AzimuthCase { I, II, III };

AzimuthCase azimuth_case_from_string(const std::string& name);
std::string to_string(AzimuthCase c);

// The non-south azimuths a case adds around the south column.
std::vector<double> non_south_azimuths(AzimuthCase c);

// Normalized candidate generation curves for one window. Column 0 is always
// the (post-processed) south curve derived from the aggregate estimate;
// columns 1.. are the inferred non-south candidates. Every column lies in
// [0, 1] with nocturnal hours zeroed.
struct CandidateSet {
    Eigen::MatrixXd g_e;            // T x N_e
    std::vector<double> azimuths;   // per column, degrees; [0] = 180
    HourStamp start = 0;

    std::size_t count() const { return static_cast<std::size_t>(g_e.cols()); }
};

// One GPR per non-south azimuth, trained on cloud-free surrogate pairs
// spanning the scenario calendar.
std::vector<GprModel> train_candidate_models(const ScenarioConfig& scenario,
                                             const std::vector<double>& ns_azimuths,
                                             const GprTrainOptions& options = {});

CandidateSet build_candidate_set(const HourlySeries& g_w_hat,
                                 const std::vector<double>& ns_azimuths,
                                 const std::vector<const GprModel*>& models,
                                 const DayNightMask& mask);

} // namespace btm
