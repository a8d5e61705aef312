#pragma once

#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "btm/series.hpp"

namespace btm {

// Regression input for one hour: normalized south-facing generation plus
// calendar position. Hour-in-day and day-in-year are rescaled to [0, 1] so a
// single kernel length scale is meaningful across the features.
struct GprInput {
    double g_s = 0.0;         // p.u., in [0, 1]
    double hour_scaled = 0.0; // hour-in-day / 23
    double day_scaled = 0.0;  // (day-in-year - 1) / 365
};

GprInput make_gpr_input(double g_s, HourStamp stamp);

// Squared exponential covariance sigma_f^2 exp(-|a-b|^2 / (2 length^2)).
double se_kernel(const GprInput& a, const GprInput& b, double sigma_f, double length);

struct GprTrainOptions {
    std::size_t max_train = 1500; // uniform-stride subsample bound
    double jitter = 1e-6;         // initial diagonal jitter, escalated x10 on failure
    std::vector<double> sigma_f_grid = {0.5, 1.0, 2.0};
    std::vector<double> length_grid = {0.1, 0.3, 1.0};
    int cv_folds = 5;
};

// Gaussian process with a zero-mean prior on mean-centered targets. The
// training covariance factorization is cached; a trained model is immutable
// and safe to share across threads.
class GprModel {
public:
    static GprModel train(const std::vector<GprInput>& inputs, const std::vector<double>& targets,
                          const GprTrainOptions& options = {});

    double predict_mean(const GprInput& x) const;
    std::vector<double> predict_mean(const std::vector<GprInput>& xs) const;

    // Posterior variance sigma_f^2 - k*' (K + jitter I)^-1 k*.
    double predict_variance(const GprInput& x) const;

    double sigma_f() const { return sigma_f_; }
    double length() const { return length_; }
    double jitter() const { return jitter_; }
    std::size_t training_size() const { return static_cast<std::size_t>(inputs_.rows()); }

    // Flat CSV dump of hyperparameters and training rows; load() refits
    // exactly from the stored data.
    void save(const std::string& path) const;
    static GprModel load(const std::string& path);

    std::string label; // e.g. the azimuth this model produces

private:
    GprModel() = default;
    void factorize(); // builds the LLT of K + jitter I and the solve vector

    Eigen::MatrixXd inputs_; // n x 3
    Eigen::VectorXd targets_;
    Eigen::VectorXd alpha_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double target_mean_ = 0.0;
    double sigma_f_ = 1.0;
    double length_ = 0.3;
    double jitter_ = 1e-6;
};

// Fits the mapping from a south-facing curve to the given non-south curve.
// Both series must be normalized to peak 1 and aligned; training rows cover
// the diurnal-mask hours (nocturnal output is zeroed downstream anyway).
GprModel train_azimuth_model(const HourlySeries& surrogate_south,
                             const HourlySeries& surrogate_ns, const std::string& label,
                             const GprTrainOptions& options = {},
                             const DayNightMask& mask = DayNightMask::standard());

// Posterior mean series for a normalized input curve, clipped to [0, 1] and
// zeroed on nocturnal hours.
HourlySeries infer_candidate(const GprModel& model, const HourlySeries& g_s,
                             const DayNightMask& mask);

} // namespace btm
