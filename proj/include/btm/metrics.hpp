#pragma once

#include <string>
#include <vector>

#include "btm/series.hpp"

namespace btm {

// Which divisor the error standard deviation uses. The aggregate-level
// definition divides by N_d - 1, the customer-level one by N_d; both are kept
// as printed, with unify available to force the sample convention everywhere.
enum class CvConvention { aggregate, customer, unified_sample };

struct MetricSet {
    std::string target; // "G" or "P"
    std::string scope;  // "aggregate" or a customer id
    double mape = 0.0;  // percent of true peak
    double mse = 0.0;   // kW^2
    double cv = 0.0;
    bool cv_defined = false;
};

// Mean absolute error over daytime hours, normalized by the true peak,
// as a percentage.
double mape(const HourlySeries& est, const HourlySeries& truth, double peak_norm,
            const DayNightMask& mask);

double mse(const HourlySeries& est, const HourlySeries& truth, const DayNightMask& mask);

struct CvResult {
    double value = 0.0;
    bool defined = false; // false when |mean error| < 1e-12
};
CvResult cv(const HourlySeries& est, const HourlySeries& truth, const DayNightMask& mask,
            CvConvention convention);

MetricSet compute_metrics(const std::string& target, const std::string& scope,
                          const HourlySeries& est, const HourlySeries& truth,
                          double peak_norm, const DayNightMask& mask, CvConvention convention);

// Inverse empirical CDF at the requested probabilities, lower-order-statistic
// convention (no interpolation).
std::vector<double> percentile_row(std::vector<double> values, const std::vector<double>& probs);

inline const std::vector<double>& standard_percentile_probs() {
    static const std::vector<double> probs = {0.1, 0.2, 0.5, 0.7, 0.9};
    return probs;
}

} // namespace btm
