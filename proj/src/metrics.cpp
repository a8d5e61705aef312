#include "btm/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "btm/errors.hpp"

namespace btm {

namespace {

std::vector<double> daytime_errors(const HourlySeries& est, const HourlySeries& truth,
                                   const DayNightMask& mask) {
    require_aligned(est, truth, "metrics");
    std::vector<double> errors;
    errors.reserve(est.size());
    for (std::size_t t = 0; t < est.size(); ++t)
        if (!mask.is_night(hour_of_day(est.stamp_at(t))))
            errors.push_back(est.values[t] - truth.values[t]);
    if (errors.empty()) throw DegenerateDataError("metrics: no daytime hours in span");
    return errors;
}

} // namespace

double mape(const HourlySeries& est, const HourlySeries& truth, double peak_norm,
            const DayNightMask& mask) {
    if (!(peak_norm > 0.0)) throw DegenerateDataError("mape: peak must be positive");
    std::vector<double> errors = daytime_errors(est, truth, mask);
    double sum = 0.0;
    for (double e : errors) sum += std::fabs(e) / peak_norm;
    return 100.0 * sum / static_cast<double>(errors.size());
}

double mse(const HourlySeries& est, const HourlySeries& truth, const DayNightMask& mask) {
    std::vector<double> errors = daytime_errors(est, truth, mask);
    double sum = 0.0;
    for (double e : errors) sum += e * e;
    return sum / static_cast<double>(errors.size());
}

CvResult cv(const HourlySeries& est, const HourlySeries& truth, const DayNightMask& mask,
            CvConvention convention) {
    std::vector<double> errors = daytime_errors(est, truth, mask);
    if (errors.size() < 2) throw DegenerateDataError("cv: needs at least two daytime points");
    double n = static_cast<double>(errors.size());
    double mu = 0.0;
    for (double e : errors) mu += e;
    mu /= n;

    double ss = 0.0;
    for (double e : errors) ss += (e - mu) * (e - mu);
    double divisor = (convention == CvConvention::customer) ? n : n - 1.0;
    double sigma = std::sqrt(ss / divisor);

    CvResult out;
    if (std::fabs(mu) < 1e-12) return out; // undefined
    out.value = sigma / mu;
    out.defined = true;
    return out;
}

MetricSet compute_metrics(const std::string& target, const std::string& scope,
                          const HourlySeries& est, const HourlySeries& truth,
                          double peak_norm, const DayNightMask& mask, CvConvention convention) {
    MetricSet m;
    m.target = target;
    m.scope = scope;
    m.mape = mape(est, truth, peak_norm, mask);
    m.mse = mse(est, truth, mask);
    CvResult c = cv(est, truth, mask, convention);
    m.cv = c.value;
    m.cv_defined = c.defined;
    return m;
}

std::vector<double> percentile_row(std::vector<double> values, const std::vector<double>& probs) {
    if (values.empty()) throw DegenerateDataError("percentile_row: empty value list");
    std::sort(values.begin(), values.end());
    std::vector<double> out;
    out.reserve(probs.size());
    for (double p : probs) {
        if (p <= 0.0 || p > 1.0) throw ConfigError("percentile probability out of (0, 1]");
        double rank = std::ceil(p * static_cast<double>(values.size()));
        std::size_t idx = rank < 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
        idx = std::min(idx, values.size() - 1);
        out.push_back(values[idx]);
    }
    return out;
}

} // namespace btm
