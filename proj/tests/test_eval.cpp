#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "btm/errors.hpp"
#include "btm/metrics.hpp"
#include "btm/noise.hpp"
#include "btm/rng.hpp"
#include "btm/timestamp.hpp"

using namespace btm;

namespace {

const HourStamp noon = hours_from_date(2021, 6, 1, 10); // 10:00, diurnal block

HourlySeries series_at(HourStamp start, std::vector<double> values) {
    HourlySeries s;
    s.start = start;
    s.values = std::move(values);
    return s;
}

MeterPanel readings_panel(std::size_t n_pv, std::size_t n_nopv, std::size_t hours, Rng& rng) {
    MeterPanel p;
    HourStamp t0 = hours_from_date(2021, 3, 1);
    for (std::size_t i = 0; i < n_pv; ++i) {
        p.pv_ids.push_back("pv" + std::to_string(i));
        HourlySeries s;
        s.start = t0;
        for (std::size_t t = 0; t < hours; ++t) s.values.push_back(rng.uniform(0.5, 3.0));
        p.pv_net.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < n_nopv; ++i) {
        p.nopv_ids.push_back("np" + std::to_string(i));
        HourlySeries s;
        s.start = t0;
        for (std::size_t t = 0; t < hours; ++t) s.values.push_back(rng.uniform(0.5, 3.0));
        p.nopv_native.push_back(std::move(s));
    }
    return p;
}

} // namespace

TEST_CASE("mape is zero for a perfect estimate") {
    HourlySeries truth = series_at(noon, {1, 2, 3, 4});
    CHECK(mape(truth, truth, 10.0, DayNightMask::standard()) == 0.0);
}

TEST_CASE("mape closed form: constant 1 kW error against a 100 kW peak") {
    HourlySeries truth = series_at(noon, {10, 20, 30, 40});
    HourlySeries est = series_at(noon, {11, 21, 31, 41});
    CHECK(mape(est, truth, 100.0, DayNightMask::standard()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mape matches a direct-summation oracle on random data") {
    Rng rng(5);
    HourStamp t0 = hours_from_date(2021, 4, 1);
    HourlySeries truth, est;
    truth.start = est.start = t0;
    for (int t = 0; t < 96; ++t) {
        truth.values.push_back(rng.uniform(0.0, 50.0));
        est.values.push_back(rng.uniform(0.0, 50.0));
    }
    DayNightMask mask = DayNightMask::standard();
    double peak = 62.5;

    double sum = 0.0;
    int n = 0;
    for (int t = 0; t < 96; ++t) {
        int hod = hour_of_day(t0 + t);
        bool night = (hod >= 21 || hod <= 4);
        if (night) continue;
        sum += std::fabs(est.values[t] - truth.values[t]) / peak;
        ++n;
    }
    double expect = 100.0 * sum / n;
    CHECK(mape(est, truth, peak, mask) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("mape scales inversely with the normalizing peak") {
    Rng rng(6);
    HourlySeries truth, est;
    truth.start = est.start = hours_from_date(2021, 4, 1);
    for (int t = 0; t < 48; ++t) {
        truth.values.push_back(rng.uniform(0.0, 5.0));
        est.values.push_back(rng.uniform(0.0, 5.0));
    }
    DayNightMask mask = DayNightMask::standard();
    CHECK(mape(est, truth, 20.0, mask) ==
          doctest::Approx(0.5 * mape(est, truth, 10.0, mask)).epsilon(1e-12));
    CHECK_THROWS_AS(mape(est, truth, 0.0, mask), DegenerateDataError);
}

TEST_CASE("mse and cv trivial cases") {
    DayNightMask mask = DayNightMask::standard();
    HourlySeries truth = series_at(noon, {5, 6, 7, 8});

    CHECK(mse(truth, truth, mask) == 0.0);
    CHECK_FALSE(cv(truth, truth, mask, CvConvention::aggregate).defined);

    // errors = {+1, -1}: zero-mean, so cv undefined; mse = 1
    HourlySeries est = series_at(noon, {6, 5, 7, 8});
    HourlySeries base = series_at(noon, {5, 6, 7, 8});
    HourlySeries est2 = series_at(noon, {6, 5, 7, 8});
    est2.values = {6, 5, 7, 8};
    HourlySeries small_truth = series_at(noon, {5, 6});
    HourlySeries small_est = series_at(noon, {6, 5});
    CHECK(mse(small_est, small_truth, mask) == doctest::Approx(1.0));
    CHECK_FALSE(cv(small_est, small_truth, mask, CvConvention::aggregate).defined);
}

TEST_CASE("mse and cv match loop oracles for both divisor conventions") {
    Rng rng(7);
    HourStamp t0 = hours_from_date(2021, 4, 10);
    HourlySeries truth, est;
    truth.start = est.start = t0;
    for (int t = 0; t < 120; ++t) {
        truth.values.push_back(rng.uniform(0.0, 10.0));
        est.values.push_back(rng.uniform(0.0, 10.0));
    }
    DayNightMask mask = DayNightMask::standard();

    std::vector<double> errs;
    for (int t = 0; t < 120; ++t) {
        int hod = hour_of_day(t0 + t);
        if (hod >= 21 || hod <= 4) continue;
        errs.push_back(est.values[t] - truth.values[t]);
    }
    double n = static_cast<double>(errs.size());
    double mse_expect = 0.0, mu = 0.0;
    for (double e : errs) {
        mse_expect += e * e;
        mu += e;
    }
    mse_expect /= n;
    mu /= n;
    double ss = 0.0;
    for (double e : errs) ss += (e - mu) * (e - mu);

    CHECK(mse(est, truth, mask) == doctest::Approx(mse_expect).epsilon(1e-12));
    CHECK(cv(est, truth, mask, CvConvention::aggregate).value ==
          doctest::Approx(std::sqrt(ss / (n - 1)) / mu).epsilon(1e-12));
    CHECK(cv(est, truth, mask, CvConvention::customer).value ==
          doctest::Approx(std::sqrt(ss / n) / mu).epsilon(1e-12));
    CHECK(cv(est, truth, mask, CvConvention::unified_sample).value ==
          doctest::Approx(std::sqrt(ss / (n - 1)) / mu).epsilon(1e-12));
}

TEST_CASE("metrics ignore simultaneous reordering of est and truth") {
    Rng rng(8);
    HourStamp t0 = hours_from_date(2021, 4, 10);
    HourlySeries truth, est;
    truth.start = est.start = t0;
    for (int t = 0; t < 96; ++t) {
        truth.values.push_back(rng.uniform(0.0, 10.0));
        est.values.push_back(rng.uniform(0.0, 10.0));
    }
    DayNightMask mask = DayNightMask::standard();

    // Shuffle the (est, truth) pairs among the daytime positions.
    std::vector<std::size_t> day_idx;
    for (int t = 0; t < 96; ++t) {
        int hod = hour_of_day(t0 + t);
        if (!(hod >= 21 || hod <= 4)) day_idx.push_back(static_cast<std::size_t>(t));
    }
    HourlySeries truth2 = truth, est2 = est;
    std::vector<std::size_t> perm = day_idx;
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    for (std::size_t i = 0; i < day_idx.size(); ++i) {
        truth2.values[day_idx[i]] = truth.values[perm[i]];
        est2.values[day_idx[i]] = est.values[perm[i]];
    }

    CHECK(mape(est2, truth2, 7.0, mask) == doctest::Approx(mape(est, truth, 7.0, mask)).epsilon(1e-12));
    CHECK(mse(est2, truth2, mask) == doctest::Approx(mse(est, truth, mask)).epsilon(1e-12));
    CHECK(cv(est2, truth2, mask, CvConvention::aggregate).value ==
          doctest::Approx(cv(est, truth, mask, CvConvention::aggregate).value).epsilon(1e-12));
}

TEST_CASE("percentile table lower-order-statistic convention") {
    std::vector<double> same(100, 3.25);
    auto row = percentile_row(same, standard_percentile_probs());
    for (double v : row) CHECK(v == 3.25);

    std::vector<double> ten = {10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
    CHECK(percentile_row(ten, {0.5})[0] == 5.0);
    CHECK(percentile_row(ten, {0.1})[0] == 1.0);
    CHECK(percentile_row(ten, {1.0})[0] == 10.0);
}

TEST_CASE("percentile table matches a sort-and-index oracle") {
    Rng rng(9);
    std::vector<double> values;
    for (int i = 0; i < 137; ++i) values.push_back(rng.uniform(-4.0, 4.0));

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    for (double p : standard_percentile_probs()) {
        std::size_t idx = static_cast<std::size_t>(std::ceil(p * 137.0)) - 1;
        CHECK(percentile_row(values, {p})[0] == sorted[idx]);
    }
}

TEST_CASE("apply_noise identity and boundaries") {
    Rng rng(10);
    MeterPanel panel = readings_panel(5, 20, 400, rng);

    NoiseSpec none;
    none.packet_loss_rate = 0.0;
    none.measurement_error = 0.0;
    MeterPanel same = apply_noise(panel, none);
    CHECK(same.pv_net[0].values == panel.pv_net[0].values);
    CHECK_FALSE(same.noisy_measurements);

    NoiseSpec all;
    all.packet_loss_rate = 1.0;
    all.measurement_error = 0.0;
    MeterPanel zeroed = apply_noise(panel, all);
    for (const auto& s : zeroed.pv_net)
        for (double v : s.values) CHECK(v == 0.0);
    for (const auto& s : zeroed.nopv_native)
        for (double v : s.values) CHECK(v == 0.0);
}

TEST_CASE("apply_noise zeroes an exact count of readings") {
    Rng rng(11);
    MeterPanel panel = readings_panel(5, 20, 400, rng); // 25 x 400 = 10,000 readings

    NoiseSpec spec;
    spec.packet_loss_rate = 0.03;
    spec.measurement_error = 0.0;
    spec.seed = 99;
    MeterPanel noisy = apply_noise(panel, spec);
    CHECK(noisy.noisy_measurements);

    std::size_t zeros = 0;
    for (const auto& s : noisy.pv_net) zeros += std::count(s.values.begin(), s.values.end(), 0.0);
    for (const auto& s : noisy.nopv_native)
        zeros += std::count(s.values.begin(), s.values.end(), 0.0);
    CHECK(zeros == 300);
}

TEST_CASE("apply_noise is deterministic and bounded") {
    Rng rng(12);
    MeterPanel panel = readings_panel(3, 4, 200, rng);
    NoiseSpec spec;
    spec.packet_loss_rate = 0.02;
    spec.measurement_error = 0.005;
    spec.seed = 7;

    MeterPanel a = apply_noise(panel, spec);
    MeterPanel b = apply_noise(panel, spec);
    for (std::size_t i = 0; i < a.pv_net.size(); ++i) CHECK(a.pv_net[i].values == b.pv_net[i].values);

    // surviving readings moved by at most +-0.5%
    for (std::size_t i = 0; i < a.pv_net.size(); ++i)
        for (std::size_t t = 0; t < a.hours(); ++t) {
            double v = a.pv_net[i].values[t];
            if (v == 0.0) continue;
            CHECK(std::fabs(v / panel.pv_net[i].values[t] - 1.0) <= 0.005);
        }
    CHECK_THROWS_AS(apply_noise(panel, NoiseSpec{-0.1, 0.0, 1}), ConfigError);
}
