#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "btm/aggregate_layer.hpp"
#include "btm/customer_layer.hpp"
#include "btm/errors.hpp"
#include "btm/metrics.hpp"
#include "btm/rng.hpp"
#include "btm/synth.hpp"

using namespace btm;

namespace {

// Independent oracle for the allocation QP: plain dense ADMM on the
// linearly-constrained quadratic, sharing no code with the production
// solver. Long-run settings push it well past the comparison tolerance.
struct AdmmOracle {
    double objective = 0.0;
    Eigen::MatrixXd k;
    Eigen::VectorXd gamma;
};

AdmmOracle solve_with_admm(const QpProblem& p, int max_iterations = 400000) {
    const Eigen::Index t_len = p.g_e.rows(), ne = p.g_e.cols(), nw = p.peaks.size();
    const Eigen::Index dim = ne * nw + nw;

    Eigen::MatrixXd gtg = p.g_e.transpose() * p.g_e;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < nw; ++i)
        for (Eigen::Index j = 0; j < nw; ++j) h.block(i * ne, j * ne, ne, ne) = 2.0 * gtg;
    for (Eigen::Index i = 0; i < nw; ++i) h(ne * nw + i, ne * nw + i) = 2.0 * p.lambda;

    Eigen::VectorXd q = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd gtgw = -2.0 * (p.g_e.transpose() * p.g_w_hat);
    for (Eigen::Index i = 0; i < nw; ++i) q.segment(i * ne, ne) = gtgw;

    // Constraint rows: per customer the t peak rows, optional k >= 0, and the
    // gamma box.
    Eigen::Index rows_per = t_len + (p.nonneg_weights ? ne : 0) + 2;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows_per * nw, dim);
    Eigen::VectorXd b(rows_per * nw);
    for (Eigen::Index i = 0; i < nw; ++i) {
        Eigen::Index r0 = i * rows_per;
        a.block(r0, i * ne, t_len, ne) = p.g_e;
        a.block(r0, ne * nw + i, t_len, 1).setConstant(-1.0);
        b.segment(r0, t_len).setConstant(p.peaks(i));
        Eigen::Index r = r0 + t_len;
        if (p.nonneg_weights) {
            for (Eigen::Index j = 0; j < ne; ++j) {
                a(r, i * ne + j) = -1.0;
                b(r) = 0.0;
                ++r;
            }
        }
        a(r, ne * nw + i) = -1.0;
        b(r) = 0.0;
        ++r;
        a(r, ne * nw + i) = 1.0;
        b(r) = p.p0;
    }

    double rho = 1.0 + h.trace() / static_cast<double>(dim);
    Eigen::LDLT<Eigen::MatrixXd> factor(h + rho * a.transpose() * a);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd u = Eigen::VectorXd::Zero(b.size());
    for (int it = 0; it < max_iterations; ++it) {
        x = factor.solve(-q + rho * (a.transpose() * (w - u)));
        Eigen::VectorXd ax = a * x;
        Eigen::VectorXd w_prev = w;
        w = (ax + u).cwiseMin(b);
        u += ax - w;
        if (it % 200 == 0) {
            double primal = (ax - w).cwiseAbs().maxCoeff();
            double dual = rho * (a.transpose() * (w - w_prev)).cwiseAbs().maxCoeff();
            if (primal < 1e-11 && dual < 1e-11) break;
        }
    }

    AdmmOracle out;
    out.k.resize(ne, nw);
    for (Eigen::Index i = 0; i < nw; ++i) out.k.col(i) = x.segment(i * ne, ne);
    out.gamma = x.tail(nw);
    out.objective = (p.g_e * out.k.rowwise().sum() - p.g_w_hat).squaredNorm() +
                    p.lambda * out.gamma.squaredNorm();
    return out;
}

QpProblem random_instance(Rng& rng, Eigen::Index t_len, Eigen::Index nw, Eigen::Index ne,
                          bool nonneg) {
    QpProblem p;
    p.g_e.resize(t_len, ne);
    for (Eigen::Index j = 0; j < ne; ++j) {
        double phase = rng.uniform(0.0, 3.0);
        for (Eigen::Index t = 0; t < t_len; ++t) {
            double day = std::max(0.0, std::sin((static_cast<double>(t % 24) - 5.0 - phase) *
                                                3.14159265 / 14.0));
            p.g_e(t, j) = day * rng.uniform(0.9, 1.0);
        }
        double peak = p.g_e.col(j).maxCoeff();
        if (peak > 0) p.g_e.col(j) /= peak;
    }
    Eigen::VectorXd true_w(nw);
    for (Eigen::Index i = 0; i < nw; ++i) true_w(i) = rng.uniform(1.0, 6.0);
    Eigen::VectorXd mix(ne);
    for (Eigen::Index j = 0; j < ne; ++j) mix(j) = rng.uniform(0.2, 1.0);
    mix /= mix.sum();
    p.g_w_hat = p.g_e * (mix * true_w.sum());
    for (Eigen::Index t = 0; t < t_len; ++t) p.g_w_hat(t) += rng.uniform(-0.3, 0.3);
    p.peaks.resize(nw);
    for (Eigen::Index i = 0; i < nw; ++i) p.peaks(i) = true_w(i) * rng.uniform(0.7, 1.1);
    p.lambda = 100.0;
    p.p0 = rng.uniform(0.3, 1.5);
    p.nonneg_weights = nonneg;
    return p;
}

void check_feasible(const QpProblem& p, const AllocationSolution& s, double tol = 1e-8) {
    for (Eigen::Index i = 0; i < p.peaks.size(); ++i) {
        Eigen::VectorXd gen = p.g_e * s.k.col(i);
        CHECK(gen.maxCoeff() <= p.peaks(i) + s.gamma(i) + tol);
        CHECK(s.gamma(i) >= -tol);
        CHECK(s.gamma(i) <= p.p0 + tol);
        if (p.nonneg_weights) CHECK(s.k.col(i).minCoeff() >= -tol);
    }
}

ScenarioConfig small_scenario() {
    ScenarioConfig c;
    c.seed = 9;
    c.days = 30;
    c.n_with_pv = 10;
    c.n_without_pv = 12;
    return c;
}

} // namespace

TEST_CASE("estimate_peak direct formula") {
    HourStamp t0 = hours_from_date(2021, 5, 1);
    DayNightMask mask = DayNightMask::standard();
    HourlySeries net;
    net.start = t0;
    for (int t = 0; t < 48; ++t)
        net.values.push_back(mask.is_night(hour_of_day(t0 + t)) ? 0.9 : 1.4);
    net.values[3] = 0.4;   // 03:00, nocturnal minimum
    net.values[13] = -4.6; // 13:00, diurnal minimum

    PeakEstimate est = estimate_peak(net, mask, {0, 48}, "pv1");
    CHECK(est.min_night_net == 0.4);
    CHECK(est.min_day_net == -4.6);
    CHECK(est.g_peak_hat == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("estimate_peak floors negative differences at zero") {
    HourStamp t0 = hours_from_date(2021, 5, 1);
    DayNightMask mask = DayNightMask::standard();
    // A customer without PV: day minimum above the night minimum.
    HourlySeries net;
    net.start = t0;
    for (int t = 0; t < 48; ++t)
        net.values.push_back(mask.is_night(hour_of_day(t0 + t)) ? 0.3 : 0.8);
    PeakEstimate est = estimate_peak(net, mask, {0, 48});
    CHECK(est.difference < 0.0);
    CHECK(est.g_peak_hat == 0.0);

    HourlySeries stub;
    stub.start = hours_from_date(2021, 5, 1, 8);
    stub.values.assign(4, 1.0);
    CHECK_THROWS_AS(estimate_peak(stub, mask, {0, 4}), DegenerateDataError);
}

TEST_CASE("peak estimates land within 15% of truth for most customers") {
    ScenarioConfig c = small_scenario();
    c.n_with_pv = 25;
    MeterPanel panel = build_panel(c);
    DayNightMask mask = DayNightMask::standard();
    Window window{0, panel.hours()}; // one month

    int good = 0;
    for (std::size_t i = 0; i < panel.pv_net.size(); ++i) {
        PeakEstimate est = estimate_peak(panel.pv_net[i], mask, window);
        double truth = *std::max_element(panel.truth_generation[i].values.begin(),
                                         panel.truth_generation[i].values.end());
        if (std::fabs(est.g_peak_hat - truth) <= 0.15 * truth) ++good;
    }
    CHECK(good * 100 >= 80 * 25);
}

TEST_CASE("single-customer exact fit recovers the peak weight") {
    Rng rng(3);
    Eigen::Index t_len = 96;
    QpProblem p;
    p.g_e.resize(t_len, 1);
    for (Eigen::Index t = 0; t < t_len; ++t)
        p.g_e(t, 0) = std::max(0.0, std::sin((static_cast<double>(t % 24) - 6.0) * 3.14159265 / 12.0));
    p.g_e /= p.g_e.maxCoeff();
    double peak = 4.2;
    p.g_w_hat = peak * p.g_e.col(0);
    p.peaks.resize(1);
    p.peaks(0) = peak;
    p.p0 = 0.0;
    p.lambda = 100.0;

    AllocationSolution s = solve_allocation(p);
    CHECK(s.k(0, 0) == doctest::Approx(peak).epsilon(1e-5));
    CHECK(s.gamma(0) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(s.objective <= 1e-8);
    check_feasible(p, s);
}

TEST_CASE("zero target gives the zero solution") {
    QpProblem p;
    p.g_e = Eigen::MatrixXd::Zero(48, 2);
    for (Eigen::Index t = 0; t < 48; ++t) {
        p.g_e(t, 0) = (t % 24) / 23.0;
        p.g_e(t, 1) = 1.0 - (t % 24) / 23.0;
    }
    p.g_w_hat = Eigen::VectorXd::Zero(48);
    p.peaks = Eigen::VectorXd::Constant(3, 2.0);
    AllocationSolution s = solve_allocation(p);
    CHECK(s.k.cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(s.gamma.cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(s.objective == doctest::Approx(0.0));
}

TEST_CASE("random instances match the ADMM oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 4; ++trial) {
        Eigen::Index nw = 1 + static_cast<Eigen::Index>(rng.below(3));
        Eigen::Index ne = 1 + static_cast<Eigen::Index>(rng.below(2));
        bool nonneg = trial % 2 == 0;
        QpProblem p = random_instance(rng, 48, nw, ne, nonneg);

        AllocationSolution ours = solve_allocation(p);
        AdmmOracle oracle = solve_with_admm(p);

        double scale = std::max(1.0, std::fabs(oracle.objective));
        CHECK(std::fabs(ours.objective - oracle.objective) <= 1e-5 * scale);
        CHECK(ours.kkt_residual <= 1e-6 * (1.0 + p.g_w_hat.norm()));
        check_feasible(p, ours);
    }
}

TEST_CASE("five feasible restarts agree on the objective") {
    Rng rng(23);
    QpProblem p = random_instance(rng, 48, 3, 2, true);
    AllocationSolution base = solve_allocation(p);

    for (int restart = 0; restart < 5; ++restart) {
        // Random feasible-ish start: scaled weights; the solver projects it.
        Eigen::MatrixXd k0(p.g_e.cols(), p.peaks.size());
        for (Eigen::Index j = 0; j < k0.size(); ++j) k0(j) = rng.uniform(0.0, 1.0);
        Eigen::VectorXd gamma0 = Eigen::VectorXd::Constant(p.peaks.size(), 0.5 * p.p0);
        SolverOptions opt;
        opt.init_k = &k0;
        opt.init_gamma = &gamma0;
        AllocationSolution s = solve_allocation(p, opt);
        CHECK(std::fabs(s.objective - base.objective) <=
              1e-6 * std::max(1.0, std::fabs(base.objective)));
    }
}

TEST_CASE("larger lambda never increases the slack norm") {
    Rng rng(29);
    QpProblem p = random_instance(rng, 72, 3, 2, true);
    // Tighten peaks so gamma is actually exercised.
    p.peaks *= 0.6;
    p.p0 = 2.0;

    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {25.0, 100.0, 400.0, 1600.0}) {
        p.lambda = lambda;
        AllocationSolution s = solve_allocation(p);
        double norm = s.gamma.norm();
        CHECK(norm <= prev + 1e-7);
        prev = norm;
    }
}

TEST_CASE("literal formulation (unsigned weights) also matches the oracle") {
    Rng rng(31);
    QpProblem p = random_instance(rng, 48, 2, 2, false);
    AllocationSolution ours = solve_allocation(p);
    AdmmOracle oracle = solve_with_admm(p);
    CHECK(std::fabs(ours.objective - oracle.objective) <=
          1e-5 * std::max(1.0, std::fabs(oracle.objective)));
    check_feasible(p, ours);
}

TEST_CASE("reconstruction identities") {
    ScenarioConfig c = small_scenario();
    MeterPanel panel = build_panel(c);
    DayNightMask mask = DayNightMask::standard();
    auto aggregates = run_aggregate_layer(panel, mask, tile_windows(panel.hours(), 720));

    CandidateSet set;
    set.start = panel.start();
    set.azimuths = {180.0};
    auto [g_s, peak] = normalize_to_peak(aggregates[0].g_w_hat);
    (void)peak;
    set.g_e.resize(static_cast<Eigen::Index>(g_s.size()), 1);
    for (std::size_t t = 0; t < g_s.size(); ++t)
        set.g_e(static_cast<Eigen::Index>(t), 0) = std::clamp(g_s.values[t], 0.0, 1.0);

    auto result = run_customer_layer(panel, aggregates, {set}, mask, 100.0, 2.0);
    REQUIRE(result.windows.size() == 1);

    // Sum over customers of (P_hat - net) equals G_e K 1, elementwise.
    const auto& sol_gamma = result.windows[0].gamma;
    CHECK(sol_gamma.size() == static_cast<Eigen::Index>(panel.pv_ids.size()));
    for (std::size_t t = 0; t < panel.hours(); ++t) {
        double sum_gen = 0.0, sum_net_diff = 0.0;
        for (std::size_t i = 0; i < panel.pv_ids.size(); ++i) {
            sum_gen += result.generation[i].values[t];
            sum_net_diff += result.native[i].values[t] - panel.pv_net[i].values[t];
        }
        CHECK(std::fabs(sum_gen - sum_net_diff) <= 1e-12 * std::max(1.0, std::fabs(sum_gen)));
    }

    // Zero generation leaves native = net exactly.
    MeterPanel tiny = panel;
    AllocationSolution zero;
    zero.k = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(panel.pv_ids.size()));
    zero.gamma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(panel.pv_ids.size()));
    auto recon = reconstruct_customers(zero, tiny, set, aggregates[0].window);
    for (std::size_t i = 0; i < tiny.pv_ids.size(); ++i)
        for (std::size_t t = 0; t < tiny.hours(); ++t)
            CHECK(recon.native[i].values[t] == tiny.pv_net[i].values[t]);
}

TEST_CASE("zero-noise all-south fleet with exact peaks reconstructs customers to < 2% MAPE") {
    ScenarioConfig c = small_scenario();
    c.load.noise_sigma = 0.0;
    c.load.shape_jitter = 0.0;
    c.pv.azimuth_mix = {{180.0, 1.0}};
    MeterPanel panel = build_panel(c);
    DayNightMask mask = DayNightMask::standard();
    Window window{0, panel.hours()};
    auto aggregates = run_aggregate_layer(panel, mask, {window});

    QpProblem p;
    auto [g_s, agg_peak] = normalize_to_peak(aggregates[0].g_w_hat);
    (void)agg_peak;
    p.g_e.resize(static_cast<Eigen::Index>(g_s.size()), 1);
    for (std::size_t t = 0; t < g_s.size(); ++t)
        p.g_e(static_cast<Eigen::Index>(t), 0) = std::clamp(g_s.values[t], 0.0, 1.0);
    p.g_w_hat = Eigen::Map<const Eigen::VectorXd>(aggregates[0].g_w_hat.values.data(),
                                                  static_cast<Eigen::Index>(panel.hours()));
    p.peaks.resize(static_cast<Eigen::Index>(panel.pv_ids.size()));
    for (std::size_t i = 0; i < panel.pv_ids.size(); ++i)
        p.peaks(static_cast<Eigen::Index>(i)) =
            *std::max_element(panel.truth_generation[i].values.begin(),
                              panel.truth_generation[i].values.end());

    AllocationSolution s = solve_allocation(p);
    CandidateSet set;
    set.start = panel.start();
    set.azimuths = {180.0};
    set.g_e = p.g_e;
    auto recon = reconstruct_customers(s, panel, set, window);

    for (std::size_t i = 0; i < panel.pv_ids.size(); ++i) {
        double truth_peak = *std::max_element(panel.truth_generation[i].values.begin(),
                                              panel.truth_generation[i].values.end());
        double err = mape(recon.generation[i], panel.truth_generation[i], truth_peak, mask);
        CHECK(err < 2.0);
    }
}

TEST_CASE("qp validation rejects malformed problems") {
    QpProblem p;
    p.g_e = Eigen::MatrixXd::Ones(10, 1);
    p.g_w_hat = Eigen::VectorXd::Ones(9);
    p.peaks = Eigen::VectorXd::Ones(2);
    CHECK_THROWS_AS(p.validate(), AlignmentError);
    p.g_w_hat = Eigen::VectorXd::Ones(10);
    p.lambda = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.lambda = 100.0;
    p.peaks(0) = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}
