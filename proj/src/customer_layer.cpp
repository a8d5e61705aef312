#include "btm/customer_layer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace btm {

PeakEstimate estimate_peak(const HourlySeries& net, const DayNightMask& mask,
                           const Window& window, std::string customer_id) {
    auto [night, day] = split_day_night(net, mask, window);
    PeakEstimate est;
    est.customer_id = std::move(customer_id);
    est.min_night_net = *std::min_element(night.begin(), night.end());
    est.min_day_net = *std::min_element(day.begin(), day.end());
    est.difference = est.min_night_net - est.min_day_net;
    est.g_peak_hat = std::max(est.difference, 0.0);
    return est;
}

void QpProblem::validate() const {
    if (g_e.rows() != g_w_hat.size()) throw AlignmentError("qp: G_e rows must match target length");
    if (g_e.cols() < 1 || peaks.size() < 1) throw AlignmentError("qp: empty candidate set or customer list");
    if (!(lambda > 0.0)) throw ConfigError("qp: lambda must be positive");
    if (p0 < 0.0) throw ConfigError("qp: slack bound must be nonnegative");
    for (Eigen::Index i = 0; i < peaks.size(); ++i)
        if (peaks(i) < 0.0) throw ConfigError("qp: peak estimates must be nonnegative");
}

double allocation_objective(const QpProblem& problem, const Eigen::MatrixXd& k,
                            const Eigen::VectorXd& gamma) {
    Eigen::VectorXd total = k.rowwise().sum();
    return (problem.g_e * total - problem.g_w_hat).squaredNorm() +
           problem.lambda * gamma.squaredNorm();
}

namespace {

double power_iteration_lmax(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows()).normalized();
    double lam = 0.0;
    for (int it = 0; it < 500; ++it) {
        Eigen::VectorXd mv = m * v;
        double norm = mv.norm();
        if (norm <= 0.0) return 0.0;
        v = mv / norm;
        if (std::fabs(norm - lam) <= 1e-13 * std::max(1.0, norm)) return norm;
        lam = norm;
    }
    return lam;
}

// Time rows that can never bind for K >= 0: dominated componentwise by
// another row (gamma enters every time row with the same -1 coefficient).
std::vector<int> pareto_time_rows(const Eigen::MatrixXd& g_e) {
    const Eigen::Index t_count = g_e.rows();
    const Eigen::Index ne = g_e.cols();
    std::vector<int> kept;
    for (Eigen::Index t = 0; t < t_count; ++t) {
        bool dominated = false;
        for (Eigen::Index s = 0; s < t_count && !dominated; ++s) {
            if (s == t) continue;
            bool geq = true, strict = false;
            for (Eigen::Index j = 0; j < ne; ++j) {
                if (g_e(s, j) < g_e(t, j)) {
                    geq = false;
                    break;
                }
                if (g_e(s, j) > g_e(t, j)) strict = true;
            }
            if (geq && (strict || s < t)) dominated = true; // ties keep the earliest
        }
        if (!dominated) kept.push_back(static_cast<int>(t));
    }
    return kept;
}

// Shared constraint system for one customer block, rows r: a_r' z <= b_r with
// z = (k_1..k_ne, gamma). b = base_b + m_i * time_flag.
struct BlockConstraints {
    Eigen::MatrixXd rows;       // n x d
    Eigen::VectorXd base_b;     // n
    Eigen::VectorXd time_flag;  // n, 1.0 on time rows
    Eigen::MatrixXd rows_w;     // rows scaled by D^-1 (n x d)
    std::vector<Eigen::VectorXd> gram_cols; // lazy columns of rows * D^-1 * rows'
    std::vector<char> gram_ready;

    int size() const { return static_cast<int>(rows.rows()); }

    const Eigen::VectorXd& gram_col(int r) {
        if (!gram_ready[static_cast<std::size_t>(r)]) {
            gram_cols[static_cast<std::size_t>(r)] = rows * rows_w.row(r).transpose();
            gram_ready[static_cast<std::size_t>(r)] = 1;
        }
        return gram_cols[static_cast<std::size_t>(r)];
    }
};

BlockConstraints build_block(const QpProblem& p, const Eigen::VectorXd& inv_metric) {
    const Eigen::Index ne = p.g_e.cols();
    const int d = static_cast<int>(ne) + 1;

    std::vector<int> time_rows;
    if (p.nonneg_weights) {
        time_rows = pareto_time_rows(p.g_e);
    } else {
        time_rows.resize(static_cast<std::size_t>(p.g_e.rows()));
        for (std::size_t t = 0; t < time_rows.size(); ++t) time_rows[t] = static_cast<int>(t);
    }

    int n = static_cast<int>(time_rows.size()) + (p.nonneg_weights ? static_cast<int>(ne) : 0) + 2;
    BlockConstraints b;
    b.rows = Eigen::MatrixXd::Zero(n, d);
    b.base_b = Eigen::VectorXd::Zero(n);
    b.time_flag = Eigen::VectorXd::Zero(n);

    int r = 0;
    for (int t : time_rows) {
        b.rows.block(r, 0, 1, ne) = p.g_e.row(t);
        b.rows(r, d - 1) = -1.0;
        b.time_flag(r) = 1.0;
        ++r;
    }
    if (p.nonneg_weights) {
        for (Eigen::Index j = 0; j < ne; ++j) {
            b.rows(r, j) = -1.0; // k_j >= 0
            ++r;
        }
    }
    b.rows(r, d - 1) = -1.0; // gamma >= 0
    ++r;
    b.rows(r, d - 1) = 1.0; // gamma <= p0
    b.base_b(r) = p.p0;
    ++r;

    b.rows_w = b.rows.array().rowwise() * inv_metric.transpose().array();
    b.gram_cols.resize(static_cast<std::size_t>(n));
    b.gram_ready.assign(static_cast<std::size_t>(n), 0);
    return b;
}

// Exact projection of z0 onto {R z <= b} in the metric diag(1/inv_metric),
// via Lawson-Hanson active-set iteration on the dual. active/nu persist for
// warm starting. Returns the residual constraint violation at the result.
double project_block(BlockConstraints& B, double m_i, Eigen::VectorXd& z,
                     std::vector<int>& active, Eigen::VectorXd& nu, double tol) {
    const int n = B.size();
    const Eigen::VectorXd b = B.base_b + m_i * B.time_flag;
    const Eigen::VectorXd c = B.rows * z - b;

    auto solve_on_active = [&](const std::vector<int>& set) -> Eigen::VectorXd {
        const int m = static_cast<int>(set.size());
        Eigen::MatrixXd mpp(m, m);
        Eigen::VectorXd cp(m);
        for (int a = 0; a < m; ++a) {
            const Eigen::VectorXd& col = B.gram_col(set[static_cast<std::size_t>(a)]);
            for (int q = 0; q < m; ++q) mpp(q, a) = col(set[static_cast<std::size_t>(q)]);
            cp(a) = c(set[static_cast<std::size_t>(a)]);
        }
        mpp.diagonal().array() += 1e-13 * std::max(1.0, mpp.trace());
        return mpp.ldlt().solve(cp);
    };

    // Re-solve on the active set, stepping back and dropping rows whose duals
    // would go negative (the standard inner loop).
    auto restore_feasible_duals = [&]() {
        while (!active.empty()) {
            Eigen::VectorXd nu_hat = solve_on_active(active);
            if (nu_hat.minCoeff() >= -1e-14) {
                nu = nu_hat;
                return;
            }
            double alpha = 1.0;
            for (int j = 0; j < nu_hat.size(); ++j) {
                if (nu_hat(j) < 0.0) {
                    double denom = nu(j) - nu_hat(j);
                    if (denom > 0.0) alpha = std::min(alpha, nu(j) / denom);
                }
            }
            nu = nu + alpha * (nu_hat - nu);
            std::vector<int> next_active;
            Eigen::VectorXd next_nu(nu.size());
            int kept = 0;
            for (int j = 0; j < nu.size(); ++j) {
                if (nu(j) <= 1e-14 && nu_hat(j) < 0.0) continue;
                next_active.push_back(active[static_cast<std::size_t>(j)]);
                next_nu(kept++) = nu(j);
            }
            active = std::move(next_active);
            nu = next_nu.head(kept);
        }
        nu.resize(0);
    };

    if (!active.empty()) {
        if (nu.size() != static_cast<Eigen::Index>(active.size()))
            nu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(active.size()));
        restore_feasible_duals();
    }

    std::vector<char> in_active(static_cast<std::size_t>(n), 0);
    for (int r : active) in_active[static_cast<std::size_t>(r)] = 1;

    Eigen::VectorXd w = c;
    int guard = 3 * n + 60;
    while (guard-- > 0) {
        w = c;
        for (std::size_t a = 0; a < active.size(); ++a)
            w -= nu(static_cast<Eigen::Index>(a)) * B.gram_col(active[a]);

        int worst = -1;
        double worst_v = tol;
        for (int r = 0; r < n; ++r) {
            if (in_active[static_cast<std::size_t>(r)]) continue;
            if (w(r) > worst_v) {
                worst_v = w(r);
                worst = r;
            }
        }
        if (worst < 0) break;

        active.push_back(worst);
        in_active[static_cast<std::size_t>(worst)] = 1;
        Eigen::VectorXd grown(nu.size() + 1);
        grown.head(nu.size()) = nu;
        grown(nu.size()) = 0.0;
        nu = grown;
        restore_feasible_duals();
        std::fill(in_active.begin(), in_active.end(), 0);
        for (int r : active) in_active[static_cast<std::size_t>(r)] = 1;
    }

    for (std::size_t a = 0; a < active.size(); ++a)
        z -= nu(static_cast<Eigen::Index>(a)) * B.rows_w.row(active[a]).transpose();

    // w already reflects the final duals: it equals R z - b.
    return std::max(0.0, w.maxCoeff());
}

} // namespace

AllocationSolution solve_allocation(const QpProblem& p, const SolverOptions& options) {
    p.validate();
    const Eigen::Index ne = p.g_e.cols();
    const Eigen::Index nw = p.peaks.size();
    const int d = static_cast<int>(ne) + 1;

    const double sigma2 = power_iteration_lmax(p.g_e.transpose() * p.g_e);
    const double dk = std::max(2.0 * static_cast<double>(nw) * sigma2 * 1.01, 1e-8);
    const double dgam = 2.0 * p.lambda;

    Eigen::VectorXd inv_metric(d);
    inv_metric.head(ne).setConstant(1.0 / dk);
    inv_metric(d - 1) = 1.0 / dgam;

    BlockConstraints block = build_block(p, inv_metric);

    const double tol = options.tolerance_scale * (1.0 + p.g_w_hat.norm());
    const double proj_tol = 1e-11 * (1.0 + p.peaks.maxCoeff() + p.p0);

    // State: column i = (k_i, gamma_i).
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(d, nw);
    if (options.init_k) {
        if (options.init_k->rows() != ne || options.init_k->cols() != nw)
            throw AlignmentError("qp: warm-start K has wrong shape");
        x.topRows(ne) = *options.init_k;
    }
    if (options.init_gamma) {
        if (options.init_gamma->size() != nw) throw AlignmentError("qp: warm-start gamma has wrong size");
        x.row(d - 1) = options.init_gamma->transpose();
    }

    std::vector<std::vector<int>> active(static_cast<std::size_t>(nw));
    std::vector<Eigen::VectorXd> duals(static_cast<std::size_t>(nw));

    // Make the start feasible.
    for (Eigen::Index i = 0; i < nw; ++i) {
        Eigen::VectorXd col = x.col(i);
        project_block(block, p.peaks(i), col, active[static_cast<std::size_t>(i)],
                      duals[static_cast<std::size_t>(i)], proj_tol);
        x.col(i) = col;
    }

    Eigen::MatrixXd x_prev = x;
    double theta = 1.0;
    double f_prev = allocation_objective(p, x.topRows(ne), x.row(d - 1).transpose());

    AllocationSolution best;
    best.objective = f_prev;
    best.kkt_residual = std::numeric_limits<double>::infinity();
    best.k = x.topRows(ne);
    best.gamma = x.row(d - 1).transpose();

    auto gradient_u = [&](const Eigen::MatrixXd& state) {
        Eigen::VectorXd total = state.topRows(ne).rowwise().sum();
        return (2.0 * (p.g_e.transpose() * (p.g_e * total - p.g_w_hat))).eval();
    };

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        double beta = (theta - 1.0) / theta_next;
        Eigen::MatrixXd y = x + beta * (x - x_prev);

        Eigen::VectorXd u_y = gradient_u(y);

        Eigen::MatrixXd x_new(d, nw);
        double feas = 0.0;
        for (Eigen::Index i = 0; i < nw; ++i) {
            Eigen::VectorXd z = y.col(i);
            z.head(ne) -= u_y / dk;
            z(d - 1) = 0.0; // exact minimization of the quadratic gamma term
            feas = std::max(feas, project_block(block, p.peaks(i), z,
                                                active[static_cast<std::size_t>(i)],
                                                duals[static_cast<std::size_t>(i)], proj_tol));
            x_new.col(i) = z;
        }

        // Fixed-point KKT certificate: the projection's optimality condition
        // turns the step displacement into a stationarity residual with exact
        // complementarity (gamma's residual is zero by construction).
        Eigen::VectorXd u_new = gradient_u(x_new);
        double stat = 0.0;
        for (Eigen::Index i = 0; i < nw; ++i)
            stat = std::max(stat, ((u_new - u_y) + dk * (y.col(i).head(ne) - x_new.col(i).head(ne)))
                                      .cwiseAbs()
                                      .maxCoeff());
        double kkt = std::max(stat, feas);

        Eigen::VectorXd gamma_new = x_new.row(d - 1).transpose();
        Eigen::VectorXd total_new = x_new.topRows(ne).rowwise().sum();
        double f_new = (p.g_e * total_new - p.g_w_hat).squaredNorm() +
                       p.lambda * gamma_new.squaredNorm();

        if (f_new < best.objective || (f_new == best.objective && kkt < best.kkt_residual)) {
            best.k = x_new.topRows(ne);
            best.gamma = gamma_new;
            best.objective = f_new;
            best.kkt_residual = kkt;
            best.iterations = iter;
        }

        if (kkt <= tol) {
            AllocationSolution out;
            out.k = x_new.topRows(ne);
            out.gamma = gamma_new;
            out.objective = f_new;
            out.kkt_residual = kkt;
            out.iterations = iter;
            return out;
        }

        if (f_new > f_prev) theta_next = 1.0; // adaptive restart
        x_prev = x;
        x = x_new;
        theta = theta_next;
        f_prev = f_new;
    }

    throw AllocationFailure("allocation did not converge in " +
                                std::to_string(options.max_iterations) +
                                " iterations (best objective " + std::to_string(best.objective) +
                                ", kkt residual " + std::to_string(best.kkt_residual) + ")",
                            best);
}

ReconstructedCustomers reconstruct_customers(const AllocationSolution& solution,
                                             const MeterPanel& panel,
                                             const CandidateSet& candidates,
                                             const Window& window) {
    const Eigen::Index nw = static_cast<Eigen::Index>(panel.pv_net.size());
    if (solution.k.cols() != nw)
        throw AlignmentError("reconstruct_customers: solution does not cover the panel");
    if (candidates.g_e.rows() != static_cast<Eigen::Index>(window.length))
        throw AlignmentError("reconstruct_customers: candidate set does not span the window");

    ReconstructedCustomers out;
    out.generation.reserve(static_cast<std::size_t>(nw));
    out.native.reserve(static_cast<std::size_t>(nw));
    for (Eigen::Index i = 0; i < nw; ++i) {
        Eigen::VectorXd gen = candidates.g_e * solution.k.col(i);
        HourlySeries net = slice(panel.pv_net[static_cast<std::size_t>(i)], window);

        HourlySeries g, p_hat;
        g.start = p_hat.start = net.start;
        g.values.resize(window.length);
        p_hat.values.resize(window.length);
        for (std::size_t t = 0; t < window.length; ++t) {
            g.values[t] = gen(static_cast<Eigen::Index>(t));
            p_hat.values[t] = net.values[t] + g.values[t];
        }
        out.generation.push_back(std::move(g));
        out.native.push_back(std::move(p_hat));
    }
    return out;
}

CustomerLayerResult run_customer_layer(const MeterPanel& panel,
                                       const std::vector<AggregateEstimate>& aggregates,
                                       const std::vector<CandidateSet>& candidates,
                                       const DayNightMask& mask, double lambda, double p0,
                                       bool nonneg_weights, const SolverOptions& options) {
    if (aggregates.size() != candidates.size())
        throw AlignmentError("run_customer_layer: need one candidate set per window");
    if (aggregates.empty()) throw DegenerateDataError("run_customer_layer: no windows");

    CustomerLayerResult result;
    result.ids = panel.pv_ids;
    result.generation.resize(panel.pv_ids.size());
    result.native.resize(panel.pv_ids.size());
    for (std::size_t i = 0; i < panel.pv_ids.size(); ++i) {
        result.generation[i].start = panel.start() + static_cast<HourStamp>(aggregates.front().window.start);
        result.native[i].start = result.generation[i].start;
    }

    for (std::size_t w = 0; w < aggregates.size(); ++w) {
        const Window& window = aggregates[w].window;
        try {
            QpProblem problem;
            problem.g_e = candidates[w].g_e;
            problem.g_w_hat = Eigen::Map<const Eigen::VectorXd>(
                aggregates[w].g_w_hat.values.data(),
                static_cast<Eigen::Index>(aggregates[w].g_w_hat.size()));
            problem.lambda = lambda;
            problem.p0 = p0;
            problem.nonneg_weights = nonneg_weights;

            WindowSolveSummary summary;
            summary.window = window;
            problem.peaks.resize(static_cast<Eigen::Index>(panel.pv_net.size()));
            for (std::size_t i = 0; i < panel.pv_net.size(); ++i) {
                PeakEstimate peak = estimate_peak(panel.pv_net[i], mask, window, panel.pv_ids[i]);
                problem.peaks(static_cast<Eigen::Index>(i)) = peak.g_peak_hat;
                summary.peaks.push_back(std::move(peak));
            }

            AllocationSolution solution = solve_allocation(problem, options);
            summary.objective = solution.objective;
            summary.kkt_residual = solution.kkt_residual;
            summary.iterations = solution.iterations;
            summary.gamma = solution.gamma;

            ReconstructedCustomers recon = reconstruct_customers(solution, panel, candidates[w], window);
            for (std::size_t i = 0; i < panel.pv_ids.size(); ++i) {
                result.generation[i].values.insert(result.generation[i].values.end(),
                                                   recon.generation[i].values.begin(),
                                                   recon.generation[i].values.end());
                result.native[i].values.insert(result.native[i].values.end(),
                                               recon.native[i].values.begin(),
                                               recon.native[i].values.end());
            }
            result.windows.push_back(std::move(summary));
        } catch (const AllocationFailure& e) {
            throw AllocationFailure("customer layer failed in window " + std::to_string(w) + ": " +
                                        e.what(),
                                    e.best_iterate);
        } catch (const Error& e) {
            throw SolverError("customer layer failed in window " + std::to_string(w) + ": " +
                              e.what());
        }
    }
    return result;
}

} // namespace btm
