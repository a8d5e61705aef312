#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "btm/aggregate_layer.hpp"
#include "btm/candidate.hpp"
#include "btm/errors.hpp"
#include "btm/meter_panel.hpp"
#include "btm/series.hpp"

namespace btm {

// Duration-curve peak estimate for one customer over one window: the
// difference between the minimum nocturnal net demand (= minimum nocturnal
// native demand, PV being dark) and the minimum diurnal net demand.
struct PeakEstimate {
    std::string customer_id;
    double min_night_net = 0.0;
    double min_day_net = 0.0;  // typically negative for a PV owner
    double difference = 0.0;   // min_night_net - min_day_net
    double g_peak_hat = 0.0;   // floored at zero
};

PeakEstimate estimate_peak(const HourlySeries& net, const DayNightMask& mask,
                           const Window& window, std::string customer_id = {});

// min over K, gamma of  ||G_e K 1 - g_w_hat||^2 + lambda ||gamma||^2
//   s.t.  G_e K <= 1 (peaks + gamma)', 0 <= gamma <= p0 1, [K >= 0]
// The K >= 0 bound is a deliberate strengthening (weights mix physical
// curves); nonneg_weights = false reproduces the literal formulation.
struct QpProblem {
    Eigen::MatrixXd g_e;     // T x N_e candidate curves, p.u.
    Eigen::VectorXd g_w_hat; // T, kW
    Eigen::VectorXd peaks;   // N_w, kW
    double lambda = 100.0;
    double p0 = 2.0;
    bool nonneg_weights = true;

    void validate() const;
};

struct SolverOptions {
    double tolerance_scale = 1e-6; // stop at KKT residual <= scale * (1 + ||g_w_hat||_2)
    int max_iterations = 200000;
    const Eigen::MatrixXd* init_k = nullptr; // optional start (projected before use)
    const Eigen::VectorXd* init_gamma = nullptr;
};

struct AllocationSolution {
    Eigen::MatrixXd k;     // N_e x N_w
    Eigen::VectorXd gamma; // N_w
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
};

// Thrown when the iteration limit is hit; carries the best iterate found.
class AllocationFailure : public SolverError {
public:
    AllocationFailure(const std::string& msg, AllocationSolution best)
        : SolverError(msg), best_iterate(std::move(best)) {}
    AllocationSolution best_iterate;
};

// Accelerated projected gradient in a per-block diagonal metric; each
// customer's (K_i, gamma_i) block is projected exactly onto its polyhedron
// via a dual active-set solve, which also certifies the KKT residual.
AllocationSolution solve_allocation(const QpProblem& problem, const SolverOptions& options = {});

double allocation_objective(const QpProblem& problem, const Eigen::MatrixXd& k,
                            const Eigen::VectorXd& gamma);

// Per-customer series recovered from the solved weights:
// generation = G_e K_i, native = net + generation.
struct ReconstructedCustomers {
    std::vector<HourlySeries> generation;
    std::vector<HourlySeries> native;
};
ReconstructedCustomers reconstruct_customers(const AllocationSolution& solution,
                                             const MeterPanel& panel,
                                             const CandidateSet& candidates,
                                             const Window& window);

struct WindowSolveSummary {
    Window window;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    std::vector<PeakEstimate> peaks; // per customer
    Eigen::VectorXd gamma;
};

struct CustomerLayerResult {
    std::vector<std::string> ids;
    std::vector<HourlySeries> generation; // full span, one per customer
    std::vector<HourlySeries> native;
    std::vector<WindowSolveSummary> windows;
};

// Per-window peak estimation + allocation + reconstruction, concatenated
// over the windows of the aggregate layer.
CustomerLayerResult run_customer_layer(const MeterPanel& panel,
                                       const std::vector<AggregateEstimate>& aggregates,
                                       const std::vector<CandidateSet>& candidates,
                                       const DayNightMask& mask, double lambda, double p0,
                                       bool nonneg_weights = true,
                                       const SolverOptions& options = {});

} // namespace btm
