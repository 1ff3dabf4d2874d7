#ifndef EDMRAIM_MONTECARLO_HPP
#define EDMRAIM_MONTECARLO_HPP

#include "edmraim/edm_core.hpp"
#include "edmraim/geometry.hpp"
#include "edmraim/perturbation.hpp"
#include "edmraim/stats.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace edm {

struct TrialRecord {
    std::size_t trial_index = 0;
    double q = 0.0;                     // under the configured ordering
    std::array<double, 5> lambda{};     // first five eigenvalues, configured ordering [m²]
    double q_alternate = 0.0;           // q under the other ordering
    std::optional<bool> exceeded;       // q > threshold, when a threshold was supplied
};

struct FaultSpec {
    std::size_t sat_index = 1;  // 1-based
    double bias = 0.0;          // [m]
};

struct TrialOptions {
    std::size_t n_trials = 10'000;
    std::uint64_t master_seed = 42;
    Ordering ordering = Ordering::magnitude;
    std::optional<double> threshold;
    std::optional<FaultSpec> fault;
    unsigned workers = 0;  // 0: hardware concurrency
};

/// Repeated noisy trials at fixed geometry. Trial t draws its noise from
/// trial_seed(master_seed, t), so results do not depend on scheduling.
std::vector<TrialRecord> run_trials(const ScenarioGeometry& g, const NoiseModel& nm, const TrialOptions& options);

struct SimulationSummary {
    std::size_t n_trials = 0;
    Ordering ordering = Ordering::magnitude;

    double q_mean = 0.0, q_std = 0.0;
    double q_alternate_mean = 0.0, q_alternate_std = 0.0;
    std::array<double, 5> lambda_mean{};
    std::array<double, 5> lambda_var{};
    std::array<double, 5> lambda_standard_error{};

    stats::Histogram histogram;
    double ks_statistic = 0.0;
    double ks_critical_01 = 0.0;
    double ks_critical_05 = 0.0;
    bool degenerate = false;  // zero spread in q

    std::optional<double> threshold;
    std::optional<double> false_alarm_rate;

    Eigen::Matrix4d correlation = Eigen::Matrix4d::Identity();  // (λ1, λ4, λ5, λ4+λ5)
};

SimulationSummary summarize(const std::vector<TrialRecord>& records, const StatisticDistribution& dist,
                            std::optional<double> threshold = std::nullopt);

struct AuditReport {
    double h = 0.0;
    double max_relative_error = 0.0;  // |s − FD| / max(|s|, 1)
    std::size_t worst_eigenvalue = 0; // 1-based
    std::size_t worst_satellite = 0;  // 1-based
    std::vector<std::size_t> tracked;
    Matrix analytic;
    Matrix finite_difference;
};

/// Central differences of the tracked eigenvalues with respect to each
/// pseudorange, through the full augment → center → eigen pipeline in
/// 113-bit precision, compared against the analytic sensitivities.
AuditReport finite_difference_audit(const ScenarioGeometry& g, const NoiseModel& nm, double h,
                                    Ordering ordering = Ordering::magnitude,
                                    const std::vector<std::size_t>& tracked = {1, 4, 5});

/// Same comparison for an arbitrary symmetric matrix and perturbation
/// directions: FD of eigenvalues of Gc ± h·δG_j.
AuditReport matrix_perturbation_audit(const Matrix& Gc, const GramSensitivity& gs, double h, Ordering ordering,
                                      const std::vector<std::size_t>& tracked);

/// Adds `fault_bias` to pseudorange `sat_index` (1-based) and tags the sample.
PseudorangeSample inject_fault(const PseudorangeSample& sample, std::size_t sat_index, double fault_bias);

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records);
/// Columns bin_left, bin_right, count, predicted_density (N(mu_q, sigma_q²) pdf at bin centre).
void write_histogram_csv(std::ostream& os, const stats::Histogram& h, const StatisticDistribution& dist);
nlohmann::json to_json(const SimulationSummary& s);
nlohmann::json to_json(const AuditReport& r);

} // namespace edm

#endif // EDMRAIM_MONTECARLO_HPP
