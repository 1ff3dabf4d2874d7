#ifndef EDMRAIM_PERTURBATION_HPP
#define EDMRAIM_PERTURBATION_HPP

#include "edmraim/edm_core.hpp"
#include "edmraim/geometry.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace edm {

/// Refuse perturbation when a tracked eigenvalue sits within
/// kSimpleGapTolerance·max|λ| of any other eigenvalue.
inline constexpr double kSimpleGapTolerance = 1e-9;

/// Coefficient-of-variation bound on the denominator for the Gaussian ratio approximation.
inline constexpr double kRatioCvGuard = 0.1;

/// Exact derivatives ∂G_c/∂v_j at v = 0, one (m+1)×(m+1) matrix per satellite.
struct GramSensitivity {
    std::vector<Matrix> dG;  // [m²/m]

    std::size_t size() const { return dG.size(); }
};

/// First-order eigenvalue sensitivities s(i, j) = zᵢᵀ δG_j zᵢ / zᵢᵀzᵢ.
struct SensitivityTable {
    std::vector<std::size_t> tracked;  // 1-based eigenvalue indices, one per row
    Matrix s;                          // rows: tracked eigenvalues, cols: satellites [m²/m]

    /// Row for 1-based eigenvalue `eigen_index`; throws std::out_of_range when not tracked.
    Eigen::RowVectorXd row(std::size_t eigen_index) const;
    bool has(std::size_t eigen_index) const;
};

struct NumeratorMoments {
    double mean = 0.0;                // λ4 + λ5 [m²]
    double sigma = 0.0;               // exact linear-form sd, includes λ4/λ5 cross term [m²]
    double sigma_independent = 0.0;   // sd if λ4 and λ5 were independent [m²]
};

struct RatioGaussian {
    double mean = 0.0;
    double sigma = 0.0;
    double denominator_cv = 0.0;
    bool validity_warning = false;  // σ_y/|μ_y| ≥ cv guard
};

/// Predicted Gaussian law of q = (λ4 + λ5) / (2 λ1) at a fixed geometry.
struct StatisticDistribution {
    double mu_num = 0.0, sigma_num = 0.0;
    double sigma_num_independent = 0.0;
    double mu_den = 0.0, sigma_den = 0.0;   // for 2λ1
    double mu_q = 0.0, sigma_q = 0.0;
    double covariance_num_den = 0.0;        // diagnostic [m⁴]
    Ordering ordering = Ordering::magnitude;
    Vector nominal_eigenvalues;             // first 5, noiseless with bias
    std::vector<std::size_t> tracked;       // 1-based
    Vector eigenvalue_variance;             // per tracked eigenvalue [m⁴]
    std::vector<std::string> validity_warnings;
};

struct PredictOptions {
    bool track_all = false;  // also track λ2, λ3
    double gap_tolerance = kSimpleGapTolerance;
    double cv_guard = kRatioCvGuard;
};

struct Threshold {
    double p_fa = 0.0;
    double lo = 0.0;          // two-sided band
    double hi = 0.0;
    double one_sided = 0.0;   // upper one-sided threshold
    bool degenerate = false;  // sigma_q == 0
};

/// δG_{c,j} = −½·J·E_j·J with E_j zero except (0, j) = (j, 0) = 2ρ_j.
GramSensitivity gram_sensitivities(const Vector& rho);

/// Sensitivities of the tracked (1-based) eigenvalues. Throws
/// DegenerateEigenvalueError when a tracked eigenvalue is not simple.
SensitivityTable eigenvalue_sensitivities(const GramSpectrum& spec, const GramSensitivity& gs,
                                          const std::vector<std::size_t>& tracked = {1, 4, 5},
                                          double gap_tolerance = kSimpleGapTolerance);

/// Σⱼ (s_j σ_v)².
double eigenvalue_variance(const Eigen::Ref<const Eigen::RowVectorXd>& row, double sigma_v);

NumeratorMoments numerator_moments(const SensitivityTable& table, double lambda4_nom, double lambda5_nom,
                                   double sigma_v);

/// Gaussian approximation to X/Y for independent Gaussians X and Y:
/// mean μx/μy, variance (μx²/μy²)(σx²/μx² + σy²/μy²).
RatioGaussian ratio_gaussian(double mu_x, double sigma_x, double mu_y, double sigma_y,
                             double cv_guard = kRatioCvGuard);

/// End-to-end prediction from the noiseless-with-bias nominal Gram matrix.
StatisticDistribution predict_q_distribution(const ScenarioGeometry& g, const NoiseModel& nm, Ordering ordering,
                                             const PredictOptions& options = {});

/// Two-sided band mu_q ∓ Φ⁻¹(1 − p_fa/2)·σ_q and one-sided mu_q + Φ⁻¹(1 − p_fa)·σ_q.
Threshold detection_threshold(const StatisticDistribution& dist, double p_fa);

nlohmann::json to_json(const StatisticDistribution& dist);
nlohmann::json to_json(const Threshold& t);

} // namespace edm

#endif // EDMRAIM_PERTURBATION_HPP
