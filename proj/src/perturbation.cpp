#include "edmraim/perturbation.hpp"
#include "edmraim/errors.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace edm {

Eigen::RowVectorXd SensitivityTable::row(std::size_t eigen_index) const {
    const auto it = std::find(tracked.begin(), tracked.end(), eigen_index);
    if (it == tracked.end()) {
        throw std::out_of_range("eigenvalue " + std::to_string(eigen_index) + " is not tracked");
    }
    return s.row(it - tracked.begin());
}

bool SensitivityTable::has(std::size_t eigen_index) const {
    return std::find(tracked.begin(), tracked.end(), eigen_index) != tracked.end();
}

GramSensitivity gram_sensitivities(const Vector& rho) {
    const Eigen::Index m = rho.size();
    GramSensitivity gs;
    gs.dG.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) {
        Matrix E = Matrix::Zero(m + 1, m + 1);
        E(0, j + 1) = E(j + 1, 0) = 2.0 * rho(j);
        Matrix dG = double_center(E);
        gs.dG.push_back(0.5 * (dG + dG.transpose()));
    }
    return gs;
}

SensitivityTable eigenvalue_sensitivities(const GramSpectrum& spec, const GramSensitivity& gs,
                                          const std::vector<std::size_t>& tracked, double gap_tolerance) {
    const Eigen::Index n = spec.eigenvalues.size();
    const double scale = n > 0 ? spec.eigenvalues.cwiseAbs().maxCoeff() : 0.0;

    SensitivityTable table;
    table.tracked = tracked;
    table.s.resize(static_cast<Eigen::Index>(tracked.size()), static_cast<Eigen::Index>(gs.size()));

    for (std::size_t r = 0; r < tracked.size(); ++r) {
        const std::size_t idx = tracked[r];
        if (idx < 1 || static_cast<Eigen::Index>(idx) > n) {
            throw std::out_of_range("tracked eigenvalue " + std::to_string(idx) + " outside spectrum of size " +
                                    std::to_string(n));
        }
        const Eigen::Index i = static_cast<Eigen::Index>(idx) - 1;
        const double lambda = spec.eigenvalues(i);

        double gap = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < n; ++k) {
            if (k != i) gap = std::min(gap, std::abs(lambda - spec.eigenvalues(k)));
        }
        if (!(gap > gap_tolerance * scale)) {
            std::ostringstream msg;
            msg << "eigenvalue lambda" << idx << " = " << lambda << " m^2 is not simple: nearest gap " << gap
                << " m^2 <= " << gap_tolerance * scale
                << " m^2. First-order perturbation needs unique non-zero eigenvalues, and without a clock-bias "
                   "term lambda4/lambda5 eigenvectors are set by the noise. Increase bias_b or bias_inflation";
            if (spec.ordering == Ordering::algebraic) {
                msg << ", or use magnitude ordering (algebraic order can place lambda5 in the zero cluster)";
            }
            throw DegenerateEigenvalueError(msg.str(), idx, gap);
        }

        const auto z = spec.eigenvectors.col(i);
        const double norm2 = z.squaredNorm();
        for (std::size_t j = 0; j < gs.size(); ++j) {
            table.s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = z.dot(gs.dG[j] * z) / norm2;
        }
    }
    if (!table.s.allFinite()) throw NumericalError("non-finite eigenvalue sensitivity");
    return table;
}

double eigenvalue_variance(const Eigen::Ref<const Eigen::RowVectorXd>& row, double sigma_v) {
    return (row * sigma_v).squaredNorm();
}

NumeratorMoments numerator_moments(const SensitivityTable& table, double lambda4_nom, double lambda5_nom,
                                   double sigma_v) {
    const Eigen::RowVectorXd s4 = table.row(4);
    const Eigen::RowVectorXd s5 = table.row(5);
    NumeratorMoments nm;
    nm.mean = lambda4_nom + lambda5_nom;
    nm.sigma = std::sqrt(eigenvalue_variance(s4 + s5, sigma_v));
    nm.sigma_independent = std::sqrt(eigenvalue_variance(s4, sigma_v) + eigenvalue_variance(s5, sigma_v));
    return nm;
}

RatioGaussian ratio_gaussian(double mu_x, double sigma_x, double mu_y, double sigma_y, double cv_guard) {
    if (mu_y == 0.0) throw NumericalError("ratio_gaussian: denominator mean is zero");
    RatioGaussian r;
    r.mean = mu_x / mu_y;
    // (μx²/μy²)(σx²/μx² + σy²/μy²), expanded so that μx = 0 stays finite.
    const double my2 = mu_y * mu_y;
    r.sigma = std::sqrt(sigma_x * sigma_x / my2 + mu_x * mu_x * sigma_y * sigma_y / (my2 * my2));
    r.denominator_cv = std::abs(sigma_y / mu_y);
    r.validity_warning = !(r.denominator_cv < cv_guard);
    return r;
}

StatisticDistribution predict_q_distribution(const ScenarioGeometry& g, const NoiseModel& nm, Ordering ordering,
                                             const PredictOptions& options) {
    validate(g);
    validate(nm);
    if (nm.effective_bias() == 0.0) {
        throw DegenerateEigenvalueError(
            "effective clock bias is zero: lambda4 and lambda5 vanish without noise, so their eigenvectors are "
            "unstable and first-order perturbation does not apply. Set bias_b or bias_inflation to a non-zero value",
            4, 0.0);
    }

    const Vector rho = (true_ranges(g).array() + nm.effective_bias()).matrix();
    const SquaredDistanceMatrix D = edm_from_gram(gram_from_positions(g.positions()));
    const GramSpectrum spec = spectrum(augmented_gram(D, rho), ordering);

    std::vector<std::size_t> tracked{1, 4, 5};
    if (options.track_all) tracked = {1, 2, 3, 4, 5};
    const SensitivityTable table =
        eigenvalue_sensitivities(spec, gram_sensitivities(rho), tracked, options.gap_tolerance);

    StatisticDistribution dist;
    dist.ordering = ordering;
    dist.tracked = tracked;
    dist.nominal_eigenvalues = spec.eigenvalues.head(5);
    dist.eigenvalue_variance.resize(static_cast<Eigen::Index>(tracked.size()));
    for (std::size_t r = 0; r < tracked.size(); ++r) {
        dist.eigenvalue_variance(static_cast<Eigen::Index>(r)) =
            eigenvalue_variance(table.s.row(static_cast<Eigen::Index>(r)), nm.sigma_v);
    }

    const NumeratorMoments num = numerator_moments(table, spec.eigenvalues(3), spec.eigenvalues(4), nm.sigma_v);
    dist.mu_num = num.mean;
    dist.sigma_num = num.sigma;
    dist.sigma_num_independent = num.sigma_independent;

    const Eigen::RowVectorXd s1 = table.row(1);
    dist.mu_den = 2.0 * spec.eigenvalues(0);
    dist.sigma_den = 2.0 * std::sqrt(eigenvalue_variance(s1, nm.sigma_v));
    dist.covariance_num_den = ((table.row(4) + table.row(5)).array() * (2.0 * s1).array()).sum() *
                              nm.sigma_v * nm.sigma_v;

    const RatioGaussian q = ratio_gaussian(dist.mu_num, dist.sigma_num, dist.mu_den, dist.sigma_den, options.cv_guard);
    dist.mu_q = q.mean;
    dist.sigma_q = q.sigma;
    if (q.validity_warning) {
        std::ostringstream msg;
        msg << "denominator coefficient of variation " << q.denominator_cv << " >= " << options.cv_guard
            << "; Gaussian ratio approximation may be poor";
        dist.validity_warnings.push_back(msg.str());
    }
    return dist;
}

Threshold detection_threshold(const StatisticDistribution& dist, double p_fa) {
    if (!(p_fa > 0.0 && p_fa < 0.5)) throw ConfigError("p_fa must lie in (0, 0.5)");
    const boost::math::normal standard;
    const double z2 = boost::math::quantile(standard, 1.0 - p_fa / 2.0);
    const double z1 = boost::math::quantile(standard, 1.0 - p_fa);
    Threshold t;
    t.p_fa = p_fa;
    t.lo = dist.mu_q - z2 * dist.sigma_q;
    t.hi = dist.mu_q + z2 * dist.sigma_q;
    t.one_sided = dist.mu_q + z1 * dist.sigma_q;
    t.degenerate = dist.sigma_q == 0.0;
    return t;
}

nlohmann::json to_json(const StatisticDistribution& dist) {
    nlohmann::json j;
    j["mu_num"] = dist.mu_num;
    j["sigma_num"] = dist.sigma_num;
    j["sigma_num_independent"] = dist.sigma_num_independent;
    j["mu_den"] = dist.mu_den;
    j["sigma_den"] = dist.sigma_den;
    j["mu_q"] = dist.mu_q;
    j["sigma_q"] = dist.sigma_q;
    j["covariance_num_den"] = dist.covariance_num_den;
    j["validity_warnings"] = dist.validity_warnings;
    j["ordering"] = to_string(dist.ordering);
    j["nominal_lambda"] = std::vector<double>(dist.nominal_eigenvalues.data(),
                                              dist.nominal_eigenvalues.data() + dist.nominal_eigenvalues.size());
    nlohmann::json var = nlohmann::json::object();
    for (std::size_t r = 0; r < dist.tracked.size(); ++r) {
        var["lambda" + std::to_string(dist.tracked[r])] = dist.eigenvalue_variance(static_cast<Eigen::Index>(r));
    }
    j["lambda_variance"] = var;
    return j;
}

nlohmann::json to_json(const Threshold& t) {
    return {{"p_fa", t.p_fa}, {"two_sided_lo", t.lo}, {"two_sided_hi", t.hi},
            {"one_sided", t.one_sided}, {"degenerate", t.degenerate}};
}

} // namespace edm
