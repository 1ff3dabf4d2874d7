#ifndef EDMRAIM_STATS_HPP
#define EDMRAIM_STATS_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace edm::stats {

/// Welford single-pass mean/variance.
class RunningMoments {
public:
    void add(double x);

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    /// Unbiased sample variance; 0 for fewer than two samples.
    double variance() const;
    double stddev() const;
    double standard_error() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Single-pass co-moment accumulation for a fixed-width vector of variables.
class RunningCovariance {
public:
    explicit RunningCovariance(Eigen::Index dim);

    void add(const Eigen::VectorXd& x);

    std::size_t count() const { return n_; }
    Eigen::VectorXd mean() const { return mean_; }
    Eigen::MatrixXd covariance() const;
    /// Pearson correlation; unit diagonal, zero off-diagonal for constant variables.
    Eigen::MatrixXd correlation() const;

private:
    std::size_t n_ = 0;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd comoment_;
};

struct Histogram {
    std::vector<double> edges;         // strictly increasing, counts.size() + 1 entries
    std::vector<std::size_t> counts;

    std::size_t total() const;
};

/// Linear-interpolation sample quantile of an ascending-sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);

/// Freedman–Diaconis bin width 2·IQR·n^(−1/3); a single padded bin when the
/// sample has no spread. The bin count is capped at `max_bins`.
Histogram freedman_diaconis(std::span<const double> sample, std::size_t max_bins = 2000);

double normal_cdf(double x, double mu, double sigma);
double normal_pdf(double x, double mu, double sigma);

/// Kolmogorov–Smirnov distance between the sample and N(mu, sigma²). A
/// zero sigma is treated as a point mass at mu.
double ks_statistic(std::span<const double> sample, double mu, double sigma);

/// Asymptotic one-sample KS critical value c(α)/√n. Supported α: 0.10, 0.05, 0.01.
double ks_critical_value(double alpha, std::size_t n);

} // namespace edm::stats

#endif // EDMRAIM_STATS_HPP
