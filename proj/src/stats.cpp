#include "edmraim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edm::stats {

void RunningMoments::add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

double RunningMoments::variance() const {
    return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double RunningMoments::stddev() const {
    return std::sqrt(variance());
}

double RunningMoments::standard_error() const {
    return n_ == 0 ? 0.0 : stddev() / std::sqrt(static_cast<double>(n_));
}

RunningCovariance::RunningCovariance(Eigen::Index dim)
    : mean_(Eigen::VectorXd::Zero(dim)), comoment_(Eigen::MatrixXd::Zero(dim, dim)) {}

void RunningCovariance::add(const Eigen::VectorXd& x) {
    ++n_;
    const Eigen::VectorXd delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    comoment_ += delta * (x - mean_).transpose();
}

Eigen::MatrixXd RunningCovariance::covariance() const {
    if (n_ < 2) return Eigen::MatrixXd::Zero(mean_.size(), mean_.size());
    const Eigen::MatrixXd c = comoment_ / static_cast<double>(n_ - 1);
    return 0.5 * (c + c.transpose());
}

Eigen::MatrixXd RunningCovariance::correlation() const {
    const Eigen::MatrixXd c = covariance();
    const Eigen::Index d = c.rows();
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            const double denom = std::sqrt(c(i, i) * c(j, j));
            const double v = denom > 0.0 ? std::clamp(c(i, j) / denom, -1.0, 1.0) : 0.0;
            r(i, j) = r(j, i) = v;
        }
    }
    return r;
}

std::size_t Histogram::total() const {
    std::size_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Histogram freedman_diaconis(std::span<const double> sample, std::size_t max_bins) {
    if (sample.empty()) throw std::invalid_argument("histogram of empty sample");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    const double n = static_cast<double>(sorted.size());

    Histogram h;
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double width = 2.0 * iqr / std::cbrt(n);
    std::size_t bins = 1;
    if (hi > lo && width > 0.0) {
        bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
        bins = std::clamp<std::size_t>(bins, 1, max_bins);
    }
    if (hi > lo) {
        width = (hi - lo) / static_cast<double>(bins);
        h.edges.resize(bins + 1);
        for (std::size_t k = 0; k <= bins; ++k) h.edges[k] = lo + width * static_cast<double>(k);
        h.edges.back() = hi;
    } else {
        const double pad = std::max(std::abs(lo), 1.0) * 1e-9;
        h.edges = {lo - pad, lo + pad};
    }

    h.counts.assign(bins, 0);
    for (double x : sorted) {
        std::size_t k = bins - 1;
        if (hi > lo) {
            k = static_cast<std::size_t>((x - lo) / width);
            k = std::min(k, bins - 1);
            // Guard the floating bin index against its own edge rounding.
            while (k > 0 && x < h.edges[k]) --k;
            while (k + 1 < bins && x >= h.edges[k + 1]) ++k;
        }
        ++h.counts[k];
    }
    return h;
}

double normal_cdf(double x, double mu, double sigma) {
    if (sigma <= 0.0) return x >= mu ? 1.0 : 0.0;
    return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
}

double normal_pdf(double x, double mu, double sigma) {
    if (sigma <= 0.0) return 0.0;
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * 3.14159265358979323846));
}

double ks_statistic(std::span<const double> sample, double mu, double sigma) {
    if (sample.empty()) throw std::invalid_argument("KS statistic of empty sample");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = normal_cdf(sorted[i], mu, sigma);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_critical_value(double alpha, std::size_t n) {
    // Limiting Kolmogorov distribution quantiles c(α).
    struct Entry {
        double alpha;
        double c;
    };
    static constexpr Entry kTable[] = {{0.10, 1.2238}, {0.05, 1.3581}, {0.01, 1.6276}};
    for (const auto& e : kTable) {
        if (std::abs(e.alpha - alpha) < 1e-12) return e.c / std::sqrt(static_cast<double>(n));
    }
    throw std::invalid_argument("unsupported KS significance level");
}

} // namespace edm::stats
