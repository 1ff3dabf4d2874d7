#include "edmraim/quad_precision.hpp"

#include "edmraim/montecarlo.hpp"
#include "edmraim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>

namespace edm {

namespace {

Ordering other(Ordering o) {
    return o == Ordering::algebraic ? Ordering::magnitude : Ordering::algebraic;
}

// Eigenvalues of a quad-precision symmetric matrix sorted like sort_eigenvalues().
std::vector<Quad> quad_sorted_eigenvalues(const QuadMatrix& G, Ordering ordering) {
    const Eigen::SelfAdjointEigenSolver<QuadMatrix> es(G, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("quad-precision eigensolver did not converge");
    std::vector<Quad> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    if (ordering == Ordering::algebraic) {
        std::stable_sort(v.begin(), v.end(), [](const Quad& a, const Quad& b) { return a > b; });
    } else {
        std::stable_sort(v.begin(), v.end(), [](const Quad& a, const Quad& b) {
            const Quad ma = abs(a), mb = abs(b);
            if (ma != mb) return ma > mb;
            return a > b;
        });
    }
    return v;
}

QuadMatrix quad_augmented_gram(const QuadMatrix& D, const QuadVector& rho) {
    const Eigen::Index m = rho.size();
    QuadMatrix Dc = QuadMatrix::Zero(m + 1, m + 1);
    Dc.bottomRightCorner(m, m) = D;
    for (Eigen::Index j = 0; j < m; ++j) Dc(0, j + 1) = Dc(j + 1, 0) = rho(j) * rho(j);
    return double_center(Dc);
}

void fill_errors(AuditReport& report) {
    report.max_relative_error = 0.0;
    for (Eigen::Index r = 0; r < report.analytic.rows(); ++r) {
        for (Eigen::Index j = 0; j < report.analytic.cols(); ++j) {
            const double s = report.analytic(r, j);
            const double err = std::abs(s - report.finite_difference(r, j)) / std::max(std::abs(s), 1.0);
            if (err > report.max_relative_error || (r == 0 && j == 0)) {
                report.max_relative_error = err;
                report.worst_eigenvalue = report.tracked[static_cast<std::size_t>(r)];
                report.worst_satellite = static_cast<std::size_t>(j) + 1;
            }
        }
    }
}

void check_step(double h) {
    if (!(h >= 1e-6 && h <= 1.0)) throw ConfigError("finite-difference step must lie in [1e-6, 1] m");
}

} // namespace

std::vector<TrialRecord> run_trials(const ScenarioGeometry& g, const NoiseModel& nm, const TrialOptions& options) {
    validate(g);
    validate(nm);
    if (options.n_trials < 1) throw ConfigError("n_trials must be at least 1");
    if (options.fault && (options.fault->sat_index < 1 || options.fault->sat_index > g.size())) {
        throw ConfigError("fault satellite index out of range");
    }

    const Vector d = true_ranges(g);
    const SquaredDistanceMatrix D = edm_from_gram(gram_from_positions(g.positions()));

    std::vector<TrialRecord> records(options.n_trials);
    auto run_one = [&](std::size_t t) {
        PseudorangeSample sample = sample_pseudoranges(d, nm, trial_seed(options.master_seed, t));
        if (options.fault) sample = inject_fault(sample, options.fault->sat_index, options.fault->bias);

        const Matrix Gc = augmented_gram(D, sample.rho);
        const Eigen::SelfAdjointEigenSolver<Matrix> es(Gc, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
        const Vector ev = sort_eigenvalues(es.eigenvalues(), options.ordering);

        TrialRecord& rec = records[t];
        rec.trial_index = t;
        rec.q = test_statistic(ev);
        rec.q_alternate = test_statistic(sort_eigenvalues(es.eigenvalues(), other(options.ordering)));
        for (std::size_t k = 0; k < 5; ++k) rec.lambda[k] = ev(static_cast<Eigen::Index>(k));
        if (options.threshold) rec.exceeded = rec.q > *options.threshold;
    };

    unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, options.n_trials));

    struct Failure {
        std::size_t trial = std::numeric_limits<std::size_t>::max();
        std::exception_ptr error;
    };
    std::vector<Failure> failures(workers);
    auto worker = [&](unsigned w) {
        for (std::size_t t = w; t < options.n_trials; t += workers) {
            try {
                run_one(t);
            } catch (...) {
                failures[w] = {t, std::current_exception()};
                return;
            }
        }
    };

    if (workers == 1) {
        worker(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker, w);
    }

    const auto first = std::min_element(failures.begin(), failures.end(),
                                        [](const Failure& a, const Failure& b) { return a.trial < b.trial; });
    if (first != failures.end() && first->error) {
        try {
            std::rethrow_exception(first->error);
        } catch (const std::exception& e) {
            throw NumericalError("trial " + std::to_string(first->trial) + ": " + e.what());
        }
    }
    return records;
}

SimulationSummary summarize(const std::vector<TrialRecord>& records, const StatisticDistribution& dist,
                            std::optional<double> threshold) {
    if (records.size() < 2) throw ConfigError("summarize needs at least 2 trial records");

    SimulationSummary s;
    s.n_trials = records.size();
    s.ordering = dist.ordering;

    stats::RunningMoments q, q_alt;
    std::array<stats::RunningMoments, 5> lambda;
    stats::RunningCovariance cov(4);
    std::vector<double> qs;
    qs.reserve(records.size());
    std::size_t exceed = 0;

    for (const auto& r : records) {
        q.add(r.q);
        q_alt.add(r.q_alternate);
        for (std::size_t k = 0; k < 5; ++k) lambda[k].add(r.lambda[k]);
        cov.add(Eigen::Vector4d(r.lambda[0], r.lambda[3], r.lambda[4], r.lambda[3] + r.lambda[4]));
        qs.push_back(r.q);
        if (threshold && r.q > *threshold) ++exceed;
    }

    s.q_mean = q.mean();
    s.q_std = q.stddev();
    s.q_alternate_mean = q_alt.mean();
    s.q_alternate_std = q_alt.stddev();
    for (std::size_t k = 0; k < 5; ++k) {
        s.lambda_mean[k] = lambda[k].mean();
        s.lambda_var[k] = lambda[k].variance();
        s.lambda_standard_error[k] = lambda[k].standard_error();
    }
    s.correlation = cov.correlation();
    s.histogram = stats::freedman_diaconis(qs);
    s.ks_statistic = stats::ks_statistic(qs, dist.mu_q, dist.sigma_q);
    s.ks_critical_01 = stats::ks_critical_value(0.01, qs.size());
    s.ks_critical_05 = stats::ks_critical_value(0.05, qs.size());
    s.degenerate = s.q_std == 0.0;
    if (threshold) {
        s.threshold = threshold;
        s.false_alarm_rate = static_cast<double>(exceed) / static_cast<double>(records.size());
    }
    return s;
}

AuditReport matrix_perturbation_audit(const Matrix& Gc, const GramSensitivity& gs, double h, Ordering ordering,
                                      const std::vector<std::size_t>& tracked) {
    check_step(h);
    AuditReport report;
    report.h = h;
    report.tracked = tracked;
    report.analytic = eigenvalue_sensitivities(spectrum(Gc, ordering), gs, tracked).s;
    report.finite_difference.resize(report.analytic.rows(), report.analytic.cols());

    const QuadMatrix G = Gc.cast<Quad>();
    const Quad step(h);
    for (std::size_t j = 0; j < gs.size(); ++j) {
        const QuadMatrix dG = gs.dG[j].cast<Quad>();
        const auto plus = quad_sorted_eigenvalues(G + step * dG, ordering);
        const auto minus = quad_sorted_eigenvalues(G - step * dG, ordering);
        for (std::size_t r = 0; r < tracked.size(); ++r) {
            const std::size_t i = tracked[r] - 1;
            report.finite_difference(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                static_cast<double>((plus[i] - minus[i]) / (2 * step));
        }
    }
    fill_errors(report);
    return report;
}

AuditReport finite_difference_audit(const ScenarioGeometry& g, const NoiseModel& nm, double h, Ordering ordering,
                                    const std::vector<std::size_t>& tracked) {
    validate(g);
    check_step(h);

    const Vector rho = (true_ranges(g).array() + nm.effective_bias()).matrix();
    const SquaredDistanceMatrix D = edm_from_gram(gram_from_positions(g.positions()));

    AuditReport report;
    report.h = h;
    report.tracked = tracked;
    report.analytic =
        eigenvalue_sensitivities(spectrum(augmented_gram(D, rho), ordering), gram_sensitivities(rho), tracked).s;
    report.finite_difference.resize(report.analytic.rows(), report.analytic.cols());

    const QuadMatrix Dq = D.entries.cast<Quad>();
    const QuadVector rho_q = rho.cast<Quad>();
    const Quad step(h);
    for (Eigen::Index j = 0; j < rho.size(); ++j) {
        QuadVector up = rho_q, down = rho_q;
        up(j) += step;
        down(j) -= step;
        const auto plus = quad_sorted_eigenvalues(quad_augmented_gram(Dq, up), ordering);
        const auto minus = quad_sorted_eigenvalues(quad_augmented_gram(Dq, down), ordering);
        for (std::size_t r = 0; r < tracked.size(); ++r) {
            const std::size_t i = tracked[r] - 1;
            report.finite_difference(static_cast<Eigen::Index>(r), j) =
                static_cast<double>((plus[i] - minus[i]) / (2 * step));
        }
    }
    fill_errors(report);
    return report;
}

PseudorangeSample inject_fault(const PseudorangeSample& sample, std::size_t sat_index, double fault_bias) {
    if (sat_index < 1 || static_cast<Eigen::Index>(sat_index) > sample.rho.size()) {
        throw ConfigError("fault satellite index " + std::to_string(sat_index) + " out of range 1.." +
                          std::to_string(sample.rho.size()));
    }
    PseudorangeSample out = sample;
    out.rho(static_cast<Eigen::Index>(sat_index) - 1) += fault_bias;
    out.faulted = true;
    out.fault_sat = sat_index;
    out.fault_bias = fault_bias;
    return out;
}

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
    const auto prec = os.precision();
    os << "trial,q,lambda1,lambda2,lambda3,lambda4,lambda5,exceeded\n" << std::setprecision(17);
    for (const auto& r : records) {
        os << r.trial_index << ',' << r.q;
        for (double l : r.lambda) os << ',' << l;
        os << ',';
        if (r.exceeded) os << (*r.exceeded ? 1 : 0);
        os << '\n';
    }
    os.precision(prec);
}

void write_histogram_csv(std::ostream& os, const stats::Histogram& h, const StatisticDistribution& dist) {
    const auto prec = os.precision();
    os << "bin_left,bin_right,count,predicted_density\n" << std::setprecision(17);
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        const double centre = 0.5 * (h.edges[k] + h.edges[k + 1]);
        os << h.edges[k] << ',' << h.edges[k + 1] << ',' << h.counts[k] << ','
           << stats::normal_pdf(centre, dist.mu_q, dist.sigma_q) << '\n';
    }
    os.precision(prec);
}

nlohmann::json to_json(const SimulationSummary& s) {
    nlohmann::json j;
    j["n_trials"] = s.n_trials;
    j["ordering"] = to_string(s.ordering);
    j["q_mean"] = s.q_mean;
    j["q_std"] = s.q_std;
    j["q_alternate_ordering"] = {{"ordering", to_string(other(s.ordering))},
                                 {"mean", s.q_alternate_mean},
                                 {"std", s.q_alternate_std}};
    nlohmann::json lambdas = nlohmann::json::array();
    for (std::size_t k = 0; k < 5; ++k) {
        lambdas.push_back({{"index", k + 1},
                           {"mean", s.lambda_mean[k]},
                           {"variance", s.lambda_var[k]},
                           {"standard_error", s.lambda_standard_error[k]}});
    }
    j["lambda"] = lambdas;
    j["histogram"] = {{"edges", s.histogram.edges}, {"counts", s.histogram.counts}};
    j["ks"] = {{"statistic", s.ks_statistic},
               {"critical_01", s.ks_critical_01},
               {"critical_05", s.ks_critical_05},
               {"pass_01", s.ks_statistic < s.ks_critical_01},
               {"degenerate", s.degenerate}};
    j["threshold"] = s.threshold ? nlohmann::json(*s.threshold) : nlohmann::json(nullptr);
    j["false_alarm_rate"] = s.false_alarm_rate ? nlohmann::json(*s.false_alarm_rate) : nlohmann::json(nullptr);
    nlohmann::json corr = nlohmann::json::array();
    for (int r = 0; r < 4; ++r) {
        corr.push_back({s.correlation(r, 0), s.correlation(r, 1), s.correlation(r, 2), s.correlation(r, 3)});
    }
    j["correlation"] = {{"variables", {"lambda1", "lambda4", "lambda5", "lambda4+lambda5"}}, {"matrix", corr}};
    return j;
}

nlohmann::json to_json(const AuditReport& r) {
    return {{"h", r.h},
            {"max_relative_error", r.max_relative_error},
            {"worst_eigenvalue", r.worst_eigenvalue},
            {"worst_satellite", r.worst_satellite},
            {"tracked", r.tracked}};
}

} // namespace edm
