#include "edmraim/cli.hpp"
#include "edmraim/errors.hpp"
#include "edmraim/montecarlo.hpp"
#include "edmraim/perturbation.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

namespace edm::cli {

namespace {

constexpr const char* kTool = "edm-raim";

// Runs `body`, mapping the library's exception families onto exit codes and
// naming the stage that failed.
int guarded(std::ostream& err, std::string& stage, const std::function<int()>& body) {
    try {
        return body();
    } catch (const DegenerateEigenvalueError& e) {
        err << kTool << ": " << stage << ": " << e.what() << '\n';
        return kNumericalError;
    } catch (const ConfigError& e) {
        err << kTool << ": " << stage << ": " << e.what() << '\n';
        return kConfigError;
    } catch (const NumericalError& e) {
        err << kTool << ": " << stage << ": " << e.what() << '\n';
        return kNumericalError;
    } catch (const IoError& e) {
        err << kTool << ": " << stage << ": " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        err << kTool << ": " << stage << ": unexpected error: " << e.what() << '\n';
        return kNumericalError;
    }
}

std::string provenance(const RunConfig& config) {
    return "# edm-raim config: " + to_json(config).dump() + '\n';
}

void prepare_output_dir(const RunConfig& config) {
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec || !std::filesystem::is_directory(config.output_dir)) {
        throw IoError("cannot create output directory " + config.output_dir.string() +
                      (ec ? ": " + ec.message() : std::string()));
    }
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& emit) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    emit(os);
    os.flush();
    if (!os) throw IoError("failed writing " + path.string());
}

nlohmann::json prediction_json(const RunConfig& config, const StatisticDistribution& dist, const Threshold& t) {
    nlohmann::json j = to_json(dist);
    j["threshold"] = to_json(t);
    j["config"] = to_json(config);
    return j;
}

} // namespace

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    std::string stage = "config";
    return guarded(err, stage, [&] {
        validate(config);
        prepare_output_dir(config);

        stage = "scenario";
        const ScenarioGeometry g = resolve_scenario(config);

        stage = "predict";
        PredictOptions popt;
        popt.track_all = config.track_all;
        const StatisticDistribution dist = predict_q_distribution(g, config.noise, config.ordering, popt);
        const Threshold threshold = detection_threshold(dist, config.p_fa);

        stage = "simulate";
        TrialOptions topt;
        topt.n_trials = static_cast<std::size_t>(config.n_trials);
        topt.master_seed = config.master_seed;
        topt.ordering = config.ordering;
        topt.threshold = threshold.one_sided;
        topt.workers = config.workers;
        const auto records = run_trials(g, config.noise, topt);

        stage = "summarize";
        const SimulationSummary summary = summarize(records, dist, threshold.one_sided);

        stage = "write";
        const std::string header = provenance(config);
        write_file(config.output_dir / "trials.csv", [&](std::ostream& os) {
            os << header;
            write_trials_csv(os, records);
        });
        write_file(config.output_dir / "histogram.csv", [&](std::ostream& os) {
            os << header;
            write_histogram_csv(os, summary.histogram, dist);
        });
        write_file(config.output_dir / "summary.json", [&](std::ostream& os) {
            nlohmann::json j = to_json(summary);
            j["prediction"] = to_json(dist);
            j["threshold"] = to_json(threshold);
            j["config"] = to_json(config);
            os << j.dump(2) << '\n';
        });

        std::ostringstream line;
        line << std::setprecision(6) << "q predicted mean=" << dist.mu_q << " std=" << dist.sigma_q
             << " | empirical mean=" << summary.q_mean << " std=" << summary.q_std << " | KS D=" << summary.ks_statistic
             << (summary.ks_statistic < summary.ks_critical_01 ? " (pass 1%)" : " (FAIL 1%)")
             << " | false-alarm=" << summary.false_alarm_rate.value_or(0.0) << " at p_fa=" << config.p_fa
             << " | n=" << summary.n_trials;
        out << line.str() << '\n';
        return static_cast<int>(kOk);
    });
}

int cmd_predict(const RunConfig& config, std::ostream& out, std::ostream& err) {
    std::string stage = "config";
    return guarded(err, stage, [&] {
        validate(config);
        prepare_output_dir(config);

        stage = "scenario";
        const ScenarioGeometry g = resolve_scenario(config);

        stage = "predict";
        PredictOptions popt;
        popt.track_all = config.track_all;
        const StatisticDistribution dist = predict_q_distribution(g, config.noise, config.ordering, popt);
        const Threshold threshold = detection_threshold(dist, config.p_fa);

        stage = "write";
        write_file(config.output_dir / "prediction.json", [&](std::ostream& os) {
            os << prediction_json(config, dist, threshold).dump(2) << '\n';
        });

        out << std::setprecision(6) << "mu_q=" << dist.mu_q << " sigma_q=" << dist.sigma_q
            << " threshold(p_fa=" << config.p_fa << ") one-sided=" << threshold.one_sided << " two-sided=["
            << threshold.lo << ", " << threshold.hi << "]";
        for (const auto& w : dist.validity_warnings) out << "\nwarning: " << w;
        out << '\n';
        return static_cast<int>(kOk);
    });
}

int cmd_audit(const RunConfig& config, std::ostream& out, std::ostream& err) {
    std::string stage = "config";
    return guarded(err, stage, [&] {
        validate(config);
        prepare_output_dir(config);

        stage = "scenario";
        const ScenarioGeometry g = resolve_scenario(config);

        nlohmann::json report = nlohmann::json::object();
        bool all_pass = true;
        auto check = [&](const std::string& name, double value, double tol) {
            const bool pass = std::isfinite(value) && value <= tol;
            all_pass = all_pass && pass;
            out << (pass ? "PASS " : "FAIL ") << std::left << std::setw(28) << name << std::setprecision(6)
                << " value=" << value << " tol=" << tol << '\n';
            report[name] = {{"value", value}, {"tolerance", tol}, {"pass", pass}};
        };

        stage = "finite-difference audit";
        const std::vector<std::size_t> tracked =
            config.track_all ? std::vector<std::size_t>{1, 2, 3, 4, 5} : std::vector<std::size_t>{1, 4, 5};
        const AuditReport fd = finite_difference_audit(g, config.noise, config.audit_step, config.ordering, tracked);
        check("finite_difference", fd.max_relative_error, config.audit_tolerance);

        stage = "invariant audit";
        const Vector d = true_ranges(g);
        const SquaredDistanceMatrix D = edm_from_gram(gram_from_positions(g.positions()));
        const Vector rho_nom = (d.array() + config.noise.effective_bias()).matrix();
        const Matrix Gc = augmented_gram(D, rho_nom);
        const Eigen::Index n = Gc.rows();
        check("centering_residual", (Gc * Vector::Ones(n)).norm() / Gc.norm(), 1e-9);

        const auto noisy = sample_pseudoranges(d, config.noise, trial_seed(config.master_seed, 0));
        const Matrix Gn = augmented_gram(D, noisy.rho);
        check("centering_residual_noisy", (Gn * Vector::Ones(n)).norm() / Gn.norm(), 1e-9);

        const Matrix J = centering_matrix(n);
        check("projector_idempotence", (J * J - J).norm(), 1e-12);

        double sens_residual = 0.0;
        for (const auto& dG : gram_sensitivities(rho_nom).dG) {
            const double scale = std::max(dG.norm(), 1.0);
            sens_residual = std::max({sens_residual, (dG * Vector::Ones(n)).norm() / scale,
                                      (dG - dG.transpose()).norm() / scale});
        }
        check("sensitivity_centering", sens_residual, 1e-9);

        const GramSpectrum spec = spectrum(Gc, config.ordering);
        double residual = 0.0;
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * Gc.norm();
        for (Eigen::Index k = 0; k < n; ++k) {
            const double lam = spec.eigenvalues(k);
            const double r = (Gc * spec.eigenvectors.col(k) - lam * spec.eigenvectors.col(k)).norm();
            residual = std::max(residual, r / (1e-6 * std::max(1.0, std::abs(lam)) + floor));
        }
        check("eigenpair_residual_ratio", residual, 1.0);

        const std::size_t collapsed = count_nonzero(sorted_eigenvalues(augmented_gram(D, d), config.ordering));
        check("rank_collapse_zero_bias", std::abs(static_cast<double>(collapsed) - 3.0), 0.0);
        const std::size_t active = count_nonzero(spec.eigenvalues);
        check("bias_activation", std::abs(static_cast<double>(active) - 5.0), 0.0);

        stage = "write";
        report["finite_difference_detail"] = to_json(fd);
        report["config"] = to_json(config);
        write_file(config.output_dir / "audit.json", [&](std::ostream& os) { os << report.dump(2) << '\n'; });

        out << (all_pass ? "audit: all checks passed" : "audit: FAILED") << '\n';
        return static_cast<int>(all_pass ? kOk : kAuditFailure);
    });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"EDM fault-detection statistic: nominal distribution prediction and Monte Carlo validation",
                 kTool};
    app.require_subcommand(1);

    struct Flags {
        std::string config_path;
        std::int64_t trials = 0;
        std::uint64_t seed = 0;
        double sigma = 0.0, bias = 0.0, inflate = 0.0, pfa = 0.0;
        std::string ordering;
        std::string out;
    } flags;
    std::vector<CLI::Option*> opts;

    auto add_flags = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config_path, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--trials", flags.trials, "number of Monte Carlo trials");
        sub->add_option("--seed", flags.seed, "master seed");
        sub->add_option("--sigma", flags.sigma, "pseudorange noise sigma_v [m]");
        sub->add_option("--bias", flags.bias, "receiver clock bias b [m]");
        sub->add_option("--inflate-bias", flags.inflate, "artificial bias inflation [m]");
        sub->add_option("--pfa", flags.pfa, "false-alarm probability");
        sub->add_option("--ordering", flags.ordering, "eigenvalue ordering")
            ->check(CLI::IsMember({"algebraic", "magnitude"}));
        sub->add_option("--out", flags.out, "output directory");
    };
    CLI::App* simulate = app.add_subcommand("simulate", "predict, simulate, and compare");
    CLI::App* predict = app.add_subcommand("predict", "analytic distribution and thresholds only");
    CLI::App* audit = app.add_subcommand("audit", "finite-difference and invariant audits");
    for (auto* sub : {simulate, predict, audit}) add_flags(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << kTool << ": " << e.what() << '\n' << app.help();
        return kConfigError;
    }

    CLI::App* sub = app.get_subcommands().front();
    RunConfig config;
    std::string stage = "config";
    const int rc = guarded(err, stage, [&] {
        if (!flags.config_path.empty()) config = load_config(flags.config_path);
        if (sub->count("--trials")) config.n_trials = flags.trials;
        if (sub->count("--seed")) config.master_seed = flags.seed;
        if (sub->count("--sigma")) config.noise.sigma_v = flags.sigma;
        if (sub->count("--bias")) config.noise.bias_b = flags.bias;
        if (sub->count("--inflate-bias")) config.noise.bias_inflation = flags.inflate;
        if (sub->count("--pfa")) config.p_fa = flags.pfa;
        if (sub->count("--ordering")) config.ordering = parse_ordering(flags.ordering);
        if (sub->count("--out")) config.output_dir = flags.out;
        validate(config);
        return static_cast<int>(kOk);
    });
    if (rc != kOk) return rc;

    if (sub == simulate) return cmd_simulate(config, out, err);
    if (sub == predict) return cmd_predict(config, out, err);
    return cmd_audit(config, out, err);
}

} // namespace edm::cli
