#ifndef EDMRAIM_CLI_HPP
#define EDMRAIM_CLI_HPP

#include "edmraim/config.hpp"

#include <iosfwd>

namespace edm::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,     // bad flags, config file, or scenario
    kNumericalError = 3,  // degenerate eigenvalues, solver failure
    kAuditFailure = 4,    // an audit exceeded its tolerance
    kIoError = 5,         // outputs could not be written
};

/// Predict, run the Monte Carlo trials, and write trials.csv, summary.json and histogram.csv.
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Write prediction.json (distribution and thresholds) without simulating.
int cmd_predict(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Finite-difference, centering, projector and rank audits; writes audit.json.
int cmd_audit(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses `edm-raim <simulate|predict|audit> [flags]` and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace edm::cli

#endif // EDMRAIM_CLI_HPP
