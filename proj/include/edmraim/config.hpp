#ifndef EDMRAIM_CONFIG_HPP
#define EDMRAIM_CONFIG_HPP

#include "edmraim/edm_core.hpp"
#include "edmraim/geometry.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <variant>

namespace edm {

/// Resolved settings for one CLI run. All lengths in meters.
///
/// Config file (JSON):
///   {
///     "receiver": [x, y, z],                 // with "satellites", or
///     "satellites": [[x, y, z], ...],
///     "constellation": {"n_sats": 12, "elevation_mask_deg": 10,
///                       "orbit_radius": 26560000, "seed": 1},
///     "sigma_v": 3.0, "bias_b": 1e5, "bias_inflation": 0.0,
///     "seed": 42, "n_trials": 10000, "ordering": "magnitude",
///     "p_fa": 0.01, "output_dir": "edm_out",
///     "audit_step": 1e-3, "audit_tolerance": 1e-4,
///     "track_all": false, "workers": 0
///   }
/// Every key is optional; unknown keys are rejected.
struct RunConfig {
    std::variant<ConstellationParams, ScenarioGeometry> scenario = ConstellationParams{};
    NoiseModel noise;
    std::int64_t n_trials = 10'000;
    std::uint64_t master_seed = 42;
    Ordering ordering = Ordering::magnitude;
    double p_fa = 0.01;
    std::filesystem::path output_dir = "edm_out";
    double audit_step = 1e-3;
    double audit_tolerance = 1e-4;
    bool track_all = false;
    unsigned workers = 0;
};

RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

/// Throws ConfigError on n_trials < 1, p_fa outside (0, 0.5), or an invalid noise model.
void validate(const RunConfig& c);

/// Explicit geometry from the config, or a generated constellation. Validated.
ScenarioGeometry resolve_scenario(const RunConfig& c);

} // namespace edm

#endif // EDMRAIM_CONFIG_HPP
