#include "edmraim/config.hpp"
#include "edmraim/errors.hpp"

#include <fstream>
#include <set>
#include <string>

namespace edm {

namespace {

Vec3 vec3_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(what + " must be a 3-element array");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

nlohmann::json vec3_to_json(const Vec3& v) {
    return nlohmann::json::array({v.x(), v.y(), v.z()});
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

} // namespace

RunConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j,
                   {"receiver", "satellites", "constellation", "sigma_v", "bias_b", "bias_inflation", "seed",
                    "n_trials", "ordering", "p_fa", "output_dir", "audit_step", "audit_tolerance", "track_all",
                    "workers"},
                   "config");

    RunConfig c;
    try {
        if (j.contains("satellites") || j.contains("receiver")) {
            if (!j.contains("satellites") || !j.contains("receiver")) {
                throw ConfigError("explicit scenario needs both 'receiver' and 'satellites'");
            }
            if (j.contains("constellation")) {
                throw ConfigError("give either 'satellites' or 'constellation', not both");
            }
            ScenarioGeometry g;
            g.receiver = vec3_from_json(j.at("receiver"), "receiver");
            for (const auto& s : j.at("satellites")) g.satellites.push_back(vec3_from_json(s, "satellite"));
            c.scenario = std::move(g);
        } else if (j.contains("constellation")) {
            const auto& cj = j.at("constellation");
            reject_unknown(cj, {"n_sats", "elevation_mask_deg", "orbit_radius", "seed"}, "constellation");
            ConstellationParams p;
            const auto n = cj.value("n_sats", static_cast<std::int64_t>(p.n_sats));
            if (n < 0) throw ConfigError("n_sats must be non-negative");
            p.n_sats = static_cast<std::size_t>(n);
            p.elevation_mask_deg = cj.value("elevation_mask_deg", p.elevation_mask_deg);
            p.orbit_radius = cj.value("orbit_radius", p.orbit_radius);
            p.seed = cj.value("seed", p.seed);
            c.scenario = p;
        }
        c.noise.sigma_v = j.value("sigma_v", c.noise.sigma_v);
        c.noise.bias_b = j.value("bias_b", c.noise.bias_b);
        c.noise.bias_inflation = j.value("bias_inflation", c.noise.bias_inflation);
        c.master_seed = j.value("seed", c.master_seed);
        c.n_trials = j.value("n_trials", c.n_trials);
        if (j.contains("ordering")) c.ordering = parse_ordering(j.at("ordering").get<std::string>());
        c.p_fa = j.value("p_fa", c.p_fa);
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        c.audit_step = j.value("audit_step", c.audit_step);
        c.audit_tolerance = j.value("audit_tolerance", c.audit_tolerance);
        c.track_all = j.value("track_all", c.track_all);
        c.workers = j.value("workers", c.workers);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return config_from_json(nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
}

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    if (const auto* g = std::get_if<ScenarioGeometry>(&c.scenario)) {
        j["receiver"] = vec3_to_json(g->receiver);
        j["satellites"] = nlohmann::json::array();
        for (const auto& s : g->satellites) j["satellites"].push_back(vec3_to_json(s));
    } else {
        const auto& p = std::get<ConstellationParams>(c.scenario);
        j["constellation"] = {{"n_sats", p.n_sats},
                              {"elevation_mask_deg", p.elevation_mask_deg},
                              {"orbit_radius", p.orbit_radius},
                              {"seed", p.seed}};
    }
    j["sigma_v"] = c.noise.sigma_v;
    j["bias_b"] = c.noise.bias_b;
    j["bias_inflation"] = c.noise.bias_inflation;
    j["seed"] = c.master_seed;
    j["n_trials"] = c.n_trials;
    j["ordering"] = to_string(c.ordering);
    j["p_fa"] = c.p_fa;
    j["output_dir"] = c.output_dir.string();
    j["audit_step"] = c.audit_step;
    j["audit_tolerance"] = c.audit_tolerance;
    j["track_all"] = c.track_all;
    // workers is left out: it never changes results, and outputs must not depend on it.
    return j;
}

void validate(const RunConfig& c) {
    if (c.n_trials < 1) throw ConfigError("n_trials must be at least 1");
    if (!(c.p_fa > 0.0 && c.p_fa < 0.5)) throw ConfigError("p_fa must lie in (0, 0.5)");
    if (!(c.audit_step >= 1e-6 && c.audit_step <= 1.0)) throw ConfigError("audit_step must lie in [1e-6, 1] m");
    if (!(c.audit_tolerance > 0.0)) throw ConfigError("audit_tolerance must be positive");
    validate(c.noise);
}

ScenarioGeometry resolve_scenario(const RunConfig& c) {
    if (const auto* g = std::get_if<ScenarioGeometry>(&c.scenario)) {
        validate(*g);
        return *g;
    }
    return generate_constellation(std::get<ConstellationParams>(c.scenario));
}

} // namespace edm
