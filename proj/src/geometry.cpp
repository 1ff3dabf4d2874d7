#include "edmraim/geometry.hpp"
#include "edmraim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace edm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Vec3 random_direction(std::mt19937_64& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    Vec3 u;
    do {
        u = Vec3(n01(rng), n01(rng), n01(rng));
    } while (u.norm() < 1e-12);
    return u.normalized();
}

} // namespace

Eigen::Matrix3Xd ScenarioGeometry::positions() const {
    Eigen::Matrix3Xd X(3, static_cast<Eigen::Index>(satellites.size()));
    for (std::size_t j = 0; j < satellites.size(); ++j) X.col(static_cast<Eigen::Index>(j)) = satellites[j];
    return X;
}

void validate(const ScenarioGeometry& g) {
    const std::size_t m = g.size();
    if (m < 5) {
        throw GeometryError("scenario needs at least 5 satellites, got " + std::to_string(m));
    }
    if (!g.receiver.allFinite()) throw GeometryError("receiver position is not finite");
    for (std::size_t i = 0; i < m; ++i) {
        if (!g.satellites[i].allFinite()) {
            throw GeometryError("satellite " + std::to_string(i + 1) + " position is not finite");
        }
        if ((g.satellites[i] - g.receiver).norm() <= constants::kMinSeparation) {
            throw GeometryError("satellite " + std::to_string(i + 1) + " coincides with the receiver");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if ((g.satellites[i] - g.satellites[j]).norm() <= constants::kMinSeparation) {
                throw GeometryError("satellites " + std::to_string(j + 1) + " and " + std::to_string(i + 1) +
                                    " are coincident");
            }
        }
    }

    // Rank of the centered point cloud {receiver} ∪ satellites.
    Eigen::Matrix3Xd P(3, static_cast<Eigen::Index>(m + 1));
    P.col(0) = g.receiver;
    P.rightCols(static_cast<Eigen::Index>(m)) = g.positions();
    const Vec3 centroid = P.rowwise().mean();
    P.colwise() -= centroid;
    const Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(P);
    const Vec3 sv = svd.singularValues();
    if (!(sv(2) > 1e-9 * sv(0))) {
        throw GeometryError("receiver and satellites are coplanar (centered position rank < 3)");
    }
}

void validate(const NoiseModel& nm) {
    if (!(nm.sigma_v > 0.0) || !std::isfinite(nm.sigma_v)) {
        throw ConfigError("sigma_v must be positive and finite");
    }
    if (!std::isfinite(nm.bias_b) || !std::isfinite(nm.bias_inflation)) {
        throw ConfigError("bias_b and bias_inflation must be finite");
    }
}

double elevation_deg(const Vec3& receiver, const Vec3& satellite) {
    const Vec3 up = receiver.normalized();
    const Vec3 los = satellite - receiver;
    return std::asin(std::clamp(up.dot(los) / los.norm(), -1.0, 1.0)) * constants::kRadToDeg;
}

ScenarioGeometry generate_constellation(const ConstellationParams& params) {
    if (params.n_sats < 5) throw ConfigError("n_sats must be at least 5");
    if (!(params.orbit_radius > constants::kEarthRadius)) {
        throw ConfigError("orbit_radius must exceed the Earth radius");
    }
    if (!(params.elevation_mask_deg >= 0.0 && params.elevation_mask_deg < 90.0)) {
        throw ConfigError("elevation_mask must lie in [0, 90) degrees");
    }

    std::mt19937_64 rng(params.seed);
    ScenarioGeometry g;
    g.receiver = constants::kEarthRadius * random_direction(rng);

    std::size_t draws = 0;
    while (g.satellites.size() < params.n_sats) {
        if (++draws > params.max_draws) {
            throw ConfigError("constellation generation exceeded " + std::to_string(params.max_draws) +
                              " draws; elevation mask too high for " + std::to_string(params.n_sats) +
                              " satellites");
        }
        const Vec3 sat = params.orbit_radius * random_direction(rng);
        if (elevation_deg(g.receiver, sat) < params.elevation_mask_deg) continue;
        bool separated = true;
        for (const auto& other : g.satellites) {
            if ((other - sat).norm() <= constants::kMinSeparation) separated = false;
        }
        if (separated) g.satellites.push_back(sat);
    }
    validate(g);
    return g;
}

Vector true_ranges(const ScenarioGeometry& g) {
    Vector d(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) d(static_cast<Eigen::Index>(i)) = (g.satellites[i] - g.receiver).norm();
    return d;
}

PseudorangeSample sample_pseudoranges(const Vector& d, const NoiseModel& nm, std::uint64_t seed) {
    validate(nm);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, nm.sigma_v);

    PseudorangeSample s;
    s.d_true = d;
    s.b_effective = nm.effective_bias();
    Vector v(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) v(i) = noise(rng);
    s.rho = (d.array() + s.b_effective + v.array()).matrix();
    s.v = std::move(v);
    if (!(s.rho.array() > 0.0).all()) {
        throw NumericalError("non-positive pseudorange generated; bias or noise too large relative to ranges");
    }
    return s;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0xD1B54A32D192ED03ULL));
}

} // namespace edm
