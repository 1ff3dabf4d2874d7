#ifndef EDMRAIM_GEOMETRY_HPP
#define EDMRAIM_GEOMETRY_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace edm {

using Vec3 = Eigen::Vector3d;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace constants {
constexpr double kEarthRadius = 6'371'000.0;       // spherical Earth [m]
constexpr double kGpsOrbitRadius = 26'560'000.0;   // [m]
constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kRadToDeg = 180.0 / kPi;
constexpr double kMinSeparation = 1.0;             // [m]
} // namespace constants

/// Receiver and satellite positions in ECEF meters.
struct ScenarioGeometry {
    Vec3 receiver = Vec3::Zero();
    std::vector<Vec3> satellites;

    std::size_t size() const { return satellites.size(); }

    /// Satellite positions as the columns of a 3×m matrix.
    Eigen::Matrix3Xd positions() const;
};

/// Throws GeometryError unless m ≥ 5, all points are separated by more than
/// 1 m, and receiver ∪ satellites span three dimensions.
void validate(const ScenarioGeometry& g);

/// Measurement noise and the clock-bias term carried in every pseudorange.
struct NoiseModel {
    double sigma_v = 3.0;          // [m]
    double bias_b = 1.0e5;         // [m]
    double bias_inflation = 0.0;   // artificial bias added on top of bias_b [m]

    double effective_bias() const { return bias_b + bias_inflation; }
};

/// Throws ConfigError when sigma_v is not positive and finite.
void validate(const NoiseModel& nm);

struct PseudorangeSample {
    Vector rho;                 // measured pseudoranges [m]
    Vector d_true;              // geometric ranges [m]
    std::optional<Vector> v;    // noise draw, absent for field data [m]
    double b_effective = 0.0;   // [m]

    // Set by fault injection only.
    bool faulted = false;
    std::size_t fault_sat = 0;  // 1-based
    double fault_bias = 0.0;    // [m]
};

struct ConstellationParams {
    std::size_t n_sats = 12;
    double elevation_mask_deg = 10.0;
    double orbit_radius = constants::kGpsOrbitRadius;
    std::uint64_t seed = 1;
    std::size_t max_draws = 200'000;  // rejection-sampling cap
};

/// Random receiver on the Earth's surface with satellites drawn uniformly on
/// the orbit sphere and rejected below the elevation mask.
ScenarioGeometry generate_constellation(const ConstellationParams& params);

/// Elevation of `satellite` above the local horizon at `receiver` (spherical Earth), degrees.
double elevation_deg(const Vec3& receiver, const Vec3& satellite);

Vector true_ranges(const ScenarioGeometry& g);

/// rho = d + (bias_b + bias_inflation) + v with v ~ N(0, sigma_v²) i.i.d.
PseudorangeSample sample_pseudoranges(const Vector& d, const NoiseModel& nm, std::uint64_t seed);

/// Counter-based seed for trial `index` of a run; independent of execution order.
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index);

} // namespace edm

#endif // EDMRAIM_GEOMETRY_HPP
