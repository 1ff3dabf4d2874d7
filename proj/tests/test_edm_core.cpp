#include "edmraim/edm_core.hpp"
#include "edmraim/errors.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

using namespace edm;

namespace {

std::vector<Vec3> with_receiver(const ScenarioGeometry& g) {
    std::vector<Vec3> pts{g.receiver};
    pts.insert(pts.end(), g.satellites.begin(), g.satellites.end());
    return pts;
}

Matrix noisy_gram(const ScenarioGeometry& g, double bias, double sigma, std::uint64_t seed) {
    const auto D = edm_from_gram(gram_from_positions(g.positions()));
    NoiseModel nm;
    nm.sigma_v = sigma;
    nm.bias_b = bias;
    return augmented_gram(D, sample_pseudoranges(true_ranges(g), nm, seed).rho);
}

} // namespace

TEST(GramFromPositions, ZeroAndIdentity) {
    EXPECT_TRUE(gram_from_positions(Eigen::Matrix3Xd::Zero(3, 4)).isZero(0.0));
    EXPECT_TRUE(gram_from_positions(Eigen::Matrix3d::Identity()).isIdentity(0.0));
}

TEST(GramFromPositions, MatchesDotProductLoop) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3e7, 3e7);
    Eigen::Matrix3Xd X(3, 12);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = u(rng);
    const Matrix G = gram_from_positions(X);
    for (int i = 0; i < 12; ++i) {
        for (int j = 0; j < 12; ++j) {
            double dot = 0.0;
            for (int k = 0; k < 3; ++k) dot += X(k, i) * X(k, j);
            EXPECT_NEAR(G(i, j), dot, 1e-12 * 2.7e15);
        }
    }
    EXPECT_TRUE(G.isApprox(G.transpose()));
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(G).eigenvalues().minCoeff(), -1e-9 * G.norm());
}

TEST(EdmFromGram, ZeroAndTwoPoints) {
    EXPECT_TRUE(edm_from_gram(Matrix::Zero(4, 4)).entries.isZero(0.0));

    Eigen::Matrix3Xd X(3, 2);
    X << 0, 3, 0, 4, 0, 0;
    const auto D = edm_from_gram(gram_from_positions(X));
    Matrix expected(2, 2);
    expected << 0, 25, 25, 0;
    EXPECT_EQ(D.entries, expected);
    EXPECT_EQ(D.kind, SquaredDistanceMatrix::Kind::inter_satellite);
}

TEST(EdmFromGram, DiagonalAlwaysZero) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 20; ++trial) {
        Matrix A(7, 7);
        for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = n01(rng);
        const Matrix G = A + A.transpose();
        EXPECT_TRUE(edm_from_gram(G).entries.diagonal().isZero(0.0));
    }
}

TEST(EdmFromGram, MatchesBruteForceDistances) {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const auto g = fixtures::random_scenario(seed, 5 + seed % 10);
        const Matrix D = edm_from_gram(gram_from_positions(g.positions())).entries;
        const Matrix oracle = fixtures::brute_force_edm(g.satellites);
        EXPECT_LE((D - oracle).cwiseAbs().maxCoeff(), 1e-9 * oracle.cwiseAbs().maxCoeff()) << "seed " << seed;
        EXPECT_TRUE((D.array() >= 0).all());
        EXPECT_EQ(D, D.transpose());
    }
}

TEST(AugmentEdm, SingleEntry) {
    SquaredDistanceMatrix D;
    D.entries = Matrix::Zero(1, 1);
    const auto Dc = augment_edm(D, Vector::Constant(1, 5.0));
    Matrix expected(2, 2);
    expected << 0, 25, 25, 0;
    EXPECT_EQ(Dc.entries, expected);
    EXPECT_EQ(Dc.kind, SquaredDistanceMatrix::Kind::augmented);
}

TEST(AugmentEdm, NoiselessZeroBiasIsEdmOfAllPoints) {
    const auto g = fixtures::default_scenario();
    const auto D = edm_from_gram(gram_from_positions(g.positions()));
    const Matrix Dc = augment_edm(D, true_ranges(g)).entries;
    const Matrix oracle = fixtures::brute_force_edm(with_receiver(g));
    EXPECT_LE((Dc - oracle).cwiseAbs().maxCoeff(), 1e-9 * oracle.cwiseAbs().maxCoeff());
}

TEST(AugmentEdm, SymmetricAndBlockUntouched) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(1e7, 3e7);
    const auto g = fixtures::random_scenario(8, 9);
    const auto D = edm_from_gram(gram_from_positions(g.positions()));
    Vector rho(9);
    for (auto& r : rho) r = u(rng);
    const Matrix Dc = augment_edm(D, rho).entries;
    EXPECT_EQ(Dc, Dc.transpose());
    EXPECT_EQ(Dc(0, 0), 0.0);
    EXPECT_EQ(Dc.bottomRightCorner(9, 9), D.entries);
    for (int j = 0; j < 9; ++j) EXPECT_EQ(Dc(0, j + 1), rho(j) * rho(j));
}

TEST(AugmentEdm, RejectsMismatchAndNonPositive) {
    SquaredDistanceMatrix D;
    D.entries = Matrix::Zero(3, 3);
    EXPECT_THROW(augment_edm(D, Vector::Ones(4)), ConfigError);
    Vector rho = Vector::Ones(3);
    rho(1) = 0.0;
    EXPECT_THROW(augment_edm(D, rho), ConfigError);
}

TEST(GramCentered, ZeroInput) {
    SquaredDistanceMatrix D;
    D.entries = Matrix::Zero(5, 5);
    EXPECT_TRUE(gram_centered(D).isZero(0.0));
}

TEST(GramCentered, MatchesExplicitProjectorProduct) {
    const auto g = fixtures::default_scenario();
    const auto D = edm_from_gram(gram_from_positions(g.positions()));
    const auto Dc = augment_edm(D, (true_ranges(g).array() + 1e5).matrix());
    const Matrix oracle = fixtures::explicit_center<long double>(Dc.entries.cast<long double>()).cast<double>();
    const Matrix G = gram_centered(Dc);
    EXPECT_LE((G - oracle).norm(), 1e-13 * oracle.norm());
}

TEST(GramCentered, NoiselessZeroBiasHasRankThree) {
    const auto g = fixtures::default_scenario();
    const auto D = edm_from_gram(gram_from_positions(g.positions()));
    const Vector ev = sorted_eigenvalues(augmented_gram(D, true_ranges(g)), Ordering::algebraic);
    EXPECT_LE(count_nonzero(ev), 3u);
    EXPECT_EQ(count_nonzero(ev), 3u);
}

TEST(CenteringMatrix, Idempotent) {
    for (Eigen::Index n : {2, 5, 13, 20}) {
        const Matrix J = centering_matrix(n);
        EXPECT_LE((J * J - J).norm(), 1e-14);
        EXPECT_LE((J * Vector::Ones(n)).norm(), 1e-14);
    }
}

TEST(Spectrum, IdentityMatrix) {
    const auto s = spectrum(Matrix::Identity(4, 4), Ordering::algebraic);
    EXPECT_TRUE(s.eigenvalues.isOnes(1e-15));
    EXPECT_TRUE((s.eigenvectors.transpose() * s.eigenvectors).isIdentity(1e-12));
}

TEST(Spectrum, Orderings) {
    const Matrix A = Eigen::Vector3d(5, -2, 1).asDiagonal();
    EXPECT_EQ(spectrum(A, Ordering::algebraic).eigenvalues, Eigen::Vector3d(5, 1, -2));
    EXPECT_EQ(spectrum(A, Ordering::magnitude).eigenvalues, Eigen::Vector3d(5, -2, 1));
    EXPECT_EQ(sorted_eigenvalues(A, Ordering::magnitude), Eigen::Vector3d(5, -2, 1));
}

TEST(Spectrum, ReconstructionAndInvariants) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto g = fixtures::random_scenario(seed, 12);
        const Matrix G = noisy_gram(g, 1e5, 3.0, seed);
        for (Ordering o : {Ordering::algebraic, Ordering::magnitude}) {
            const auto s = spectrum(G, o);
            const Matrix rebuilt = s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.transpose();
            EXPECT_LE((rebuilt - G).norm(), 1e-6 * G.norm());
            EXPECT_LE((s.eigenvectors.transpose() * s.eigenvectors - Matrix::Identity(13, 13)).cwiseAbs().maxCoeff(),
                      1e-9);
            const double floor = 64 * std::numeric_limits<double>::epsilon() * G.norm();
            for (Eigen::Index k = 0; k < 13; ++k) {
                const auto z = s.eigenvectors.col(k);
                const double lam = s.eigenvalues(k);
                EXPECT_LE((G * z - lam * z).norm(), 1e-6 * std::max(1.0, std::abs(lam)) + floor);
                Eigen::Index imax = 0;
                z.cwiseAbs().maxCoeff(&imax);
                EXPECT_GT(z(imax), 0.0);
            }
        }
    }
}

TEST(Spectrum, RejectsNonFinite) {
    Matrix A = Matrix::Identity(3, 3);
    A(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(spectrum(A, Ordering::algebraic), NumericalError);
    EXPECT_THROW(sorted_eigenvalues(A, Ordering::algebraic), NumericalError);
}

TEST(Spectrum, ReproducibleSigns) {
    const Matrix G = noisy_gram(fixtures::default_scenario(), 1e5, 3.0, 1);
    const auto a = spectrum(G, Ordering::magnitude);
    const auto b = spectrum(G, Ordering::magnitude);
    EXPECT_EQ(a.eigenvectors, b.eigenvectors);
}

TEST(TestStatistic, Arithmetic) {
    Vector ev(7);
    ev << 10, 8, 6, 1, 1, 0, 0;
    EXPECT_DOUBLE_EQ(test_statistic(ev), 0.1);
}

TEST(TestStatistic, Errors) {
    EXPECT_THROW(test_statistic(Vector::Ones(4)), NumericalError);
    Vector ev = Vector::Zero(6);
    ev(3) = 1.0;
    EXPECT_THROW(test_statistic(ev), NumericalError);
}

TEST(TestStatistic, NoiselessZeroBiasIsZero) {
    const auto g = fixtures::default_scenario();
    const auto D = edm_from_gram(gram_from_positions(g.positions()));
    for (Ordering o : {Ordering::algebraic, Ordering::magnitude}) {
        EXPECT_NEAR(test_statistic(spectrum(augmented_gram(D, true_ranges(g)), o)), 0.0, 1e-9);
    }
}

TEST(TestStatistic, ScaleInvariant) {
    const auto g = fixtures::random_scenario(4, 12);
    NoiseModel nm;
    const auto sample = sample_pseudoranges(true_ranges(g), nm, 77);
    const double q = test_statistic(sorted_eigenvalues(
        augmented_gram(edm_from_gram(gram_from_positions(g.positions())), sample.rho), Ordering::magnitude));
    for (double c : {1e-3, 0.5, 7.0}) {
        const Eigen::Matrix3Xd X = c * g.positions();
        const double qc = test_statistic(
            sorted_eigenvalues(augmented_gram(edm_from_gram(gram_from_positions(X)), c * sample.rho),
                               Ordering::magnitude));
        EXPECT_LE(fixtures::relative_error(qc, q), 1e-9) << "c = " << c;
    }
}

// Property checks over random scenarios.

TEST(GramCentered, DefaultScenarioBiasActivatesFiveEigenvalues) {
    const auto g = fixtures::default_scenario();
    const auto D = edm_from_gram(gram_from_positions(g.positions()));
    const Vector biased = (true_ranges(g).array() + 1e5).matrix();
    EXPECT_EQ(count_nonzero(sorted_eigenvalues(augmented_gram(D, biased), Ordering::magnitude)), 5u);
}

TEST(EdmCoreProperties, CenteredRowSumsVanish) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const auto g = fixtures::random_scenario(seed, 5 + seed % 11);
        const Matrix G = noisy_gram(g, 1e5 * static_cast<double>(seed % 3), 3.0, seed);
        EXPECT_LE((G * Vector::Ones(G.rows())).norm(), 1e-9 * G.norm());
        EXPECT_EQ(G, G.transpose());
    }
}

TEST(EdmCoreProperties, SatellitePermutationKeepsSpectrum) {
    std::mt19937_64 rng(99);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto g = fixtures::random_scenario(seed, 12);
        NoiseModel nm;
        const auto sample = sample_pseudoranges(true_ranges(g), nm, seed);

        std::vector<std::size_t> perm(12);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        ScenarioGeometry gp;
        gp.receiver = g.receiver;
        Vector rho_p(12);
        for (std::size_t k = 0; k < 12; ++k) {
            gp.satellites.push_back(g.satellites[perm[k]]);
            rho_p(static_cast<Eigen::Index>(k)) = sample.rho(static_cast<Eigen::Index>(perm[k]));
        }
        const Vector a = sorted_eigenvalues(
            augmented_gram(edm_from_gram(gram_from_positions(g.positions())), sample.rho), Ordering::algebraic);
        const Vector b = sorted_eigenvalues(
            augmented_gram(edm_from_gram(gram_from_positions(gp.positions())), rho_p), Ordering::algebraic);
        EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-9 * a.cwiseAbs().maxCoeff());
    }
}

TEST(EdmCoreProperties, RankCollapseAndBiasActivation) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const auto g = fixtures::random_scenario(seed, 5 + seed % 11);
        const auto D = edm_from_gram(gram_from_positions(g.positions()));
        const Vector d = true_ranges(g);
        EXPECT_EQ(count_nonzero(sorted_eigenvalues(augmented_gram(D, d), Ordering::magnitude)), 3u)
            << "seed " << seed;
        // λ5/λ1 ranges over roughly 1e-11..1e-8 with geometry at b = 1e5 m while the
        // null cluster sits near 1e-16, so the random sweep classifies at 1e-12.
        const Vector biased = (d.array() + 1e5).matrix();
        EXPECT_EQ(count_nonzero(sorted_eigenvalues(augmented_gram(D, biased), Ordering::magnitude), 1e-12), 5u)
            << "seed " << seed;
    }
}

TEST(WriteMatrixCsv, HeaderAndRows) {
    Matrix M(2, 3);
    M << 1, 2, 3, 4.5, 5, 6;
    std::ostringstream os;
    write_matrix_csv(os, M);
    EXPECT_EQ(os.str(), "0,1,2\n1,2,3\n4.5,5,6\n");
}

TEST(Ordering, ParseRoundTrip) {
    EXPECT_EQ(parse_ordering(to_string(Ordering::algebraic)), Ordering::algebraic);
    EXPECT_EQ(parse_ordering(to_string(Ordering::magnitude)), Ordering::magnitude);
    EXPECT_THROW(parse_ordering("largest"), ConfigError);
}
