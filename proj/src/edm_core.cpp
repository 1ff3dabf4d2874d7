#include "edmraim/edm_core.hpp"
#include "edmraim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <vector>

namespace edm {

namespace {

std::vector<Eigen::Index> order_indices(const Vector& values, Ordering ordering) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    if (ordering == Ordering::algebraic) {
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values(a) > values(b); });
    } else {
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
            const double ma = std::abs(values(a)), mb = std::abs(values(b));
            if (ma != mb) return ma > mb;
            return values(a) > values(b);
        });
    }
    return idx;
}

void check_finite(const Matrix& M) {
    if (!M.allFinite()) throw NumericalError("eigensolver input contains non-finite entries");
}

} // namespace

std::string to_string(Ordering o) {
    return o == Ordering::algebraic ? "algebraic" : "magnitude";
}

Ordering parse_ordering(std::string_view s) {
    if (s == "algebraic") return Ordering::algebraic;
    if (s == "magnitude") return Ordering::magnitude;
    throw ConfigError("unknown ordering '" + std::string(s) + "' (expected algebraic|magnitude)");
}

Matrix gram_from_positions(const Eigen::Matrix3Xd& X) {
    const Eigen::Index m = X.cols();
    Matrix G(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) G(i, j) = G(j, i) = X.col(i).dot(X.col(j));
    }
    return G;
}

SquaredDistanceMatrix edm_from_gram(const Matrix& G) {
    const Vector g = G.diagonal();
    const Eigen::Index n = G.rows();
    SquaredDistanceMatrix D;
    D.kind = SquaredDistanceMatrix::Kind::inter_satellite;
    D.entries.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        D.entries(j, j) = 0.0;
        for (Eigen::Index i = 0; i < j; ++i) {
            const double gij = 0.5 * (G(i, j) + G(j, i));
            // Cancellation can leave −ulp residue for nearly coincident points.
            D.entries(i, j) = D.entries(j, i) = std::max(0.0, g(i) - 2.0 * gij + g(j));
        }
    }
    return D;
}

SquaredDistanceMatrix augment_edm(const SquaredDistanceMatrix& D, const Vector& rho) {
    const Eigen::Index m = D.size();
    if (D.entries.cols() != m || rho.size() != m) {
        throw ConfigError("augment_edm: D is " + std::to_string(D.entries.rows()) + "x" +
                          std::to_string(D.entries.cols()) + " but rho has " + std::to_string(rho.size()) +
                          " entries");
    }
    if (!(rho.array() > 0.0).all()) throw ConfigError("augment_edm: pseudoranges must be positive");

    SquaredDistanceMatrix Dc;
    Dc.kind = SquaredDistanceMatrix::Kind::augmented;
    Dc.entries = Matrix::Zero(m + 1, m + 1);
    Dc.entries.bottomRightCorner(m, m) = D.entries;
    const Vector rho2 = rho.array().square().matrix();
    Dc.entries.block(0, 1, 1, m) = rho2.transpose();
    Dc.entries.block(1, 0, m, 1) = rho2;
    return Dc;
}

Matrix centering_matrix(Eigen::Index n) {
    return Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
}

Matrix gram_centered(const SquaredDistanceMatrix& Dc) {
    Matrix G = double_center(Dc.entries);
    return 0.5 * (G + G.transpose());
}

Matrix augmented_gram(const SquaredDistanceMatrix& D, const Vector& rho) {
    return gram_centered(augment_edm(D, rho));
}

GramSpectrum spectrum(const Matrix& Gc, Ordering ordering) {
    check_finite(Gc);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(Gc);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");

    const auto idx = order_indices(es.eigenvalues(), ordering);
    GramSpectrum s;
    s.ordering = ordering;
    s.eigenvalues.resize(Gc.rows());
    s.eigenvectors.resize(Gc.rows(), Gc.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        s.eigenvalues(col) = es.eigenvalues()(idx[k]);
        Vector z = es.eigenvectors().col(idx[k]).normalized();
        Eigen::Index imax = 0;
        z.cwiseAbs().maxCoeff(&imax);
        if (z(imax) < 0.0) z = -z;
        s.eigenvectors.col(col) = z;
    }
    return s;
}

Vector sort_eigenvalues(Vector values, Ordering ordering) {
    const auto idx = order_indices(values, ordering);
    Vector out(values.size());
    for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Eigen::Index>(k)) = values(idx[k]);
    return out;
}

Vector sorted_eigenvalues(const Matrix& Gc, Ordering ordering) {
    check_finite(Gc);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(Gc, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
    return sort_eigenvalues(es.eigenvalues(), ordering);
}

double test_statistic(const Vector& ev) {
    if (ev.size() < 5) throw NumericalError("test statistic needs at least 5 eigenvalues");
    if (ev(0) == 0.0) throw NumericalError("lambda1 is zero (degenerate geometry)");
    return (ev(3) + ev(4)) / (2.0 * ev(0));
}

double test_statistic(const GramSpectrum& s) {
    return test_statistic(s.eigenvalues);
}

std::size_t count_nonzero(const Vector& eigenvalues, double rel_tol) {
    if (eigenvalues.size() == 0) return 0;
    const double scale = eigenvalues.cwiseAbs().maxCoeff();
    return static_cast<std::size_t>((eigenvalues.array().abs() > rel_tol * scale).count());
}

void write_matrix_csv(std::ostream& os, const Matrix& M) {
    const auto flags = os.flags();
    const auto prec = os.precision();
    for (Eigen::Index j = 0; j < M.cols(); ++j) os << (j ? "," : "") << j;
    os << '\n' << std::setprecision(17);
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) os << (j ? "," : "") << M(i, j);
        os << '\n';
    }
    os.flags(flags);
    os.precision(prec);
}

} // namespace edm
