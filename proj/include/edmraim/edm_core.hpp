#ifndef EDMRAIM_EDM_CORE_HPP
#define EDMRAIM_EDM_CORE_HPP

#include "edmraim/geometry.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <string_view>

namespace edm {

enum class Ordering { algebraic, magnitude };

std::string to_string(Ordering o);
Ordering parse_ordering(std::string_view s);

/// Relative threshold |λ| > kNonzeroTolerance·max|λ| used to call an eigenvalue non-zero.
inline constexpr double kNonzeroTolerance = 1e-9;

struct SquaredDistanceMatrix {
    enum class Kind { inter_satellite, augmented };

    Matrix entries;   // [m²]
    Kind kind = Kind::inter_satellite;

    Eigen::Index size() const { return entries.rows(); }
};

/// Eigenpairs of a centered Gram matrix, columns matched to values.
struct GramSpectrum {
    Vector eigenvalues;   // [m²], sorted per `ordering`
    Matrix eigenvectors;  // unit columns, largest-|component| entry positive
    Ordering ordering = Ordering::magnitude;
};

/// G = XᵀX for satellite positions stored as columns.
Matrix gram_from_positions(const Eigen::Matrix3Xd& X);

/// D = 1·diag(G)ᵀ − 2G + diag(G)·1ᵀ.
SquaredDistanceMatrix edm_from_gram(const Matrix& G);

/// Border D with the squared pseudoranges: row/column 0 holds ρᵢ², corner 0.
SquaredDistanceMatrix augment_edm(const SquaredDistanceMatrix& D, const Vector& rho);

/// J = I − (1/n)·11ᵀ.
Matrix centering_matrix(Eigen::Index n);

/// −½·J·D·J computed through row, column and grand means. Works for any
/// floating scalar so callers can run the same construction in extended precision.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
double_center(const Eigen::MatrixBase<Derived>& D) {
    using Scalar = typename Derived::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index n = D.rows();
    const Scalar inv_n = Scalar(1) / Scalar(n);
    const Vec row_mean = D.rowwise().sum() * inv_n;
    const Vec col_mean = D.colwise().sum().transpose() * inv_n;
    const Scalar grand = row_mean.sum() * inv_n;
    Mat G(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            G(i, j) = Scalar(-0.5) * (D(i, j) - row_mean(i) - col_mean(j) + grand);
        }
    }
    return G;
}

/// G_c = −½·J·D_c·J with J of the matrix's own dimension (m+1 for augmented input).
Matrix gram_centered(const SquaredDistanceMatrix& Dc);

/// Full eigendecomposition sorted per `ordering`; throws NumericalError on
/// non-finite input or solver failure.
GramSpectrum spectrum(const Matrix& Gc, Ordering ordering);

/// Eigenvalues only, sorted per `ordering`.
Vector sorted_eigenvalues(const Matrix& Gc, Ordering ordering);

/// Reorders algebraically sorted (any order) eigenvalues per `ordering`.
Vector sort_eigenvalues(Vector values, Ordering ordering);

/// q = (λ4 + λ5) / (2 λ1) on already-sorted eigenvalues.
double test_statistic(const Vector& sorted_eigenvalues);
double test_statistic(const GramSpectrum& s);

/// Number of eigenvalues with |λ| > rel_tol·max|λ|.
std::size_t count_nonzero(const Vector& eigenvalues, double rel_tol = kNonzeroTolerance);

/// Builds the nominal augmented Gram matrix for a scenario and pseudorange vector.
Matrix augmented_gram(const SquaredDistanceMatrix& D, const Vector& rho);

/// Row-major CSV with a header row of column indices.
void write_matrix_csv(std::ostream& os, const Matrix& M);

} // namespace edm

#endif // EDMRAIM_EDM_CORE_HPP
