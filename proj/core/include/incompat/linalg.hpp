#pragma once

#include <complex>

#include <Eigen/Dense>

#include "incompat/errors.hpp"

namespace incompat {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Dense d x d complex Hermitian matrix, the basic algebraic object for
/// effects, states and SDP coefficient blocks.
///
/// The constructor symmetrizes its input, A <- (A + A^dag)/2, but rejects
/// matrices whose asymmetry exceeds 1e-8 * ||A||_F: that much asymmetry is a
/// caller bug, not roundoff. All entries must be finite. Instances are
/// immutable after construction and safe to share across threads.
class HermitianOperator {
public:
    explicit HermitianOperator(CMatrix m);

    static HermitianOperator identity(int dim);
    static HermitianOperator zero(int dim);

    int dim() const noexcept { return static_cast<int>(mat_.rows()); }
    const CMatrix& matrix() const noexcept { return mat_; }

    double trace() const { return mat_.trace().real(); }
    double frobenius_norm() const { return mat_.norm(); }

    HermitianOperator operator+(const HermitianOperator& rhs) const;
    HermitianOperator operator-(const HermitianOperator& rhs) const;
    HermitianOperator operator*(double s) const;
    HermitianOperator operator-() const;

    /// Wraps a matrix that is known to be exactly Hermitian (sums and real
    /// scalings of Hermitian matrices), skipping the symmetrization pass.
    static HermitianOperator trusted(CMatrix m);

private:
    struct TrustedTag {};
    HermitianOperator(CMatrix m, TrustedTag) : mat_(std::move(m)) {}

    CMatrix mat_;
};

inline HermitianOperator operator*(double s, const HermitianOperator& a) { return a * s; }

struct EigenDecomposition {
    RVector eigenvalues;  // ascending
    CMatrix eigenvectors; // columns, unitary
};

/// Full eigendecomposition A = V diag(lambda) V^dag with eigenvalues sorted
/// ascending. Throws NumericalFailure if the iteration does not converge.
EigenDecomposition hermitian_eig(const HermitianOperator& a);

/// True iff the smallest eigenvalue is >= -tol.
bool is_psd(const HermitianOperator& a, double tol);

double min_eigenvalue(const HermitianOperator& a);
double max_eigenvalue(const HermitianOperator& a);

/// Tr[A B] for Hermitian A, B. The result is real up to roundoff; the
/// imaginary residue is checked and discarded.
double frobenius_inner(const HermitianOperator& a, const HermitianOperator& b);

} // namespace incompat
