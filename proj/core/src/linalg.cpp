#include "incompat/linalg.hpp"

#include <cmath>
#include <string>

namespace incompat {

namespace {
constexpr double kAsymmetryRejectTol = 1e-8;
constexpr double kImagResidueTol = 1e-12;
} // namespace

HermitianOperator::HermitianOperator(CMatrix m) : mat_(std::move(m)) {
    if (mat_.rows() < 1 || mat_.rows() != mat_.cols()) {
        throw InvalidArgument("HermitianOperator: matrix must be square with dim >= 1");
    }
    if (!mat_.allFinite()) {
        throw InvalidArgument("HermitianOperator: entries must be finite");
    }
    const double scale = mat_.norm();
    const double asym = (mat_ - mat_.adjoint()).norm();
    if (asym > kAsymmetryRejectTol * std::max(scale, 1e-300)) {
        throw InvalidArgument("HermitianOperator: input is not Hermitian (||A - A^dag||_F = " +
                              std::to_string(asym) + ", ||A||_F = " + std::to_string(scale) + ")");
    }
    CMatrix sym = 0.5 * (mat_ + mat_.adjoint());
    mat_ = std::move(sym);
}

HermitianOperator HermitianOperator::identity(int dim) {
    if (dim < 1) throw InvalidArgument("HermitianOperator::identity: dim must be >= 1");
    return HermitianOperator(CMatrix::Identity(dim, dim), TrustedTag{});
}

HermitianOperator HermitianOperator::zero(int dim) {
    if (dim < 1) throw InvalidArgument("HermitianOperator::zero: dim must be >= 1");
    return HermitianOperator(CMatrix::Zero(dim, dim), TrustedTag{});
}

HermitianOperator HermitianOperator::trusted(CMatrix m) {
    return HermitianOperator(std::move(m), TrustedTag{});
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& rhs) const {
    if (dim() != rhs.dim()) throw DimensionMismatch("HermitianOperator: dimension mismatch in +");
    return HermitianOperator(mat_ + rhs.mat_, TrustedTag{});
}

HermitianOperator HermitianOperator::operator-(const HermitianOperator& rhs) const {
    if (dim() != rhs.dim()) throw DimensionMismatch("HermitianOperator: dimension mismatch in -");
    return HermitianOperator(mat_ - rhs.mat_, TrustedTag{});
}

HermitianOperator HermitianOperator::operator*(double s) const {
    return HermitianOperator(s * mat_, TrustedTag{});
}

HermitianOperator HermitianOperator::operator-() const {
    return HermitianOperator(-mat_, TrustedTag{});
}

EigenDecomposition hermitian_eig(const HermitianOperator& a) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.matrix());
    if (solver.info() != Eigen::Success) {
        throw NumericalFailure("hermitian_eig: eigensolver did not converge", a.frobenius_norm());
    }
    return EigenDecomposition{solver.eigenvalues(), solver.eigenvectors()};
}

bool is_psd(const HermitianOperator& a, double tol) {
    if (tol < 0) throw InvalidArgument("is_psd: tol must be >= 0");
    return min_eigenvalue(a) >= -tol;
}

double min_eigenvalue(const HermitianOperator& a) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalFailure("min_eigenvalue: eigensolver did not converge", a.frobenius_norm());
    }
    return solver.eigenvalues().minCoeff();
}

double max_eigenvalue(const HermitianOperator& a) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalFailure("max_eigenvalue: eigensolver did not converge", a.frobenius_norm());
    }
    return solver.eigenvalues().maxCoeff();
}

double frobenius_inner(const HermitianOperator& a, const HermitianOperator& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("frobenius_inner: operators have different dimensions");
    }
    // Tr[A B] = sum_ij A_ij conj(B_ij) for Hermitian B.
    const Complex value = a.matrix().cwiseProduct(b.matrix().conjugate()).sum();
    const double scale = std::max(1.0, a.frobenius_norm() * b.frobenius_norm());
    if (std::abs(value.imag()) > kImagResidueTol * scale) {
        throw NumericalFailure("frobenius_inner: unexpected imaginary residue", std::abs(value.imag()));
    }
    return value.real();
}

} // namespace incompat
