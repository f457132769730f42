#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "incompat/linalg.hpp"
#include "test_util.hpp"

using namespace incompat;
using doctest::Approx;

namespace {

CMatrix diag2(double a, double b) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

HermitianOperator pauli_x() {
    CMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return HermitianOperator(m);
}

HermitianOperator pauli_z() {
    return HermitianOperator(diag2(1, -1));
}

} // namespace

TEST_CASE("hermitian_eig on known matrices") {
    auto id = hermitian_eig(HermitianOperator::identity(2));
    CHECK(id.eigenvalues(0) == Approx(1.0));
    CHECK(id.eigenvalues(1) == Approx(1.0));

    auto d = hermitian_eig(HermitianOperator(diag2(3, -1)));
    CHECK(d.eigenvalues(0) == Approx(-1.0)); // ascending
    CHECK(d.eigenvalues(1) == Approx(3.0));

    // char poly of ((0,1),(1,0)): lambda^2 - 1 = 0
    auto x = hermitian_eig(pauli_x());
    CHECK(x.eigenvalues(0) == Approx(-1.0));
    CHECK(x.eigenvalues(1) == Approx(1.0));
}

TEST_CASE("eigendecomposition reconstructs the input") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 25; ++trial) {
        const int d = 2 + static_cast<int>(rng() % 7);
        const HermitianOperator a = testutil::random_hermitian(rng, d);
        const auto eig = hermitian_eig(a);
        const CMatrix recon = eig.eigenvectors *
                              eig.eigenvalues.cast<Complex>().asDiagonal() *
                              eig.eigenvectors.adjoint();
        CHECK((recon - a.matrix()).norm() <= 1e-9 * a.frobenius_norm());
        CHECK((eig.eigenvectors.adjoint() * eig.eigenvectors - CMatrix::Identity(d, d)).norm() <=
              1e-10 * d);
    }
}

TEST_CASE("eigenvalues shift with A + cI") {
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> cdist(-10.0, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + static_cast<int>(rng() % 5);
        const HermitianOperator a = testutil::random_hermitian(rng, d);
        const double c = cdist(rng);
        const HermitianOperator shifted = a + HermitianOperator::identity(d) * c;
        const auto ea = hermitian_eig(a);
        const auto es = hermitian_eig(shifted);
        for (int i = 0; i < d; ++i) {
            CHECK(es.eigenvalues(i) == testutil::near(ea.eigenvalues(i) + c, 1e-10));
        }
    }
}

TEST_CASE("is_psd tolerance semantics") {
    CHECK(is_psd(HermitianOperator::identity(3), 1e-10));
    CHECK_FALSE(is_psd(HermitianOperator(diag2(1, -1e-3)), 1e-10));
    CHECK(is_psd(HermitianOperator(diag2(1, -1e-12)), 1e-10));
    CHECK_THROWS_AS(is_psd(HermitianOperator::identity(2), -1.0), InvalidArgument);
}

TEST_CASE("frobenius_inner basics") {
    CHECK(frobenius_inner(HermitianOperator::identity(2), HermitianOperator::identity(2)) ==
          Approx(2.0));
    CHECK(frobenius_inner(pauli_x(), pauli_z()) == testutil::near(0.0, 1e-14));
    CHECK(frobenius_inner(pauli_x(), pauli_x()) == Approx(2.0));
    CHECK_THROWS_AS(frobenius_inner(pauli_x(), HermitianOperator::identity(3)),
                    DimensionMismatch);
}

TEST_CASE("frobenius_inner is symmetric and bilinear") {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + static_cast<int>(rng() % 4);
        const HermitianOperator a = testutil::random_hermitian(rng, d);
        const HermitianOperator b = testutil::random_hermitian(rng, d);
        const HermitianOperator c = testutil::random_hermitian(rng, d);
        const double s = coeff(rng), t = coeff(rng);
        const double scale = a.frobenius_norm() * (b.frobenius_norm() + c.frobenius_norm()) + 1.0;
        CHECK(std::abs(frobenius_inner(a, b) - frobenius_inner(b, a)) <= 1e-12 * scale);
        CHECK(std::abs(frobenius_inner(a, b * s + c * t) -
                       (s * frobenius_inner(a, b) + t * frobenius_inner(a, c))) <= 1e-12 * scale);
    }
}

TEST_CASE("constructor symmetrizes and validates") {
    CMatrix slightly(2, 2);
    slightly << 1.0, Complex(0.5, 1e-12), Complex(0.5, -1e-12 + 1e-13), 2.0;
    const HermitianOperator h(slightly);
    CHECK((h.matrix() - h.matrix().adjoint()).norm() == 0.0);

    CMatrix bad(2, 2);
    bad << 1.0, 2.0, 3.0, 4.0; // asymmetric beyond tolerance
    CHECK_THROWS_AS(HermitianOperator{bad}, InvalidArgument);

    CMatrix nan(2, 2);
    nan << std::numeric_limits<double>::quiet_NaN(), 0, 0, 1;
    CHECK_THROWS_AS(HermitianOperator{nan}, InvalidArgument);

    CHECK_THROWS_AS(HermitianOperator{CMatrix::Zero(2, 3)}, InvalidArgument);
    CHECK_THROWS_AS(HermitianOperator{CMatrix{}}, InvalidArgument);
}
