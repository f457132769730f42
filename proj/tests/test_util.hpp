// Shared generators for the test suites. Everything is seeded explicitly so
// test runs are reproducible.
#pragma once

#include <cmath>
#include <ostream>
#include <random>
#include <vector>

#include "incompat/povm.hpp"

namespace testutil {

using namespace incompat;

/// Absolute-tolerance comparison usable inside doctest CHECKs (the vendored
/// doctest Approx only supports relative epsilon).
struct Near {
    double target;
    double tol;
    friend bool operator==(double value, const Near& n) {
        return std::abs(value - n.target) <= n.tol;
    }
    friend bool operator==(const Near& n, double value) { return value == n; }
    friend std::ostream& operator<<(std::ostream& os, const Near& n) {
        return os << n.target << " +- " << n.tol;
    }
};

inline Near near(double target, double tol) { return Near{target, tol}; }

inline CMatrix ginibre(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = Complex(normal(rng), normal(rng));
    }
    return m;
}

inline HermitianOperator random_hermitian(std::mt19937_64& rng, int d) {
    const CMatrix m = ginibre(rng, d, d);
    return HermitianOperator(0.5 * (m + m.adjoint()).eval());
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fixing.
inline CMatrix random_unitary(std::mt19937_64& rng, int d) {
    const CMatrix g = ginibre(rng, d, d);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        const Complex phase = r(j, j) / std::abs(r(j, j));
        q.col(j) *= phase;
    }
    return q;
}

inline Measurement random_projective(std::mt19937_64& rng, int d) {
    const CMatrix u = random_unitary(rng, d);
    std::vector<HermitianOperator> effects;
    for (int j = 0; j < d; ++j) {
        effects.push_back(HermitianOperator::trusted(u.col(j) * u.col(j).adjoint()));
    }
    return Measurement(std::move(effects));
}

/// Full-rank random POVM: normalized Wishart blocks.
inline Measurement random_povm(std::mt19937_64& rng, int d, int outcomes) {
    std::vector<CMatrix> raw;
    CMatrix total = CMatrix::Zero(d, d);
    for (int a = 0; a < outcomes; ++a) {
        const CMatrix g = ginibre(rng, d, d);
        raw.push_back(g * g.adjoint());
        total += raw.back();
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(total);
    const CMatrix inv_sqrt = es.operatorInverseSqrt();
    std::vector<HermitianOperator> effects;
    for (const auto& block : raw) {
        CMatrix e = inv_sqrt * block * inv_sqrt;
        effects.push_back(HermitianOperator(0.5 * (e + e.adjoint()).eval()));
    }
    return Measurement(std::move(effects));
}

/// Random assembly of projective (possibly depolarized) and full-rank POVMs.
inline Assembly random_assembly(std::mt19937_64& rng, int d, int m) {
    std::uniform_real_distribution<double> eta_dist(0.5, 1.0);
    std::vector<Measurement> meas;
    for (int x = 0; x < m; ++x) {
        if (x % 3 == 2) {
            meas.push_back(random_povm(rng, d, d));
        } else {
            meas.push_back(depolarize(random_projective(rng, d), eta_dist(rng)));
        }
    }
    return Assembly(std::move(meas));
}

} // namespace testutil
