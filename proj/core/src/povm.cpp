#include "incompat/povm.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace incompat {

namespace {

constexpr double kEffectPsdTol = 1e-9;
constexpr double kCompletenessTol = 1e-9;
constexpr double kDistributionTol = 1e-12;
constexpr double kDensityTol = 1e-10;

bool is_prime(int n) {
    if (n < 2) return false;
    for (int p = 2; p * p <= n; ++p) {
        if (n % p == 0) return false;
    }
    return true;
}

void check_distribution(const RVector& q, double tol, const std::string& what) {
    if (q.size() == 0) throw InvalidArgument(what + ": empty distribution");
    if (q.minCoeff() < -tol) throw InvalidArgument(what + ": negative entry");
    if (std::abs(q.sum() - 1.0) > tol) {
        throw InvalidArgument(what + ": entries sum to " + std::to_string(q.sum()) + ", not 1");
    }
}

Measurement basis_measurement(const std::vector<CVector>& vectors) {
    std::vector<HermitianOperator> effects;
    effects.reserve(vectors.size());
    for (const auto& v : vectors) {
        effects.push_back(HermitianOperator::trusted(v * v.adjoint()));
    }
    return Measurement(std::move(effects));
}

} // namespace

Ket::Ket(CVector amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.size() < 1) throw InvalidArgument("Ket: empty amplitude vector");
    if (!amps_.allFinite()) throw InvalidArgument("Ket: amplitudes must be finite");
    const double norm = amps_.norm();
    if (std::abs(norm - 1.0) > 1e-6) {
        throw InvalidArgument("Ket: vector norm " + std::to_string(norm) + " is not 1");
    }
    amps_ /= norm;
}

HermitianOperator Ket::projector() const {
    return HermitianOperator::trusted(amps_ * amps_.adjoint());
}

Measurement::Measurement(std::vector<HermitianOperator> effects) : effects_(std::move(effects)) {
    if (effects_.empty()) throw InvalidArgument("Measurement: needs at least one effect");
    dim_ = effects_.front().dim();
    CMatrix sum = CMatrix::Zero(dim_, dim_);
    for (const auto& e : effects_) {
        if (e.dim() != dim_) throw DimensionMismatch("Measurement: effects of mixed dimension");
        if (!is_psd(e, kEffectPsdTol)) {
            throw InvalidArgument("Measurement: effect is not PSD (min eigenvalue " +
                                  std::to_string(min_eigenvalue(e)) + ")");
        }
        sum += e.matrix();
    }
    const double defect = (sum - CMatrix::Identity(dim_, dim_)).norm();
    if (defect > kCompletenessTol) {
        throw InvalidArgument("Measurement: effects sum to identity with Frobenius defect " +
                              std::to_string(defect));
    }
}

Assembly::Assembly(std::vector<Measurement> measurements)
    : measurements_(std::move(measurements)) {
    if (measurements_.empty()) throw InvalidArgument("Assembly: needs at least one measurement");
    const int m = static_cast<int>(measurements_.size());
    weights_ = RVector::Constant(m, 1.0 / m);
    priors_.reserve(m);
    for (const auto& meas : measurements_) {
        priors_.push_back(RVector::Constant(meas.outcomes(), 1.0 / meas.outcomes()));
    }
    validate();
}

Assembly::Assembly(std::vector<Measurement> measurements, RVector weights,
                   std::vector<RVector> outcome_priors)
    : measurements_(std::move(measurements)),
      weights_(std::move(weights)),
      priors_(std::move(outcome_priors)) {
    validate();
}

void Assembly::validate() const {
    if (measurements_.empty()) throw InvalidArgument("Assembly: needs at least one measurement");
    const int d = measurements_.front().dim();
    for (const auto& meas : measurements_) {
        if (meas.dim() != d) throw DimensionMismatch("Assembly: measurements of mixed dimension");
    }
    if (weights_.size() != static_cast<Eigen::Index>(measurements_.size())) {
        throw InvalidArgument("Assembly: weight vector length does not match measurement count");
    }
    check_distribution(weights_, kDistributionTol, "Assembly weights q(x)");
    if (priors_.size() != measurements_.size()) {
        throw InvalidArgument("Assembly: outcome prior count does not match measurement count");
    }
    for (std::size_t x = 0; x < priors_.size(); ++x) {
        if (priors_[x].size() != measurements_[x].outcomes()) {
            throw InvalidArgument("Assembly: outcome prior length mismatch at x=" +
                                  std::to_string(x + 1));
        }
        check_distribution(priors_[x], kDistributionTol, "Assembly priors q(a|x)");
    }
}

const Measurement& Assembly::measurement(int x) const {
    if (x < 1 || x > size()) throw InvalidArgument("Assembly: measurement index out of range");
    return measurements_[x - 1];
}

double Assembly::weight(int x) const {
    if (x < 1 || x > size()) throw InvalidArgument("Assembly: measurement index out of range");
    return weights_(x - 1);
}

double Assembly::outcome_prior(int x, int a) const {
    if (x < 1 || x > size()) throw InvalidArgument("Assembly: measurement index out of range");
    if (a < 1 || a > measurements_[x - 1].outcomes()) {
        throw InvalidArgument("Assembly: outcome index out of range");
    }
    return priors_[x - 1](a - 1);
}

Ensemble::Ensemble(std::vector<HermitianOperator> states, RVector priors)
    : states_(std::move(states)), priors_(std::move(priors)) {
    if (states_.empty()) throw InvalidArgument("Ensemble: needs at least one state");
    const int d = states_.front().dim();
    for (const auto& rho : states_) {
        if (rho.dim() != d) throw DimensionMismatch("Ensemble: states of mixed dimension");
        density_operator(rho);
    }
    if (priors_.size() != static_cast<Eigen::Index>(states_.size())) {
        throw InvalidArgument("Ensemble: prior length does not match state count");
    }
    check_distribution(priors_, kDensityTol, "Ensemble priors");
}

HermitianOperator density_operator(const HermitianOperator& rho) {
    if (std::abs(rho.trace() - 1.0) > kDensityTol) {
        throw InvalidArgument("density operator: trace " + std::to_string(rho.trace()) + " is not 1");
    }
    if (!is_psd(rho, kDensityTol)) {
        throw InvalidArgument("density operator: not PSD within 1e-10");
    }
    return rho;
}

Measurement depolarize(const Measurement& m, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw InvalidArgument("depolarize: eta = " + std::to_string(eta) + " outside [0, 1]");
    }
    const int d = m.dim();
    std::vector<HermitianOperator> noisy;
    noisy.reserve(m.outcomes());
    for (const auto& e : m.effects()) {
        CMatrix blended = eta * e.matrix() +
                          ((1.0 - eta) * e.trace() / d) * CMatrix::Identity(d, d);
        noisy.push_back(HermitianOperator::trusted(std::move(blended)));
    }
    return Measurement(std::move(noisy));
}

Assembly pauli_assembly() {
    const Complex i(0.0, 1.0);
    CVector xp(2), xm(2), yp(2), ym(2), zp(2), zm(2);
    const double s = 1.0 / std::sqrt(2.0);
    xp << s, s;
    xm << s, -s;
    yp << s, i * s;
    ym << s, -i * s;
    zp << 1, 0;
    zm << 0, 1;
    std::vector<Measurement> meas;
    meas.push_back(basis_measurement({xp, xm}));
    meas.push_back(basis_measurement({yp, ym}));
    meas.push_back(basis_measurement({zp, zm}));
    return Assembly(std::move(meas));
}

Assembly mub_assembly(int d, int k) {
    if (!is_prime(d)) throw InvalidArgument("mub_assembly: d = " + std::to_string(d) + " is not prime");
    if (k < 2 || k > d + 1) {
        throw InvalidArgument("mub_assembly: k = " + std::to_string(k) + " outside [2, d+1]");
    }
    if (d == 2) {
        Assembly paulis = pauli_assembly();
        std::vector<Measurement> meas(paulis.measurements().begin(),
                                      paulis.measurements().begin() + k);
        return Assembly(std::move(meas));
    }

    std::vector<Measurement> meas;
    meas.reserve(k);

    // Computational basis first.
    std::vector<CVector> comp;
    for (int l = 0; l < d; ++l) {
        CVector v = CVector::Zero(d);
        v(l) = 1.0;
        comp.push_back(v);
    }
    meas.push_back(basis_measurement(comp));

    // Quadratic-phase bases. Exponents are reduced mod d before evaluating
    // the root of unity so phases stay exact for large j.
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (int b = 0; b + 1 < k; ++b) {
        std::vector<CVector> basis;
        for (int l = 0; l < d; ++l) {
            CVector v(d);
            for (int j = 0; j < d; ++j) {
                const int exponent = (b * j * j + j * l) % d;
                v(j) = std::polar(scale, 2.0 * std::numbers::pi * exponent / d);
            }
            basis.push_back(v);
        }
        meas.push_back(basis_measurement(basis));
    }
    return Assembly(std::move(meas));
}

Assembly set_weights(const Assembly& a, RVector weights) {
    if (weights.size() != a.size()) {
        throw InvalidArgument("set_weights: weight vector length does not match assembly");
    }
    check_distribution(weights, kDistributionTol, "set_weights q(x)");
    return Assembly(a.measurements(), std::move(weights), a.outcome_priors());
}

Ket top_eigenstate(const HermitianOperator& e) {
    const auto eig = hermitian_eig(e);
    const int d = e.dim();
    const double lam_max = eig.eigenvalues(d - 1);
    const double tol = 1e-10 * std::max(1.0, std::abs(lam_max));

    // Collect the top eigenspace, then probe it with canonical basis vectors;
    // the first basis vector with a non-vanishing projection fixes the result.
    std::vector<int> top;
    for (int j = 0; j < d; ++j) {
        if (eig.eigenvalues(j) >= lam_max - tol) top.push_back(j);
    }
    for (int i = 0; i < d; ++i) {
        CVector proj = CVector::Zero(d);
        for (int j : top) {
            proj += eig.eigenvectors.col(j) * std::conj(eig.eigenvectors(i, j));
        }
        const double norm = proj.norm();
        if (norm > 1e-8) {
            proj /= norm;
            // Canonical global phase: first sizable component real positive.
            for (int c = 0; c < d; ++c) {
                if (std::abs(proj(c)) > 1e-8) {
                    proj *= std::conj(proj(c)) / std::abs(proj(c));
                    break;
                }
            }
            return Ket(std::move(proj));
        }
    }
    throw NumericalFailure("top_eigenstate: empty top eigenspace projection", lam_max);
}

} // namespace incompat
