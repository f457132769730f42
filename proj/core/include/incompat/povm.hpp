#pragma once

#include <vector>

#include "incompat/linalg.hpp"

namespace incompat {

/// Pure state |psi> of a d-level system, kept at exact unit norm. Inputs more
/// than 1e-6 away from unit norm are rejected as caller bugs.
class Ket {
public:
    explicit Ket(CVector amplitudes);

    int dim() const noexcept { return static_cast<int>(amps_.size()); }
    const CVector& amplitudes() const noexcept { return amps_; }

    /// Rank-1 density operator |psi><psi|.
    HermitianOperator projector() const;

private:
    CVector amps_;
};

/// POVM: an ordered list of PSD effects summing to the identity. Validated at
/// construction (PSD within 1e-9, completeness within 1e-9 Frobenius).
class Measurement {
public:
    explicit Measurement(std::vector<HermitianOperator> effects);

    int dim() const noexcept { return dim_; }
    int outcomes() const noexcept { return static_cast<int>(effects_.size()); }
    const HermitianOperator& effect(int a) const { return effects_.at(a); }
    const std::vector<HermitianOperator>& effects() const noexcept { return effects_; }

private:
    int dim_;
    std::vector<HermitianOperator> effects_;
};

/// A finite collection of measurements {M_{a|x}} with input weights q(x) and
/// per-measurement outcome priors q(a|x).
class Assembly {
public:
    /// Uniform q(x) and q(a|x).
    explicit Assembly(std::vector<Measurement> measurements);
    Assembly(std::vector<Measurement> measurements, RVector weights,
             std::vector<RVector> outcome_priors);

    int dim() const noexcept { return measurements_.front().dim(); }
    int size() const noexcept { return static_cast<int>(measurements_.size()); }

    /// Measurements are indexed 1..m to match scenario files and reports.
    const Measurement& measurement(int x) const;
    double weight(int x) const;
    double outcome_prior(int x, int a) const;

    const std::vector<Measurement>& measurements() const noexcept { return measurements_; }
    const RVector& weights() const noexcept { return weights_; }
    const std::vector<RVector>& outcome_priors() const noexcept { return priors_; }

private:
    void validate() const;

    std::vector<Measurement> measurements_;
    RVector weights_;
    std::vector<RVector> priors_;
};

/// A list of density operators with selection priors.
class Ensemble {
public:
    Ensemble(std::vector<HermitianOperator> states, RVector priors);

    int size() const noexcept { return static_cast<int>(states_.size()); }
    const HermitianOperator& state(int a) const { return states_.at(a); }
    double prior(int a) const { return priors_(a); }
    const std::vector<HermitianOperator>& states() const noexcept { return states_; }
    const RVector& priors() const noexcept { return priors_; }

private:
    std::vector<HermitianOperator> states_;
    RVector priors_;
};

/// White-noise map: effect M_a -> eta M_a + (1 - eta) Tr[M_a] I/d.
Measurement depolarize(const Measurement& m, double eta);

/// The three sharp Pauli measurements X, Y, Z (x = 1, 2, 3) with q(x) = 1/3
/// and q(a|x) = 1/2; outcome a = 1 is the +1 eigenprojector.
Assembly pauli_assembly();

/// k mutually unbiased bases in prime dimension d (2 <= k <= d+1), uniform
/// weights and priors. For odd primes: the computational basis followed by
/// the quadratic-phase bases <j|e^(b)_l> = w^(b j^2 + j l)/sqrt(d) for
/// b = 0..k-2 (b = 0 is the Fourier basis). For d = 2: the X, Y, Z
/// eigenbases, matching pauli_assembly element by element.
Assembly mub_assembly(int d, int k);

/// Same measurements, new input distribution.
Assembly set_weights(const Assembly& a, RVector weights);

/// Unit eigenvector of the largest eigenvalue. Degeneracies are broken
/// deterministically: the top eigenspace is probed with the canonical basis
/// vectors e_1, e_2, ... in order and the first non-vanishing projection is
/// returned, phase-fixed so its first sizable component is real positive.
Ket top_eigenstate(const HermitianOperator& e);

/// Validates a density operator (unit trace and PSD within 1e-10).
HermitianOperator density_operator(const HermitianOperator& rho);

} // namespace incompat
