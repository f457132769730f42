#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "incompat/povm.hpp"

namespace incompat {

/// Finite-statistics model of the photonic runs: per-detector white noise
/// (the LED brightness knob), isotropic state-preparation error calibrated
/// to an average fidelity, and a fixed shot budget per prepared setting.
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct NoiseModel {
    /// x -> probability that a registered count is a noise photon; the
    /// measurement's effective sharpness is eta_x = 1 - rate. Only the
    /// measurements listed here are simulated.
    std::map<int, double> white_noise_rate;
    double prep_fidelity = 1.0;
    std::int64_t shots = 10000;
    std::uint64_t rng_seed = 0;

    double sharpness(int x) const { return 1.0 - white_noise_rate.at(x); }
};

/// Coincidence counts per setting: counts[x](a_true-1, a_obs-1), with every
/// row of each matrix summing to the shot budget.
struct CountRecord {
    std::int64_t shots = 0;
    std::map<int, CountMatrix> counts;

    /// CSV export, columns x,a_true,a_obs,count.
    std::string to_csv() const;
};

/// Samples outcomes for every prepared (x, a) pair: the prepared state is the
/// ensemble state mixed toward I/d to match prep_fidelity, and each count is
/// a noise photon with probability white_noise_rate[x]. Sampling streams are
/// derived per setting from (rng_seed, x, a), so records are reproducible and
/// independent of scheduling.
CountRecord simulate_counts(const Assembly& a, const std::vector<Ensemble>& e,
                            const NoiseModel& noise);

struct HyperplaneEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::map<int, double> sharpness;       // per-measurement eta-hat
    std::map<int, double> sharpness_error; // propagated binomial std errors
};

/// Estimates per-measurement sharpness from observed correct-guess
/// frequencies, eta_x = (f_x - g_x) / (fbar_x - g_x), where fbar_x is the
/// ideal sharp frequency computed from the assembly and g_x the pure-noise
/// frequency; returns the weighted sum with binomial error propagation.
/// weights maps x -> q(x) over the simulated measurements and must sum to 1.
HyperplaneEstimate estimate_hyperplane(const CountRecord& c, const Assembly& a,
                                       const std::map<int, double>& weights);

/// Mean simulated preparation fidelity over all eigenstates of the assembly,
/// estimated by overlap sampling (shots Bernoulli trials per state).
double fidelity_report(const Assembly& a, const NoiseModel& noise);

} // namespace incompat
