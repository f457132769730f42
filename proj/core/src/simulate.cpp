#include "incompat/simulate.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "incompat/qsd.hpp"

namespace incompat {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Per-setting stream: a few splitmix rounds over (seed, tag, x, a) feed a
/// standard-specified mt19937_64, so streams are portable and independent.
std::mt19937_64 derived_stream(std::uint64_t seed, std::uint64_t tag, int x, int a) {
    std::uint64_t state = seed;
    splitmix64(state);
    state ^= tag;
    splitmix64(state);
    state ^= 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(x) + 0x2545F4914F6CDD1DULL;
    splitmix64(state);
    state ^= 0xD6E8FEB86659FD93ULL * static_cast<std::uint64_t>(a) + 0xCA5A826395121157ULL;
    return std::mt19937_64(splitmix64(state));
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void validate_noise(const Assembly& a, const NoiseModel& noise) {
    if (noise.shots < 1) throw InvalidArgument("NoiseModel: shots must be >= 1");
    if (!(noise.prep_fidelity >= 0.0 && noise.prep_fidelity <= 1.0)) {
        throw InvalidArgument("NoiseModel: prep_fidelity outside [0, 1]");
    }
    const double floor = 1.0 / a.dim();
    if (noise.prep_fidelity < floor - 1e-12) {
        throw InvalidArgument("NoiseModel: prep_fidelity below 1/d = " + std::to_string(floor) +
                              " is unreachable by isotropic mixing");
    }
    if (noise.white_noise_rate.empty()) {
        throw InvalidArgument("NoiseModel: no detectors configured");
    }
    for (const auto& [x, rate] : noise.white_noise_rate) {
        if (x < 1 || x > a.size()) {
            throw InvalidArgument("NoiseModel: detector index " + std::to_string(x) +
                                  " outside 1.." + std::to_string(a.size()));
        }
        if (!(rate >= 0.0 && rate <= 1.0)) {
            throw InvalidArgument("NoiseModel: white noise rate outside [0, 1]");
        }
    }
}

double prep_mixing(const Assembly& a, double fidelity) {
    const int d = a.dim();
    return (fidelity - 1.0 / d) / (1.0 - 1.0 / d);
}

} // namespace

std::string CountRecord::to_csv() const {
    std::ostringstream out;
    out << "x,a_true,a_obs,count\n";
    for (const auto& [x, mat] : counts) {
        for (int at = 0; at < mat.rows(); ++at) {
            for (int ao = 0; ao < mat.cols(); ++ao) {
                out << x << ',' << at + 1 << ',' << ao + 1 << ',' << mat(at, ao) << '\n';
            }
        }
    }
    return out.str();
}

CountRecord simulate_counts(const Assembly& a, const std::vector<Ensemble>& e,
                            const NoiseModel& noise) {
    validate_noise(a, noise);
    if (static_cast<int>(e.size()) != a.size()) {
        throw DimensionMismatch("simulate_counts: ensemble count does not match assembly");
    }
    const int d = a.dim();
    const double lam = prep_mixing(a, noise.prep_fidelity);

    CountRecord record;
    record.shots = noise.shots;
    for (const auto& [x, rate] : noise.white_noise_rate) {
        const Measurement& meas = a.measurement(x);
        const Ensemble& ens = e[x - 1];
        if (ens.size() != meas.outcomes()) {
            throw DimensionMismatch("simulate_counts: ensemble size mismatch at x=" +
                                    std::to_string(x));
        }
        const double eta = 1.0 - rate;
        CountMatrix counts = CountMatrix::Zero(meas.outcomes(), meas.outcomes());
        for (int at = 0; at < meas.outcomes(); ++at) {
            // Outcome distribution for the prepared (x, a_true) state.
            std::vector<double> cdf(meas.outcomes());
            double acc = 0.0;
            for (int ao = 0; ao < meas.outcomes(); ++ao) {
                const double signal =
                    lam * frobenius_inner(ens.state(at), meas.effect(ao)) +
                    (1.0 - lam) * meas.effect(ao).trace() / d;
                const double prob = eta * signal + rate * meas.effect(ao).trace() / d;
                acc += prob;
                cdf[ao] = acc;
            }
            std::mt19937_64 rng = derived_stream(noise.rng_seed, 0x636F756E74ULL, x, at + 1);
            for (std::int64_t shot = 0; shot < noise.shots; ++shot) {
                const double u = uniform01(rng) * acc;
                int ao = 0;
                while (ao + 1 < meas.outcomes() && u > cdf[ao]) ++ao;
                ++counts(at, ao);
            }
        }
        record.counts.emplace(x, std::move(counts));
    }
    return record;
}

HyperplaneEstimate estimate_hyperplane(const CountRecord& c, const Assembly& a,
                                       const std::map<int, double>& weights) {
    if (c.counts.empty()) throw InvalidArgument("estimate_hyperplane: empty count record");
    if (c.shots < 1) throw InvalidArgument("estimate_hyperplane: record has no shots");
    double wsum = 0.0;
    for (const auto& [x, w] : weights) {
        if (!c.counts.count(x)) {
            throw InvalidArgument("estimate_hyperplane: no counts for weighted measurement x=" +
                                  std::to_string(x));
        }
        if (w < 0.0) throw InvalidArgument("estimate_hyperplane: negative weight");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) {
        throw InvalidArgument("estimate_hyperplane: weights sum to " + std::to_string(wsum));
    }

    const int d = a.dim();
    const std::vector<Ensemble> ideal = optimal_ensembles(a);
    HyperplaneEstimate est;
    double var = 0.0;
    for (const auto& [x, w] : weights) {
        const Measurement& meas = a.measurement(x);
        const CountMatrix& counts = c.counts.at(x);
        if (counts.rows() != meas.outcomes() || counts.cols() != meas.outcomes()) {
            throw DimensionMismatch("estimate_hyperplane: count matrix shape mismatch at x=" +
                                    std::to_string(x));
        }
        double observed = 0.0, observed_var = 0.0, ideal_sharp = 0.0, noise_freq = 0.0;
        for (int ax = 0; ax < meas.outcomes(); ++ax) {
            const double prior = a.outcome_priors()[x - 1](ax);
            const double f = static_cast<double>(counts(ax, ax)) / c.shots;
            observed += prior * f;
            observed_var += prior * prior * f * (1.0 - f) / c.shots;
            ideal_sharp += prior * frobenius_inner(ideal[x - 1].state(ax), meas.effect(ax));
            noise_freq += prior * meas.effect(ax).trace() / d;
        }
        const double denom = ideal_sharp - noise_freq;
        if (std::abs(denom) < 1e-9) {
            throw NumericalFailure("estimate_hyperplane: degenerate estimator at x=" +
                                       std::to_string(x) +
                                       " (ideal frequency equals the noise frequency)",
                                   std::abs(denom));
        }
        const double eta_hat = (observed - noise_freq) / denom;
        const double eta_err = std::sqrt(observed_var) / std::abs(denom);
        est.sharpness[x] = eta_hat;
        est.sharpness_error[x] = eta_err;
        est.value += w * eta_hat;
        var += w * w * eta_err * eta_err;
    }
    est.std_error = std::sqrt(var);
    return est;
}

double fidelity_report(const Assembly& a, const NoiseModel& noise) {
    validate_noise(a, noise);
    const int d = a.dim();
    const double lam = prep_mixing(a, noise.prep_fidelity);
    const std::vector<Ensemble> ideal = optimal_ensembles(a);

    long long successes = 0;
    long long total = 0;
    for (const auto& [x, rate] : noise.white_noise_rate) {
        const Measurement& meas = a.measurement(x);
        for (int ax = 0; ax < meas.outcomes(); ++ax) {
            // Overlap sampling: project the prepared state back onto the
            // ideal one; success probability is exactly the fidelity.
            const double overlap = lam + (1.0 - lam) / d;
            std::mt19937_64 rng = derived_stream(noise.rng_seed, 0x666964656CULL, x, ax + 1);
            for (std::int64_t shot = 0; shot < noise.shots; ++shot) {
                if (uniform01(rng) < overlap) ++successes;
            }
            total += noise.shots;
        }
    }
    return static_cast<double>(successes) / static_cast<double>(total);
}

} // namespace incompat
