#include "incompat/driver.hpp"

#include <algorithm>
#include <cmath>

namespace incompat {

StructureSpec hyperplane_structure(const ScenarioHyperplane& h) {
    StructureSpec spec = pairwise_patterns(h.group);
    for (const auto& [key, prob] : h.pins) spec = pin(spec, key, prob);
    return spec;
}

Assembly hyperplane_assembly(const Assembly& base, const ScenarioHyperplane& h) {
    if (h.group.empty()) throw ConfigError("hyperplane: empty group");
    for (int x : h.group) {
        if (x < 1 || x > base.size()) {
            throw ConfigError("hyperplane: group index " + std::to_string(x) + " outside 1.." +
                              std::to_string(base.size()));
        }
    }
    RVector weights = RVector::Zero(base.size());
    if (h.weights) {
        if (h.weights->size() != h.group.size()) {
            throw ConfigError("hyperplane: weights length does not match group");
        }
        double sum = 0.0;
        for (double w : *h.weights) sum += w;
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ConfigError("hyperplane: weights sum to " + std::to_string(sum));
        }
        for (std::size_t i = 0; i < h.group.size(); ++i) {
            weights(h.group[i] - 1) = (*h.weights)[i] / sum;
        }
    } else {
        double sum = 0.0;
        for (int x : h.group) sum += base.weight(x);
        if (sum < 1e-12) throw ConfigError("hyperplane: group has zero scenario weight");
        for (int x : h.group) weights(x - 1) = base.weight(x) / sum;
    }
    return set_weights(base, std::move(weights));
}

std::vector<SimulationRow> run_scenario_simulation(const Scenario& scenario,
                                                   std::optional<std::int64_t> shots_override,
                                                   std::optional<std::uint64_t> seed_override,
                                                   std::vector<CountRecord>* records_out) {
    const Assembly& base = scenario.require_assembly();
    if (!scenario.simulation || scenario.simulation->hyperplanes.empty()) {
        throw ConfigError("scenario: no simulation hyperplanes configured");
    }
    const ScenarioSimulation& sim = *scenario.simulation;
    const std::int64_t shots = shots_override.value_or(sim.shots);
    const std::uint64_t seed = seed_override.value_or(sim.seed);

    const std::vector<Ensemble> ensembles = optimal_ensembles(base);
    std::vector<SimulationRow> rows;
    for (std::size_t idx = 0; idx < sim.hyperplanes.size(); ++idx) {
        const ScenarioHyperplane& h = sim.hyperplanes[idx];
        const Assembly weighted = hyperplane_assembly(base, h);

        SimulationRow row;
        row.name = h.name;
        row.group = h.group;
        for (int x : h.group) row.weights.push_back(weighted.weight(x));

        const RobustnessReport prediction =
            structure_robustness(weighted, hyperplane_structure(h), scenario.solver);
        row.prediction = prediction.robustness;

        if (h.sharpness) {
            if (h.sharpness->size() != h.group.size()) {
                throw ConfigError("hyperplane: sharpness length does not match group");
            }
            row.sharpness = *h.sharpness;
        } else {
            // Balanced point on the hyperplane: eta_x = R for every x.
            row.sharpness.assign(h.group.size(), row.prediction);
        }

        NoiseModel noise;
        noise.prep_fidelity = sim.prep_fidelity;
        noise.shots = shots;
        noise.rng_seed = seed + 0x1000003ULL * idx;
        std::map<int, double> weight_map;
        for (std::size_t i = 0; i < h.group.size(); ++i) {
            const double eta = row.sharpness[i];
            if (!(eta >= 0.0 && eta <= 1.0)) {
                throw ConfigError("hyperplane: sharpness outside [0, 1]");
            }
            noise.white_noise_rate[h.group[i]] = 1.0 - eta;
            weight_map[h.group[i]] = row.weights[i];
        }

        const CountRecord record = simulate_counts(base, ensembles, noise);
        const HyperplaneEstimate est = estimate_hyperplane(record, base, weight_map);
        row.estimate = est.value;
        row.std_error = est.std_error;
        rows.push_back(std::move(row));
        if (records_out) records_out->push_back(record);
    }
    return rows;
}

} // namespace incompat
