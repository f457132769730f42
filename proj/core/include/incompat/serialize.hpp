#pragma once

#include <optional>
#include <string>
#include <vector>

#include "incompat/qsd.hpp"
#include "incompat/simulate.hpp"
#include "incompat/structure.hpp"
#include "incompat/witness.hpp"

namespace incompat {

/// Operator literal {"re": [[...]], "im": [[...]]} (row-major d x d arrays).
std::string operator_literal(const HermitianOperator& op);
HermitianOperator parse_operator_literal(const std::string& text);

/// Pattern mini-syntax: "pairs(1,2,3)" or "full(1,2,3)".
StructureSpec parse_structure_text(const std::string& text);

struct ScenarioHyperplane {
    std::string name;
    std::vector<int> group;
    std::optional<std::vector<double>> weights; // q over the group, sums to 1
    std::map<std::string, double> pins;
    std::optional<std::vector<double>> sharpness; // explicit eta per group member
};

struct ScenarioSimulation {
    int shots = 100000;
    std::uint64_t seed = 0;
    double prep_fidelity = 1.0;
    std::vector<ScenarioHyperplane> hyperplanes;
};

/// Parsed scenario file. The assembly is fully resolved (constructor by name
/// or explicit operator literals, with optional weights and outcome priors
/// applied); it is optional only because Scenario is default-constructible.
struct Scenario {
    std::optional<int> dimension;
    std::optional<Assembly> assembly;
    std::optional<StructureSpec> structure;
    SolveOptions solver;
    std::optional<ScenarioSimulation> simulation;

    const Assembly& require_assembly() const;
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

std::string robustness_report_json(const RobustnessReport& r, bool include_certificate);
std::string qsd_report_json(const QsdReport& r);

struct SimulationRow {
    std::string name;
    std::vector<int> group;
    std::vector<double> weights;
    double prediction = 0.0;
    std::vector<double> sharpness;
    double estimate = 0.0;
    double std_error = 0.0;
};

std::string simulation_report_json(const std::vector<SimulationRow>& rows, int shots,
                                   std::uint64_t seed);

} // namespace incompat
