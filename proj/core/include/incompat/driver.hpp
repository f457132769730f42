#pragma once

#include <optional>

#include "incompat/serialize.hpp"

namespace incompat {

/// Structure spec for one configured hyperplane: the pairwise patterns over
/// its group with the row's pins applied.
StructureSpec hyperplane_structure(const ScenarioHyperplane& h);

/// Assembly with the row's weights installed: the group carries the row
/// weights (or the scenario weights renormalized over the group), everything
/// outside the group gets weight 0.
Assembly hyperplane_assembly(const Assembly& base, const ScenarioHyperplane& h);

/// Runs every configured hyperplane: solves the robustness SDP for the
/// prediction, places the sharpness at the balanced critical point (unless
/// the row fixes it), simulates counts and estimates the hyperplane value.
/// Per-row streams are derived from the scenario seed and the row index.
std::vector<SimulationRow> run_scenario_simulation(
    const Scenario& scenario, std::optional<std::int64_t> shots_override = {},
    std::optional<std::uint64_t> seed_override = {},
    std::vector<CountRecord>* records_out = nullptr);

} // namespace incompat
