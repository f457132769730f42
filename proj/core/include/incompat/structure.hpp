#pragma once

#include <map>
#include <string>
#include <vector>

#include "incompat/errors.hpp"

namespace incompat {

/// One branch of a compatibility decomposition: the listed subsets of
/// measurement indices must share a parent measurement inside the branch,
/// the free indices are only required to be valid measurements.
///
/// Measurement indices are 1-based throughout, matching scenario files,
/// reports and the CLI. v1 builders accept exactly one compatible subset per
/// pattern; multi-subset patterns are representable but rejected downstream.
struct CompatPattern {
    std::vector<std::vector<int>> compatible_subsets;
    std::vector<int> free_indices;

    /// Canonical text form, e.g. "[1,2]" or "[1,2]|[3,4]". Subset contents
    /// and the subset list are kept sorted, so equal patterns serialize
    /// byte-identically.
    std::string key() const;
};

/// Builds a canonical pattern over one subset of a group: the subset is
/// required compatible, the rest of the group stays free.
CompatPattern make_pattern(std::vector<int> subset, std::vector<int> free_indices);

/// A list of patterns spanning the decomposition, plus optional pinned
/// branch probabilities (typically 0 to exclude a branch).
struct StructureSpec {
    std::vector<CompatPattern> patterns;
    std::map<std::string, double> pins; // pattern key -> fixed probability

    /// Canonical text form; byte-identical for equal specs.
    std::string to_string() const;
};

/// One pattern per unordered pair inside the group: C(n,2) patterns, each
/// pair required compatible and the remaining group members free.
StructureSpec pairwise_patterns(std::vector<int> group);

/// A single pattern requiring the whole group to share one parent.
StructureSpec full_pattern(std::vector<int> group);

/// Returns a copy of the spec with the given pattern's probability fixed.
/// The input spec is not modified.
StructureSpec pin(const StructureSpec& spec, const CompatPattern& pattern, double prob);
StructureSpec pin(const StructureSpec& spec, const std::string& pattern_key, double prob);

/// Removes a pin; pin followed by unpin round-trips.
StructureSpec unpin(const StructureSpec& spec, const std::string& pattern_key);

} // namespace incompat
