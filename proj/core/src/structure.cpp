#include "incompat/structure.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace incompat {

namespace {

std::string subset_key(const std::vector<int>& subset) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (i) out << ',';
        out << subset[i];
    }
    out << ']';
    return out.str();
}

std::vector<int> sorted_unique(std::vector<int> v, const std::string& what) {
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end()) {
        throw InvalidArgument(what + ": duplicate index");
    }
    for (int i : v) {
        if (i < 1) throw InvalidArgument(what + ": indices are 1-based, got " + std::to_string(i));
    }
    return v;
}

} // namespace

std::string CompatPattern::key() const {
    std::vector<std::string> parts;
    parts.reserve(compatible_subsets.size());
    for (const auto& s : compatible_subsets) parts.push_back(subset_key(s));
    std::sort(parts.begin(), parts.end());
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += '|';
        out += parts[i];
    }
    return out;
}

CompatPattern make_pattern(std::vector<int> subset, std::vector<int> free_indices) {
    if (subset.empty()) throw InvalidArgument("CompatPattern: empty compatible subset");
    CompatPattern p;
    p.compatible_subsets.push_back(sorted_unique(std::move(subset), "CompatPattern subset"));
    p.free_indices = sorted_unique(std::move(free_indices), "CompatPattern free indices");
    std::set<int> seen(p.compatible_subsets[0].begin(), p.compatible_subsets[0].end());
    for (int i : p.free_indices) {
        if (seen.count(i)) {
            throw InvalidArgument("CompatPattern: index " + std::to_string(i) +
                                  " is both compatible and free");
        }
    }
    return p;
}

std::string StructureSpec::to_string() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        if (i) out << ';';
        out << patterns[i].key();
    }
    for (const auto& [key, prob] : pins) {
        out << ";pin " << key << '=' << prob;
    }
    return out.str();
}

StructureSpec pairwise_patterns(std::vector<int> group) {
    group = sorted_unique(std::move(group), "pairwise_patterns group");
    if (group.size() < 2) throw InvalidArgument("pairwise_patterns: group needs at least 2 indices");
    StructureSpec spec;
    for (std::size_t i = 0; i < group.size(); ++i) {
        for (std::size_t j = i + 1; j < group.size(); ++j) {
            std::vector<int> rest;
            for (std::size_t k = 0; k < group.size(); ++k) {
                if (k != i && k != j) rest.push_back(group[k]);
            }
            spec.patterns.push_back(make_pattern({group[i], group[j]}, std::move(rest)));
        }
    }
    return spec;
}

StructureSpec full_pattern(std::vector<int> group) {
    group = sorted_unique(std::move(group), "full_pattern group");
    if (group.empty()) throw InvalidArgument("full_pattern: empty group");
    StructureSpec spec;
    spec.patterns.push_back(make_pattern(std::move(group), {}));
    return spec;
}

namespace {

void check_pin_total(const StructureSpec& spec) {
    double total = 0.0;
    for (const auto& [key, prob] : spec.pins) total += prob;
    if (total > 1.0 + 1e-12) {
        throw InvalidArgument("pin: pinned probabilities sum to " + std::to_string(total) +
                              " > 1");
    }
}

} // namespace

StructureSpec pin(const StructureSpec& spec, const std::string& pattern_key, double prob) {
    if (!(prob >= 0.0 && prob <= 1.0)) {
        throw InvalidArgument("pin: probability " + std::to_string(prob) + " outside [0, 1]");
    }
    const bool known = std::any_of(spec.patterns.begin(), spec.patterns.end(),
                                   [&](const CompatPattern& p) { return p.key() == pattern_key; });
    if (!known) throw InvalidArgument("pin: unknown pattern " + pattern_key);
    StructureSpec out = spec;
    out.pins[pattern_key] = prob;
    check_pin_total(out);
    return out;
}

StructureSpec pin(const StructureSpec& spec, const CompatPattern& pattern, double prob) {
    return pin(spec, pattern.key(), prob);
}

StructureSpec unpin(const StructureSpec& spec, const std::string& pattern_key) {
    StructureSpec out = spec;
    if (out.pins.erase(pattern_key) == 0) {
        throw InvalidArgument("unpin: pattern " + pattern_key + " is not pinned");
    }
    return out;
}

} // namespace incompat
