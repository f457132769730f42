#include "incompat/witness.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace incompat {

namespace {

SolverSummary summarize(const SdpSolution& sol) {
    return SolverSummary{sol.status,   sol.objective,  sol.duality_gap,
                         sol.feasibility_residual, sol.iterations, sol.message};
}

void require_optimal(const SdpSolution& sol, const std::string& what) {
    if (sol.status != SolveStatus::Optimal) {
        throw NumericalFailure(what + ": solver returned " + to_string(sol.status) +
                                   " (" + sol.message + ")",
                               sol.feasibility_residual);
    }
}

Verdict verdict_for(double r) {
    return r >= 1.0 - kVerdictTol ? Verdict::CompatiblePossible : Verdict::StructureViolated;
}

/// eta-coefficient of the depolarized effect: M^eta = eta*K + T with
/// K = M - Tr[M] I/d and T = Tr[M] I/d.
HermitianOperator eta_coefficient(const HermitianOperator& effect) {
    const int d = effect.dim();
    return effect - HermitianOperator::identity(d) * (effect.trace() / d);
}

HermitianOperator noise_floor(const HermitianOperator& effect) {
    const int d = effect.dim();
    return HermitianOperator::identity(d) * (effect.trace() / d);
}

int check_index(const Assembly& a, int x, const std::string& what) {
    if (x < 1 || x > a.size()) {
        throw InvalidArgument(what + ": measurement index " + std::to_string(x) +
                              " outside 1.." + std::to_string(a.size()));
    }
    return x;
}

// Layout of one branch's variables inside the structure SDP.
struct BranchLayout {
    const CompatPattern* pattern = nullptr;
    std::string key;
    std::vector<int> subset;                      // sorted
    std::vector<int> parent_blocks;               // outcome-tuple-major
    std::vector<std::vector<int>> parent_outcomes;
    std::map<int, std::vector<int>> free_blocks;  // x -> per-outcome blocks
    int p_scalar = -1;
};

std::vector<std::vector<int>> outcome_tuples(const Assembly& a, const std::vector<int>& subset) {
    std::vector<std::vector<int>> tuples;
    std::vector<int> counts;
    long total = 1;
    for (int x : subset) {
        counts.push_back(a.measurement(x).outcomes());
        total *= counts.back();
    }
    std::vector<int> cur(subset.size(), 1);
    for (long i = 0; i < total; ++i) {
        tuples.push_back(cur);
        for (int k = static_cast<int>(subset.size()) - 1; k >= 0; --k) {
            if (++cur[k] <= counts[k]) break;
            cur[k] = 1;
        }
    }
    return tuples;
}

} // namespace

std::string to_string(Verdict v) {
    return v == Verdict::CompatiblePossible ? "CompatiblePossible" : "StructureViolated";
}

namespace {

struct StructureBuild {
    SdpProblem problem;
    std::vector<BranchLayout> branches;
    std::map<int, int> eta; // x -> scalar index
    std::vector<int> scope;
};

StructureBuild build_structure(const Assembly& a, const StructureSpec& spec) {
    if (spec.patterns.empty()) {
        throw InvalidArgument("structure_robustness: empty pattern list");
    }
    // v1 restriction: one compatible subset per pattern.
    for (const auto& pat : spec.patterns) {
        if (pat.compatible_subsets.size() != 1) {
            throw UnsupportedFeature(
                "structure_robustness: multi-subset patterns are representable but not "
                "supported by the v1 builder (pattern " + pat.key() + ")");
        }
    }
    // Pins must reference known patterns; an all-zero pinning leaves an empty hull.
    {
        std::set<std::string> keys;
        for (const auto& pat : spec.patterns) keys.insert(pat.key());
        if (keys.size() != spec.patterns.size()) {
            throw InvalidArgument("structure_robustness: duplicate pattern in spec");
        }
        for (const auto& [key, prob] : spec.pins) {
            if (!keys.count(key)) {
                throw InvalidArgument("structure_robustness: pin references unknown pattern " + key);
            }
            if (!(prob >= 0.0 && prob <= 1.0)) {
                throw InvalidArgument("structure_robustness: pin outside [0, 1]");
            }
        }
        std::size_t pinned = spec.pins.size();
        if (pinned == spec.patterns.size()) {
            bool all_zero = true;
            for (const auto& [key, prob] : spec.pins) all_zero &= (prob == 0.0);
            if (all_zero) {
                throw InvalidArgument(
                    "structure_robustness: all patterns pinned to 0, the hull is empty "
                    "(infeasible by construction)");
            }
            throw InvalidArgument("structure_robustness: no unpinned pattern in spec");
        }
    }

    // Scope: union of all indices the spec mentions.
    std::set<int> scope_set;
    for (const auto& pat : spec.patterns) {
        for (int x : pat.compatible_subsets[0]) scope_set.insert(check_index(a, x, "structure_robustness"));
        for (int x : pat.free_indices) scope_set.insert(check_index(a, x, "structure_robustness"));
    }
    const std::vector<int> scope(scope_set.begin(), scope_set.end());
    double qsum = 0.0;
    for (int x : scope) qsum += a.weight(x);
    if (qsum < 1e-12) {
        throw InvalidArgument("structure_robustness: zero total weight on the structure scope");
    }

    const int d = a.dim();
    const HermitianOperator identity = HermitianOperator::identity(d);
    StructureBuild out;
    out.scope = scope;
    SdpProblem& p = out.problem;

    std::map<int, int>& eta = out.eta;
    for (int x : scope) eta[x] = p.add_scalar("eta[" + std::to_string(x) + "]", 0.0, 1.0);

    std::vector<BranchLayout>& branches = out.branches;
    for (const auto& pat : spec.patterns) {
        BranchLayout b;
        b.pattern = &pat;
        b.key = pat.key();
        b.subset = pat.compatible_subsets[0];
        const auto pin_it = spec.pins.find(b.key);
        const double lo = pin_it == spec.pins.end() ? 0.0 : pin_it->second;
        const double hi = pin_it == spec.pins.end() ? 1.0 : pin_it->second;
        b.p_scalar = p.add_scalar("p[" + b.key + "]", lo, hi);

        b.parent_outcomes = outcome_tuples(a, b.subset);
        for (std::size_t l = 0; l < b.parent_outcomes.size(); ++l) {
            b.parent_blocks.push_back(p.add_block("G[" + b.key + "][" + std::to_string(l) + "]", d));
        }
        for (int x : scope) {
            if (std::find(b.subset.begin(), b.subset.end(), x) != b.subset.end()) continue;
            std::vector<int> blocks;
            for (int ax = 1; ax <= a.measurement(x).outcomes(); ++ax) {
                blocks.push_back(p.add_block(
                    "J[" + b.key + "][" + std::to_string(x) + "][" + std::to_string(ax) + "]", d));
            }
            b.free_blocks[x] = std::move(blocks);
        }
        branches.push_back(std::move(b));
    }

    // Parent normalization sum_l G_l = p_i I and free-branch normalization
    // sum_a J_{a|x} = p_i I.
    for (const auto& b : branches) {
        std::vector<std::pair<int, double>> terms;
        for (int blk : b.parent_blocks) terms.emplace_back(blk, 1.0);
        p.add_operator_equation(terms, {{b.p_scalar, -identity}}, identity * 0.0,
                                "parent-norm " + b.key);
        for (const auto& [x, blocks] : b.free_blocks) {
            std::vector<std::pair<int, double>> fterms;
            for (int blk : blocks) fterms.emplace_back(blk, 1.0);
            p.add_operator_equation(fterms, {{b.p_scalar, -identity}}, identity * 0.0,
                                    "free-norm " + b.key + " x=" + std::to_string(x));
        }
    }

    // Reconstruction: sum_i J^i_{a|x} = eta_x M_{a|x} + (1 - eta_x) Tr[M] I/d.
    for (int x : scope) {
        const Measurement& meas = a.measurement(x);
        for (int ax = 1; ax <= meas.outcomes(); ++ax) {
            std::vector<std::pair<int, double>> terms;
            for (const auto& b : branches) {
                const auto sub_it = std::find(b.subset.begin(), b.subset.end(), x);
                if (sub_it != b.subset.end()) {
                    const int pos = static_cast<int>(sub_it - b.subset.begin());
                    for (std::size_t l = 0; l < b.parent_blocks.size(); ++l) {
                        if (b.parent_outcomes[l][pos] == ax) {
                            terms.emplace_back(b.parent_blocks[l], 1.0);
                        }
                    }
                } else {
                    terms.emplace_back(b.free_blocks.at(x)[ax - 1], 1.0);
                }
            }
            const HermitianOperator& effect = meas.effect(ax - 1);
            p.add_operator_equation(terms, {{eta[x], -1.0 * eta_coefficient(effect)}},
                                    noise_floor(effect),
                                    "recon x=" + std::to_string(x) + " a=" + std::to_string(ax));
        }
    }

    // sum_i p_i = 1.
    {
        SdpProblem::Constraint c;
        for (const auto& b : branches) c.scalar_terms.push_back({b.p_scalar, 1.0});
        c.rhs = 1.0;
        c.label = "prob-norm";
        p.add_constraint(std::move(c));
    }

    for (int x : scope) p.objective_scalar.push_back({eta[x], a.weight(x) / qsum});
    return out;
}

} // namespace

SdpProblem build_structure_problem(const Assembly& a, const StructureSpec& spec) {
    return build_structure(a, spec).problem;
}

RobustnessReport structure_robustness(const Assembly& a, const StructureSpec& spec,
                                      const SolveOptions& opts) {
    StructureBuild build = build_structure(a, spec);
    const std::vector<int>& scope = build.scope;
    const std::map<int, int>& eta = build.eta;
    const std::vector<BranchLayout>& branches = build.branches;

    const SdpSolution sol = solve(build.problem, opts);
    require_optimal(sol, "structure_robustness");

    RobustnessReport report;
    report.robustness = sol.objective;
    for (int x : scope) report.sharpness[x] = sol.scalar_values[eta.at(x)];
    report.verdict = verdict_for(report.robustness);
    report.solver = summarize(sol);
    for (const auto& b : branches) {
        const double prob = sol.scalar_values[b.p_scalar];
        report.pattern_probs[b.key] = prob;
        ParentCertificate::Branch branch;
        branch.pattern = *b.pattern;
        branch.probability = prob;
        branch.parent_outcomes = b.parent_outcomes;
        for (int blk : b.parent_blocks) branch.parent.push_back(sol.block_values[blk]);
        for (const auto& [x, blocks] : b.free_blocks) {
            std::vector<HermitianOperator> ops;
            for (int blk : blocks) ops.push_back(sol.block_values[blk]);
            branch.free_effects.emplace(x, std::move(ops));
        }
        report.certificate.branches.push_back(std::move(branch));
    }
    return report;
}

namespace {

struct PairwiseBuild {
    SdpProblem problem;
    int eta_s = -1, eta_t = -1;
    std::vector<std::vector<int>> parent; // blocks, (a_s, a_t) indexed
};

PairwiseBuild build_pairwise(const Assembly& a, int s, int t) {
    check_index(a, s, "pairwise_robustness");
    check_index(a, t, "pairwise_robustness");
    if (s == t) throw InvalidArgument("pairwise_robustness: s and t must differ");

    const int d = a.dim();
    const Measurement& ms = a.measurement(s);
    const Measurement& mt = a.measurement(t);
    const double qsum = a.weight(s) + a.weight(t);
    if (qsum < 1e-12) throw InvalidArgument("pairwise_robustness: pair has zero total weight");

    PairwiseBuild out;
    SdpProblem& p = out.problem;
    out.eta_s = p.add_scalar("eta[" + std::to_string(s) + "]", 0.0, 1.0);
    out.eta_t = p.add_scalar("eta[" + std::to_string(t) + "]", 0.0, 1.0);
    auto& g = out.parent;
    g.assign(ms.outcomes(), std::vector<int>(mt.outcomes()));
    for (int as = 0; as < ms.outcomes(); ++as) {
        for (int at = 0; at < mt.outcomes(); ++at) {
            g[as][at] = p.add_block(
                "G[" + std::to_string(as + 1) + "," + std::to_string(at + 1) + "]", d);
        }
    }
    for (int as = 0; as < ms.outcomes(); ++as) {
        std::vector<std::pair<int, double>> terms;
        for (int at = 0; at < mt.outcomes(); ++at) terms.emplace_back(g[as][at], 1.0);
        p.add_operator_equation(terms, {{out.eta_s, -1.0 * eta_coefficient(ms.effect(as))}},
                                noise_floor(ms.effect(as)), "s-marg a=" + std::to_string(as + 1));
    }
    for (int at = 0; at < mt.outcomes(); ++at) {
        std::vector<std::pair<int, double>> terms;
        for (int as = 0; as < ms.outcomes(); ++as) terms.emplace_back(g[as][at], 1.0);
        p.add_operator_equation(terms, {{out.eta_t, -1.0 * eta_coefficient(mt.effect(at))}},
                                noise_floor(mt.effect(at)), "t-marg a=" + std::to_string(at + 1));
    }
    p.objective_scalar.push_back({out.eta_s, a.weight(s) / qsum});
    p.objective_scalar.push_back({out.eta_t, a.weight(t) / qsum});
    return out;
}

} // namespace

SdpProblem build_pairwise_problem(const Assembly& a, int s, int t) {
    return build_pairwise(a, s, t).problem;
}

RobustnessReport pairwise_robustness(const Assembly& a, int s, int t, const SolveOptions& opts) {
    PairwiseBuild build = build_pairwise(a, s, t);
    const Measurement& ms = a.measurement(s);
    const Measurement& mt = a.measurement(t);
    const int eta_s = build.eta_s;
    const int eta_t = build.eta_t;
    const std::vector<std::vector<int>>& g = build.parent;

    const SdpSolution sol = solve(build.problem, opts);
    require_optimal(sol, "pairwise_robustness");

    RobustnessReport report;
    report.robustness = sol.objective;
    report.sharpness[s] = sol.scalar_values[eta_s];
    report.sharpness[t] = sol.scalar_values[eta_t];
    report.verdict = verdict_for(report.robustness);
    report.solver = summarize(sol);

    CompatPattern pattern = make_pattern({std::min(s, t), std::max(s, t)}, {});
    report.pattern_probs[pattern.key()] = 1.0;
    ParentCertificate::Branch branch;
    branch.probability = 1.0;
    const std::vector<int> subset{std::min(s, t), std::max(s, t)};
    // Blocks were laid out in (a_s, a_t) order; reorder to the sorted subset.
    for (int as = 0; as < ms.outcomes(); ++as) {
        for (int at = 0; at < mt.outcomes(); ++at) {
            branch.parent.push_back(sol.block_values[g[as][at]]);
            if (s < t) {
                branch.parent_outcomes.push_back({as + 1, at + 1});
            } else {
                branch.parent_outcomes.push_back({at + 1, as + 1});
            }
        }
    }
    branch.pattern = std::move(pattern);
    report.certificate.branches.push_back(std::move(branch));
    return report;
}

RobustnessReport genuine_robustness(const Assembly& a, const std::vector<int>& group,
                                    const SolveOptions& opts) {
    return structure_robustness(a, pairwise_patterns(group), opts);
}

RobustnessReport full_compat_robustness(const Assembly& a, const std::vector<int>& group,
                                        const SolveOptions& opts) {
    if (group.size() < 2) {
        throw InvalidArgument("full_compat_robustness: group needs at least 2 indices");
    }
    return structure_robustness(a, full_pattern(group), opts);
}

double mub_bound(int d, int n) {
    if (d < 2) throw InvalidArgument("mub_bound: d must be >= 2");
    if (n < 2) throw InvalidArgument("mub_bound: n must be >= 2");
    return (std::sqrt(static_cast<double>(d)) - 1.0) / (n * (d - 1.0)) +
           (n - 1.0) / n;
}

bool busch_pair_oracle(const Eigen::Vector3d& b1, const Eigen::Vector3d& b2) {
    return (b1 + b2).norm() + (b1 - b2).norm() <= 2.0;
}

Eigen::Vector3d bloch_vector(const HermitianOperator& effect) {
    if (effect.dim() != 2) {
        throw InvalidArgument("bloch_vector: effect is not a qubit operator");
    }
    if (std::abs(effect.trace() - 1.0) > 1e-9) {
        throw InvalidArgument("bloch_vector: effect is biased (trace " +
                              std::to_string(effect.trace()) + " != 1)");
    }
    const CMatrix& m = effect.matrix();
    Eigen::Vector3d b;
    b(0) = 2.0 * m(0, 1).real();
    b(1) = -2.0 * m(0, 1).imag();
    b(2) = (m(0, 0) - m(1, 1)).real();
    return b;
}

bool busch_pair_oracle(const Measurement& m1, const Measurement& m2) {
    if (m1.dim() != 2 || m2.dim() != 2 || m1.outcomes() != 2 || m2.outcomes() != 2) {
        throw InvalidArgument("busch_pair_oracle: inputs must be qubit binary measurements");
    }
    return busch_pair_oracle(bloch_vector(m1.effect(0)), bloch_vector(m2.effect(0)));
}

double certificate_error(const RobustnessReport& report, const Assembly& a) {
    double worst = 0.0;
    for (const auto& [x, eta] : report.sharpness) {
        const Measurement noisy = depolarize(a.measurement(x), std::clamp(eta, 0.0, 1.0));
        for (int ax = 1; ax <= noisy.outcomes(); ++ax) {
            HermitianOperator acc = HermitianOperator::zero(a.dim());
            for (const auto& branch : report.certificate.branches) {
                const auto& subset = branch.pattern.compatible_subsets.at(0);
                const auto it = std::find(subset.begin(), subset.end(), x);
                if (it != subset.end()) {
                    const int pos = static_cast<int>(it - subset.begin());
                    for (std::size_t l = 0; l < branch.parent.size(); ++l) {
                        if (branch.parent_outcomes[l][pos] == ax) acc = acc + branch.parent[l];
                    }
                } else {
                    acc = acc + branch.free_effects.at(x)[ax - 1];
                }
            }
            worst = std::max(worst, (acc - noisy.effect(ax - 1)).frobenius_norm());
        }
    }
    return worst;
}

} // namespace incompat
