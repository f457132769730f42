#pragma once

#include <map>
#include <string>
#include <vector>

#include "incompat/povm.hpp"
#include "incompat/sdp.hpp"
#include "incompat/structure.hpp"

namespace incompat {

enum class Verdict { CompatiblePossible, StructureViolated };

std::string to_string(Verdict v);

struct SolverSummary {
    SolveStatus status = SolveStatus::NumericalLimit;
    double objective = 0.0;
    double duality_gap = 1.0;
    double feasibility_residual = 1.0;
    int iterations = 0;
    std::string message;
};

/// Feasible decomposition extracted at the optimum: per branch, the
/// (subnormalized) parent effects with sum_l G_l = p_i * I, the deterministic
/// post-processing implied by the product outcome space, and the branch
/// effects of the unconstrained measurements.
struct ParentCertificate {
    struct Branch {
        CompatPattern pattern;
        double probability = 0.0;
        /// Parent effects, outcome-tuple-major over the compatible subset.
        std::vector<HermitianOperator> parent;
        /// parent_outcomes[l][k] is the outcome assigned to subset member k
        /// when the parent fires outcome l (outcomes are 1-based).
        std::vector<std::vector<int>> parent_outcomes;
        /// Branch effects of the free measurements: x -> per-outcome operators.
        std::map<int, std::vector<HermitianOperator>> free_effects;
    };
    std::vector<Branch> branches;
};

struct RobustnessReport {
    /// Balanced noise robustness R = max sum_x q(x) eta_x.
    double robustness = 0.0;
    /// Optimal sharpness eta*_x per measurement in scope (keyed 1-based).
    std::map<int, double> sharpness;
    /// Optimal branch probability per pattern key (pins included).
    std::map<std::string, double> pattern_probs;
    Verdict verdict = Verdict::CompatiblePossible;
    SolverSummary solver;
    ParentCertificate certificate;
};

/// Verdict threshold on R: R >= 1 - kVerdictTol means no violation is
/// detectable at any noise level.
constexpr double kVerdictTol = 1e-6;

/// Maximal weighted sharpness at which the depolarized pair {M_s, M_t} still
/// admits a joint parent. Weights are the assembly's q(s), q(t) renormalized
/// over the pair.
RobustnessReport pairwise_robustness(const Assembly& a, int s, int t,
                                     const SolveOptions& opts = {});

/// Robustness of a general compatibility structure: maximize
/// sum_x q(x) eta_x over branch decompositions where each branch constrains
/// its pattern's subset to share a parent. The scope is the union of all
/// pattern indices; weights are renormalized over it, and every in-scope
/// measurement outside a branch's subset is free in that branch.
RobustnessReport structure_robustness(const Assembly& a, const StructureSpec& spec,
                                      const SolveOptions& opts = {});

/// Hyperplane for genuine n-wise incompatibility: the pairwise hull over the
/// group. A violation (weighted sharpness above R) excludes every 2-wise
/// compatibility structure, and with them all coarser ones.
RobustnessReport genuine_robustness(const Assembly& a, const std::vector<int>& group,
                                    const SolveOptions& opts = {});

/// Robustness of full joint measurability of the group (single branch).
RobustnessReport full_compat_robustness(const Assembly& a, const std::vector<int>& group,
                                        const SolveOptions& opts = {});

/// The SDPs behind the robustness operations, exposed for problem dumps and
/// cross-checking against external solvers.
SdpProblem build_structure_problem(const Assembly& a, const StructureSpec& spec);
SdpProblem build_pairwise_problem(const Assembly& a, int s, int t);

/// Closed-form genuine n-wise bound for n symmetric d-dimensional MUBs:
/// (sqrt(d) - 1) / (n (d - 1)) + (n - 1) / n.
double mub_bound(int d, int n);

/// Joint-measurability criterion for a pair of unbiased qubit binary
/// measurements with effects (I +- b.sigma)/2:
/// compatible iff ||b1 + b2|| + ||b1 - b2|| <= 2.
bool busch_pair_oracle(const Eigen::Vector3d& b1, const Eigen::Vector3d& b2);

/// Extracts b from a qubit effect (I + b.sigma)/2; rejects non-qubit or
/// biased (trace != 1) effects.
Eigen::Vector3d bloch_vector(const HermitianOperator& effect);

/// Measurement overload: both inputs must be unbiased qubit binary POVMs.
bool busch_pair_oracle(const Measurement& m1, const Measurement& m2);

/// Largest Frobenius error over scope effects when reconstructing
/// depolarize(M_x, eta*_x) from the certificate's branch operators.
double certificate_error(const RobustnessReport& report, const Assembly& a);

} // namespace incompat
