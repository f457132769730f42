#pragma once

#include <vector>

#include "incompat/povm.hpp"
#include "incompat/witness.hpp"

namespace incompat {

/// Outcome of the modified state-discrimination protocol on a pair (s, t).
/// advantage > 0 certifies that {M_s, M_t} is incompatible; compatible pairs
/// give advantage <= 0 (strictly negative once noise makes the measurements
/// worse discriminators than the best fixed parent).
struct QsdReport {
    int s = 0, t = 0;
    double guessing_probability = 0.0; // P_g over the pair, weights renormalized
    double compatible_guessing = 0.0;  // P_g^C: best single POVM with post-processing
    double advantage = 0.0;            // W2 = P_g - P_g^C
    std::vector<Ensemble> ensembles;   // the two optimized ensembles, order (s, t)
    /// Discriminating POVM at the optimum; outcome z = (g_s, g_t) stored
    /// g_s-major, g_t fastest.
    std::vector<HermitianOperator> discriminating_povm;
    /// Dual witness Y >= N_z with Tr Y = compatible_guessing, reconstructed
    /// from the SDP multipliers; a solver-independent upper-bound certificate.
    HermitianOperator dual_witness = HermitianOperator::zero(1);
    SolverSummary solver;
};

/// For each (a, x): the projector onto the top eigenstate of M_{a|x}. The
/// maximization of the guessing probability decouples per (a, x), so these
/// ensembles are optimal for the given assembly.
std::vector<Ensemble> optimal_ensembles(const Assembly& a);

/// sum_{x,a} q(x) q(a|x) Tr[rho_{a|x} M_{a|x}] over the whole assembly.
double guessing_probability(const Assembly& a, const std::vector<Ensemble>& e);

/// The weighted states N_z = qt(s) q(g_s|s) rho_{g_s|s} + qt(t) q(g_t|t)
/// rho_{g_t|t} whose minimum-error discrimination value is the compatible
/// guessing probability. z is (g_s, g_t), g_t fastest.
std::vector<HermitianOperator> discrimination_operators(const Assembly& a,
                                                        const std::vector<Ensemble>& e,
                                                        int s, int t);

struct DiscriminationResult {
    double value = 0.0;
    std::vector<HermitianOperator> povm;
    HermitianOperator dual_witness = HermitianOperator::zero(1);
    SolverSummary solver;
};

/// Minimum-error discrimination of weighted states: maximize
/// sum_z <G_z, N_z> over POVMs {G_z}.
DiscriminationResult minimum_error_discrimination(const std::vector<HermitianOperator>& weighted,
                                                  const SolveOptions& opts = {});

/// Best guessing probability achievable with one fixed measurement plus
/// post-processing on the pair of ensembles (Alice measures once, answers
/// the z-component matching the announced x).
double compatible_guessing(const Assembly& a, const std::vector<Ensemble>& e, int s, int t,
                           const SolveOptions& opts = {});

/// Full report: optimal ensembles, both guessing probabilities, and the
/// witness value W2 for the pair (s, t).
QsdReport witness_w2(const Assembly& a, int s, int t, const SolveOptions& opts = {});

} // namespace incompat
