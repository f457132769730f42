#include "incompat/qsd.hpp"

#include <cmath>
#include <string>

namespace incompat {

namespace {

void check_pair(const Assembly& a, int s, int t, const std::string& what) {
    if (s < 1 || s > a.size() || t < 1 || t > a.size()) {
        throw InvalidArgument(what + ": measurement index outside 1.." + std::to_string(a.size()));
    }
    if (s == t) throw InvalidArgument(what + ": s and t must differ");
}

} // namespace

std::vector<Ensemble> optimal_ensembles(const Assembly& a) {
    std::vector<Ensemble> out;
    out.reserve(a.size());
    for (int x = 1; x <= a.size(); ++x) {
        const Measurement& meas = a.measurement(x);
        std::vector<HermitianOperator> states;
        states.reserve(meas.outcomes());
        for (const auto& effect : meas.effects()) {
            states.push_back(top_eigenstate(effect).projector());
        }
        out.emplace_back(std::move(states), a.outcome_priors()[x - 1]);
    }
    return out;
}

double guessing_probability(const Assembly& a, const std::vector<Ensemble>& e) {
    if (static_cast<int>(e.size()) != a.size()) {
        throw DimensionMismatch("guessing_probability: ensemble count does not match assembly");
    }
    double total = 0.0;
    for (int x = 1; x <= a.size(); ++x) {
        const Measurement& meas = a.measurement(x);
        const Ensemble& ens = e[x - 1];
        if (ens.size() != meas.outcomes()) {
            throw DimensionMismatch("guessing_probability: ensemble size mismatch at x=" +
                                    std::to_string(x));
        }
        for (int ax = 0; ax < meas.outcomes(); ++ax) {
            total += a.weight(x) * ens.prior(ax) *
                     frobenius_inner(ens.state(ax), meas.effect(ax));
        }
    }
    return total;
}

std::vector<HermitianOperator> discrimination_operators(const Assembly& a,
                                                        const std::vector<Ensemble>& e,
                                                        int s, int t) {
    check_pair(a, s, t, "discrimination_operators");
    if (static_cast<int>(e.size()) != a.size()) {
        throw DimensionMismatch("discrimination_operators: ensemble count does not match assembly");
    }
    const double qsum = a.weight(s) + a.weight(t);
    if (qsum < 1e-12) throw InvalidArgument("discrimination_operators: pair has zero total weight");
    const Ensemble& es = e[s - 1];
    const Ensemble& et = e[t - 1];
    std::vector<HermitianOperator> out;
    out.reserve(es.size() * et.size());
    for (int gs = 0; gs < es.size(); ++gs) {
        for (int gt = 0; gt < et.size(); ++gt) {
            out.push_back(es.state(gs) * (a.weight(s) / qsum * es.prior(gs)) +
                          et.state(gt) * (a.weight(t) / qsum * et.prior(gt)));
        }
    }
    return out;
}

DiscriminationResult minimum_error_discrimination(const std::vector<HermitianOperator>& weighted,
                                                  const SolveOptions& opts) {
    if (weighted.empty()) throw InvalidArgument("minimum_error_discrimination: no states");
    const int d = weighted.front().dim();
    SdpProblem p;
    std::vector<int> blocks;
    for (std::size_t z = 0; z < weighted.size(); ++z) {
        if (weighted[z].dim() != d) {
            throw DimensionMismatch("minimum_error_discrimination: mixed dimensions");
        }
        blocks.push_back(p.add_block("G[" + std::to_string(z) + "]", d));
    }
    std::vector<std::pair<int, double>> terms;
    for (int blk : blocks) terms.emplace_back(blk, 1.0);
    p.add_operator_equation(terms, {}, HermitianOperator::identity(d), "povm-completeness");
    for (std::size_t z = 0; z < weighted.size(); ++z) {
        p.objective_mat.push_back({blocks[z], weighted[z]});
    }

    const SdpSolution sol = solve(p, opts);
    if (sol.status != SolveStatus::Optimal) {
        throw NumericalFailure("minimum_error_discrimination: solver returned " +
                                   to_string(sol.status) + " (" + sol.message + ")",
                               sol.feasibility_residual);
    }

    DiscriminationResult res;
    res.value = sol.objective;
    for (int blk : blocks) res.povm.push_back(sol.block_values[blk]);
    // The completeness rows were expanded against the orthonormal Hermitian
    // basis, so the dual operator is sum_k y_k E_k.
    const auto& basis = hermitian_basis(d);
    HermitianOperator y = HermitianOperator::zero(d);
    for (std::size_t k = 0; k < basis.size(); ++k) {
        y = y + basis[k] * sol.dual_certificate[k];
    }
    res.dual_witness = y;
    res.solver = SolverSummary{sol.status,   sol.objective,  sol.duality_gap,
                               sol.feasibility_residual, sol.iterations, sol.message};
    return res;
}

double compatible_guessing(const Assembly& a, const std::vector<Ensemble>& e, int s, int t,
                           const SolveOptions& opts) {
    return minimum_error_discrimination(discrimination_operators(a, e, s, t), opts).value;
}

QsdReport witness_w2(const Assembly& a, int s, int t, const SolveOptions& opts) {
    check_pair(a, s, t, "witness_w2");
    const std::vector<Ensemble> all = optimal_ensembles(a);

    QsdReport report;
    report.s = s;
    report.t = t;
    const double qsum = a.weight(s) + a.weight(t);
    if (qsum < 1e-12) throw InvalidArgument("witness_w2: pair has zero total weight");
    double pg = 0.0;
    for (int x : {s, t}) {
        const Measurement& meas = a.measurement(x);
        const Ensemble& ens = all[x - 1];
        for (int ax = 0; ax < meas.outcomes(); ++ax) {
            pg += (a.weight(x) / qsum) * ens.prior(ax) *
                  frobenius_inner(ens.state(ax), meas.effect(ax));
        }
    }
    report.guessing_probability = pg;

    DiscriminationResult disc =
        minimum_error_discrimination(discrimination_operators(a, all, s, t), opts);
    report.compatible_guessing = disc.value;
    report.advantage = report.guessing_probability - report.compatible_guessing;
    report.ensembles = {all[s - 1], all[t - 1]};
    report.discriminating_povm = std::move(disc.povm);
    report.dual_witness = std::move(disc.dual_witness);
    report.solver = std::move(disc.solver);
    return report;
}

} // namespace incompat
