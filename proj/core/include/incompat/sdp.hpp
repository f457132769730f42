#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "incompat/linalg.hpp"

namespace incompat {

/// Linear conic program over a product of complex Hermitian PSD cones and
/// bounded real scalars, with affine equality constraints. The sense is
/// always maximize.
///
/// Internally the solver realifies each Hermitian cone through the symmetric
/// embedding [[Re, -Im], [Im, Re]] (with the factor-2 inner-product
/// correction) and encodes scalar bounds as pairs of 1x1 PSD blocks; both
/// transformations are invisible at this interface.
struct SdpProblem {
    struct BlockVar {
        std::string name;
        int dim = 0;
    };
    struct ScalarVar {
        std::string name;
        double lower = 0.0;
        double upper = 1.0;
    };
    struct MatTerm {
        int block = -1;
        HermitianOperator coeff; // pairs as <coeff, X_block>
    };
    struct ScalarTerm {
        int scalar = -1;
        double coeff = 0.0;
    };
    /// sum_j <A_j, X_{b_j}> + sum_k c_k v_k = rhs
    struct Constraint {
        std::vector<MatTerm> mat_terms;
        std::vector<ScalarTerm> scalar_terms;
        double rhs = 0.0;
        std::string label;
    };

    std::vector<BlockVar> blocks;
    std::vector<ScalarVar> scalars;
    std::vector<Constraint> constraints;
    std::vector<MatTerm> objective_mat;
    std::vector<ScalarTerm> objective_scalar;

    int add_block(std::string name, int dim);
    /// Bounds must be finite with lower <= upper; lower == upper pins the
    /// scalar (presolve eliminates it).
    int add_scalar(std::string name, double lower, double upper);

    void add_constraint(Constraint c);

    /// Expands an operator equation
    ///   sum_j c_j X_{b_j} + sum_k v_k K_k = rhs
    /// into dim^2 scalar rows against an orthonormal Hermitian basis.
    void add_operator_equation(const std::vector<std::pair<int, double>>& block_terms,
                               const std::vector<std::pair<int, HermitianOperator>>& scalar_terms,
                               const HermitianOperator& rhs, const std::string& label);

    /// Problem dump (blocks, constraints, objective with operator literals)
    /// for cross-checking against external solvers.
    std::string dump_json() const;
};

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, NumericalLimit };

std::string to_string(SolveStatus s);

struct SolveOptions {
    double gap_tol = 1e-8;
    double feas_tol = 1e-8;
    int max_iter = 200;
    /// Reserved: the algorithm has no stochastic components, so the seed does
    /// not affect results.
    std::uint64_t seed = 0;
    bool verbose = false;
};

struct SdpSolution {
    SolveStatus status = SolveStatus::NumericalLimit;
    std::vector<HermitianOperator> block_values;
    std::vector<double> scalar_values;
    double objective = 0.0;
    /// Objective of the dual iterate; weak duality gives
    /// dual_objective >= objective - 10 * gap_tol at Optimal.
    double dual_objective = 0.0;
    /// Relative duality gap |p - d| / (1 + |p| + |d|).
    double duality_gap = 1.0;
    /// max(primal, dual) scaled feasibility residual.
    double feasibility_residual = 1.0;
    /// Equality multipliers per original constraint row (0 for rows removed
    /// by presolve). For infeasible statuses this carries the Farkas-type
    /// certificate instead.
    std::vector<double> dual_certificate;
    int iterations = 0;
    std::string message;
};

struct PresolveResult {
    SdpProblem problem;
    /// Indices (into the input problem's constraints) of removed rows.
    std::vector<int> removed_rows;
    /// Original indices of the rows kept, aligned with problem.constraints.
    std::vector<int> kept_rows;
    /// Scalars eliminated because lower == upper: (original index, value).
    std::vector<std::pair<int, double>> fixed_scalars;
    /// Objective constant contributed by eliminated scalars.
    double objective_offset = 0.0;
    bool infeasible = false;
    std::string message;
};

/// Removes linearly dependent equality rows (rank-revealing, keeping earlier
/// rows), normalizes row scales, and substitutes pinned scalars. Dependent
/// rows with inconsistent right-hand sides mark the problem infeasible.
PresolveResult presolve(const SdpProblem& p);

/// Primal-dual path-following interior-point solve (Nesterov-Todd scaling,
/// Mehrotra predictor-corrector, homogeneous self-dual embedding). Runs
/// presolve internally; deterministic for fixed inputs and options.
SdpSolution solve(const SdpProblem& p, const SolveOptions& opts = {});

/// Orthonormal basis of d x d Hermitian matrices (Frobenius inner product);
/// the basis used by add_operator_equation, exposed so callers can map dual
/// multipliers of expanded operator equations back to an operator.
const std::vector<HermitianOperator>& hermitian_basis(int dim);

} // namespace incompat
