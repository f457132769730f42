#include "incompat/sdp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

#include "json_util.hpp"

namespace incompat {

namespace {

constexpr double kRankTol = 1e-13;        // on the squared orthogonalization residual
constexpr double kConsistencyTol = 1e-8;  // rhs agreement for dependent rows
constexpr double kZeroRowTol = 1e-14;
constexpr double kStepFraction = 0.98;
constexpr double kInfinity = std::numeric_limits<double>::infinity();

} // namespace

// ---------------------------------------------------------------------------
// Problem building
// ---------------------------------------------------------------------------

int SdpProblem::add_block(std::string name, int dim) {
    if (dim < 1) throw InvalidArgument("SdpProblem::add_block: dim must be >= 1");
    blocks.push_back({std::move(name), dim});
    return static_cast<int>(blocks.size()) - 1;
}

int SdpProblem::add_scalar(std::string name, double lower, double upper) {
    if (!std::isfinite(lower) || !std::isfinite(upper)) {
        throw InvalidArgument("SdpProblem::add_scalar: bounds must be finite");
    }
    if (lower > upper) throw InvalidArgument("SdpProblem::add_scalar: lower > upper");
    scalars.push_back({std::move(name), lower, upper});
    return static_cast<int>(scalars.size()) - 1;
}

void SdpProblem::add_constraint(Constraint c) {
    for (const auto& t : c.mat_terms) {
        if (t.block < 0 || t.block >= static_cast<int>(blocks.size())) {
            throw InvalidArgument("SdpProblem: constraint references unknown block");
        }
        if (t.coeff.dim() != blocks[t.block].dim) {
            throw DimensionMismatch("SdpProblem: coefficient dim does not match block dim");
        }
    }
    for (const auto& t : c.scalar_terms) {
        if (t.scalar < 0 || t.scalar >= static_cast<int>(scalars.size())) {
            throw InvalidArgument("SdpProblem: constraint references unknown scalar");
        }
    }
    constraints.push_back(std::move(c));
}

const std::vector<HermitianOperator>& hermitian_basis(int dim) {
    static std::map<int, std::vector<HermitianOperator>> cache;
    static std::mutex mutex;
    std::lock_guard lock(mutex);
    auto it = cache.find(dim);
    if (it != cache.end()) return it->second;

    std::vector<HermitianOperator> basis;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < dim; ++i) {
        CMatrix e = CMatrix::Zero(dim, dim);
        e(i, i) = 1.0;
        basis.push_back(HermitianOperator::trusted(std::move(e)));
    }
    for (int i = 0; i < dim; ++i) {
        for (int j = i + 1; j < dim; ++j) {
            CMatrix re = CMatrix::Zero(dim, dim);
            re(i, j) = inv_sqrt2;
            re(j, i) = inv_sqrt2;
            basis.push_back(HermitianOperator::trusted(std::move(re)));
            CMatrix im = CMatrix::Zero(dim, dim);
            im(i, j) = Complex(0.0, -inv_sqrt2);
            im(j, i) = Complex(0.0, inv_sqrt2);
            basis.push_back(HermitianOperator::trusted(std::move(im)));
        }
    }
    return cache.emplace(dim, std::move(basis)).first->second;
}

void SdpProblem::add_operator_equation(
    const std::vector<std::pair<int, double>>& block_terms,
    const std::vector<std::pair<int, HermitianOperator>>& scalar_terms,
    const HermitianOperator& rhs, const std::string& label) {
    const int d = rhs.dim();
    for (const auto& [blk, coeff] : block_terms) {
        if (blk < 0 || blk >= static_cast<int>(blocks.size()) || blocks[blk].dim != d) {
            throw DimensionMismatch("add_operator_equation: block/rhs dimension mismatch");
        }
        (void)coeff;
    }
    for (const auto& [sv, op] : scalar_terms) {
        if (op.dim() != d) throw DimensionMismatch("add_operator_equation: scalar coeff dim mismatch");
        (void)sv;
    }
    const auto& basis = hermitian_basis(d);
    for (std::size_t k = 0; k < basis.size(); ++k) {
        Constraint row;
        row.label = label + "#" + std::to_string(k);
        for (const auto& [blk, coeff] : block_terms) {
            row.mat_terms.push_back({blk, basis[k] * coeff});
        }
        for (const auto& [sv, op] : scalar_terms) {
            row.scalar_terms.push_back({sv, frobenius_inner(basis[k], op)});
        }
        row.rhs = frobenius_inner(basis[k], rhs);
        add_constraint(std::move(row));
    }
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::PrimalInfeasible: return "PrimalInfeasible";
        case SolveStatus::DualInfeasible: return "DualInfeasible";
        case SolveStatus::NumericalLimit: return "NumericalLimit";
    }
    return "Unknown";
}

std::string SdpProblem::dump_json() const {
    using detail::ordered_json;
    ordered_json doc;
    doc["sense"] = "maximize";
    doc["blocks"] = ordered_json::array();
    for (const auto& b : blocks) {
        doc["blocks"].push_back(ordered_json{{"name", b.name}, {"dim", b.dim}});
    }
    doc["scalars"] = ordered_json::array();
    for (const auto& s : scalars) {
        doc["scalars"].push_back(
            ordered_json{{"name", s.name}, {"lower", s.lower}, {"upper", s.upper}});
    }
    auto emit_terms = [](const std::vector<MatTerm>& mats, const std::vector<ScalarTerm>& scals) {
        ordered_json t;
        t["operators"] = ordered_json::array();
        for (const auto& m : mats) {
            t["operators"].push_back(
                ordered_json{{"block", m.block}, {"coeff", detail::operator_to_json(m.coeff)}});
        }
        t["scalars"] = ordered_json::array();
        for (const auto& s : scals) {
            t["scalars"].push_back(ordered_json{{"scalar", s.scalar}, {"coeff", s.coeff}});
        }
        return t;
    };
    doc["constraints"] = ordered_json::array();
    for (const auto& c : constraints) {
        ordered_json row = emit_terms(c.mat_terms, c.scalar_terms);
        row["rhs"] = c.rhs;
        row["label"] = c.label;
        doc["constraints"].push_back(std::move(row));
    }
    doc["objective"] = emit_terms(objective_mat, objective_scalar);
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Presolve
// ---------------------------------------------------------------------------

namespace {

// Frobenius-preserving real coordinates of a Hermitian matrix:
// [diag; sqrt(2) Re(upper); sqrt(2) Im(upper)].
void svec_accumulate(const HermitianOperator& h, double scale, double* out) {
    const CMatrix& m = h.matrix();
    const int d = h.dim();
    const double sq2 = std::sqrt(2.0);
    int idx = 0;
    for (int i = 0; i < d; ++i) out[idx++] += scale * m(i, i).real();
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            out[idx++] += scale * sq2 * m(i, j).real();
            out[idx++] += scale * sq2 * m(i, j).imag();
        }
    }
}

struct FlatLayout {
    std::vector<int> block_offset;
    std::vector<int> scalar_offset;
    int total = 0;
};

FlatLayout flat_layout(const SdpProblem& p) {
    FlatLayout layout;
    int offset = 0;
    for (const auto& b : p.blocks) {
        layout.block_offset.push_back(offset);
        offset += b.dim * b.dim;
    }
    for (std::size_t k = 0; k < p.scalars.size(); ++k) {
        layout.scalar_offset.push_back(offset);
        offset += 1;
    }
    layout.total = offset;
    return layout;
}

RVector flatten_row(const SdpProblem::Constraint& c, const FlatLayout& layout) {
    RVector v = RVector::Zero(layout.total);
    for (const auto& t : c.mat_terms) {
        svec_accumulate(t.coeff, 1.0, v.data() + layout.block_offset[t.block]);
    }
    for (const auto& t : c.scalar_terms) {
        v(layout.scalar_offset[t.scalar]) += t.coeff;
    }
    return v;
}

} // namespace

PresolveResult presolve(const SdpProblem& p) {
    PresolveResult result;
    result.problem.blocks = p.blocks;

    // Pinned scalars (lower == upper) are substituted into rows and objective.
    std::vector<int> scalar_map(p.scalars.size(), -1);
    std::vector<double> scalar_fixed(p.scalars.size(), 0.0);
    for (std::size_t k = 0; k < p.scalars.size(); ++k) {
        const auto& s = p.scalars[k];
        if (s.lower == s.upper) {
            scalar_fixed[k] = s.lower;
            result.fixed_scalars.emplace_back(static_cast<int>(k), s.lower);
        } else {
            scalar_map[k] = result.problem.scalars.size();
            result.problem.scalars.push_back(s);
        }
    }

    std::vector<SdpProblem::Constraint> rows;
    rows.reserve(p.constraints.size());
    for (const auto& c : p.constraints) {
        SdpProblem::Constraint row;
        row.label = c.label;
        row.rhs = c.rhs;
        row.mat_terms = c.mat_terms;
        for (const auto& t : c.scalar_terms) {
            if (scalar_map[t.scalar] >= 0) {
                row.scalar_terms.push_back({scalar_map[t.scalar], t.coeff});
            } else {
                row.rhs -= t.coeff * scalar_fixed[t.scalar];
            }
        }
        rows.push_back(std::move(row));
    }
    for (const auto& t : p.objective_mat) result.problem.objective_mat.push_back(t);
    for (const auto& t : p.objective_scalar) {
        if (scalar_map[t.scalar] >= 0) {
            result.problem.objective_scalar.push_back({scalar_map[t.scalar], t.coeff});
        } else {
            result.objective_offset += t.coeff * scalar_fixed[t.scalar];
        }
    }

    // Rank-revealing pass over the rows, in order, against the rows kept so
    // far: incremental Cholesky of the Gram matrix of row-normalized rows.
    const FlatLayout layout = flat_layout(result.problem);
    std::vector<RVector> kept_vecs;
    RMatrix chol(rows.size(), rows.size());
    RVector transformed_rhs(rows.size());
    std::ostringstream notes;

    for (std::size_t i = 0; i < rows.size(); ++i) {
        RVector v = flatten_row(rows[i], layout);
        const double norm = v.norm();
        const double rhs_scale = std::max(1.0, std::abs(rows[i].rhs));
        if (norm <= kZeroRowTol * rhs_scale) {
            if (std::abs(rows[i].rhs) > kConsistencyTol) {
                result.infeasible = true;
                result.message = "presolve: row " + std::to_string(i) + " (" + rows[i].label +
                                 ") has zero coefficients but rhs " + std::to_string(rows[i].rhs);
                return result;
            }
            result.removed_rows.push_back(static_cast<int>(i));
            notes << "removed empty row " << i << "; ";
            continue;
        }
        v /= norm;
        const double rhs = rows[i].rhs / norm;

        const int nk = static_cast<int>(kept_vecs.size());
        RVector g(nk);
        for (int jx = 0; jx < nk; ++jx) g(jx) = v.dot(kept_vecs[jx]);
        RVector c(nk);
        for (int jx = 0; jx < nk; ++jx) {
            double acc = g(jx);
            for (int kx = 0; kx < jx; ++kx) acc -= chol(jx, kx) * c(kx);
            c(jx) = acc / chol(jx, jx);
        }
        const double resid = 1.0 - c.squaredNorm();
        if (resid > kRankTol) {
            chol.row(nk).head(nk) = c.transpose();
            chol(nk, nk) = std::sqrt(std::max(resid, kRankTol));
            double t = rhs;
            for (int jx = 0; jx < nk; ++jx) t -= c(jx) * transformed_rhs(jx);
            transformed_rhs(nk) = t / chol(nk, nk);
            kept_vecs.push_back(std::move(v));
            result.kept_rows.push_back(static_cast<int>(i));
            result.problem.constraints.push_back(rows[i]);
        } else {
            double predicted = 0.0;
            for (int jx = 0; jx < nk; ++jx) predicted += c(jx) * transformed_rhs(jx);
            if (std::abs(rhs - predicted) > kConsistencyTol * (1.0 + std::abs(rhs))) {
                result.infeasible = true;
                result.message = "presolve: row " + std::to_string(i) + " (" + rows[i].label +
                                 ") is linearly dependent with inconsistent rhs (" +
                                 std::to_string(rhs * norm) + " vs implied " +
                                 std::to_string(predicted * norm) + ")";
                return result;
            }
            result.removed_rows.push_back(static_cast<int>(i));
            notes << "removed dependent row " << i << " (" << rows[i].label << "); ";
        }
    }
    result.message = notes.str();
    return result;
}

// ---------------------------------------------------------------------------
// Conic form: real symmetric blocks, equality rows, internal minimization
// ---------------------------------------------------------------------------

namespace {

RMatrix realify(const HermitianOperator& h) {
    const int d = h.dim();
    if (d == 1) {
        RMatrix r(1, 1);
        r(0, 0) = h.matrix()(0, 0).real();
        return r;
    }
    const RMatrix re = h.matrix().real();
    const RMatrix im = h.matrix().imag();
    RMatrix r(2 * d, 2 * d);
    r.topLeftCorner(d, d) = re;
    r.topRightCorner(d, d) = -im;
    r.bottomLeftCorner(d, d) = im;
    r.bottomRightCorner(d, d) = re;
    return r;
}

HermitianOperator complexify(const RMatrix& y, int d) {
    if (d == 1) {
        CMatrix m(1, 1);
        m(0, 0) = y(0, 0);
        return HermitianOperator::trusted(std::move(m));
    }
    // Average with the J-conjugate to project onto the realified subspace,
    // then Hermitian-symmetrize.
    const RMatrix a = 0.5 * (y.topLeftCorner(d, d) + y.bottomRightCorner(d, d));
    const RMatrix bpart = 0.5 * (y.bottomLeftCorner(d, d) - y.topRightCorner(d, d));
    CMatrix m = a.cast<Complex>() + Complex(0.0, 1.0) * bpart.cast<Complex>();
    CMatrix sym = 0.5 * (m + m.adjoint());
    return HermitianOperator::trusted(std::move(sym));
}

struct ConeTerm {
    int blk;
    RMatrix a;
};

struct ConicProblem {
    std::vector<int> bsize;
    std::vector<std::vector<ConeTerm>> rows;
    RVector b;
    std::vector<ConeTerm> cost; // internal min objective
    std::vector<double> row_norms;
    // Extraction maps.
    std::vector<int> block_cone;                  // user block -> cone index
    struct ScalarSlack { int ucone, wcone; double lo, hi; };
    std::vector<ScalarSlack> scalar_cones;        // presolved scalar -> slack cones
    std::vector<int> row_user;                    // cone row -> presolved row (-1 for link rows)
};

ConicProblem to_conic(const SdpProblem& p) {
    ConicProblem cp;
    for (const auto& b : p.blocks) {
        cp.block_cone.push_back(static_cast<int>(cp.bsize.size()));
        cp.bsize.push_back(b.dim == 1 ? 1 : 2 * b.dim);
    }
    for (const auto& s : p.scalars) {
        const int u = static_cast<int>(cp.bsize.size());
        cp.bsize.push_back(1);
        const int w = static_cast<int>(cp.bsize.size());
        cp.bsize.push_back(1);
        cp.scalar_cones.push_back({u, w, s.lower, s.upper});
    }

    // The realified coefficient carries a 1/2 so <R(K)/2, R(X)> = <K, X>.
    auto mat_coeff = [&](const SdpProblem::MatTerm& t) {
        RMatrix a = realify(t.coeff);
        if (p.blocks[t.block].dim > 1) a *= 0.5;
        return ConeTerm{cp.block_cone[t.block], std::move(a)};
    };
    auto scalar_coeff = [&](int scalar, double c) {
        RMatrix a(1, 1);
        a(0, 0) = c;
        return ConeTerm{cp.scalar_cones[scalar].ucone, std::move(a)};
    };

    std::vector<double> b_entries;
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        const auto& c = p.constraints[i];
        std::map<int, RMatrix> acc;
        double rhs = c.rhs;
        for (const auto& t : c.mat_terms) {
            ConeTerm term = mat_coeff(t);
            auto [it, fresh] = acc.emplace(term.blk, term.a);
            if (!fresh) it->second += term.a;
        }
        for (const auto& t : c.scalar_terms) {
            ConeTerm term = scalar_coeff(t.scalar, t.coeff);
            auto [it, fresh] = acc.emplace(term.blk, term.a);
            if (!fresh) it->second += term.a;
            rhs -= t.coeff * p.scalars[t.scalar].lower; // v = lower + u
        }
        std::vector<ConeTerm> terms;
        double norm2 = 0.0;
        for (auto& [blk, a] : acc) {
            norm2 += a.squaredNorm();
            terms.push_back({blk, std::move(a)});
        }
        const double norm = std::sqrt(norm2);
        for (auto& t : terms) t.a /= norm;
        cp.rows.push_back(std::move(terms));
        b_entries.push_back(rhs / norm);
        cp.row_norms.push_back(norm);
        cp.row_user.push_back(static_cast<int>(i));
    }

    // Bound-linking rows u + w = upper - lower (unit norm by construction).
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t k = 0; k < p.scalars.size(); ++k) {
        const auto& sc = cp.scalar_cones[k];
        RMatrix one(1, 1);
        one(0, 0) = inv_sqrt2;
        std::vector<ConeTerm> terms;
        terms.push_back({sc.ucone, one});
        terms.push_back({sc.wcone, one});
        cp.rows.push_back(std::move(terms));
        b_entries.push_back((sc.hi - sc.lo) * inv_sqrt2);
        cp.row_norms.push_back(std::sqrt(2.0));
        cp.row_user.push_back(-1);
    }

    cp.b = Eigen::Map<RVector>(b_entries.data(), static_cast<Eigen::Index>(b_entries.size()));

    // Internal objective: minimize <C, X> with C = -(user objective).
    std::map<int, RMatrix> cost_acc;
    for (const auto& t : p.objective_mat) {
        ConeTerm term = mat_coeff(t);
        auto [it, fresh] = cost_acc.emplace(term.blk, -term.a);
        if (!fresh) it->second -= term.a;
    }
    for (const auto& t : p.objective_scalar) {
        ConeTerm term = scalar_coeff(t.scalar, t.coeff);
        auto [it, fresh] = cost_acc.emplace(term.blk, -term.a);
        if (!fresh) it->second -= term.a;
    }
    for (auto& [blk, a] : cost_acc) cp.cost.push_back({blk, std::move(a)});
    return cp;
}

// ---------------------------------------------------------------------------
// Homogeneous self-dual interior-point core (real symmetric cones)
// ---------------------------------------------------------------------------

using BlockVec = std::vector<RMatrix>;

struct NtScaling {
    RMatrix r, rinv, w;
    RVector lambda;
};

struct Direction {
    BlockVec dx, ds;
    RVector dy;
    double dtau = 0.0, dkappa = 0.0;
    BlockVec dx_scaled, ds_scaled; // R^-1 dX R^-T and R^T dS R
};

struct ConicResult {
    SolveStatus status = SolveStatus::NumericalLimit;
    BlockVec x;           // X / tau
    RVector y;            // y / tau (internal sign)
    double pobj = 0.0, dobj = 0.0;
    double pres = 1.0, dres = 1.0, relgap = 1.0;
    int iterations = 0;
    std::string message;
};

class HsdSolver {
public:
    HsdSolver(const ConicProblem& cp, const SolveOptions& opts) : cp_(cp), opts_(opts) {
        nblocks_ = static_cast<int>(cp.bsize.size());
        m_ = static_cast<int>(cp.rows.size());
        nu_ = 0;
        for (int n : cp.bsize) nu_ += n;
        block_rows_.resize(nblocks_);
        for (int i = 0; i < m_; ++i) {
            for (const auto& t : cp.rows[i]) block_rows_[t.blk].push_back(i);
        }
        cnorm_ = 0.0;
        for (const auto& t : cp.cost) cnorm_ += t.a.squaredNorm();
        cnorm_ = std::sqrt(cnorm_);
        bnorm_ = cp.b.norm();
    }

    ConicResult run();

private:
    RVector apply_a(const BlockVec& x) const {
        RVector out = RVector::Zero(m_);
        for (int i = 0; i < m_; ++i) {
            for (const auto& t : cp_.rows[i]) {
                out(i) += t.a.cwiseProduct(x[t.blk]).sum();
            }
        }
        return out;
    }

    BlockVec apply_at(const RVector& y) const {
        BlockVec out = zero_blocks();
        for (int i = 0; i < m_; ++i) {
            for (const auto& t : cp_.rows[i]) out[t.blk] += y(i) * t.a;
        }
        return out;
    }

    BlockVec zero_blocks() const {
        BlockVec out(nblocks_);
        for (int k = 0; k < nblocks_; ++k) out[k] = RMatrix::Zero(cp_.bsize[k], cp_.bsize[k]);
        return out;
    }

    double cost_inner(const BlockVec& x) const {
        double acc = 0.0;
        for (const auto& t : cp_.cost) acc += t.a.cwiseProduct(x[t.blk]).sum();
        return acc;
    }

    static double block_dot(const BlockVec& a, const BlockVec& b) {
        double acc = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) acc += a[k].cwiseProduct(b[k]).sum();
        return acc;
    }

    static double block_norm(const BlockVec& a) {
        double acc = 0.0;
        for (const auto& m : a) acc += m.squaredNorm();
        return std::sqrt(acc);
    }

    bool compute_scalings();
    bool factor_schur();
    Direction solve_direction(const RVector& rp, const BlockVec& rd, double rg,
                              const BlockVec& rc_scaled, double rtk) const;
    double max_step(const Direction& dir) const;

    const ConicProblem& cp_;
    SolveOptions opts_;
    int nblocks_ = 0, m_ = 0, nu_ = 0;
    double cnorm_ = 0.0, bnorm_ = 0.0;
    std::vector<std::vector<int>> block_rows_;

    // Iterate.
    BlockVec x_, s_;
    RVector y_;
    double tau_ = 1.0, kappa_ = 1.0;

    // Per-iteration scratch.
    std::vector<NtScaling> scal_;
    Eigen::LLT<RMatrix> schur_llt_;
    std::vector<std::vector<RMatrix>> waw_; // per row, per term: W A W
    BlockVec wcw_;
    double cwc_ = 0.0;
    RVector hvec_, z2_, hb_;
};

bool HsdSolver::compute_scalings() {
    scal_.assign(nblocks_, {});
    for (int k = 0; k < nblocks_; ++k) {
        const int n = cp_.bsize[k];
        NtScaling sc;
        if (n == 1) {
            const double x = x_[k](0, 0), s = s_[k](0, 0);
            if (x <= 0.0 || s <= 0.0) return false;
            const double w = std::sqrt(x / s);
            sc.r = RMatrix::Constant(1, 1, std::sqrt(w));
            sc.rinv = RMatrix::Constant(1, 1, 1.0 / std::sqrt(w));
            sc.w = RMatrix::Constant(1, 1, w);
            sc.lambda = RVector::Constant(1, std::sqrt(x * s));
        } else {
            Eigen::LLT<RMatrix> llt(x_[k]);
            if (llt.info() != Eigen::Success) return false;
            const RMatrix lx = llt.matrixL();
            const RMatrix g = lx.transpose() * s_[k] * lx;
            Eigen::SelfAdjointEigenSolver<RMatrix> es(g);
            if (es.info() != Eigen::Success) return false;
            if (es.eigenvalues().minCoeff() <= 0.0) return false;
            const RVector d4 = es.eigenvalues().array().pow(0.25).matrix();
            sc.r = lx * es.eigenvectors() * d4.cwiseInverse().asDiagonal();
            // R^-1 = D^{1/4} Q^T L_x^-1
            RMatrix lxinv = RMatrix::Identity(n, n);
            lx.triangularView<Eigen::Lower>().solveInPlace(lxinv);
            sc.rinv = d4.asDiagonal() * es.eigenvectors().transpose() * lxinv;
            sc.w = sc.r * sc.r.transpose();
            sc.lambda = es.eigenvalues().array().sqrt();
        }
        scal_[k] = std::move(sc);
    }
    return true;
}

bool HsdSolver::factor_schur() {
    waw_.assign(m_, {});
    for (int i = 0; i < m_; ++i) {
        waw_[i].reserve(cp_.rows[i].size());
        for (const auto& t : cp_.rows[i]) {
            waw_[i].push_back(scal_[t.blk].w * t.a * scal_[t.blk].w);
        }
    }
    RMatrix schur = RMatrix::Zero(m_, m_);
    for (int k = 0; k < nblocks_; ++k) {
        const auto& rows = block_rows_[k];
        for (std::size_t a = 0; a < rows.size(); ++a) {
            const int i = rows[a];
            // Find the term index for block k in row i.
            const auto& terms_i = cp_.rows[i];
            int ti = 0;
            while (terms_i[ti].blk != k) ++ti;
            for (std::size_t bx = a; bx < rows.size(); ++bx) {
                const int j = rows[bx];
                const auto& terms_j = cp_.rows[j];
                int tj = 0;
                while (terms_j[tj].blk != k) ++tj;
                schur(i, j) += terms_i[ti].a.cwiseProduct(waw_[j][tj]).sum();
            }
        }
    }
    schur = schur.selfadjointView<Eigen::Upper>();

    // WCW, <C, WCW>, h = A(WCW) + b.
    wcw_ = zero_blocks();
    for (const auto& t : cp_.cost) wcw_[t.blk] += scal_[t.blk].w * t.a * scal_[t.blk].w;
    cwc_ = 0.0;
    for (const auto& t : cp_.cost) cwc_ += t.a.cwiseProduct(wcw_[t.blk]).sum();
    hvec_ = apply_a(wcw_) + cp_.b;
    hb_ = hvec_ - cp_.b;

    double jitter = 0.0;
    const double scale = schur.diagonal().maxCoeff() + 1e-300;
    for (int attempt = 0; attempt < 6; ++attempt) {
        RMatrix reg = schur;
        if (jitter > 0.0) reg.diagonal().array() += jitter;
        schur_llt_.compute(reg);
        if (schur_llt_.info() == Eigen::Success) {
            z2_ = schur_llt_.solve(hvec_);
            return true;
        }
        jitter = (jitter == 0.0) ? 1e-14 * scale : jitter * 100.0;
    }
    return false;
}

Direction HsdSolver::solve_direction(const RVector& rp, const BlockVec& rd, double rg,
                                     const BlockVec& rc_scaled, double rtk) const {
    Direction dir;
    // T = R E^-1(Rc) R^T with E^-1 entrywise 2/(lambda_i + lambda_j).
    BlockVec u(nblocks_);
    for (int k = 0; k < nblocks_; ++k) {
        const auto& sc = scal_[k];
        const int n = cp_.bsize[k];
        RMatrix e = rc_scaled[k];
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                e(i, j) *= 2.0 / (sc.lambda(i) + sc.lambda(j));
            }
        }
        u[k] = sc.r * e * sc.r.transpose() - sc.w * rd[k] * sc.w;
    }

    const RVector rhs1 = rp - apply_a(u);
    const RVector z1 = schur_llt_.solve(rhs1);

    const double cu = cost_inner(u);
    const double num = rg - rtk / tau_ - cu - z1.dot(hb_) + cp_.b.dot(z1);
    const double den = -kappa_ / tau_ - cwc_ + z2_.dot(hb_) - cp_.b.dot(z2_);
    dir.dtau = num / den;
    dir.dy = z1 + dir.dtau * z2_;

    const BlockVec aty = apply_at(dir.dy);
    dir.dx.resize(nblocks_);
    dir.ds.resize(nblocks_);
    for (int k = 0; k < nblocks_; ++k) {
        dir.dx[k] = u[k] + scal_[k].w * aty[k] * scal_[k].w - wcw_[k] * dir.dtau;
        dir.ds[k] = rd[k] - aty[k];
    }
    for (const auto& t : cp_.cost) dir.ds[t.blk] += t.a * dir.dtau;
    dir.dkappa = (rtk - kappa_ * dir.dtau) / tau_;

    dir.dx_scaled.resize(nblocks_);
    dir.ds_scaled.resize(nblocks_);
    for (int k = 0; k < nblocks_; ++k) {
        dir.dx_scaled[k] = scal_[k].rinv * dir.dx[k] * scal_[k].rinv.transpose();
        dir.ds_scaled[k] = scal_[k].r.transpose() * dir.ds[k] * scal_[k].r;
    }
    return dir;
}

double HsdSolver::max_step(const Direction& dir) const {
    double alpha = kInfinity;
    for (int k = 0; k < nblocks_; ++k) {
        const auto& sc = scal_[k];
        const RVector inv_sqrt_lam = sc.lambda.array().sqrt().inverse().matrix();
        const RMatrix px =
            inv_sqrt_lam.asDiagonal() * dir.dx_scaled[k] * inv_sqrt_lam.asDiagonal();
        const RMatrix ps =
            inv_sqrt_lam.asDiagonal() * dir.ds_scaled[k] * inv_sqrt_lam.asDiagonal();
        Eigen::SelfAdjointEigenSolver<RMatrix> ex(px, Eigen::EigenvaluesOnly);
        Eigen::SelfAdjointEigenSolver<RMatrix> es(ps, Eigen::EigenvaluesOnly);
        const double mx = ex.eigenvalues().minCoeff();
        const double ms = es.eigenvalues().minCoeff();
        if (mx < 0.0) alpha = std::min(alpha, -1.0 / mx);
        if (ms < 0.0) alpha = std::min(alpha, -1.0 / ms);
    }
    if (dir.dtau < 0.0) alpha = std::min(alpha, -tau_ / dir.dtau);
    if (dir.dkappa < 0.0) alpha = std::min(alpha, -kappa_ / dir.dkappa);
    return alpha;
}

ConicResult HsdSolver::run() {
    ConicResult best;

    // Identity-scaled start, X = S = xi * I with xi = 1 + max |b_i|.
    const double xi = 1.0 + (m_ ? cp_.b.cwiseAbs().maxCoeff() : 0.0);
    x_.resize(nblocks_);
    s_.resize(nblocks_);
    for (int k = 0; k < nblocks_; ++k) {
        x_[k] = xi * RMatrix::Identity(cp_.bsize[k], cp_.bsize[k]);
        s_[k] = xi * RMatrix::Identity(cp_.bsize[k], cp_.bsize[k]);
    }
    y_ = RVector::Zero(m_);
    tau_ = 1.0;
    kappa_ = xi * xi;

    int consecutive_short_steps = 0;
    double best_score = kInfinity;

    for (int iter = 0; iter <= opts_.max_iter; ++iter) {
        // Residuals of the self-dual system.
        const RVector rp = cp_.b * tau_ - apply_a(x_);
        BlockVec rd = apply_at(-y_);
        for (int k = 0; k < nblocks_; ++k) rd[k] -= s_[k];
        for (const auto& t : cp_.cost) rd[t.blk] += t.a * tau_;
        const double ctx = cost_inner(x_);
        const double bty = cp_.b.dot(y_);
        const double rg = kappa_ + ctx - bty;

        // Scaled (tau-normalized) convergence measures.
        const double pobj = ctx / tau_;
        const double dobj = bty / tau_;
        const double pres = (cp_.b - apply_a(x_) / tau_).norm() / (1.0 + bnorm_);
        BlockVec ds_feas = apply_at(y_ / tau_);
        for (int k = 0; k < nblocks_; ++k) ds_feas[k] += s_[k] / tau_;
        for (const auto& t : cp_.cost) ds_feas[t.blk] -= t.a;
        const double dres = block_norm(ds_feas) / (1.0 + cnorm_);
        const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

        const double mu = (block_dot(x_, s_) + tau_ * kappa_) / (nu_ + 1);

        if (opts_.verbose) {
            std::cerr << "iter " << iter << ": mu=" << mu << " pres=" << pres << " dres=" << dres
                      << " gap=" << relgap << " tau=" << tau_ << " kappa=" << kappa_ << "\n";
        }

        const double score = std::max({pres, dres, relgap});
        if (score < best_score) {
            best_score = score;
            best.x.resize(nblocks_);
            for (int k = 0; k < nblocks_; ++k) best.x[k] = x_[k] / tau_;
            best.y = y_ / tau_;
            best.pobj = pobj;
            best.dobj = dobj;
            best.pres = pres;
            best.dres = dres;
            best.relgap = relgap;
            best.iterations = iter;
        }

        if (pres <= opts_.feas_tol && dres <= opts_.feas_tol && relgap <= opts_.gap_tol) {
            best.status = SolveStatus::Optimal;
            best.message = "converged";
            return best;
        }

        // Infeasibility certificates from the homogeneous embedding.
        if (bty > 0.0) {
            BlockVec cert = apply_at(y_);
            for (int k = 0; k < nblocks_; ++k) cert[k] += s_[k];
            if (block_norm(cert) / bty <= opts_.feas_tol * (1.0 + cnorm_)) {
                best.status = SolveStatus::PrimalInfeasible;
                best.y = y_ / bty;
                best.iterations = iter;
                best.message = "primal infeasibility certificate: A*(y) + S ~ 0 with b'y = 1";
                return best;
            }
        }
        if (ctx < 0.0) {
            if (apply_a(x_).norm() / (-ctx) <= opts_.feas_tol * (1.0 + bnorm_)) {
                best.status = SolveStatus::DualInfeasible;
                best.x.resize(nblocks_);
                for (int k = 0; k < nblocks_; ++k) best.x[k] = x_[k] / (-ctx);
                best.iterations = iter;
                best.message = "dual infeasibility certificate: A(X) ~ 0, X >= 0, <C,X> = -1";
                return best;
            }
        }

        if (iter == opts_.max_iter) {
            best.status = SolveStatus::NumericalLimit;
            best.message = "iteration cap reached (max_iter = " + std::to_string(opts_.max_iter) +
                           "), best residuals pres=" + std::to_string(best.pres) +
                           " dres=" + std::to_string(best.dres) +
                           " relgap=" + std::to_string(best.relgap);
            return best;
        }

        if (!compute_scalings()) {
            best.status = SolveStatus::NumericalLimit;
            best.message = "Nesterov-Todd scaling failed (iterate left the cone numerically)";
            return best;
        }
        if (!factor_schur()) {
            best.status = SolveStatus::NumericalLimit;
            best.message = "Schur complement factorization failed beyond regularization";
            return best;
        }

        // Predictor (affine scaling) direction.
        BlockVec rc(nblocks_);
        for (int k = 0; k < nblocks_; ++k) {
            rc[k] = RMatrix::Zero(cp_.bsize[k], cp_.bsize[k]);
            rc[k].diagonal() = -scal_[k].lambda.array().square().matrix();
        }
        const Direction aff = solve_direction(rp, rd, -rg, rc, -tau_ * kappa_);

        const double alpha_aff = std::min(1.0, max_step(aff));
        double mu_aff = 0.0;
        for (int k = 0; k < nblocks_; ++k) {
            mu_aff += (x_[k] + alpha_aff * aff.dx[k])
                          .cwiseProduct(s_[k] + alpha_aff * aff.ds[k])
                          .sum();
        }
        mu_aff += (tau_ + alpha_aff * aff.dtau) * (kappa_ + alpha_aff * aff.dkappa);
        mu_aff = std::max(mu_aff / (nu_ + 1), 0.0);
        const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 1e-10, 1.0 - 1e-10);

        // Combined corrector direction.
        for (int k = 0; k < nblocks_; ++k) {
            const RMatrix cross = 0.5 * (aff.dx_scaled[k] * aff.ds_scaled[k] +
                                         aff.ds_scaled[k] * aff.dx_scaled[k]);
            rc[k] = -cross;
            rc[k].diagonal().array() += sigma * mu;
            rc[k].diagonal() -= scal_[k].lambda.array().square().matrix();
        }
        const double rtk = sigma * mu - tau_ * kappa_ - aff.dtau * aff.dkappa;
        const double shrink = 1.0 - sigma;
        BlockVec rd_scaled(nblocks_);
        for (int k = 0; k < nblocks_; ++k) rd_scaled[k] = shrink * rd[k];
        const Direction dir = solve_direction(shrink * rp, rd_scaled, -shrink * rg, rc, rtk);

        const double alpha = std::min(1.0, kStepFraction * max_step(dir));
        if (alpha < 1e-9) {
            if (++consecutive_short_steps >= 3) {
                best.status = SolveStatus::NumericalLimit;
                best.message = "step length collapsed";
                return best;
            }
        } else {
            consecutive_short_steps = 0;
        }

        for (int k = 0; k < nblocks_; ++k) {
            x_[k] += alpha * dir.dx[k];
            s_[k] += alpha * dir.ds[k];
            // Explicit symmetrization keeps roundoff from accumulating.
            x_[k] = 0.5 * (x_[k] + x_[k].transpose()).eval();
            s_[k] = 0.5 * (s_[k] + s_[k].transpose()).eval();
        }
        y_ += alpha * dir.dy;
        tau_ += alpha * dir.dtau;
        kappa_ += alpha * dir.dkappa;
    }

    return best; // unreachable
}

} // namespace

// ---------------------------------------------------------------------------
// Public solve: presolve, conic conversion, extraction
// ---------------------------------------------------------------------------

SdpSolution solve(const SdpProblem& p, const SolveOptions& opts) {
    SdpSolution sol;
    sol.dual_certificate.assign(p.constraints.size(), 0.0);

    PresolveResult pre = presolve(p);
    if (pre.infeasible) {
        sol.status = SolveStatus::PrimalInfeasible;
        sol.message = pre.message;
        return sol;
    }
    if (pre.problem.constraints.empty()) {
        throw UnsupportedFeature("solve: problem has no equality constraints after presolve");
    }

    const ConicProblem cp = to_conic(pre.problem);
    HsdSolver solver(cp, opts);
    ConicResult res = solver.run();

    sol.status = res.status;
    sol.iterations = res.iterations;
    sol.message = res.message;
    sol.duality_gap = res.relgap;
    sol.feasibility_residual = std::max(res.pres, res.dres);

    // Map the conic dual (internal minimization sign) back to the caller's
    // maximization convention and original row order/scale.
    if (res.y.size() == static_cast<Eigen::Index>(cp.rows.size())) {
        for (std::size_t i = 0; i < cp.rows.size(); ++i) {
            const int pre_row = cp.row_user[i];
            if (pre_row < 0) continue;
            const int orig_row = pre.kept_rows[pre_row];
            sol.dual_certificate[orig_row] = -res.y(i) / cp.row_norms[i];
        }
    }

    if (res.status != SolveStatus::Optimal && res.status != SolveStatus::NumericalLimit) {
        return sol;
    }

    // Extract block and scalar values in the caller's terms.
    sol.block_values.reserve(p.blocks.size());
    for (std::size_t bidx = 0; bidx < p.blocks.size(); ++bidx) {
        const int cone = cp.block_cone[bidx];
        sol.block_values.push_back(complexify(res.x[cone], p.blocks[bidx].dim));
    }
    sol.scalar_values.assign(p.scalars.size(), 0.0);
    {
        // Presolve may have eliminated pinned scalars; walk both index spaces.
        std::size_t kept = 0;
        std::vector<bool> fixed(p.scalars.size(), false);
        for (const auto& [idx, value] : pre.fixed_scalars) {
            sol.scalar_values[idx] = value;
            fixed[idx] = true;
        }
        for (std::size_t k = 0; k < p.scalars.size(); ++k) {
            if (fixed[k]) continue;
            const auto& sc = cp.scalar_cones[kept++];
            sol.scalar_values[k] = sc.lo + res.x[sc.ucone](0, 0);
        }
    }

    // Objective evaluated from the extracted values (pinned scalars are
    // already present in scalar_values); identical to -res.pobj plus the
    // presolve offset up to the realification roundoff.
    double obj = 0.0;
    for (const auto& t : p.objective_mat) obj += frobenius_inner(t.coeff, sol.block_values[t.block]);
    for (const auto& t : p.objective_scalar) obj += t.coeff * sol.scalar_values[t.scalar];
    sol.objective = obj;
    sol.dual_objective = -res.dobj + pre.objective_offset;

#ifndef NDEBUG
    if (sol.status == SolveStatus::Optimal) {
        // Weak duality in the caller's maximization form. The homogeneous
        // iterates are infeasible en route, so this is only meaningful once
        // the residuals are small, i.e. at the returned solution.
        assert(sol.dual_objective >= sol.objective - 1e-6 * (1.0 + std::abs(sol.objective)));
    }
#endif
    return sol;
}

} // namespace incompat
