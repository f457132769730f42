// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Run via ctest or directly:
//   ./tests/incompat_acceptance
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "incompat/driver.hpp"
#include "incompat/qsd.hpp"
#include "incompat/serialize.hpp"
#include "incompat/witness.hpp"
#include "test_util.hpp"

using namespace incompat;

namespace {

int failures = 0;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    if (!pass) ++failures;
}

std::string fmt(const char* format, ...) {
    char buffer[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buffer, sizeof(buffer), format, args);
    va_end(args);
    return buffer;
}

// Solver-health ledger for criterion 9: every Optimal solve recorded here.
struct HealthStats {
    double worst_gap = 0.0;
    double worst_residual = 0.0;
    int solves = 0;
} health;

void track(const SolverSummary& s) {
    if (s.status == SolveStatus::Optimal) {
        health.worst_gap = std::max(health.worst_gap, s.duality_gap);
        health.worst_residual = std::max(health.worst_residual, s.feasibility_residual);
        ++health.solves;
    }
}

Measurement unbiased_qubit(const Eigen::Vector3d& bloch) {
    CMatrix sx(2, 2), sy(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, Complex(0, -1), Complex(0, 1), 0;
    sz << 1, 0, 0, -1;
    const CMatrix dot = bloch(0) * sx + bloch(1) * sy + bloch(2) * sz;
    const CMatrix id = CMatrix::Identity(2, 2);
    return Measurement({HermitianOperator(0.5 * (id + dot)), HermitianOperator(0.5 * (id - dot))});
}

void criterion_1(const Assembly& paulis) {
    Timer timer;
    const RobustnessReport r = pairwise_robustness(paulis, 1, 3);
    track(r.solver);
    const double err = std::abs(r.robustness - 0.70711);
    const double secs = timer.seconds();
    report(1, err <= 1e-4 && secs < 1.0,
           fmt("pairwise Pauli boundary R=%.6f (|err|=%.1e <= 1e-4, %.2fs < 1s)", r.robustness,
               err, secs));
}

void criterion_2(const Assembly& paulis) {
    Timer timer;
    const RobustnessReport r = genuine_robustness(paulis, {1, 2, 3});
    track(r.solver);
    const double err = std::abs(r.robustness - 0.80474);
    const double secs = timer.seconds();
    report(2, err <= 1e-4 && secs < 5.0,
           fmt("genuine 3-wise Pauli R=%.6f, boundary sum %.6f vs sqrt(2)+1 (|err|=%.1e <= 1e-4, "
               "%.2fs < 5s)",
               r.robustness, 3.0 * r.robustness, err, secs));
}

void criterion_3(const Assembly& paulis) {
    Timer timer;
    const RobustnessReport r = full_compat_robustness(paulis, {1, 2, 3});
    track(r.solver);
    const double err = std::abs(r.robustness - 0.57735);
    const double secs = timer.seconds();
    report(3, err <= 1e-4 && secs < 5.0,
           fmt("full-compat Pauli R=%.6f (|err|=%.1e <= 1e-4, %.2fs < 5s)", r.robustness, err,
               secs));
}

void criterion_4(const Assembly& mub) {
    Timer timer;
    bool pass = true;
    std::string detail;

    const std::vector<std::vector<int>> groups{{1, 2, 3}, {1, 2, 4}, {1, 3, 4}, {2, 3, 4}};
    std::vector<double> g3;
    for (const auto& group : groups) {
        const RobustnessReport r = genuine_robustness(mub, group);
        track(r.solver);
        g3.push_back(r.robustness);
        pass &= std::abs(r.robustness - 0.78868) <= 1e-3;
    }
    double spread = 0.0;
    for (double v : g3) spread = std::max(spread, std::abs(v - g3[0]));
    pass &= spread <= 1e-6;

    const RobustnessReport g4 = genuine_robustness(mub, {1, 2, 3, 4});
    track(g4.solver);
    pass &= std::abs(g4.robustness - 0.84151) <= 1e-3;

    RVector w = RVector::Zero(4);
    w << 1.0 / 6, 1.0 / 3, 1.0 / 2, 0.0;
    const Assembly weighted = set_weights(mub, w);
    const RobustnessReport asym = genuine_robustness(weighted, {1, 2, 3});
    track(asym.solver);
    pass &= std::abs(asym.robustness - 0.864) <= 1e-3;

    const RobustnessReport pinned =
        structure_robustness(weighted, pin(pairwise_patterns({1, 2, 3}), "[1,2]", 0.0));
    track(pinned.solver);
    pass &= std::abs(pinned.robustness - 0.854) <= 1e-3;

    const double secs = timer.seconds();
    pass &= secs < 120.0;
    report(4, pass,
           fmt("Table I SDP: 3-wise %.5f (spread %.1e), 4-wise %.5f, asym %.5f, pinned %.5f "
               "(each +-1e-3, %.1fs < 120s)",
               g3[0], spread, g4.robustness, asym.robustness, pinned.robustness, secs));
}

void criterion_5() {
    bool pass = true;
    double worst = 0.0;
    for (const auto& [d, n] : std::vector<std::pair<int, int>>{
             {2, 2}, {2, 3}, {3, 2}, {3, 3}, {3, 4}}) {
        const Assembly mub = mub_assembly(d, n);
        std::vector<int> group;
        for (int x = 1; x <= n; ++x) group.push_back(x);
        const RobustnessReport r = genuine_robustness(mub, group);
        track(r.solver);
        const double err = std::abs(r.robustness - mub_bound(d, n));
        worst = std::max(worst, err);
        pass &= err <= 1e-3;
    }
    report(5, pass, fmt("analytic/numeric MUB agreement on 5 cases (worst |err|=%.1e <= 1e-3)",
                        worst));
}

void criterion_6() {
    std::mt19937_64 rng(20230406);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> sharp(0.3, 1.0);
    int tested = 0, skipped = 0, disagreements = 0;
    double worst_boundary = 0.0;

    for (int trial = 0; trial < 200; ++trial) {
        Eigen::Vector3d d1(normal(rng), normal(rng), normal(rng));
        Eigen::Vector3d d2(normal(rng), normal(rng), normal(rng));
        d1.normalize();
        d2.normalize();
        const Eigen::Vector3d b1 = sharp(rng) * d1;
        const Eigen::Vector3d b2 = sharp(rng) * d2;
        const double busch_sum = (b1 + b2).norm() + (b1 - b2).norm();

        const Assembly pair(
            std::vector<Measurement>{unbiased_qubit(b1), unbiased_qubit(b2)});
        const RobustnessReport r = pairwise_robustness(pair, 1, 2);
        track(r.solver);

        if (std::abs(busch_sum - 2.0) < 1e-4) {
            ++skipped;
        } else {
            ++tested;
            const bool oracle_compatible = busch_pair_oracle(b1, b2);
            const bool sdp_compatible = r.verdict == Verdict::CompatiblePossible;
            if (oracle_compatible != sdp_compatible) ++disagreements;
        }

        // Critical balanced sharpness against the oracle boundary (unit pair).
        const Assembly unit_pair(
            std::vector<Measurement>{unbiased_qubit(d1), unbiased_qubit(d2)});
        const RobustnessReport ru = pairwise_robustness(unit_pair, 1, 2);
        track(ru.solver);
        const double oracle_critical = 2.0 / ((d1 + d2).norm() + (d1 - d2).norm());
        worst_boundary = std::max(worst_boundary,
                                  std::abs(ru.robustness - std::min(1.0, oracle_critical)));
    }
    report(6, disagreements == 0 && worst_boundary <= 1e-4,
           fmt("Busch oracle agreement on %d pairs (%d near-boundary skipped, %d disagreements, "
               "worst boundary |err|=%.1e <= 1e-4)",
               tested, skipped, disagreements, worst_boundary));
}

void criterion_7() {
    std::mt19937_64 rng(20230817);
    int disagreements = 0, tested = 0;
    auto check_pair = [&](int d) {
        const Assembly pair(std::vector<Measurement>{testutil::random_projective(rng, d),
                                                     testutil::random_projective(rng, d)});
        const RobustnessReport r = pairwise_robustness(pair, 1, 2);
        track(r.solver);
        const QsdReport q = witness_w2(pair, 1, 2);
        track(q.solver);
        ++tested;
        if ((q.advantage > 1e-5) != (r.robustness < 1.0 - 1e-5)) ++disagreements;
    };
    for (int i = 0; i < 100; ++i) check_pair(2);
    for (int i = 0; i < 50; ++i) check_pair(3);

    const QsdReport xz = witness_w2(pauli_assembly(), 1, 3);
    track(xz.solver);
    const double w2_err = std::abs(xz.advantage - 0.14645);
    report(7, disagreements == 0 && w2_err <= 1e-4,
           fmt("QSD cross-validation on %d sharp pairs (%d disagreements); X,Z W2=%.6f "
               "(|err|=%.1e <= 1e-4)",
               tested, disagreements, xz.advantage, w2_err));
}

void criterion_8() {
    std::mt19937_64 rng(20230510);
    bool pass = true;
    double worst_violation = 0.0;
    auto check = [&](double lhs, double rhs) {
        // lhs must not exceed rhs beyond tolerance
        worst_violation = std::max(worst_violation, lhs - rhs);
        pass &= lhs <= rhs + 1e-6;
    };
    for (int trial = 0; trial < 100; ++trial) {
        const int d = (trial % 2 == 0) ? 2 : 3;
        const int m = (trial % 4 < 2) ? 3 : 4;
        const Assembly assembly = testutil::random_assembly(rng, d, m);

        StructureSpec two;
        two.patterns.push_back(make_pattern({1, 2}, {3}));
        two.patterns.push_back(make_pattern({1, 3}, {2}));
        const StructureSpec three = pairwise_patterns({1, 2, 3});

        const RobustnessReport r_two = structure_robustness(assembly, two);
        const RobustnessReport r_three = structure_robustness(assembly, three);
        const RobustnessReport r_pinned =
            structure_robustness(assembly, pin(three, "[1,2]", 0.0));
        const RobustnessReport r_full = structure_robustness(assembly, full_pattern({1, 2, 3}));
        track(r_two.solver);
        track(r_three.solver);
        track(r_pinned.solver);
        track(r_full.solver);

        check(r_two.robustness, r_three.robustness);    // adding a pattern
        check(r_pinned.robustness, r_three.robustness); // pinning to zero
        check(r_full.robustness, r_three.robustness);   // full inside pairwise hull
    }
    report(8, pass,
           fmt("hull monotonicity on 100 random assemblies (worst violation %.1e <= 1e-6)",
               worst_violation));
}

void criterion_9() {
    // Health of everything recorded so far plus a determinism battery.
    bool pass = health.solves > 0;
    pass &= health.worst_gap <= 1e-7;
    pass &= health.worst_residual <= 1e-7;

    const Assembly paulis = pauli_assembly();
    const Assembly mub = mub_assembly(3, 3);
    double worst_rerun = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double a = genuine_robustness(paulis, {1, 2, 3}).robustness;
        const double b = genuine_robustness(paulis, {1, 2, 3}).robustness;
        const double c = pairwise_robustness(mub, 1, 2).robustness;
        const double d = pairwise_robustness(mub, 1, 2).robustness;
        worst_rerun = std::max({worst_rerun, std::abs(a - b), std::abs(c - d)});
    }
    pass &= worst_rerun <= 1e-12;
    report(9, pass,
           fmt("solver health over %d Optimal solves: worst gap %.1e <= 1e-7, worst residual "
               "%.1e <= 1e-7, rerun drift %.1e <= 1e-12",
               health.solves, health.worst_gap, health.worst_residual, worst_rerun));
}

void criterion_10(const std::string& scenario_path) {
    Timer timer;
    const Scenario scenario = load_scenario(scenario_path);
    const std::vector<SimulationRow> rows = run_scenario_simulation(scenario, 100000);
    bool pass = rows.size() == 7;
    double worst_sigma = 0.0;
    for (const auto& row : rows) {
        const double sigmas = std::abs(row.estimate - row.prediction) / row.std_error;
        worst_sigma = std::max(worst_sigma, sigmas);
        pass &= sigmas <= 3.0;
    }
    // fidelity_report estimator consistency at the reference average fidelity.
    const Assembly mub = scenario.require_assembly();
    NoiseModel noise;
    for (int x = 1; x <= 4; ++x) noise.white_noise_rate[x] = 0.2;
    noise.prep_fidelity = 0.9873;
    noise.shots = 1000000;
    noise.rng_seed = 11;
    const double f_est = fidelity_report(mub, noise);
    const double f_sigma = std::sqrt(0.9873 * (1 - 0.9873) / (12.0 * noise.shots));
    pass &= std::abs(f_est - 0.9873) <= 3.0 * f_sigma;

    const double secs = timer.seconds();
    pass &= secs < 60.0;
    report(10, pass,
           fmt("table1 simulation: 7 planes within 3 std errors (worst %.2f sigma), fidelity "
               "%.5f vs 0.9873 (%.1fs < 60s)",
               worst_sigma, f_est, secs));
}

} // namespace

int main(int argc, char** argv) {
    const std::string scenario_path =
        argc > 1 ? argv[1] : std::string(SCENARIO_DIR) + "/table1.json";

    const Assembly paulis = pauli_assembly();
    const Assembly mub = mub_assembly(3, 4);

    criterion_1(paulis);
    criterion_2(paulis);
    criterion_3(paulis);
    criterion_4(mub);
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10(scenario_path);

    if (failures == 0) {
        std::printf("acceptance: all 10 criteria passed\n");
    } else {
        std::printf("acceptance: %d criterion(s) FAILED\n", failures);
    }
    return failures;
}
