// incompat: certify whether a set of quantum measurements respects or
// violates a compatibility structure, reproduce the analytic MUB bounds,
// evaluate the state-discrimination witness, and run the finite-statistics
// experiment simulation.
//
// Exit codes: 0 success, 1 configuration error, 2 solver failure.

#include <cstdlib>
#include <fstream>
#include <future>
#include <set>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "incompat/driver.hpp"
#include "incompat/qsd.hpp"
#include "incompat/serialize.hpp"
#include "incompat/witness.hpp"

namespace {

using namespace incompat;

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("INCOMPAT_LOG");
        if (!env) return 0;
        const std::string v(env);
        if (v == "debug" || v == "2") return 2;
        if (v == "info" || v == "1") return 1;
        return 0;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[incompat] " << msg << "\n";
}

struct WitnessMode {
    std::vector<int> pair;
    std::vector<int> genuine;
    std::string structure_text;
    std::vector<std::string> pins;
    bool certificate = false;
    std::string dump_path;
    int grid = 0;
    std::string grid_csv;
};

StructureSpec resolve_structure(const Scenario& scenario, const WitnessMode& mode) {
    StructureSpec spec;
    if (!mode.genuine.empty()) {
        spec = pairwise_patterns(mode.genuine);
    } else if (!mode.structure_text.empty()) {
        spec = parse_structure_text(mode.structure_text);
    } else if (scenario.structure) {
        spec = *scenario.structure;
    } else {
        throw ConfigError("witness: no structure given (use --pair/--genuine/--structure or a "
                          "\"structure\" block in the scenario)");
    }
    for (const auto& text : mode.pins) {
        const auto eq = text.rfind('=');
        if (eq == std::string::npos) {
            throw ConfigError("witness: --pin expects KEY=PROB, got \"" + text + "\"");
        }
        try {
            spec = pin(spec, text.substr(0, eq), std::stod(text.substr(eq + 1)));
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("witness: ") + e.what());
        } catch (const std::exception&) {
            throw ConfigError("witness: bad pin probability in \"" + text + "\"");
        }
    }
    return spec;
}

std::vector<int> witness_scope(const Scenario& scenario, const WitnessMode& mode) {
    if (mode.pair.size() == 2) return {mode.pair[0], mode.pair[1]};
    std::set<int> scope;
    const StructureSpec spec = resolve_structure(scenario, mode);
    for (const auto& p : spec.patterns) {
        for (const auto& s : p.compatible_subsets) scope.insert(s.begin(), s.end());
        scope.insert(p.free_indices.begin(), p.free_indices.end());
    }
    return {scope.begin(), scope.end()};
}

RobustnessReport run_witness(const Scenario& scenario, const WitnessMode& mode) {
    const Assembly& assembly = scenario.require_assembly();
    if (mode.pair.size() == 2) {
        return pairwise_robustness(assembly, mode.pair[0], mode.pair[1], scenario.solver);
    }
    return structure_robustness(assembly, resolve_structure(scenario, mode), scenario.solver);
}

// Weight-simplex grid: every composition of `grid` into |scope| parts. Each
// sample reports the boundary point eta* the weighted hyperplane touches,
// i.e. surface data for the compatibility region.
void enumerate_compositions(int total, int parts, std::vector<int>& cur,
                            std::vector<std::vector<int>>& out) {
    if (parts == 1) {
        cur.push_back(total);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int head = total; head >= 0; --head) {
        cur.push_back(head);
        enumerate_compositions(total - head, parts - 1, cur, out);
        cur.pop_back();
    }
}

void run_grid(const Scenario& scenario, const WitnessMode& mode, std::ostream& out) {
    const Assembly& assembly = scenario.require_assembly();
    const std::vector<int> scope = witness_scope(scenario, mode);
    out << "# weight-simplex sweep, grid=" << mode.grid << "\n";
    for (int x : scope) out << "q_" << x << ",";
    out << "R";
    for (int x : scope) out << ",eta_" << x;
    out << "\n";

    std::vector<std::vector<int>> compositions;
    std::vector<int> cur;
    enumerate_compositions(mode.grid, static_cast<int>(scope.size()), cur, compositions);
    for (const auto& comp : compositions) {
        RVector weights = RVector::Zero(assembly.size());
        for (std::size_t i = 0; i < scope.size(); ++i) {
            weights(scope[i] - 1) = static_cast<double>(comp[i]) / mode.grid;
        }
        Assembly weighted = set_weights(assembly, weights);
        RobustnessReport report;
        if (mode.pair.size() == 2) {
            report = pairwise_robustness(weighted, mode.pair[0], mode.pair[1], scenario.solver);
        } else {
            report =
                structure_robustness(weighted, resolve_structure(scenario, mode), scenario.solver);
        }
        for (std::size_t i = 0; i < scope.size(); ++i) {
            out << static_cast<double>(comp[i]) / mode.grid << ",";
        }
        out << report.robustness;
        for (int x : scope) out << "," << report.sharpness.at(x);
        out << "\n";
    }
}

int cmd_witness(const std::vector<std::string>& files, const WitnessMode& mode, bool all) {
    std::vector<std::string> outputs(files.size());
    auto run_one = [&](std::size_t i) {
        Scenario scenario = load_scenario(files[i]);
        if (log_level() >= 2) scenario.solver.verbose = true;
        if (!mode.dump_path.empty()) {
            const SdpProblem problem =
                mode.pair.size() == 2
                    ? build_pairwise_problem(scenario.require_assembly(), mode.pair[0],
                                             mode.pair[1])
                    : build_structure_problem(scenario.require_assembly(),
                                              resolve_structure(scenario, mode));
            std::ofstream dump(mode.dump_path);
            if (!dump) throw ConfigError("witness: cannot write " + mode.dump_path);
            dump << problem.dump_json();
            log_info("wrote SDP dump to " + mode.dump_path);
        }
        if (mode.grid > 0) {
            if (mode.grid_csv.empty()) throw ConfigError("witness: --grid needs --grid-csv FILE");
            std::ofstream csv(mode.grid_csv);
            if (!csv) throw ConfigError("witness: cannot write " + mode.grid_csv);
            run_grid(scenario, mode, csv);
            log_info("wrote grid sweep to " + mode.grid_csv);
        }
        const RobustnessReport report = run_witness(scenario, mode);
        outputs[i] = robustness_report_json(report, mode.certificate);
    };

    if (all && files.size() > 1) {
        // Independent scenarios fan out across worker threads.
        std::vector<std::future<void>> futures;
        for (std::size_t i = 0; i < files.size(); ++i) {
            futures.push_back(std::async(std::launch::async, run_one, i));
        }
        for (auto& f : futures) f.get();
        std::cout << "[\n";
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            std::cout << outputs[i] << (i + 1 < outputs.size() ? ",\n" : "\n");
        }
        std::cout << "]\n";
    } else {
        run_one(0);
        std::cout << outputs[0] << "\n";
    }
    return 0;
}

int cmd_qsd(const std::string& file, int s, int t) {
    Scenario scenario = load_scenario(file);
    if (log_level() >= 2) scenario.solver.verbose = true;
    const QsdReport report = witness_w2(scenario.require_assembly(), s, t, scenario.solver);
    std::cout << qsd_report_json(report) << "\n";
    return 0;
}

int cmd_simulate(const std::string& file, std::optional<std::int64_t> shots,
                 std::optional<std::uint64_t> seed, const std::string& counts_csv) {
    const Scenario scenario = load_scenario(file);
    std::vector<CountRecord> records;
    const std::vector<SimulationRow> rows = run_scenario_simulation(
        scenario, shots, seed, counts_csv.empty() ? nullptr : &records);
    if (!counts_csv.empty()) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::string path = counts_csv + "_" + rows[i].name + ".csv";
            std::ofstream out(path);
            if (!out) throw ConfigError("simulate: cannot write " + path);
            out << records[i].to_csv();
            log_info("wrote counts to " + path);
        }
    }
    const std::int64_t eff_shots = shots.value_or(
        scenario.simulation ? scenario.simulation->shots : 0);
    const std::uint64_t eff_seed = seed.value_or(
        scenario.simulation ? scenario.simulation->seed : 0);
    std::cout << simulation_report_json(rows, eff_shots, eff_seed) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"certify compatibility structures of quantum measurements"};
    app.require_subcommand(1);

    // witness
    auto* witness = app.add_subcommand(
        "witness", "solve the noise-robustness SDP for a compatibility structure");
    std::vector<std::string> witness_files;
    WitnessMode mode;
    bool all = false;
    witness->add_option("scenario", witness_files, "scenario JSON file(s)")
        ->required()
        ->check(CLI::ExistingFile);
    witness->add_option("--pair", mode.pair, "pairwise robustness of measurements s t")
        ->expected(2);
    witness->add_option("--genuine", mode.genuine,
                        "genuine n-wise robustness of a measurement group");
    witness->add_option("--structure", mode.structure_text,
                        "structure syntax, e.g. pairs(1,2,3) or full(1,2,3)");
    witness->add_option("--pin", mode.pins, "pin a pattern probability, e.g. [1,2]=0");
    witness->add_flag("--certificate", mode.certificate,
                      "include the parent-measurement certificate in the report");
    witness->add_flag("--all", all, "run multiple scenarios across worker threads");
    witness->add_option("--grid", mode.grid, "sample the weight simplex with N subdivisions");
    witness->add_option("--grid-csv", mode.grid_csv, "CSV output for the weight-grid sweep");
    witness->add_option("--dump-sdp", mode.dump_path, "dump the SDP (JSON) before solving");

    // bound
    auto* bound = app.add_subcommand("bound", "closed-form MUB genuine n-wise bound");
    int bound_d = 0, bound_n = 0;
    bound->add_option("--d", bound_d, "Hilbert space dimension")->required();
    bound->add_option("--n", bound_n, "group size")->required();

    // qsd
    auto* qsd = app.add_subcommand("qsd", "state-discrimination witness W2 for a pair");
    std::string qsd_file;
    std::vector<int> qsd_pair;
    qsd->add_option("scenario", qsd_file, "scenario JSON file")->required()->check(CLI::ExistingFile);
    qsd->add_option("--pair", qsd_pair, "measurement pair s t")->expected(2)->required();

    // simulate
    auto* simulate = app.add_subcommand(
        "simulate", "finite-statistics simulation of the configured hyperplanes");
    std::string sim_file, counts_csv;
    std::int64_t sim_shots = -1;
    std::int64_t sim_seed = -1;
    simulate->add_option("scenario", sim_file, "scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("--shots", sim_shots, "override shots per setting");
    simulate->add_option("--seed", sim_seed, "override the RNG seed");
    simulate->add_option("--counts-csv", counts_csv, "write per-plane count CSVs to PATH_<name>.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (witness->parsed()) {
            int modes = 0;
            modes += mode.pair.empty() ? 0 : 1;
            modes += mode.genuine.empty() ? 0 : 1;
            modes += mode.structure_text.empty() ? 0 : 1;
            if (modes > 1) {
                throw ConfigError("witness: --pair, --genuine and --structure are exclusive");
            }
            if (witness_files.size() > 1 && !all) {
                throw ConfigError("witness: pass --all to run multiple scenarios");
            }
            return cmd_witness(witness_files, mode, all);
        }
        if (bound->parsed()) {
            if (bound_d < 2 || bound_n < 2) {
                throw ConfigError("bound: --d and --n must be >= 2");
            }
            std::printf("%.6f\n", mub_bound(bound_d, bound_n));
            return 0;
        }
        if (qsd->parsed()) {
            return cmd_qsd(qsd_file, qsd_pair[0], qsd_pair[1]);
        }
        if (simulate->parsed()) {
            std::optional<std::int64_t> shots;
            if (sim_shots >= 0) shots = sim_shots;
            std::optional<std::uint64_t> seed;
            if (sim_seed >= 0) seed = static_cast<std::uint64_t>(sim_seed);
            return cmd_simulate(sim_file, shots, seed, counts_csv);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
