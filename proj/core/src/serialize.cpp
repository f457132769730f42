#include "incompat/serialize.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace incompat {

using detail::ordered_json;

namespace {

StructureSpec structure_from_json(const ordered_json& j);

std::vector<int> int_list(const ordered_json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a nonempty array of integers");
    std::vector<int> out;
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw ConfigError(what + ": expected integers");
        out.push_back(v.get<int>());
    }
    return out;
}

std::vector<double> double_list(const ordered_json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a nonempty numeric array");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ConfigError(what + ": expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

Assembly assembly_from_json(const ordered_json& spec, const ordered_json& root) {
    if (!spec.is_object()) throw ConfigError("scenario: \"assembly\" must be an object");

    std::optional<Assembly> assembly;
    if (spec.contains("constructor")) {
        const std::string name = spec.at("constructor").get<std::string>();
        if (name == "pauli") {
            assembly = pauli_assembly();
        } else if (name == "mub") {
            if (!spec.contains("d") || !spec.contains("k")) {
                throw ConfigError("scenario: mub constructor needs \"d\" and \"k\"");
            }
            try {
                assembly = mub_assembly(spec.at("d").get<int>(), spec.at("k").get<int>());
            } catch (const InvalidArgument& e) {
                throw ConfigError(std::string("scenario: ") + e.what());
            }
        } else {
            throw ConfigError("scenario: unknown assembly constructor \"" + name +
                              "\" (expected \"pauli\" or \"mub\")");
        }
    } else if (spec.contains("operators")) {
        const auto& ops = spec.at("operators");
        if (!ops.is_array() || ops.empty()) {
            throw ConfigError("scenario: \"operators\" must be an array of measurements");
        }
        std::vector<Measurement> measurements;
        for (const auto& m : ops) {
            if (!m.is_array() || m.empty()) {
                throw ConfigError("scenario: each measurement must be an array of operator literals");
            }
            std::vector<HermitianOperator> effects;
            for (const auto& e : m) effects.push_back(detail::operator_from_json(e));
            try {
                measurements.emplace_back(std::move(effects));
            } catch (const InvalidArgument& e) {
                throw ConfigError(std::string("scenario: invalid measurement: ") + e.what());
            }
        }
        assembly = Assembly(std::move(measurements));
    } else {
        throw ConfigError("scenario: assembly needs \"constructor\" or \"operators\"");
    }

    try {
        if (root.contains("weights") || root.contains("outcome_priors")) {
            RVector weights = assembly->weights();
            if (root.contains("weights")) {
                const auto w = double_list(root.at("weights"), "scenario weights");
                weights = Eigen::Map<const RVector>(w.data(), static_cast<Eigen::Index>(w.size()));
            }
            std::vector<RVector> priors = assembly->outcome_priors();
            if (root.contains("outcome_priors")) {
                const auto& pj = root.at("outcome_priors");
                if (!pj.is_array() || pj.size() != priors.size()) {
                    throw ConfigError("scenario: outcome_priors must list one prior per measurement");
                }
                for (std::size_t x = 0; x < priors.size(); ++x) {
                    const auto row = double_list(pj.at(x), "scenario outcome_priors");
                    priors[x] =
                        Eigen::Map<const RVector>(row.data(), static_cast<Eigen::Index>(row.size()));
                }
            }
            assembly = Assembly(assembly->measurements(), std::move(weights), std::move(priors));
        }
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    return *assembly;
}

StructureSpec structure_from_json(const ordered_json& j) {
    if (!j.is_object() || !j.contains("patterns")) {
        throw ConfigError("scenario: \"structure\" must be an object with \"patterns\"");
    }
    StructureSpec spec;
    const auto& pats = j.at("patterns");
    if (pats.is_string()) {
        spec = parse_structure_text(pats.get<std::string>());
    } else if (pats.is_array()) {
        for (const auto& pj : pats) {
            if (!pj.is_object() || !pj.contains("compatible")) {
                throw ConfigError("scenario: explicit pattern needs \"compatible\"");
            }
            const auto& subsets = pj.at("compatible");
            if (!subsets.is_array() || subsets.size() != 1) {
                throw ConfigError("scenario: pattern \"compatible\" must hold exactly one subset");
            }
            std::vector<int> free;
            if (pj.contains("free")) free = int_list(pj.at("free"), "pattern free");
            try {
                spec.patterns.push_back(
                    make_pattern(int_list(subsets.at(0), "pattern subset"), std::move(free)));
            } catch (const InvalidArgument& e) {
                throw ConfigError(std::string("scenario: ") + e.what());
            }
        }
    } else {
        throw ConfigError("scenario: \"patterns\" must be a string or an array");
    }
    if (j.contains("pin")) {
        const auto& pins = j.at("pin");
        if (!pins.is_object()) throw ConfigError("scenario: \"pin\" must be an object");
        for (const auto& [key, value] : pins.items()) {
            if (!value.is_number()) throw ConfigError("scenario: pin values must be numbers");
            try {
                spec = pin(spec, key, value.get<double>());
            } catch (const InvalidArgument& e) {
                throw ConfigError(std::string("scenario: ") + e.what());
            }
        }
    }
    return spec;
}

ordered_json solver_summary_json(const SolverSummary& s) {
    return ordered_json{{"status", to_string(s.status)},
                        {"objective", s.objective},
                        {"duality_gap", s.duality_gap},
                        {"feasibility_residual", s.feasibility_residual},
                        {"iterations", s.iterations}};
}

} // namespace

const Assembly& Scenario::require_assembly() const {
    if (!assembly) throw ConfigError("scenario: missing assembly");
    return *assembly;
}

std::string operator_literal(const HermitianOperator& op) {
    return detail::operator_to_json(op).dump();
}

HermitianOperator parse_operator_literal(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("operator literal: ") + e.what());
    }
    return detail::operator_from_json(j);
}

StructureSpec parse_structure_text(const std::string& text) {
    const auto open = text.find('(');
    const auto close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open ||
        close != text.size() - 1) {
        throw ConfigError("structure syntax: expected pairs(i,j,...) or full(i,j,...), got \"" +
                          text + "\"");
    }
    const std::string head = text.substr(0, open);
    const std::string body = text.substr(open + 1, close - open - 1);
    std::vector<int> group;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int value = std::stoi(item, &used);
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
            if (used != item.size()) throw std::invalid_argument(item);
            group.push_back(value);
        } catch (const std::exception&) {
            throw ConfigError("structure syntax: bad index \"" + item + "\" in \"" + text + "\"");
        }
    }
    try {
        if (head == "pairs") return pairwise_patterns(group);
        if (head == "full") return full_pattern(group);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("structure syntax: ") + e.what());
    }
    throw ConfigError("structure syntax: unknown form \"" + head + "\" (expected pairs or full)");
}

Scenario parse_scenario(const std::string& json_text) {
    ordered_json root;
    try {
        root = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("scenario: top level must be an object");
    if (!root.contains("assembly")) throw ConfigError("scenario: missing \"assembly\"");

    Scenario sc;
    sc.assembly = assembly_from_json(root.at("assembly"), root);
    if (root.contains("dimension")) {
        sc.dimension = root.at("dimension").get<int>();
        if (*sc.dimension != sc.assembly->dim()) {
            throw ConfigError("scenario: \"dimension\" (" + std::to_string(*sc.dimension) +
                              ") does not match the assembly dimension (" +
                              std::to_string(sc.assembly->dim()) + ")");
        }
    }
    if (root.contains("structure")) sc.structure = structure_from_json(root.at("structure"));
    if (root.contains("solver")) {
        const auto& s = root.at("solver");
        if (!s.is_object()) throw ConfigError("scenario: \"solver\" must be an object");
        if (s.contains("gap_tol")) sc.solver.gap_tol = s.at("gap_tol").get<double>();
        if (s.contains("feas_tol")) sc.solver.feas_tol = s.at("feas_tol").get<double>();
        if (s.contains("max_iter")) sc.solver.max_iter = s.at("max_iter").get<int>();
        if (s.contains("seed")) sc.solver.seed = s.at("seed").get<std::uint64_t>();
    }
    if (root.contains("simulation")) {
        const auto& s = root.at("simulation");
        if (!s.is_object()) throw ConfigError("scenario: \"simulation\" must be an object");
        ScenarioSimulation sim;
        if (s.contains("shots")) sim.shots = s.at("shots").get<int>();
        if (s.contains("seed")) sim.seed = s.at("seed").get<std::uint64_t>();
        if (s.contains("prep_fidelity")) sim.prep_fidelity = s.at("prep_fidelity").get<double>();
        if (s.contains("hyperplanes")) {
            const auto& rows = s.at("hyperplanes");
            if (!rows.is_array()) throw ConfigError("scenario: \"hyperplanes\" must be an array");
            for (const auto& r : rows) {
                ScenarioHyperplane h;
                if (!r.is_object() || !r.contains("group")) {
                    throw ConfigError("scenario: each hyperplane needs a \"group\"");
                }
                h.name = r.contains("name") ? r.at("name").get<std::string>()
                                            : "H" + std::to_string(sim.hyperplanes.size() + 1);
                h.group = int_list(r.at("group"), "hyperplane group");
                if (r.contains("weights")) h.weights = double_list(r.at("weights"), "hyperplane weights");
                if (r.contains("sharpness")) {
                    h.sharpness = double_list(r.at("sharpness"), "hyperplane sharpness");
                }
                if (r.contains("pin")) {
                    for (const auto& [key, value] : r.at("pin").items()) {
                        h.pins[key] = value.get<double>();
                    }
                }
                sim.hyperplanes.push_back(std::move(h));
            }
        }
        sc.simulation = std::move(sim);
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("scenario: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string robustness_report_json(const RobustnessReport& r, bool include_certificate) {
    ordered_json doc;
    doc["R"] = r.robustness;
    ordered_json eta = ordered_json::object();
    for (const auto& [x, value] : r.sharpness) eta[std::to_string(x)] = value;
    doc["eta_star"] = std::move(eta);
    ordered_json probs = ordered_json::object();
    for (const auto& [key, value] : r.pattern_probs) probs[key] = value;
    doc["pattern_probs"] = std::move(probs);
    doc["verdict"] = to_string(r.verdict);
    doc["solver"] = solver_summary_json(r.solver);
    if (include_certificate) {
        ordered_json branches = ordered_json::array();
        for (const auto& b : r.certificate.branches) {
            ordered_json bj;
            bj["pattern"] = b.pattern.key();
            bj["probability"] = b.probability;
            ordered_json parents = ordered_json::array();
            for (const auto& g : b.parent) parents.push_back(detail::operator_to_json(g));
            bj["parent"] = std::move(parents);
            bj["parent_outcomes"] = b.parent_outcomes;
            ordered_json free = ordered_json::object();
            for (const auto& [x, ops] : b.free_effects) {
                ordered_json list = ordered_json::array();
                for (const auto& op : ops) list.push_back(detail::operator_to_json(op));
                free[std::to_string(x)] = std::move(list);
            }
            bj["free"] = std::move(free);
            branches.push_back(std::move(bj));
        }
        doc["certificate"] = ordered_json{{"branches", std::move(branches)}};
    }
    return doc.dump(2);
}

std::string qsd_report_json(const QsdReport& r) {
    ordered_json doc;
    doc["pair"] = ordered_json::array({r.s, r.t});
    doc["P_g"] = r.guessing_probability;
    doc["P_g_compatible"] = r.compatible_guessing;
    doc["W2"] = r.advantage;
    ordered_json ensembles = ordered_json::array();
    for (const auto& ens : r.ensembles) {
        ordered_json states = ordered_json::array();
        for (int i = 0; i < ens.size(); ++i) {
            states.push_back(ordered_json{{"prior", ens.prior(i)},
                                          {"state", detail::operator_to_json(ens.state(i))}});
        }
        ensembles.push_back(std::move(states));
    }
    doc["ensembles"] = std::move(ensembles);
    ordered_json povm = ordered_json::array();
    for (const auto& g : r.discriminating_povm) povm.push_back(detail::operator_to_json(g));
    doc["povm"] = std::move(povm);
    doc["dual_witness"] = detail::operator_to_json(r.dual_witness);
    doc["solver"] = solver_summary_json(r.solver);
    return doc.dump(2);
}

std::string simulation_report_json(const std::vector<SimulationRow>& rows, int shots,
                                   std::uint64_t seed) {
    ordered_json doc;
    doc["shots"] = shots;
    doc["seed"] = seed;
    ordered_json rj = ordered_json::array();
    for (const auto& row : rows) {
        rj.push_back(ordered_json{{"plane", row.name},
                                  {"group", row.group},
                                  {"weights", row.weights},
                                  {"prediction", row.prediction},
                                  {"sharpness", row.sharpness},
                                  {"estimate", row.estimate},
                                  {"std_error", row.std_error}});
    }
    doc["rows"] = std::move(rj);
    return doc.dump(2);
}

} // namespace incompat
