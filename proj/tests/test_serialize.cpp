#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "incompat/driver.hpp"
#include "incompat/serialize.hpp"
#include "test_util.hpp"

using namespace incompat;
using doctest::Approx;
using nlohmann::json;

namespace {

std::string data_path(const std::string& name) {
    return std::string(TEST_DATA_DIR) + "/" + name;
}

/// Structural comparison: same keys and types everywhere, numbers within tol.
void check_same_shape(const json& got, const json& want, const std::string& where, double tol) {
    INFO("at ", where);
    if (want.is_object()) {
        REQUIRE(got.is_object());
        for (const auto& [key, value] : want.items()) {
            REQUIRE_MESSAGE(got.contains(key), ("missing key " + key + " at " + where));
            check_same_shape(got.at(key), value, where + "." + key, tol);
        }
        for (const auto& [key, value] : got.items()) {
            REQUIRE_MESSAGE(want.contains(key), ("unexpected key " + key + " at " + where));
        }
    } else if (want.is_array()) {
        REQUIRE(got.is_array());
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            check_same_shape(got.at(i), want.at(i), where + "[" + std::to_string(i) + "]", tol);
        }
    } else if (want.is_number()) {
        REQUIRE(got.is_number());
        CHECK(got.get<double>() == testutil::near(want.get<double>(), tol));
    } else {
        CHECK(got == want);
    }
}

} // namespace

TEST_CASE("operator literal round trip") {
    std::mt19937_64 rng(9);
    for (int d : {2, 3, 4}) {
        const HermitianOperator a = testutil::random_hermitian(rng, d);
        const HermitianOperator back = parse_operator_literal(operator_literal(a));
        CHECK((a - back).frobenius_norm() <= 1e-14 * a.frobenius_norm());
    }
    CHECK_THROWS_AS(parse_operator_literal("{\"im\": [[0]]}"), ConfigError);
    CHECK_THROWS_AS(parse_operator_literal("not json"), ConfigError);
    CHECK_THROWS_AS(parse_operator_literal("{\"re\": [[0, 1]]}"), ConfigError); // not square
}

TEST_CASE("structure mini-syntax") {
    CHECK(parse_structure_text("pairs(1,2,3)").patterns.size() == 3);
    CHECK(parse_structure_text("full(2,3)").patterns.size() == 1);
    CHECK(parse_structure_text("pairs( 1 , 2 )").patterns.size() == 1);
    CHECK_THROWS_AS(parse_structure_text("ring(1,2,3)"), ConfigError);
    CHECK_THROWS_AS(parse_structure_text("pairs(1,a)"), ConfigError);
    CHECK_THROWS_AS(parse_structure_text("pairs(1,2"), ConfigError);
}

TEST_CASE("scenario parsing") {
    SUBCASE("constructor assembly with weights, structure, solver, simulation") {
        const std::string text = R"json({
            "dimension": 3,
            "assembly": {"constructor": "mub", "d": 3, "k": 4},
            "weights": [0.1, 0.2, 0.3, 0.4],
            "structure": {"patterns": "pairs(1,2,3)", "pin": {"[1,2]": 0.0}},
            "solver": {"gap_tol": 1e-9, "max_iter": 77},
            "simulation": {"shots": 1234, "seed": 5, "prep_fidelity": 0.99,
                           "hyperplanes": [{"name": "A", "group": [1,2,3]}]}
        })json";
        const Scenario sc = parse_scenario(text);
        CHECK(sc.require_assembly().size() == 4);
        CHECK(sc.require_assembly().weight(4) == Approx(0.4));
        REQUIRE(sc.structure.has_value());
        CHECK(sc.structure->patterns.size() == 3);
        CHECK(sc.structure->pins.at("[1,2]") == 0.0);
        CHECK(sc.solver.gap_tol == 1e-9);
        CHECK(sc.solver.max_iter == 77);
        REQUIRE(sc.simulation.has_value());
        CHECK(sc.simulation->shots == 1234);
        CHECK(sc.simulation->prep_fidelity == 0.99);
        REQUIRE(sc.simulation->hyperplanes.size() == 1);
        CHECK(sc.simulation->hyperplanes[0].name == "A");
    }
    SUBCASE("explicit operator assembly") {
        const std::string text = R"json({
            "assembly": {"operators": [
                [{"re": [[1, 0], [0, 0]]}, {"re": [[0, 0], [0, 1]]}],
                [{"re": [[0.5, 0.5], [0.5, 0.5]]}, {"re": [[0.5, -0.5], [-0.5, 0.5]]}]
            ]}
        })json";
        const Scenario sc = parse_scenario(text);
        CHECK(sc.require_assembly().size() == 2);
        CHECK(sc.require_assembly().dim() == 2);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(parse_scenario("{"), ConfigError);
        CHECK_THROWS_AS(parse_scenario("{}"), ConfigError);
        CHECK_THROWS_AS(parse_scenario(R"({"assembly": {"constructor": "ghz"}})"), ConfigError);
        CHECK_THROWS_AS(parse_scenario(R"({"assembly": {"constructor": "mub", "d": 4, "k": 2}})"),
                        ConfigError);
        // dimension mismatch
        CHECK_THROWS_AS(
            parse_scenario(R"({"dimension": 5, "assembly": {"constructor": "pauli"}})"),
            ConfigError);
        // invalid weights
        CHECK_THROWS_AS(parse_scenario(
                            R"({"assembly": {"constructor": "pauli"}, "weights": [1, 1, 1]})"),
                        ConfigError);
    }
}

TEST_CASE("robustness report golden file") {
    const Assembly paulis = pauli_assembly();
    const RobustnessReport r = pairwise_robustness(paulis, 1, 3);
    const json got = json::parse(robustness_report_json(r, false));

    std::ifstream in(data_path("pauli_pair_report.json"));
    REQUIRE_MESSAGE(in.good(), "golden file missing");
    const json want = json::parse(in);
    check_same_shape(got, want, "$", 1e-6);
}

TEST_CASE("report JSON carries the certificate only on request") {
    const Assembly paulis = pauli_assembly();
    const RobustnessReport r = pairwise_robustness(paulis, 1, 2);
    const json without = json::parse(robustness_report_json(r, false));
    CHECK_FALSE(without.contains("certificate"));
    const json with = json::parse(robustness_report_json(r, true));
    REQUIRE(with.contains("certificate"));
    const auto& branch = with.at("certificate").at("branches").at(0);
    CHECK(branch.at("pattern") == "[1,2]");
    CHECK(branch.at("parent").size() == 4);
    CHECK(branch.at("parent").at(0).contains("re"));
}

TEST_CASE("qsd and simulation report schemas") {
    const Assembly paulis = pauli_assembly();
    const json qsd = json::parse(qsd_report_json(witness_w2(paulis, 1, 3)));
    for (const char* key : {"pair", "P_g", "P_g_compatible", "W2", "ensembles", "povm",
                            "dual_witness", "solver"}) {
        CHECK(qsd.contains(key));
    }
    CHECK(qsd.at("pair") == json::array({1, 3}));

    std::vector<SimulationRow> rows{{"S1", {1, 2}, {0.5, 0.5}, 0.7, {0.7, 0.7}, 0.69, 0.01}};
    const json sim = json::parse(simulation_report_json(rows, 100, 7));
    CHECK(sim.at("shots") == 100);
    CHECK(sim.at("rows").at(0).at("plane") == "S1");
    CHECK(sim.at("rows").at(0).at("estimate") == Approx(0.69));
}

TEST_CASE("hyperplane scenario helpers") {
    const Scenario sc = load_scenario(std::string(SCENARIO_DIR) + "/table1.json");
    REQUIRE(sc.simulation.has_value());
    REQUIRE(sc.simulation->hyperplanes.size() == 7);
    const auto& s6 = sc.simulation->hyperplanes[5];
    const Assembly weighted = hyperplane_assembly(sc.require_assembly(), s6);
    CHECK(weighted.weight(1) == Approx(1.0 / 6));
    CHECK(weighted.weight(3) == Approx(0.5));
    CHECK(weighted.weight(4) == Approx(0.0));
    const StructureSpec spec = hyperplane_structure(sc.simulation->hyperplanes[6]);
    CHECK(spec.pins.at("[1,2]") == 0.0);
}
