// End-to-end checks of the CLI binary: spawns the real executable and parses
// what it prints. Paths are injected by CMake.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "test_util.hpp"

using doctest::Approx;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RunResult run_cli(const std::string& args) {
    const std::string out_path = std::string(CLI_TMP_DIR) + "/cli_stdout.txt";
    const std::string cmd = std::string(INCOMPAT_CLI_PATH) + " " + args + " > " + out_path +
                            " 2> " + std::string(CLI_TMP_DIR) + "/cli_stderr.txt";
    const int status = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    res.out = slurp(out_path);
    return res;
}

std::string scenario(const std::string& name) {
    return std::string(SCENARIO_DIR) + "/" + name;
}

} // namespace

TEST_CASE("bound command prints the closed form") {
    RunResult r = run_cli("bound --d 3 --n 3");
    REQUIRE(r.exit_code == 0);
    CHECK(std::stod(r.out) == testutil::near(0.788675, 1e-6));
    r = run_cli("bound --d 3 --n 4");
    CHECK(std::stod(r.out) == testutil::near(0.841506, 1e-6));
    r = run_cli("bound --d 2 --n 2");
    CHECK(std::stod(r.out) == testutil::near(0.707107, 1e-6));
    CHECK(run_cli("bound --d 0 --n 3").exit_code == 1);
}

TEST_CASE("witness --pair on the Pauli scenario") {
    const RunResult r = run_cli("witness " + scenario("pauli.json") + " --pair 1 2");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc.at("R").get<double>() == testutil::near(0.7071, 1e-3));
    CHECK(doc.at("verdict") == "StructureViolated");
}

TEST_CASE("witness --genuine on the MUB scenario") {
    const RunResult r = run_cli("witness " + scenario("mub3.json") + " --genuine 1 2 3 4");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc.at("R").get<double>() == testutil::near(0.8415, 1e-3));
}

TEST_CASE("witness falls back to the scenario structure block") {
    const RunResult r = run_cli("witness " + scenario("pauli.json"));
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc.at("R").get<double>() == testutil::near(0.80474, 1e-3));
    CHECK(doc.at("pattern_probs").size() == 3);
}

TEST_CASE("malformed config exits 1 with no partial output") {
    const std::string bad = std::string(CLI_TMP_DIR) + "/broken.json";
    std::ofstream(bad) << "{ this is not json";
    const RunResult r = run_cli("witness " + bad + " --pair 1 2");
    CHECK(r.exit_code == 1);
    CHECK(r.out.empty());
}

TEST_CASE("solver failure exits 2") {
    const std::string starved = std::string(CLI_TMP_DIR) + "/starved.json";
    std::ofstream(starved) << R"({"assembly": {"constructor": "pauli"},
                                  "solver": {"max_iter": 2}})";
    const RunResult r = run_cli("witness " + starved + " --pair 1 3");
    CHECK(r.exit_code == 2);
}

TEST_CASE("qsd command") {
    const RunResult r = run_cli("qsd " + scenario("pauli.json") + " --pair 1 3");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc.at("W2").get<double>() == testutil::near(0.1464, 1e-3));
}

TEST_CASE("simulate is schema-valid and seed-deterministic even at 100 shots") {
    const std::string args = "simulate " + scenario("table1.json") + " --shots 100 --seed 7";
    const RunResult a = run_cli(args);
    REQUIRE(a.exit_code == 0);
    const json doc = json::parse(a.out);
    REQUIRE(doc.at("rows").size() == 7);
    for (const auto& row : doc.at("rows")) {
        CHECK(row.contains("plane"));
        CHECK(row.contains("prediction"));
        CHECK(row.contains("estimate"));
        CHECK(row.at("std_error").get<double>() > 0.0);
    }
    const RunResult b = run_cli(args);
    CHECK(a.out == b.out);
}

TEST_CASE("grid sweep emits boundary samples") {
    const std::string csv = std::string(CLI_TMP_DIR) + "/sweep.csv";
    const RunResult r = run_cli("witness " + scenario("pauli.json") +
                                " --pair 1 3 --grid 4 --grid-csv " + csv);
    REQUIRE(r.exit_code == 0);
    std::istringstream in(slurp(csv));
    std::string line;
    std::getline(in, line); // comment
    std::getline(in, line);
    CHECK(line == "q_1,q_3,R,eta_1,eta_3");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 5); // compositions of 4 into 2 parts
}

TEST_CASE("batch mode emits a JSON array") {
    const RunResult r = run_cli("witness " + scenario("pauli.json") + " " +
                                scenario("pauli.json") + " --all --pair 1 2");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.out);
    REQUIRE(doc.is_array());
    REQUIRE(doc.size() == 2);
    CHECK(doc.at(0).at("R").get<double>() == Approx(doc.at(1).at("R").get<double>()));
}

TEST_CASE("sdp dump flag writes the problem") {
    const std::string dump = std::string(CLI_TMP_DIR) + "/problem.json";
    const RunResult r = run_cli("witness " + scenario("pauli.json") +
                                " --structure \"full(1,2,3)\" --dump-sdp " + dump);
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(slurp(dump));
    CHECK(doc.at("sense") == "maximize");
    CHECK(doc.at("blocks").size() == 8);  // parent over 2x2x2 outcomes
    CHECK(doc.at("scalars").size() == 4); // three eta plus one branch weight
}
