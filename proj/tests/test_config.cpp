#include <doctest.h>

#include <set>
#include <sstream>

#include "subfront/config.hpp"
#include "subfront/errors.hpp"

using namespace subfront;
using namespace subfront::harness;

namespace {

KeyValueConfig parse(const std::string& text) {
    std::istringstream in(text);
    return KeyValueConfig::parse(in, "test.conf");
}

std::string error_of(const std::string& text, const std::string& command) {
    try {
        ExperimentConfig::from(parse(text), command);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("key = value lines with comments and blank lines") {
    const auto kv = parse("# header\n\nmodel.mu = 0.4   # trailing\n  grid.cells=128\n");
    REQUIRE(kv.entries().size() == 2);
    CHECK(kv.entries().at("model.mu").value == "0.4");
    CHECK(kv.entries().at("model.mu").origin == "test.conf:3");
    CHECK(kv.entries().at("grid.cells").value == "128");
}

TEST_CASE("malformed lines are reported with file and line") {
    CHECK_THROWS_WITH_AS(parse("model.mu = 0.3\nno equals sign\n"), doctest::Contains("test.conf:2"), ConfigError);
    CHECK_THROWS_WITH_AS(parse("bad key = 1\n"), doctest::Contains("malformed key"), ConfigError);
    CHECK_THROWS_WITH_AS(parse("seed = 1\nseed = 2\n"), doctest::Contains("duplicate"), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::parse_file("/nonexistent/file.conf"), ConfigError);
}

TEST_CASE("every field has a default") {
    const auto c = ExperimentConfig::from(KeyValueConfig{}, "kinetic");
    std::set<std::string> keys;
    for (const auto& k : known_keys()) keys.insert(k.key);
    CHECK(c.resolved.size() == keys.size());
    for (const auto& [k, v] : c.resolved) CHECK(keys.count(k) == 1);
    CHECK(c.model.mu == 0.3);
    CHECK(c.kinetic.epsilon == 0.1);
    CHECK(c.grid.n_cells == 256);
    CHECK(c.eps_list == std::vector<double>{0.2, 0.1, 0.05});
    CHECK(c.hamiltonian.mu_list.size() == 5);
    CHECK(ExperimentConfig::from(KeyValueConfig{}, "hj").grid.n_cells == 512);
    CHECK(ExperimentConfig::from(KeyValueConfig{}, "converge").grid.n_cells == 1024);
    CHECK(ExperimentConfig::from(KeyValueConfig{}, "converge").resolved.at("grid.cells") == "1024");
}

TEST_CASE("unknown keys are rejected with their origin") {
    const auto msg = error_of("model.mu = 0.3\nmodel.nu = 1\n", "kinetic");
    CHECK(msg.find("test.conf:2") != std::string::npos);
    CHECK(msg.find("model.nu") != std::string::npos);
}

TEST_CASE("typed values and ranges") {
    CHECK(error_of("model.mu = abc\n", "kinetic").find("model.mu") != std::string::npos);
    CHECK(error_of("model.mu = 1.2\n", "kinetic").find("model.mu") != std::string::npos);
    CHECK(error_of("grid.cells = -4\n", "kinetic").find("grid.cells") != std::string::npos);
    CHECK(error_of("output.plots = maybe\n", "kinetic").find("output.plots") != std::string::npos);
    CHECK(error_of("kinetic.arithmetic = exact\n", "kinetic").find("kinetic.arithmetic") != std::string::npos);
    CHECK(error_of("hj.rows = quadratic, cubic\n", "hj").find("cubic") != std::string::npos);
    CHECK(error_of("eps.list = 0.1, 2\n", "converge").find("eps.list") != std::string::npos);
    CHECK(error_of("eps.list = 0.1\n", "converge").find("two") != std::string::npos);
    CHECK(error_of("converge.t_max = 3\n", "converge").find("converge.t_max") != std::string::npos);
    CHECK(error_of("mc.initial_age = old\n", "mc").find("mc.initial_age") != std::string::npos);
    CHECK(error_of("command = hj\n", "kinetic").find("invoked as 'kinetic'") != std::string::npos);
    CHECK(error_of("model.mu = 0.5\noutput.plots = yes\nseed = 7\n", "kinetic").empty());
}

TEST_CASE("command-specific emptiness checks") {
    CHECK(error_of("hamiltonian.mu_list =\n", "hamiltonian").find("must not be empty") != std::string::npos);
    CHECK(error_of("hamiltonian.mu_list =\n", "kinetic").empty());
    CHECK(error_of("hj.snapshots = 0\n", "hj").find("zero snapshots") != std::string::npos);
    CHECK(error_of("hj.rows =\n", "hj").find("must not be empty") != std::string::npos);
}

TEST_CASE("overrides replace file values and keep their origin") {
    auto kv = parse("model.mu = 0.3\n");
    kv.set("model.mu", "0.6", "command line");
    const auto c = ExperimentConfig::from(kv, "mc");
    CHECK(c.model.mu == 0.6);
    kv.set("model.mu", "x", "command line");
    CHECK_THROWS_WITH_AS(ExperimentConfig::from(kv, "mc"), doctest::Contains("command line"), ConfigError);
}

TEST_CASE("list parsing") {
    CHECK(parse_number_list("1, 2.5 ,1e-3") == std::vector<double>{1.0, 2.5, 1e-3});
    CHECK(parse_number_list("").empty());
    CHECK_THROWS_AS(parse_number_list("1,,2"), ConfigError);
    CHECK_THROWS_AS(parse_number_list("1, two"), ConfigError);
    CHECK(parse_word_list(" a, b ,c,") == std::vector<std::string>{"a", "b", "c"});
}
