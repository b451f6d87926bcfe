#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "byrdie/config.hpp"
#include "byrdie/errors.hpp"
#include "byrdie/experiment.hpp"
#include "byrdie/graph.hpp"

using namespace byrdie;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const char* kTinyConfig = R"(
[topology]
source = erdos_renyi
nodes = 6
edge_prob = 0.9

[byzantine]
count = 1
attack = uniform_random

[data]
source = synthetic
dim = 2
margin = 1
noise = 0.4
per_node = 6
test_per_class = 20

[model]
loss = logistic
lambda = 0.01

[protocol]
trim = 1
rounds = 6

[run]
algorithms = byrdie,dgd,local_cd
trials = 2
seed = 99
cadence = per_r
oracle = true
oracle_tol = 1e-8
)";

} // namespace

TEST_CASE("config document parses, serializes and round-trips") {
    ConfigDoc doc = ConfigDoc::parse("[a]\nx = 1\n# comment\ny = hello world\n[b]\nz = 2.5\n");
    CHECK(doc.get_int("a", "x", 0) == 1);
    CHECK(doc.get_string("a", "y") == "hello world");
    CHECK(doc.get_double("b", "z", 0) == 2.5);
    CHECK_FALSE(doc.has("b", "w"));
    ConfigDoc again = ConfigDoc::parse(doc.serialize());
    CHECK(again.serialize() == doc.serialize());
}

TEST_CASE("config parse errors carry line numbers") {
    CHECK_THROWS_AS(ConfigDoc::parse("x = 1\n"), ParseError);       // key before section
    CHECK_THROWS_AS(ConfigDoc::parse("[a\nx = 1\n"), ParseError);   // unterminated header
    CHECK_THROWS_AS(ConfigDoc::parse("[a]\nnokey\n"), ParseError);  // missing '='
}

TEST_CASE("typed getters validate their values") {
    ConfigDoc doc = ConfigDoc::parse("[s]\nn = abc\nb = maybe\nl = 1,2,x\n");
    CHECK_THROWS_AS(doc.get_int("s", "n", 0), ConfigError);
    CHECK_THROWS_AS(doc.get_bool("s", "b", false), ConfigError);
    CHECK_THROWS_AS(doc.get_int_list("s", "l"), ConfigError);
}

TEST_CASE("experiment config rejects unknown keys and bad values") {
    ConfigDoc doc = ConfigDoc::parse("[topology]\nnodez = 5\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(ExperimentConfig::from_doc(doc, ".")),
                         doctest::Contains("unknown config keys"), ConfigError);

    ConfigDoc bad = ConfigDoc::parse("[protocol]\ntrim = 1\ninner_iters = 2,4\n[data]\nper_node = 5,10\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(ExperimentConfig::from_doc(bad, ".")),
                         doctest::Contains("may sweep"), ConfigError);
}

TEST_CASE("tiny experiment runs, reproduces byte-identically and echoes its config") {
    ExperimentConfig cfg = ExperimentConfig::from_doc(ConfigDoc::parse(kTinyConfig), ".");
    fs::path base = fs::path(BYRDIE_TEST_TMP) / "exp";
    fs::remove_all(base);

    ExperimentOutcome out1 = run_experiment(cfg, (base / "run1").string());
    CHECK(out1.error.empty());
    for (const char* algo : {"byrdie", "dgd", "local_cd"})
        CHECK(fs::exists(base / "run1" / (std::string(algo) + ".csv")));
    CHECK(fs::exists(base / "run1" / "summary.csv"));
    CHECK(fs::exists(base / "run1" / "manifest.json"));

    std::string header = slurp(base / "run1" / "byrdie.csv");
    CHECK(header.rfind("trial,algo,r,k,t,t_c,", 0) == 0);

    ExperimentOutcome out2 = run_experiment(cfg, (base / "run2").string());
    CHECK(out2.error.empty());
    for (const char* algo : {"byrdie", "dgd", "local_cd"})
        CHECK(slurp(base / "run1" / (std::string(algo) + ".csv")) ==
              slurp(base / "run2" / (std::string(algo) + ".csv")));
    CHECK(slurp(base / "run1" / "summary.csv") == slurp(base / "run2" / "summary.csv"));

    // Round trip through the config echo.
    ExperimentConfig echoed = ExperimentConfig::load((base / "run1" / "config_echo.cfg").string());
    ExperimentOutcome out3 = run_experiment(echoed, (base / "run3").string());
    CHECK(out3.error.empty());
    CHECK(slurp(base / "run1" / "byrdie.csv") == slurp(base / "run3" / "byrdie.csv"));

    // Worker count does not change the bytes.
    ExperimentOutcome out4 = run_experiment(cfg, (base / "run4").string(), 4);
    CHECK(out4.error.empty());
    CHECK(slurp(base / "run1" / "byrdie.csv") == slurp(base / "run4" / "byrdie.csv"));
}

TEST_CASE("sweep cells produce one directory per value") {
    ExperimentConfig cfg = ExperimentConfig::from_doc(ConfigDoc::parse(kTinyConfig), ".");
    cfg.inner_iters = {1, 2};
    cfg.algorithms = {"byrdie"};
    cfg.trials = 1;
    fs::path base = fs::path(BYRDIE_TEST_TMP) / "sweep";
    fs::remove_all(base);
    ExperimentOutcome out = run_experiment(cfg, base.string());
    CHECK(out.error.empty());
    CHECK(out.cell_names == std::vector<std::string>{"T1", "T2"});
    CHECK(fs::exists(base / "T1" / "byrdie.csv"));
    CHECK(fs::exists(base / "T2" / "byrdie.csv"));
}

TEST_CASE("byzantine count can track the trim sweep") {
    ExperimentConfig cfg = ExperimentConfig::from_doc(ConfigDoc::parse(kTinyConfig), ".");
    cfg.trim = {0, 1};
    cfg.byz_count_expr = "b";
    cfg.algorithms = {"byrdie"};
    cfg.trials = 1;
    fs::path base = fs::path(BYRDIE_TEST_TMP) / "bsweep";
    fs::remove_all(base);
    ExperimentOutcome out = run_experiment(cfg, base.string());
    CHECK(out.error.empty());
    CHECK(out.cell_names == std::vector<std::string>{"b0", "b1"});
}

TEST_CASE("edge-list graphs with degree violations fail with a named report") {
    fs::path base = fs::path(BYRDIE_TEST_TMP) / "ring";
    fs::create_directories(base);
    {
        std::ofstream f(base / "ring.edges");
        f << "4\n1 2\n2 3\n3 4\n4 1\n";
    }
    ExperimentConfig cfg = ExperimentConfig::from_doc(ConfigDoc::parse(kTinyConfig), ".");
    cfg.graph_source = "edge_list";
    cfg.edge_list_path = (base / "ring.edges").string();
    CHECK_THROWS_WITH_AS(static_cast<void>(run_experiment(cfg, (base / "out").string())),
                         doctest::Contains("degree violation"), ConfigError);
}

TEST_CASE("checkpoints are dumped at the configured cadence") {
    ExperimentConfig cfg = ExperimentConfig::from_doc(ConfigDoc::parse(kTinyConfig), ".");
    cfg.algorithms = {"byrdie"};
    cfg.trials = 1;
    cfg.checkpoint_every = 3;
    fs::path base = fs::path(BYRDIE_TEST_TMP) / "ckpt";
    fs::remove_all(base);
    ExperimentOutcome out = run_experiment(cfg, base.string());
    CHECK(out.error.empty());
    CHECK(fs::exists(base / "checkpoints" / "byrdie_trial0_r3.csv"));
    CHECK(fs::exists(base / "checkpoints" / "byrdie_trial0_r6.csv"));
    std::string content = slurp(base / "checkpoints" / "byrdie_trial0_r6.csv");
    CHECK(content.rfind("node,w1,w2,w3", 0) == 0); // dim 2 + bias
}

TEST_CASE("mid-run faults preserve partial outputs and surface the error") {
    ExperimentConfig cfg = ExperimentConfig::from_doc(ConfigDoc::parse(kTinyConfig), ".");
    cfg.algorithms = {"dgd"};
    cfg.attack = "constant";
    cfg.attack_value = std::numeric_limits<double>::quiet_NaN(); // poisons the averages
    cfg.oracle = false;
    cfg.trials = 1;
    fs::path base = fs::path(BYRDIE_TEST_TMP) / "fault";
    fs::remove_all(base);
    ExperimentOutcome out = run_experiment(cfg, base.string());
    CHECK_FALSE(out.error.empty());
    CHECK(fs::exists(base / "dgd.csv"));
    CHECK(fs::exists(base / "manifest.json"));
}
