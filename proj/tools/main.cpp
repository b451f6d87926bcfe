#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "byrdie/dataset.hpp"
#include "byrdie/errors.hpp"
#include "byrdie/experiment.hpp"
#include "byrdie/graph.hpp"
#include "byrdie/rng.hpp"
#include "byrdie/version.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir, bool seed_set,
            std::uint64_t seed, int trials, int jobs) {
    byrdie::ExperimentConfig cfg;
    try {
        cfg = byrdie::ExperimentConfig::load(config_path);
        if (seed_set) cfg.seed = seed;
        if (trials > 0) cfg.trials = trials;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config-error: " << e.what() << "\n";
        return 2;
    }
    try {
        byrdie::ExperimentOutcome out = byrdie::run_experiment(cfg, out_dir, jobs);
        if (!out.error.empty()) {
            std::cerr << "run-error: " << out.error << "\n";
            std::cerr << "partial outputs preserved under " << out_dir << "\n";
            return 3;
        }
        std::cout << "wrote " << out.cell_names.size() << " cell(s) to " << out_dir << " in "
                  << out.wall_ms_total << " ms\n";
        return 0;
    } catch (const byrdie::ConfigError& e) {
        std::cerr << "config-error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_certify_graph(const std::string& path, int b, const std::string& mode, long long trials,
                      std::uint64_t seed, double budget) {
    try {
        byrdie::DirectedGraph g = byrdie::load_edge_list(path);
        byrdie::Rng rng(seed);
        byrdie::CertifyResult res = byrdie::certify_assumption3(
            g, b,
            mode == "exact" ? byrdie::CertifyMode::Exact : byrdie::CertifyMode::Sampled,
            trials, rng, budget);
        switch (res.status) {
            case byrdie::CertifyResult::Status::Certified:
                std::cout << "certified: all " << res.graphs_checked << " reduced graphs over "
                          << res.placements_checked << " placements have a source component of size >= "
                          << (b + 1) << "\n";
                return 0;
            case byrdie::CertifyResult::Status::Inconclusive:
                std::cout << "inconclusive: no counterexample in " << res.graphs_checked
                          << " sampled reduced graphs (sampling cannot certify)\n";
                return 0;
            case byrdie::CertifyResult::Status::Refuted: {
                std::cout << "refuted: witness byzantine set {";
                for (std::size_t i = 0; i < res.witness.byzantine.size(); ++i)
                    std::cout << (i ? "," : "") << res.witness.byzantine[i];
                std::cout << "}, removed edges {";
                for (std::size_t i = 0; i < res.witness.removed_edges.size(); ++i) {
                    const auto& [j, i2] = res.witness.removed_edges[i];
                    std::cout << (i ? "," : "") << "(" << j << "," << i2 << ")";
                }
                std::cout << "}\n";
                return 0;
            }
        }
        return 1;
    } catch (const byrdie::EnumerationBudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_gen_data(const std::string& out_dir, int dim, double margin, double noise, int count,
                 int test_count, std::uint64_t seed, bool with_bias) {
    try {
        fs::create_directories(out_dir);
        byrdie::Rng rng(seed);
        byrdie::Dataset train = byrdie::synth_two_class(dim, margin, noise, count, rng);
        byrdie::Dataset test = byrdie::synth_two_class(dim, margin, noise, test_count, rng);
        if (with_bias) {
            byrdie::augment_bias(train);
            byrdie::augment_bias(test);
        }
        byrdie::save_csv(train, (fs::path(out_dir) / "train.csv").string());
        byrdie::save_metadata(train, (fs::path(out_dir) / "train.meta").string());
        byrdie::save_csv(test, (fs::path(out_dir) / "test.csv").string());
        byrdie::save_metadata(test, (fs::path(out_dir) / "test.meta").string());
        std::cout << "wrote train.csv (" << train.size() << " rows) and test.csv (" << test.size()
                  << " rows) to " << out_dir << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ByRDiE: Byzantine-resilient distributed coordinate descent simulator"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run an experiment config");
    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int trials = 0, jobs = 1;
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    auto* seed_opt = run->add_option("--seed", seed, "master seed (overrides config)");
    run->add_option("--trials", trials, "trial count (overrides config)");
    run->add_option("--jobs", jobs, "worker threads for trials");

    // certify-graph
    auto* certify = app.add_subcommand("certify-graph", "check Assumption 3 on an edge-list graph");
    std::string graph_path, mode = "exact";
    int b = 0;
    long long cert_trials = 10000;
    std::uint64_t cert_seed = 0;
    double budget = byrdie::kDefaultEnumerationBudget;
    certify->add_option("--graph", graph_path, "edge-list file (first line M, then 'j i' pairs)")
        ->required();
    certify->add_option("--b", b, "Byzantine bound b")->required();
    certify->add_option("--mode", mode, "exact | sampled")
        ->check(CLI::IsMember({"exact", "sampled"}));
    certify->add_option("--trials", cert_trials, "sample count for sampled mode");
    certify->add_option("--seed", cert_seed, "seed for sampled mode");
    certify->add_option("--budget", budget, "enumeration budget for exact mode");

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic two-class dataset");
    std::string gen_out;
    int dim = 2, count = 100, test_count = 100;
    double margin = 1.0, noise = 0.5;
    std::uint64_t gen_seed = 0;
    bool with_bias = false;
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--dim", dim, "feature dimension");
    gen->add_option("--margin", margin, "class margin along the signal direction");
    gen->add_option("--noise", noise, "gaussian noise level");
    gen->add_option("--count", count, "training sample count");
    gen->add_option("--test-count", test_count, "test sample count");
    gen->add_option("--seed", gen_seed, "seed");
    gen->add_flag("--augment-bias", with_bias, "append a constant-1 feature");

    // version
    auto* version = app.add_subcommand("version", "print the version");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed())
        return cmd_run(config_path, out_dir, seed_opt->count() > 0, seed, trials, jobs);
    if (certify->parsed())
        return cmd_certify_graph(graph_path, b, mode, cert_trials, cert_seed, budget);
    if (gen->parsed())
        return cmd_gen_data(gen_out, dim, margin, noise, count, test_count, gen_seed, with_bias);
    if (version->parsed()) {
        std::cout << "byrdie " << byrdie::kVersion << "\n";
        return 0;
    }
    return 1;
}
