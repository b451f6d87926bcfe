#ifndef BYRDIE_EXPERIMENT_HPP
#define BYRDIE_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "byrdie/config.hpp"

namespace byrdie {

// Everything needed to rerun a trial: one config plus nothing else determines
// all outputs. The master seed deterministically derives sub-streams for
// graph, placement, data, partition, attack, permutation and initialization
// per trial index. Exactly one of data.per_node / protocol.trim /
// protocol.inner_iters may carry a comma-separated sweep list.
struct ExperimentConfig {
    // [topology]
    std::string graph_source = "erdos_renyi"; // erdos_renyi | edge_list
    int nodes = 2;
    double edge_prob = 0.5;
    bool symmetric = false;
    std::string edge_list_path;
    std::string assumption3 = "off"; // off | exact | sampled
    long long assumption3_trials = 10000;
    double enumeration_budget = 1e6;

    // [byzantine]
    std::string byz_count_expr = "0"; // integer, or "b" to track protocol.trim
    std::string attack = "none";
    double attack_lo = 0.0, attack_hi = 1.0;
    double attack_value = 0.0;
    double attack_scale = 1.0;

    // [data]
    std::string data_source = "synthetic"; // synthetic | csv
    int dim = 2;
    double margin = 1.0;
    double noise = 0.5;
    std::vector<int> per_node; // N (sweepable)
    bool class_balanced = true;
    bool augment_bias = true;
    std::string csv_path;
    int label_col = 0;
    bool normalize = true;
    int test_per_class = 1000;

    // [model]
    std::string loss = "square_hinge";
    double lambda = 0.01;
    std::vector<int> mlp_layers;

    // [protocol]
    std::vector<int> trim{0};        // b (sweepable)
    std::vector<int> inner_iters{1}; // T (sweepable)
    int rounds = 100;
    double step_rho0 = 1.0;
    double step_tau0 = 0.0;
    double step_power = 1.0;
    std::string coord_order = "natural"; // natural | permuted
    std::string init = "zero";           // zero | gaussian | gaussian_bias (mlp)
    double init_sigma = 0.1;
    double init_hidden_bias = 0.5; // gaussian_bias: constant hidden-layer bias init

    // [baselines]
    int dgd_rounds = 0;   // 0 -> protocol rounds
    int local_rounds = 0; // 0 -> protocol rounds

    // [run]
    std::vector<std::string> algorithms{"byrdie"};
    int trials = 1;
    std::uint64_t seed = 0;
    std::string cadence = "per_k"; // per_t | per_k | per_r
    int cadence_stride = 1;
    int checkpoint_every = 0; // rounds between checkpoint dumps; 0 = off
    bool oracle = false;
    double oracle_tol = 1e-9;
    int oracle_max_sweeps = 20000;

    static ExperimentConfig from_doc(const ConfigDoc& doc, const std::string& base_dir);
    static ExperimentConfig load(const std::string& path);
    ConfigDoc to_doc() const;
    void validate() const;
};

struct ExperimentOutcome {
    std::vector<std::string> cell_names; // "" when there is no sweep
    long long wall_ms_total = 0;
    std::string error; // first failure, empty on success; partial outputs are kept
};

// Runs every (cell x algorithm x trial), writes per-algorithm metrics CSVs,
// summary.csv per cell, a config echo and a machine-readable manifest under
// out_dir. Trials may run on `jobs` worker threads; outputs are byte-identical
// regardless of the worker count.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                 int jobs = 1);

} // namespace byrdie

#endif
