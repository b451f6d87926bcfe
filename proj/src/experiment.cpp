#include "byrdie/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <thread>

#include <json.hpp>

#include "byrdie/baselines.hpp"
#include "byrdie/dataset.hpp"
#include "byrdie/errors.hpp"
#include "byrdie/graph.hpp"
#include "byrdie/metrics.hpp"
#include "byrdie/model.hpp"
#include "byrdie/protocol.hpp"
#include "byrdie/textio.hpp"
#include "byrdie/version.hpp"

namespace fs = std::filesystem;

namespace byrdie {

namespace {

const std::set<std::string> kKnownKeys[] = {
    {"topology.source", "topology.nodes", "topology.edge_prob", "topology.symmetric",
     "topology.edge_list", "topology.assumption3", "topology.assumption3_trials",
     "topology.enumeration_budget"},
    {"byzantine.count", "byzantine.attack", "byzantine.attack_lo", "byzantine.attack_hi",
     "byzantine.attack_value", "byzantine.attack_scale"},
    {"data.source", "data.dim", "data.margin", "data.noise", "data.per_node",
     "data.class_balanced", "data.augment_bias", "data.csv_path", "data.label_col",
     "data.normalize", "data.test_per_class"},
    {"model.loss", "model.lambda", "model.mlp_layers"},
    {"protocol.trim", "protocol.inner_iters", "protocol.rounds", "protocol.step_rho0",
     "protocol.step_tau0", "protocol.step_power", "protocol.coord_order", "protocol.init",
     "protocol.init_sigma", "protocol.init_hidden_bias"},
    {"baselines.dgd_rounds", "baselines.local_rounds"},
    {"run.algorithms", "run.trials", "run.seed", "run.cadence", "run.cadence_stride",
     "run.checkpoint_every", "run.oracle", "run.oracle_tol", "run.oracle_max_sweeps"},
};

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return p.lexically_normal().string();
    return (fs::path(base_dir) / p).lexically_normal().string();
}

std::vector<int> to_int_vector(const std::vector<long long>& in) {
    std::vector<int> out;
    out.reserve(in.size());
    for (long long v : in) out.push_back(static_cast<int>(v));
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

} // namespace

ExperimentConfig ExperimentConfig::from_doc(const ConfigDoc& doc, const std::string& base_dir) {
    // Reject unknown keys so that typos fail loudly.
    std::set<std::string> known;
    for (const auto& group : kKnownKeys) known.insert(group.begin(), group.end());
    std::vector<std::string> unknown;
    for (const std::string section :
         {"topology", "byzantine", "data", "model", "protocol", "baselines", "run"})
        for (const auto& [k, v] : doc.items(section))
            if (!known.count(section + "." + k)) unknown.push_back(section + "." + k);
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }

    ExperimentConfig c;
    c.graph_source = doc.get_string("topology", "source", c.graph_source);
    c.nodes = static_cast<int>(doc.get_int("topology", "nodes", c.nodes));
    c.edge_prob = doc.get_double("topology", "edge_prob", c.edge_prob);
    c.symmetric = doc.get_bool("topology", "symmetric", c.symmetric);
    c.edge_list_path = resolve_path(base_dir, doc.get_string("topology", "edge_list", ""));
    c.assumption3 = doc.get_string("topology", "assumption3", c.assumption3);
    c.assumption3_trials = doc.get_int("topology", "assumption3_trials", c.assumption3_trials);
    c.enumeration_budget = doc.get_double("topology", "enumeration_budget", c.enumeration_budget);

    c.byz_count_expr = doc.get_string("byzantine", "count", c.byz_count_expr);
    c.attack = doc.get_string("byzantine", "attack", c.attack);
    c.attack_lo = doc.get_double("byzantine", "attack_lo", c.attack_lo);
    c.attack_hi = doc.get_double("byzantine", "attack_hi", c.attack_hi);
    c.attack_value = doc.get_double("byzantine", "attack_value", c.attack_value);
    c.attack_scale = doc.get_double("byzantine", "attack_scale", c.attack_scale);

    c.data_source = doc.get_string("data", "source", c.data_source);
    c.dim = static_cast<int>(doc.get_int("data", "dim", c.dim));
    c.margin = doc.get_double("data", "margin", c.margin);
    c.noise = doc.get_double("data", "noise", c.noise);
    c.per_node = doc.has("data", "per_node") ? to_int_vector(doc.get_int_list("data", "per_node"))
                                             : std::vector<int>{10};
    c.class_balanced = doc.get_bool("data", "class_balanced", c.class_balanced);
    c.augment_bias = doc.get_bool("data", "augment_bias", c.augment_bias);
    c.csv_path = resolve_path(base_dir, doc.get_string("data", "csv_path", ""));
    c.label_col = static_cast<int>(doc.get_int("data", "label_col", c.label_col));
    c.normalize = doc.get_bool("data", "normalize", c.normalize);
    c.test_per_class = static_cast<int>(doc.get_int("data", "test_per_class", c.test_per_class));

    c.loss = doc.get_string("model", "loss", c.loss);
    c.lambda = doc.get_double("model", "lambda", c.lambda);
    if (doc.has("model", "mlp_layers"))
        c.mlp_layers = to_int_vector(doc.get_int_list("model", "mlp_layers"));

    c.trim = doc.has("protocol", "trim") ? to_int_vector(doc.get_int_list("protocol", "trim"))
                                         : std::vector<int>{0};
    c.inner_iters = doc.has("protocol", "inner_iters")
                        ? to_int_vector(doc.get_int_list("protocol", "inner_iters"))
                        : std::vector<int>{1};
    c.rounds = static_cast<int>(doc.get_int("protocol", "rounds", c.rounds));
    c.step_rho0 = doc.get_double("protocol", "step_rho0", c.step_rho0);
    c.step_tau0 = doc.get_double("protocol", "step_tau0", c.step_tau0);
    c.step_power = doc.get_double("protocol", "step_power", c.step_power);
    c.coord_order = doc.get_string("protocol", "coord_order", c.coord_order);
    c.init = doc.get_string("protocol", "init", c.init);
    c.init_sigma = doc.get_double("protocol", "init_sigma", c.init_sigma);
    c.init_hidden_bias = doc.get_double("protocol", "init_hidden_bias", c.init_hidden_bias);

    c.dgd_rounds = static_cast<int>(doc.get_int("baselines", "dgd_rounds", c.dgd_rounds));
    c.local_rounds = static_cast<int>(doc.get_int("baselines", "local_rounds", c.local_rounds));

    if (doc.has("run", "algorithms")) {
        c.algorithms.clear();
        for (const auto& part : split(doc.get_string("run", "algorithms"), ','))
            if (!byrdie::trim(part).empty()) c.algorithms.push_back(byrdie::trim(part));
    }
    c.trials = static_cast<int>(doc.get_int("run", "trials", c.trials));
    c.seed = doc.get_u64("run", "seed", c.seed);
    c.cadence = doc.get_string("run", "cadence", c.cadence);
    c.cadence_stride = static_cast<int>(doc.get_int("run", "cadence_stride", c.cadence_stride));
    c.checkpoint_every = static_cast<int>(doc.get_int("run", "checkpoint_every", c.checkpoint_every));
    c.oracle = doc.get_bool("run", "oracle", c.oracle);
    c.oracle_tol = doc.get_double("run", "oracle_tol", c.oracle_tol);
    c.oracle_max_sweeps = static_cast<int>(doc.get_int("run", "oracle_max_sweeps", c.oracle_max_sweeps));

    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    ConfigDoc doc = ConfigDoc::load(path);
    return from_doc(doc, fs::path(path).parent_path().string());
}

ConfigDoc ExperimentConfig::to_doc() const {
    ConfigDoc d;
    d.set("topology", "source", graph_source);
    d.set("topology", "nodes", std::to_string(nodes));
    d.set("topology", "edge_prob", format_double(edge_prob));
    d.set("topology", "symmetric", symmetric ? "true" : "false");
    if (!edge_list_path.empty()) d.set("topology", "edge_list", edge_list_path);
    d.set("topology", "assumption3", assumption3);
    d.set("topology", "assumption3_trials", std::to_string(assumption3_trials));
    d.set("topology", "enumeration_budget", format_double(enumeration_budget));

    d.set("byzantine", "count", byz_count_expr);
    d.set("byzantine", "attack", attack);
    d.set("byzantine", "attack_lo", format_double(attack_lo));
    d.set("byzantine", "attack_hi", format_double(attack_hi));
    d.set("byzantine", "attack_value", format_double(attack_value));
    d.set("byzantine", "attack_scale", format_double(attack_scale));

    d.set("data", "source", data_source);
    d.set("data", "dim", std::to_string(dim));
    d.set("data", "margin", format_double(margin));
    d.set("data", "noise", format_double(noise));
    d.set("data", "per_node", join_ints(per_node));
    d.set("data", "class_balanced", class_balanced ? "true" : "false");
    d.set("data", "augment_bias", augment_bias ? "true" : "false");
    if (!csv_path.empty()) d.set("data", "csv_path", csv_path);
    d.set("data", "label_col", std::to_string(label_col));
    d.set("data", "normalize", normalize ? "true" : "false");
    d.set("data", "test_per_class", std::to_string(test_per_class));

    d.set("model", "loss", loss);
    d.set("model", "lambda", format_double(lambda));
    if (!mlp_layers.empty()) d.set("model", "mlp_layers", join_ints(mlp_layers));

    d.set("protocol", "trim", join_ints(trim));
    d.set("protocol", "inner_iters", join_ints(inner_iters));
    d.set("protocol", "rounds", std::to_string(rounds));
    d.set("protocol", "step_rho0", format_double(step_rho0));
    d.set("protocol", "step_tau0", format_double(step_tau0));
    d.set("protocol", "step_power", format_double(step_power));
    d.set("protocol", "coord_order", coord_order);
    d.set("protocol", "init", init);
    d.set("protocol", "init_sigma", format_double(init_sigma));
    d.set("protocol", "init_hidden_bias", format_double(init_hidden_bias));

    d.set("baselines", "dgd_rounds", std::to_string(dgd_rounds));
    d.set("baselines", "local_rounds", std::to_string(local_rounds));

    std::string algos;
    for (std::size_t i = 0; i < algorithms.size(); ++i)
        algos += (i ? "," : "") + algorithms[i];
    d.set("run", "algorithms", algos);
    d.set("run", "trials", std::to_string(trials));
    d.set("run", "seed", std::to_string(seed));
    d.set("run", "cadence", cadence);
    d.set("run", "cadence_stride", std::to_string(cadence_stride));
    d.set("run", "checkpoint_every", std::to_string(checkpoint_every));
    d.set("run", "oracle", oracle ? "true" : "false");
    d.set("run", "oracle_tol", format_double(oracle_tol));
    d.set("run", "oracle_max_sweeps", std::to_string(oracle_max_sweeps));
    return d;
}

void ExperimentConfig::validate() const {
    std::vector<std::string> issues;
    auto need = [&](bool cond, const std::string& msg) {
        if (!cond) issues.push_back(msg);
    };

    need(graph_source == "erdos_renyi" || graph_source == "edge_list",
         "topology.source must be erdos_renyi or edge_list");
    if (graph_source == "erdos_renyi") {
        need(nodes >= 2, "topology.nodes must be >= 2");
        need(edge_prob > 0 && edge_prob <= 1, "topology.edge_prob must lie in (0,1]");
    } else {
        need(!edge_list_path.empty(), "topology.edge_list path required for edge_list source");
    }
    need(assumption3 == "off" || assumption3 == "exact" || assumption3 == "sampled",
         "topology.assumption3 must be off, exact or sampled");

    need(byz_count_expr == "b" || !byz_count_expr.empty(), "byzantine.count missing");
    if (byz_count_expr != "b") {
        try {
            (void)std::stoi(byz_count_expr);
        } catch (const std::exception&) {
            issues.push_back("byzantine.count must be an integer or 'b'");
        }
    }
    try {
        (void)AttackSpec::kind_from_string(attack);
    } catch (const ConfigError& e) {
        issues.push_back(e.what());
    }

    need(data_source == "synthetic" || data_source == "csv",
         "data.source must be synthetic or csv");
    if (data_source == "synthetic") {
        need(dim >= 1, "data.dim must be >= 1");
        need(margin > 0, "data.margin must be > 0");
        need(noise >= 0, "data.noise must be >= 0");
    } else {
        need(!csv_path.empty(), "data.csv_path required for csv source");
    }
    need(!per_node.empty(), "data.per_node must not be empty");
    for (int n : per_node) need(n >= 1, "data.per_node entries must be >= 1");

    try {
        LossKind kind = loss_kind_from_string(loss);
        if (kind == LossKind::MlpSoftmax) {
            need(mlp_layers.size() >= 2, "model.mlp_layers required for the mlp loss");
            need(!augment_bias, "data.augment_bias must be false for the mlp loss");
        }
    } catch (const ConfigError& e) {
        issues.push_back(e.what());
    }
    need(lambda >= 0, "model.lambda must be >= 0");

    need(!trim.empty(), "protocol.trim must not be empty");
    for (int b : trim) need(b >= 0, "protocol.trim entries must be >= 0");
    need(!inner_iters.empty(), "protocol.inner_iters must not be empty");
    for (int T : inner_iters) need(T >= 1, "protocol.inner_iters entries must be >= 1");
    need(rounds >= 1, "protocol.rounds must be >= 1");
    StepSchedule sched{step_rho0, step_tau0, step_power};
    try {
        sched.validate();
    } catch (const ConfigError& e) {
        issues.push_back(e.what());
    }
    need(coord_order == "natural" || coord_order == "permuted",
         "protocol.coord_order must be natural or permuted");
    need(init == "zero" || init == "gaussian" || init == "gaussian_bias",
         "protocol.init must be zero, gaussian or gaussian_bias");
    if (init == "gaussian_bias")
        need(loss == "mlp", "protocol.init gaussian_bias is only defined for the mlp loss");

    int sweeps = (per_node.size() > 1 ? 1 : 0) + (trim.size() > 1 ? 1 : 0) +
                 (inner_iters.size() > 1 ? 1 : 0);
    need(sweeps <= 1, "at most one of data.per_node, protocol.trim, protocol.inner_iters may sweep");

    need(!algorithms.empty(), "run.algorithms must not be empty");
    for (const auto& a : algorithms)
        need(a == "byrdie" || a == "dgd" || a == "local_cd",
             "unknown algorithm '" + a + "' (expected byrdie, dgd or local_cd)");
    need(trials >= 1, "run.trials must be >= 1");
    need(cadence == "per_t" || cadence == "per_k" || cadence == "per_r",
         "run.cadence must be per_t, per_k or per_r");
    need(cadence_stride >= 1, "run.cadence_stride must be >= 1");
    need(checkpoint_every >= 0, "run.checkpoint_every must be >= 0");
    if (oracle) need(oracle_tol > 0, "run.oracle_tol must be > 0");

    if (!issues.empty()) {
        std::string msg = "invalid experiment config:";
        for (const auto& i : issues) msg += "\n  " + i;
        throw ConfigError(msg);
    }
}

namespace {

struct CellSpec {
    std::string name; // "" when there is no sweep
    int per_node;
    int trim;
    int inner_T;
    int byz_count;
};

std::vector<CellSpec> expand_cells(const ExperimentConfig& cfg) {
    std::vector<CellSpec> cells;
    auto byz_for = [&](int b) {
        return cfg.byz_count_expr == "b" ? b : std::stoi(cfg.byz_count_expr);
    };
    if (cfg.per_node.size() > 1) {
        for (int n : cfg.per_node)
            cells.push_back({"N" + std::to_string(n), n, cfg.trim[0], cfg.inner_iters[0],
                             byz_for(cfg.trim[0])});
    } else if (cfg.trim.size() > 1) {
        for (int b : cfg.trim)
            cells.push_back({"b" + std::to_string(b), cfg.per_node[0], b, cfg.inner_iters[0],
                             byz_for(b)});
    } else if (cfg.inner_iters.size() > 1) {
        for (int T : cfg.inner_iters)
            cells.push_back({"T" + std::to_string(T), cfg.per_node[0], cfg.trim[0], T,
                             byz_for(cfg.trim[0])});
    } else {
        cells.push_back({"", cfg.per_node[0], cfg.trim[0], cfg.inner_iters[0],
                         byz_for(cfg.trim[0])});
    }
    return cells;
}

// Graph for one trial; Erdos-Renyi draws are retried deterministically until
// every node has in-degree >= 2*max_b+1.
DirectedGraph trial_graph(const ExperimentConfig& cfg, int max_b, int trial,
                          const std::optional<DirectedGraph>& fixed) {
    if (fixed) return *fixed;
    const int cap = 20000;
    for (int attempt = 0; attempt < cap; ++attempt) {
        Rng rng(mix_seed({cfg.seed, static_cast<std::uint64_t>(trial), seed_tag::graph,
                          static_cast<std::uint64_t>(attempt)}));
        DirectedGraph g = generate_erdos_renyi(cfg.nodes, cfg.edge_prob, rng, cfg.symmetric);
        if (validate_degrees(g, max_b).ok) return g;
    }
    throw ConfigError("could not draw an Erdos-Renyi graph with min in-degree " +
                      std::to_string(2 * max_b + 1) + " in " + std::to_string(cap) +
                      " attempts; raise edge_prob or lower trim");
}

std::string degree_violation_message(const DegreeReport& rep) {
    std::string msg = "degree violation: need in-degree >= " + std::to_string(rep.required) +
                      " at every node; offending nodes:";
    for (auto [node, d] : rep.violations)
        msg += " " + std::to_string(node) + "(in-degree " + std::to_string(d) + ")";
    return msg;
}

std::string checkpoint_csv(const std::vector<int>& ids,
                           const std::vector<std::vector<double>>& states) {
    std::string out = "node";
    const std::size_t P = states.empty() ? 0 : states.front().size();
    for (std::size_t k = 1; k <= P; ++k) out += ",w" + std::to_string(k);
    out += "\n";
    for (std::size_t h = 0; h < ids.size(); ++h) {
        out += std::to_string(ids[h]);
        for (double v : states[h]) out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

struct TaskResult {
    // keyed like cfg.algorithms
    std::vector<std::vector<MetricsRecord>> records;
    std::vector<std::pair<std::string, std::string>> checkpoints; // (filename, content)
    long long wall_ms = 0;
    std::string error;
    std::string assumption3_status;
};

} // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                 int jobs) {
    cfg.validate();
    if (jobs < 1) jobs = 1;
    const auto t_start = std::chrono::steady_clock::now();

    fs::create_directories(out_dir);
    cfg.to_doc().save((fs::path(out_dir) / "config_echo.cfg").string());

    std::vector<CellSpec> cells = expand_cells(cfg);
    int max_b = 0;
    for (const auto& c : cells) max_b = std::max(max_b, c.trim);

    // Shared inputs.
    std::optional<DirectedGraph> fixed_graph;
    if (cfg.graph_source == "edge_list") {
        fixed_graph = load_edge_list(cfg.edge_list_path);
        DegreeReport rep = validate_degrees(*fixed_graph, max_b);
        if (!rep.ok) throw ConfigError(degree_violation_message(rep));
    }

    const LossKind kind = loss_kind_from_string(cfg.loss);
    LossModel model;
    model.kind = kind;
    model.lambda = cfg.lambda;
    if (kind == LossKind::MlpSoftmax) model.mlp.layers = cfg.mlp_layers;

    std::optional<Dataset> csv_data;
    if (cfg.data_source == "csv") {
        Dataset ds = load_csv(cfg.csv_path, cfg.label_col, cfg.normalize);
        if (kind != LossKind::MlpSoftmax) {
            if (ds.class_count != 2)
                throw ConfigError("binary loss kinds need a two-class dataset; CSV has " +
                                  std::to_string(ds.class_count) + " classes");
            relabel_binary_pm1(ds);
        }
        if (cfg.augment_bias && kind != LossKind::MlpSoftmax) augment_bias(ds);
        csv_data = std::move(ds);
    }

    // One task per (cell, trial).
    struct TaskKey {
        std::size_t cell;
        int trial;
    };
    std::vector<TaskKey> keys;
    for (std::size_t c = 0; c < cells.size(); ++c)
        for (int trial = 0; trial < cfg.trials; ++trial) keys.push_back({c, trial});
    std::vector<TaskResult> results(keys.size());

    auto run_task = [&](std::size_t idx) {
        const CellSpec& cell = cells[keys[idx].cell];
        const int trial = keys[idx].trial;
        TaskResult& res = results[idx];
        res.records.resize(cfg.algorithms.size());
        const auto task_start = std::chrono::steady_clock::now();
        try {
            DirectedGraph graph = trial_graph(cfg, max_b, trial, fixed_graph);
            DegreeReport rep = validate_degrees(graph, cell.trim);
            if (!rep.ok) throw ConfigError(degree_violation_message(rep));

            // Byzantine placement: first byz_count ids of a seeded shuffle, so
            // placements are nested across a b sweep.
            std::vector<int> all_ids(static_cast<std::size_t>(graph.node_count()));
            for (int i = 0; i < graph.node_count(); ++i) all_ids[static_cast<std::size_t>(i)] = i + 1;
            Rng place_rng(mix_seed({cfg.seed, static_cast<std::uint64_t>(trial), seed_tag::placement}));
            std::vector<int> shuffled = all_ids;
            place_rng.shuffle(shuffled);
            if (cell.byz_count >= graph.node_count())
                throw ConfigError("byzantine count must leave at least one honest node");
            std::vector<int> byz(shuffled.begin(), shuffled.begin() + cell.byz_count);
            std::sort(byz.begin(), byz.end());
            std::vector<int> honest;
            for (int id : all_ids)
                if (!std::binary_search(byz.begin(), byz.end(), id)) honest.push_back(id);

            if (cfg.assumption3 != "off") {
                Rng cert_rng(mix_seed({cfg.seed, static_cast<std::uint64_t>(trial), seed_tag::certify}));
                CertifyResult cert = certify_assumption3(
                    graph, cell.trim,
                    cfg.assumption3 == "exact" ? CertifyMode::Exact : CertifyMode::Sampled,
                    cfg.assumption3_trials, cert_rng, cfg.enumeration_budget);
                switch (cert.status) {
                    case CertifyResult::Status::Certified: res.assumption3_status = "certified"; break;
                    case CertifyResult::Status::Inconclusive:
                        res.assumption3_status = "inconclusive";
                        break;
                    case CertifyResult::Status::Refuted:
                        throw ConfigError("Assumption 3 refuted for the trial graph");
                }
            }

            // Data and shards.
            Dataset data;
            if (csv_data) {
                data = *csv_data;
            } else {
                Rng data_rng(mix_seed({cfg.seed, static_cast<std::uint64_t>(trial), seed_tag::data,
                                       static_cast<std::uint64_t>(cell.per_node)}));
                int count = static_cast<int>(honest.size()) * cell.per_node +
                            2 * std::max(cfg.test_per_class, 0);
                data = synth_two_class(cfg.dim, cfg.margin, cfg.noise, count, data_rng);
                if (cfg.augment_bias) augment_bias(data);
            }
            Rng part_rng(mix_seed({cfg.seed, static_cast<std::uint64_t>(trial), seed_tag::partition,
                                   static_cast<std::uint64_t>(cell.per_node),
                                   static_cast<std::uint64_t>(cell.byz_count)}));
            Partition part = partition(data, honest, cell.per_node, cfg.class_balanced, part_rng);
            std::vector<Sample> test = take_per_class(part.test, data.class_count, cfg.test_per_class);
            std::vector<Sample> pooled;
            for (const auto& shard : part.shards)
                pooled.insert(pooled.end(), shard.samples.begin(), shard.samples.end());

            AttackSpec attack;
            attack.kind = AttackSpec::kind_from_string(cfg.attack);
            if (attack.kind != AttackSpec::Kind::None) attack.byzantine = byz;
            attack.lo = cfg.attack_lo;
            attack.hi = cfg.attack_hi;
            attack.value = cfg.attack_value;
            attack.scale = cfg.attack_scale;
            attack.seed = mix_seed({cfg.seed, static_cast<std::uint64_t>(trial), seed_tag::attack});

            InitSpec init;
            if (cfg.init == "gaussian") {
                init.kind = InitKind::Gaussian;
                init.sigma = cfg.init_sigma;
                init.seed = mix_seed({cfg.seed, static_cast<std::uint64_t>(trial), seed_tag::init});
            } else if (cfg.init == "gaussian_bias") {
                Rng init_rng(mix_seed({cfg.seed, static_cast<std::uint64_t>(trial), seed_tag::init}));
                init.kind = InitKind::Shared;
                init.shared =
                    mlp_init_vector(model.mlp, cfg.init_sigma, cfg.init_hidden_bias, init_rng);
            }

            StepSchedule step{cfg.step_rho0, cfg.step_tau0, cfg.step_power};

            std::optional<double> oracle_risk;
            if (cfg.oracle) {
                CentralizedCdOptions opts;
                opts.tolerance = cfg.oracle_tol;
                opts.max_sweeps = cfg.oracle_max_sweeps;
                opts.step = step;
                oracle_risk = run_centralized_cd(pooled, model, opts).risk;
            }

            const int P = model.param_dim(data.dim);
            auto checkpoint_name = [&](const std::string& algo, int r) {
                return algo + "_trial" + std::to_string(trial) + "_r" + std::to_string(r) + ".csv";
            };

            for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
                const std::string& algo = cfg.algorithms[a];
                MetricsCollector collect(trial, algo, model, pooled, test, oracle_risk,
                                         cfg.oracle_tol, &res.records[a]);

                if (algo == "byrdie") {
                    ProtocolConfig pc;
                    pc.trim = cell.trim;
                    pc.inner_iters = cell.inner_T;
                    pc.rounds = cfg.rounds;
                    pc.step = step;
                    pc.order = cfg.coord_order == "permuted" ? CoordOrder::Permuted
                                                             : CoordOrder::Natural;
                    pc.order_seed =
                        mix_seed({cfg.seed, static_cast<std::uint64_t>(trial), seed_tag::permutation});
                    pc.init = init;
                    // The engine emits at the finest needed granularity; the
                    // metric cadence is applied here so checkpoints can hook
                    // round ends independently.
                    pc.cadence = cfg.cadence == "per_t" ? Cadence::PerT : Cadence::PerK;
                    auto hook = [&](const IterationSnapshot& snap) {
                        bool metric = true;
                        if (cfg.cadence == "per_r")
                            metric = snap.k_pos == P && snap.t == cell.inner_T &&
                                     (snap.r % cfg.cadence_stride == 0 || snap.r == cfg.rounds);
                        if (metric) collect(snap);
                        if (cfg.checkpoint_every > 0 && snap.k_pos == P && snap.t == cell.inner_T &&
                            (snap.r % cfg.checkpoint_every == 0 || snap.r == cfg.rounds))
                            res.checkpoints.emplace_back(
                                checkpoint_name(algo, snap.r),
                                checkpoint_csv(*snap.honest_ids, *snap.states));
                    };
                    run_byrdie(graph, part.shards, model, pc, attack, hook);
                } else if (algo == "dgd") {
                    BaselineConfig bc;
                    bc.step = step;
                    bc.rounds = cfg.dgd_rounds > 0 ? cfg.dgd_rounds : cfg.rounds;
                    bc.init = init;
                    bc.cadence = Cadence::PerR;
                    bc.cadence_stride = cfg.cadence == "per_r" ? cfg.cadence_stride : 1;
                    auto hook = [&](const IterationSnapshot& snap) {
                        collect(snap);
                        if (cfg.checkpoint_every > 0 &&
                            (snap.r % cfg.checkpoint_every == 0 || snap.r == bc.rounds))
                            res.checkpoints.emplace_back(
                                checkpoint_name(algo, snap.r),
                                checkpoint_csv(*snap.honest_ids, *snap.states));
                    };
                    run_dgd(graph, part.shards, model, bc, attack, hook);
                } else { // local_cd
                    BaselineConfig bc;
                    bc.step = step;
                    bc.rounds = cfg.local_rounds > 0 ? cfg.local_rounds : cfg.rounds;
                    bc.init = init;
                    bc.cadence = cfg.cadence == "per_r" ? Cadence::PerR : Cadence::PerK;
                    bc.cadence_stride = cfg.cadence_stride;
                    auto hook = [&](const IterationSnapshot& snap) {
                        collect(snap);
                        if (cfg.checkpoint_every > 0 && snap.k_pos == P &&
                            (snap.r % cfg.checkpoint_every == 0 || snap.r == bc.rounds))
                            res.checkpoints.emplace_back(
                                checkpoint_name(algo, snap.r),
                                checkpoint_csv(*snap.honest_ids, *snap.states));
                    };
                    run_local_cd(part.shards, model, bc, hook);
                }
            }
        } catch (const std::exception& e) {
            res.error = e.what();
        }
        res.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - task_start)
                          .count();
    };

    if (jobs == 1) {
        for (std::size_t i = 0; i < keys.size(); ++i) run_task(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (int w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                while (true) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= keys.size()) break;
                    run_task(i);
                }
            });
        for (auto& t : workers) t.join();
    }

    // Write outputs: per-cell CSVs in (trial, t_c) order, plus summaries.
    ExperimentOutcome outcome;
    nlohmann::json manifest;
    manifest["tool"] = "byrdie";
    manifest["version"] = kVersion;
    manifest["seed"] = cfg.seed;
    manifest["trials"] = cfg.trials;
    manifest["jobs"] = jobs;
    manifest["cells"] = nlohmann::json::array();

    for (std::size_t c = 0; c < cells.size(); ++c) {
        const CellSpec& cell = cells[c];
        fs::path cell_dir = fs::path(out_dir);
        if (!cell.name.empty()) cell_dir /= cell.name;
        fs::create_directories(cell_dir);
        outcome.cell_names.push_back(cell.name);

        nlohmann::json jcell;
        jcell["name"] = cell.name;
        jcell["per_node"] = cell.per_node;
        jcell["trim"] = cell.trim;
        jcell["inner_iters"] = cell.inner_T;
        jcell["byzantine_count"] = cell.byz_count;
        jcell["files"] = nlohmann::json::array();
        jcell["trial_wall_ms"] = nlohmann::json::array();

        std::vector<MetricsRecord> all_records;
        for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
            std::vector<MetricsRecord> records;
            for (std::size_t i = 0; i < keys.size(); ++i) {
                if (keys[i].cell != c) continue;
                const auto& recs = results[i].records;
                if (a < recs.size())
                    records.insert(records.end(), recs[a].begin(), recs[a].end());
            }
            std::string fname = cfg.algorithms[a] + ".csv";
            write_metrics_csv((cell_dir / fname).string(), records);
            jcell["files"].push_back((cell.name.empty() ? fname : cell.name + "/" + fname));
            all_records.insert(all_records.end(), records.begin(), records.end());
        }
        write_summary_csv((cell_dir / "summary.csv").string(), all_records);

        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (keys[i].cell != c) continue;
            jcell["trial_wall_ms"].push_back(results[i].wall_ms);
            if (!results[i].assumption3_status.empty())
                jcell["assumption3"] = results[i].assumption3_status;
            if (!results[i].checkpoints.empty()) {
                fs::path ck_dir = cell_dir / "checkpoints";
                fs::create_directories(ck_dir);
                for (const auto& [name, content] : results[i].checkpoints) {
                    std::ofstream f(ck_dir / name);
                    f << content;
                }
            }
            if (!results[i].error.empty() && outcome.error.empty())
                outcome.error = "cell '" + cell.name + "' trial " +
                                std::to_string(keys[i].trial) + ": " + results[i].error;
        }
        manifest["cells"].push_back(jcell);
    }

    outcome.wall_ms_total = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - t_start)
                                .count();
    manifest["wall_ms_total"] = outcome.wall_ms_total;
    if (!outcome.error.empty()) manifest["error"] = outcome.error;
    std::ofstream mf(fs::path(out_dir) / "manifest.json");
    mf << manifest.dump(2) << "\n";
    return outcome;
}

} // namespace byrdie
