#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "byrdie/baselines.hpp"
#include "byrdie/dataset.hpp"
#include "byrdie/errors.hpp"
#include "byrdie/graph.hpp"
#include "byrdie/metrics.hpp"
#include "byrdie/model.hpp"
#include "byrdie/protocol.hpp"
#include "byrdie/version.hpp"

namespace py = pybind11;
using namespace byrdie;

namespace {

std::vector<Sample> make_samples(const std::vector<std::vector<double>>& X,
                                 const std::vector<double>& y) {
    if (X.size() != y.size()) throw ConfigError("feature and label counts differ");
    std::vector<Sample> out(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) out[i] = Sample{X[i], y[i]};
    return out;
}

py::tuple split_samples(const std::vector<Sample>& samples) {
    std::vector<std::vector<double>> X;
    std::vector<double> y;
    X.reserve(samples.size());
    y.reserve(samples.size());
    for (const auto& s : samples) {
        X.push_back(s.x);
        y.push_back(s.y);
    }
    return py::make_tuple(X, y);
}

LossModel make_model(const std::string& kind, double lambda, const std::vector<int>& mlp_layers) {
    LossModel m;
    m.kind = loss_kind_from_string(kind);
    m.lambda = lambda;
    if (m.kind == LossKind::MlpSoftmax) m.mlp.layers = mlp_layers;
    return m;
}

InitSpec make_init(const std::string& kind, double sigma, std::uint64_t seed,
                   const std::vector<double>& shared) {
    InitSpec init;
    if (kind == "zero") {
        init.kind = InitKind::Zero;
    } else if (kind == "gaussian") {
        init.kind = InitKind::Gaussian;
        init.sigma = sigma;
        init.seed = seed;
    } else if (kind == "shared") {
        init.kind = InitKind::Shared;
        init.shared = shared;
    } else {
        throw ConfigError("unknown init kind: " + kind);
    }
    return init;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Byzantine-resilient distributed coordinate descent (ByRDiE) core";
    m.attr("__version__") = kVersion;

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<ProtocolViolation>(m, "ProtocolViolation");
    py::register_exception<NumericFault>(m, "NumericFault");
    py::register_exception<EnumerationBudgetError>(m, "EnumerationBudgetError");

    // --- topology ---
    py::class_<DirectedGraph>(m, "DirectedGraph")
        .def(py::init<int>(), py::arg("node_count"))
        .def_property_readonly("node_count", &DirectedGraph::node_count)
        .def("add_edge", &DirectedGraph::add_edge, py::arg("from_node"), py::arg("to_node"))
        .def("has_edge", &DirectedGraph::has_edge)
        .def("in_neighbors", &DirectedGraph::in_neighbors, py::return_value_policy::copy)
        .def("in_degree", &DirectedGraph::in_degree)
        .def("edge_count", &DirectedGraph::edge_count)
        .def("edges", &DirectedGraph::edges);

    m.def("complete_graph", &complete_graph, py::arg("node_count"));
    m.def(
        "generate_erdos_renyi",
        [](int M, double p, std::uint64_t seed, bool symmetric) {
            Rng rng(seed);
            return generate_erdos_renyi(M, p, rng, symmetric);
        },
        py::arg("node_count"), py::arg("p"), py::arg("seed"), py::arg("symmetric") = false);
    m.def(
        "validate_degrees",
        [](const DirectedGraph& g, int b) {
            DegreeReport rep = validate_degrees(g, b);
            py::dict out;
            out["ok"] = rep.ok;
            out["required"] = rep.required;
            out["violations"] = rep.violations;
            return out;
        },
        py::arg("graph"), py::arg("b"));
    m.def(
        "count_reduced_graphs",
        [](const DirectedGraph& g, const std::vector<int>& byzantine, int b) {
            std::vector<int> sorted = byzantine;
            std::sort(sorted.begin(), sorted.end());
            return count_reduced_graphs(g, ByzantineAssignment{sorted, b});
        },
        py::arg("graph"), py::arg("byzantine"), py::arg("b"));
    m.def(
        "certify_assumption3",
        [](const DirectedGraph& g, int b, const std::string& mode, long long trials,
           std::uint64_t seed, double budget) {
            Rng rng(seed);
            CertifyResult res = certify_assumption3(
                g, b, mode == "exact" ? CertifyMode::Exact : CertifyMode::Sampled, trials, rng,
                budget);
            py::dict out;
            switch (res.status) {
                case CertifyResult::Status::Certified: out["status"] = "certified"; break;
                case CertifyResult::Status::Refuted: out["status"] = "refuted"; break;
                case CertifyResult::Status::Inconclusive: out["status"] = "inconclusive"; break;
            }
            out["graphs_checked"] = res.graphs_checked;
            out["placements_checked"] = res.placements_checked;
            if (res.status == CertifyResult::Status::Refuted) {
                out["witness_byzantine"] = res.witness.byzantine;
                out["witness_removed_edges"] = res.witness.removed_edges;
            }
            return out;
        },
        py::arg("graph"), py::arg("b"), py::arg("mode") = "exact", py::arg("trials") = 10000,
        py::arg("seed") = 0, py::arg("budget") = kDefaultEnumerationBudget);

    // --- data ---
    py::class_<Dataset>(m, "Dataset")
        .def_readonly("norm_bound", &Dataset::norm_bound)
        .def_readonly("class_count", &Dataset::class_count)
        .def_readonly("dim", &Dataset::dim)
        .def("__len__", [](const Dataset& d) { return d.size(); })
        .def("arrays", [](const Dataset& d) { return split_samples(d.samples); });

    py::class_<Shard>(m, "Shard")
        .def(py::init([](int owner, const std::vector<std::vector<double>>& X,
                         const std::vector<double>& y) {
                 Shard s;
                 s.owner = owner;
                 s.samples = make_samples(X, y);
                 return s;
             }),
             py::arg("owner"), py::arg("X"), py::arg("y"))
        .def_readonly("owner", &Shard::owner)
        .def_readonly("sample_ids", &Shard::sample_ids)
        .def("arrays", [](const Shard& s) { return split_samples(s.samples); });

    m.def(
        "synth_two_class",
        [](int dim, double margin, double noise, int count, std::uint64_t seed) {
            Rng rng(seed);
            return synth_two_class(dim, margin, noise, count, rng);
        },
        py::arg("dim"), py::arg("margin"), py::arg("noise"), py::arg("count"), py::arg("seed"));
    m.def("load_csv", &load_csv, py::arg("path"), py::arg("label_col"), py::arg("normalize"));
    m.def("augment_bias", &augment_bias, py::arg("dataset"));
    m.def(
        "partition",
        [](const Dataset& ds, const std::vector<int>& honest_nodes, int per_node,
           bool class_balanced, std::uint64_t seed) {
            Rng rng(seed);
            Partition part = partition(ds, honest_nodes, per_node, class_balanced, rng);
            py::dict out;
            out["shards"] = part.shards;
            out["test"] = split_samples(part.test);
            out["test_ids"] = part.test_ids;
            return out;
        },
        py::arg("dataset"), py::arg("honest_nodes"), py::arg("per_node"),
        py::arg("class_balanced"), py::arg("seed"));

    // --- learning ---
    py::class_<LossModel>(m, "LossModel")
        .def(py::init(&make_model), py::arg("kind"), py::arg("lam") = 0.01,
             py::arg("mlp_layers") = std::vector<int>{})
        .def_property_readonly("kind", [](const LossModel& m_) { return to_string(m_.kind); })
        .def_readonly("lam", &LossModel::lambda)
        .def("param_dim", &LossModel::param_dim);

    m.def(
        "risk",
        [](const LossModel& model, const std::vector<double>& w,
           const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
            return risk(model, w, make_samples(X, y));
        },
        py::arg("model"), py::arg("w"), py::arg("X"), py::arg("y"));
    m.def(
        "gradient",
        [](const LossModel& model, const std::vector<double>& w,
           const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
            return gradient(model, w, make_samples(X, y));
        },
        py::arg("model"), py::arg("w"), py::arg("X"), py::arg("y"));
    m.def(
        "coord_gradient",
        [](const LossModel& model, const std::vector<double>& w,
           const std::vector<std::vector<double>>& X, const std::vector<double>& y, int k) {
            return coord_gradient(model, w, make_samples(X, y), k);
        },
        py::arg("model"), py::arg("w"), py::arg("X"), py::arg("y"), py::arg("k"));
    m.def(
        "accuracy",
        [](const LossModel& model, const std::vector<double>& w,
           const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
            return accuracy(model, w, make_samples(X, y));
        },
        py::arg("model"), py::arg("w"), py::arg("X"), py::arg("y"));
    m.def("estimate_lipschitz", &estimate_lipschitz, py::arg("model"), py::arg("dataset"));

    // --- protocol ---
    py::class_<StepSchedule>(m, "StepSchedule")
        .def(py::init([](double rho0, double tau0, double power) {
                 StepSchedule s{rho0, tau0, power};
                 s.validate();
                 return s;
             }),
             py::arg("rho0") = 1.0, py::arg("tau0") = 0.0, py::arg("power") = 1.0)
        .def_readonly("rho0", &StepSchedule::rho0)
        .def_readonly("tau0", &StepSchedule::tau0)
        .def_readonly("power", &StepSchedule::power)
        .def("at", &StepSchedule::at, py::arg("tau"));

    py::class_<AttackSpec>(m, "AttackSpec")
        .def(py::init([](const std::string& kind, const std::vector<int>& byzantine, double lo,
                         double hi, double value, double scale, std::uint64_t seed) {
                 AttackSpec a;
                 a.kind = AttackSpec::kind_from_string(kind);
                 a.byzantine = byzantine;
                 std::sort(a.byzantine.begin(), a.byzantine.end());
                 a.lo = lo;
                 a.hi = hi;
                 a.value = value;
                 a.scale = scale;
                 a.seed = seed;
                 return a;
             }),
             py::arg("kind") = "none", py::arg("byzantine") = std::vector<int>{},
             py::arg("lo") = 0.0, py::arg("hi") = 1.0, py::arg("value") = 0.0,
             py::arg("scale") = 1.0, py::arg("seed") = 0);

    m.def(
        "screen",
        [](const std::vector<std::pair<int, double>>& received, int b) {
            ScreenResult res = screen(received, b);
            py::dict out;
            out["kept"] = res.kept;
            out["removed_low"] = res.removed_low;
            out["removed_high"] = res.removed_high;
            return out;
        },
        py::arg("received"), py::arg("b"));
    m.def(
        "update_coordinate",
        [](double self_value, const std::vector<double>& kept, int neighborhood_size, int b,
           double rho, double coord_grad) {
            return update_coordinate(self_value, kept, neighborhood_size, b, rho, coord_grad);
        },
        py::arg("self_value"), py::arg("kept"), py::arg("neighborhood_size"), py::arg("b"),
        py::arg("rho"), py::arg("coord_grad"));

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("honest_ids", &RunResult::honest_ids)
        .def_readonly("states", &RunResult::states);

    m.def(
        "run_byrdie",
        [](const DirectedGraph& graph, const std::vector<Shard>& shards, const LossModel& model,
           int b, int T, int rounds, const StepSchedule& step, const AttackSpec& attack,
           const std::string& order, std::uint64_t order_seed, const std::string& init,
           double init_sigma, std::uint64_t init_seed, const std::vector<double>& init_shared,
           bool zero_gradient,
           const std::function<void(int, long long, double, double,
                                    const std::vector<std::vector<double>>&)>& on_round,
           const std::string& cadence) {
            ProtocolConfig cfg;
            cfg.trim = b;
            cfg.inner_iters = T;
            cfg.rounds = rounds;
            cfg.step = step;
            cfg.order = order == "permuted" ? CoordOrder::Permuted : CoordOrder::Natural;
            cfg.order_seed = order_seed;
            cfg.init = make_init(init, init_sigma, init_seed, init_shared);
            cfg.zero_gradient = zero_gradient;
            cfg.cadence = cadence == "per_t"   ? Cadence::PerT
                          : cadence == "per_k" ? Cadence::PerK
                                               : Cadence::PerR;
            IterationHook hook;
            if (on_round)
                hook = [&](const IterationSnapshot& snap) {
                    ConsensusStats cs = snap.states->size() >= 2 ? consensus_stats(*snap.states)
                                                                 : ConsensusStats{};
                    on_round(snap.r, snap.t_c, cs.diameter, cs.mean_pairwise, *snap.states);
                };
            return run_byrdie(graph, shards, model, cfg, attack, hook);
        },
        py::arg("graph"), py::arg("shards"), py::arg("model"), py::arg("b"), py::arg("T") = 1,
        py::arg("rounds") = 1, py::arg("step") = StepSchedule{}, py::arg("attack") = AttackSpec{},
        py::arg("order") = "natural", py::arg("order_seed") = 0, py::arg("init") = "zero",
        py::arg("init_sigma") = 0.1, py::arg("init_seed") = 0,
        py::arg("init_shared") = std::vector<double>{}, py::arg("zero_gradient") = false,
        py::arg("on_round") = nullptr, py::arg("cadence") = "per_r");

    m.def(
        "run_dgd",
        [](const DirectedGraph& graph, const std::vector<Shard>& shards, const LossModel& model,
           int rounds, const StepSchedule& step, const AttackSpec& attack, const std::string& init,
           double init_sigma, std::uint64_t init_seed, const std::vector<double>& init_shared,
           const std::function<void(int, long long, double, double,
                                    const std::vector<std::vector<double>>&)>& on_round) {
            BaselineConfig cfg;
            cfg.rounds = rounds;
            cfg.step = step;
            cfg.init = make_init(init, init_sigma, init_seed, init_shared);
            IterationHook hook;
            if (on_round)
                hook = [&](const IterationSnapshot& snap) {
                    ConsensusStats cs = snap.states->size() >= 2 ? consensus_stats(*snap.states)
                                                                 : ConsensusStats{};
                    on_round(snap.r, snap.t_c, cs.diameter, cs.mean_pairwise, *snap.states);
                };
            return run_dgd(graph, shards, model, cfg, attack, hook);
        },
        py::arg("graph"), py::arg("shards"), py::arg("model"), py::arg("rounds"),
        py::arg("step") = StepSchedule{}, py::arg("attack") = AttackSpec{},
        py::arg("init") = "zero", py::arg("init_sigma") = 0.1, py::arg("init_seed") = 0,
        py::arg("init_shared") = std::vector<double>{}, py::arg("on_round") = nullptr);

    m.def(
        "run_local_cd",
        [](const std::vector<Shard>& shards, const LossModel& model, int rounds,
           const StepSchedule& step, const std::string& init, double init_sigma,
           std::uint64_t init_seed, const std::vector<double>& init_shared,
           const std::function<void(int, long long, double, double,
                                    const std::vector<std::vector<double>>&)>& on_round) {
            BaselineConfig cfg;
            cfg.rounds = rounds;
            cfg.step = step;
            cfg.init = make_init(init, init_sigma, init_seed, init_shared);
            IterationHook hook;
            if (on_round)
                hook = [&](const IterationSnapshot& snap) {
                    ConsensusStats cs = snap.states->size() >= 2 ? consensus_stats(*snap.states)
                                                                 : ConsensusStats{};
                    on_round(snap.r, snap.t_c, cs.diameter, cs.mean_pairwise, *snap.states);
                };
            return run_local_cd(shards, model, cfg, hook);
        },
        py::arg("shards"), py::arg("model"), py::arg("rounds"), py::arg("step") = StepSchedule{},
        py::arg("init") = "zero", py::arg("init_sigma") = 0.1, py::arg("init_seed") = 0,
        py::arg("init_shared") = std::vector<double>{}, py::arg("on_round") = nullptr);

    m.def(
        "run_centralized_cd",
        [](const std::vector<std::vector<double>>& X, const std::vector<double>& y,
           const LossModel& model, double tolerance, int max_sweeps, const StepSchedule& step,
           const std::vector<double>& w0, bool strict) {
            CentralizedCdOptions opts;
            opts.tolerance = tolerance;
            opts.max_sweeps = max_sweeps;
            opts.step = step;
            opts.w0 = w0;
            opts.strict = strict;
            CdResult res = run_centralized_cd(make_samples(X, y), model, opts);
            py::dict out;
            out["w"] = res.w;
            out["risk"] = res.risk;
            out["sweeps"] = res.sweeps;
            out["converged"] = res.converged;
            return out;
        },
        py::arg("X"), py::arg("y"), py::arg("model"), py::arg("tolerance") = 1e-9,
        py::arg("max_sweeps") = 10000, py::arg("step") = StepSchedule{},
        py::arg("w0") = std::vector<double>{}, py::arg("strict") = true);

    // --- metrics ---
    m.def(
        "consensus_stats",
        [](const std::vector<std::vector<double>>& states) {
            ConsensusStats cs = consensus_stats(states);
            return py::make_tuple(cs.diameter, cs.mean_pairwise);
        },
        py::arg("states"));
}
