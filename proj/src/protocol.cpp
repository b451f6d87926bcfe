#include "byrdie/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "byrdie/errors.hpp"

namespace byrdie {

void StepSchedule::validate() const {
    if (!(rho0 > 0)) throw ConfigError("step schedule needs rho0 > 0");
    if (tau0 < 0) throw ConfigError("step schedule needs tau0 >= 0");
    if (!(power > 0.5 && power <= 1.0))
        throw ConfigError("step schedule power must lie in (0.5, 1]");
}

double StepSchedule::at(long long tau) const {
    if (tau < 1) throw ConfigError("step index tau must be >= 1");
    return rho0 / std::pow(static_cast<double>(tau) + tau0, power);
}

void ProtocolConfig::validate() const {
    if (trim < 0) throw ConfigError("trim parameter b must be non-negative");
    if (inner_iters < 1) throw ConfigError("inner iteration count T must be >= 1");
    if (rounds < 0) throw ConfigError("round count must be non-negative");
    if (cadence_stride < 1) throw ConfigError("cadence stride must be >= 1");
    step.validate();
}

AttackSpec::Kind AttackSpec::kind_from_string(const std::string& name) {
    if (name == "none") return Kind::None;
    if (name == "uniform_random") return Kind::UniformRandom;
    if (name == "constant") return Kind::Constant;
    if (name == "sign_flip") return Kind::SignFlip;
    if (name == "value_spoof") return Kind::ValueSpoof;
    throw ConfigError("unknown attack kind: " + name);
}

bool AttackSpec::is_byzantine(int node) const {
    return std::binary_search(byzantine.begin(), byzantine.end(), node);
}

void AttackSpec::validate(int node_count) const {
    int prev = 0;
    for (int id : byzantine) {
        if (id < 1 || id > node_count)
            throw ConfigError("attack references unknown node " + std::to_string(id));
        if (id <= prev) throw ConfigError("byzantine ids must be sorted and distinct");
        prev = id;
    }
    if (kind != Kind::None && !byzantine.empty() &&
        static_cast<int>(byzantine.size()) >= node_count)
        throw ConfigError("at least one honest node is required");
}

double AttackSpec::scalar_value(int node, int r, int k_pos, int t, long long t_c,
                                int receiver) const {
    switch (kind) {
        case Kind::None:
            throw ConfigError("attack value requested from a 'none' attack");
        case Kind::Constant:
            return value;
        case Kind::SignFlip:
            return (t_c % 2 == 0) ? scale : -scale;
        case Kind::UniformRandom: {
            Rng r_(mix_seed({seed, static_cast<std::uint64_t>(node), static_cast<std::uint64_t>(r),
                             static_cast<std::uint64_t>(k_pos), static_cast<std::uint64_t>(t)}));
            return r_.uniform(lo, hi);
        }
        case Kind::ValueSpoof: {
            Rng r_(mix_seed({seed, static_cast<std::uint64_t>(node), static_cast<std::uint64_t>(r),
                             static_cast<std::uint64_t>(k_pos), static_cast<std::uint64_t>(t),
                             static_cast<std::uint64_t>(receiver)}));
            return r_.uniform(lo, hi);
        }
    }
    throw ConfigError("unknown attack kind");
}

double AttackSpec::vector_component(int node, int r, int coord, int receiver) const {
    switch (kind) {
        case Kind::None:
            throw ConfigError("attack value requested from a 'none' attack");
        case Kind::Constant:
            return value;
        case Kind::SignFlip:
            return (r % 2 == 0) ? scale : -scale;
        case Kind::UniformRandom: {
            Rng r_(mix_seed({seed, static_cast<std::uint64_t>(node), static_cast<std::uint64_t>(r),
                             0xDEULL, static_cast<std::uint64_t>(coord)}));
            return r_.uniform(lo, hi);
        }
        case Kind::ValueSpoof: {
            Rng r_(mix_seed({seed, static_cast<std::uint64_t>(node), static_cast<std::uint64_t>(r),
                             0xDEULL, static_cast<std::uint64_t>(coord),
                             static_cast<std::uint64_t>(receiver)}));
            return r_.uniform(lo, hi);
        }
    }
    throw ConfigError("unknown attack kind");
}

namespace {

// Non-finite received values sort as +infinity so that b >= 1 screens them out.
double sort_key(double v) {
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

} // namespace

ScreenResult screen(const std::vector<std::pair<int, double>>& received, int b) {
    if (b < 0) throw ConfigError("trim parameter b must be non-negative");
    const int n = static_cast<int>(received.size());
    if (n < 2 * b + 1)
        throw ProtocolViolation("screening needs at least 2b+1 = " + std::to_string(2 * b + 1) +
                                " received values, got " + std::to_string(n));
    std::vector<std::pair<int, double>> sorted = received;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b_) {
        double ka = sort_key(a.second), kb = sort_key(b_.second);
        if (ka != kb) return ka < kb;
        return a.first < b_.first;
    });
    ScreenResult res;
    for (int i = 0; i < b; ++i) res.removed_low.push_back(sorted[static_cast<std::size_t>(i)].first);
    for (int i = n - b; i < n; ++i)
        res.removed_high.push_back(sorted[static_cast<std::size_t>(i)].first);
    res.kept.assign(sorted.begin() + b, sorted.end() - b);
    return res;
}

double update_coordinate(double self_value, std::span<const double> kept, int neighborhood_size,
                         int b, double rho, double coord_grad) {
    if (static_cast<int>(kept.size()) != neighborhood_size - 2 * b)
        throw ProtocolViolation("kept set has " + std::to_string(kept.size()) +
                                " values, expected |N_j|-2b = " +
                                std::to_string(neighborhood_size - 2 * b));
    if (!std::isfinite(self_value) || !std::isfinite(rho) || !std::isfinite(coord_grad))
        throw NumericFault("non-finite input to coordinate update");
    double sum = self_value;
    for (double v : kept) {
        if (!std::isfinite(v)) throw NumericFault("non-finite kept value in coordinate update");
        sum += v;
    }
    double next = sum / static_cast<double>(neighborhood_size - 2 * b + 1) - rho * coord_grad;
    if (!std::isfinite(next)) throw NumericFault("coordinate update produced a non-finite value");
    return next;
}

long long communication_iteration(int r, int k_pos, int t, int T, int P) {
    return static_cast<long long>(r - 1) * T * P + static_cast<long long>(k_pos - 1) * T + t;
}

std::vector<std::vector<double>> make_initial_states(const InitSpec& init, std::size_t count,
                                                     int P) {
    std::vector<std::vector<double>> states;
    switch (init.kind) {
        case InitKind::Zero:
            states.assign(count, std::vector<double>(static_cast<std::size_t>(P), 0.0));
            break;
        case InitKind::Gaussian: {
            Rng rng(init.seed);
            std::vector<double> w(static_cast<std::size_t>(P));
            for (double& v : w) v = init.sigma * rng.normal();
            states.assign(count, w);
            break;
        }
        case InitKind::Shared:
            if (static_cast<int>(init.shared.size()) != P)
                throw ConfigError("shared init vector has wrong dimension");
            states.assign(count, init.shared);
            break;
        case InitKind::PerNode:
            if (init.per_node.size() != count)
                throw ConfigError("per-node init needs one vector per honest node");
            for (const auto& w : init.per_node)
                if (static_cast<int>(w.size()) != P)
                    throw ConfigError("per-node init vector has wrong dimension");
            states = init.per_node;
            break;
    }
    return states;
}

RunResult run_byrdie(const DirectedGraph& graph, const std::vector<Shard>& shards,
                     const LossModel& model, const ProtocolConfig& cfg, const AttackSpec& attack,
                     const IterationHook& hook) {
    cfg.validate();
    attack.validate(graph.node_count());
    DegreeReport deg = validate_degrees(graph, cfg.trim);
    if (!deg.ok) {
        std::string msg = "in-degree below 2b+1 = " + std::to_string(deg.required) + " at nodes:";
        for (auto [node, d] : deg.violations)
            msg += " " + std::to_string(node) + "(" + std::to_string(d) + ")";
        throw ConfigError(msg);
    }

    const int M = graph.node_count();
    std::vector<int> honest_ids;
    for (int i = 1; i <= M; ++i)
        if (!attack.is_byzantine(i)) honest_ids.push_back(i);

    // Shard lookup; every honest node must own exactly one shard.
    std::vector<const Shard*> shard_of(static_cast<std::size_t>(M) + 1, nullptr);
    for (const auto& s : shards) {
        if (s.owner < 1 || s.owner > M) throw ConfigError("shard owner out of range");
        if (shard_of[static_cast<std::size_t>(s.owner)])
            throw ConfigError("duplicate shard for node " + std::to_string(s.owner));
        shard_of[static_cast<std::size_t>(s.owner)] = &s;
    }
    for (int id : honest_ids)
        if (!shard_of[static_cast<std::size_t>(id)])
            throw ConfigError("missing shard for honest node " + std::to_string(id));

    int feature_dim = static_cast<int>(shard_of[static_cast<std::size_t>(honest_ids.front())]
                                           ->samples.front().x.size());
    const int P = model.param_dim(feature_dim);
    const int T = cfg.inner_iters;
    const int b = cfg.trim;

    std::vector<std::vector<double>> states = make_initial_states(cfg.init, honest_ids.size(), P);
    std::vector<int> honest_index(static_cast<std::size_t>(M) + 1, -1);
    for (std::size_t h = 0; h < honest_ids.size(); ++h)
        honest_index[static_cast<std::size_t>(honest_ids[h])] = static_cast<int>(h);

    Rng perm_rng(cfg.order_seed);
    std::vector<int> order(static_cast<std::size_t>(P));
    std::vector<double> emitted(static_cast<std::size_t>(M) + 1, 0.0);
    std::vector<double> next_value(honest_ids.size(), 0.0);
    std::vector<std::pair<int, double>> received;
    std::vector<double> kept_values;

    for (int r = 1; r <= cfg.rounds; ++r) {
        for (int k = 0; k < P; ++k) order[static_cast<std::size_t>(k)] = k;
        if (cfg.order == CoordOrder::Permuted) perm_rng.shuffle(order);

        for (int k_pos = 1; k_pos <= P; ++k_pos) {
            const int coord = order[static_cast<std::size_t>(k_pos - 1)];
            for (int t = 1; t <= T; ++t) {
                const long long t_c = communication_iteration(r, k_pos, t, T, P);
                const double rho = cfg.step.at(static_cast<long long>(r) + t - 1);

                // Broadcast snapshot for this coordinate.
                for (int node = 1; node <= M; ++node) {
                    int h = honest_index[static_cast<std::size_t>(node)];
                    emitted[static_cast<std::size_t>(node)] =
                        h >= 0 ? states[static_cast<std::size_t>(h)][static_cast<std::size_t>(coord)]
                               : attack.scalar_value(node, r, k_pos, t, t_c, 0);
                }

                for (std::size_t h = 0; h < honest_ids.size(); ++h) {
                    const int j = honest_ids[h];
                    const auto& nbrs = graph.in_neighbors(j);
                    received.clear();
                    for (int i : nbrs) {
                        double v = (attack.kind == AttackSpec::Kind::ValueSpoof &&
                                    attack.is_byzantine(i))
                                       ? attack.scalar_value(i, r, k_pos, t, t_c, j)
                                       : emitted[static_cast<std::size_t>(i)];
                        received.emplace_back(i, v);
                    }
                    ScreenResult scr = screen(received, b);
                    kept_values.clear();
                    for (const auto& [sender, v] : scr.kept) kept_values.push_back(v);

                    double g = 0.0;
                    if (!cfg.zero_gradient)
                        g = coord_gradient(model, states[h],
                                           shard_of[static_cast<std::size_t>(j)]->samples, coord);
                    try {
                        next_value[h] =
                            update_coordinate(emitted[static_cast<std::size_t>(j)], kept_values,
                                              static_cast<int>(nbrs.size()), b, rho, g);
                    } catch (const NumericFault& e) {
                        throw NumericFault(std::string(e.what()) + " [node " + std::to_string(j) +
                                           ", r=" + std::to_string(r) + ", k=" +
                                           std::to_string(coord) + ", t=" + std::to_string(t) + "]");
                    }
                }
                for (std::size_t h = 0; h < honest_ids.size(); ++h)
                    states[h][static_cast<std::size_t>(coord)] = next_value[h];

                if (hook) {
                    bool emit = false;
                    switch (cfg.cadence) {
                        case Cadence::PerT: emit = true; break;
                        case Cadence::PerK: emit = (t == T); break;
                        case Cadence::PerR:
                            emit = (t == T && k_pos == P &&
                                    (r % cfg.cadence_stride == 0 || r == cfg.rounds));
                            break;
                    }
                    if (emit) {
                        IterationSnapshot snap;
                        snap.r = r;
                        snap.k_pos = k_pos;
                        snap.coord = coord;
                        snap.t = t;
                        snap.t_c = t_c;
                        snap.honest_ids = &honest_ids;
                        snap.states = &states;
                        hook(snap);
                    }
                }
            }
        }
    }
    return RunResult{std::move(honest_ids), std::move(states)};
}

} // namespace byrdie
