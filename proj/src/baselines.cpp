#include "byrdie/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "byrdie/errors.hpp"

namespace byrdie {

void BaselineConfig::validate() const {
    if (rounds < 0) throw ConfigError("round count must be non-negative");
    if (cadence_stride < 1) throw ConfigError("cadence stride must be >= 1");
    step.validate();
}

namespace {

struct ShardIndex {
    std::vector<const Shard*> by_node;
    std::vector<int> honest_ids;
};

ShardIndex index_shards(int node_count, const std::vector<Shard>& shards,
                        const AttackSpec& attack) {
    ShardIndex idx;
    idx.by_node.assign(static_cast<std::size_t>(node_count) + 1, nullptr);
    for (const auto& s : shards) {
        if (s.owner < 1 || s.owner > node_count) throw ConfigError("shard owner out of range");
        if (idx.by_node[static_cast<std::size_t>(s.owner)])
            throw ConfigError("duplicate shard for node " + std::to_string(s.owner));
        idx.by_node[static_cast<std::size_t>(s.owner)] = &s;
    }
    for (int i = 1; i <= node_count; ++i)
        if (!attack.is_byzantine(i)) {
            if (!idx.by_node[static_cast<std::size_t>(i)])
                throw ConfigError("missing shard for honest node " + std::to_string(i));
            idx.honest_ids.push_back(i);
        }
    return idx;
}

} // namespace

RunResult run_dgd(const DirectedGraph& graph, const std::vector<Shard>& shards,
                  const LossModel& model, const BaselineConfig& cfg, const AttackSpec& attack,
                  const IterationHook& hook) {
    cfg.validate();
    attack.validate(graph.node_count());
    const int M = graph.node_count();
    ShardIndex idx = index_shards(M, shards, attack);

    int feature_dim = static_cast<int>(
        idx.by_node[static_cast<std::size_t>(idx.honest_ids.front())]->samples.front().x.size());
    const int P = model.param_dim(feature_dim);

    std::vector<std::vector<double>> states =
        make_initial_states(cfg.init, idx.honest_ids.size(), P);
    std::vector<int> honest_index(static_cast<std::size_t>(M) + 1, -1);
    for (std::size_t h = 0; h < idx.honest_ids.size(); ++h)
        honest_index[static_cast<std::size_t>(idx.honest_ids[h])] = static_cast<int>(h);

    std::vector<std::vector<double>> next(states.size());
    std::vector<double> avg(static_cast<std::size_t>(P));
    for (int r = 1; r <= cfg.rounds; ++r) {
        const double rho = cfg.step.at(r);
        for (std::size_t h = 0; h < idx.honest_ids.size(); ++h) {
            const int j = idx.honest_ids[h];
            const auto& nbrs = graph.in_neighbors(j);
            avg = states[h];
            for (int i : nbrs) {
                int hi = honest_index[static_cast<std::size_t>(i)];
                if (hi >= 0) {
                    const auto& wi = states[static_cast<std::size_t>(hi)];
                    for (int k = 0; k < P; ++k)
                        avg[static_cast<std::size_t>(k)] += wi[static_cast<std::size_t>(k)];
                } else {
                    for (int k = 0; k < P; ++k)
                        avg[static_cast<std::size_t>(k)] += attack.vector_component(i, r, k, j);
                }
            }
            const double inv = 1.0 / static_cast<double>(nbrs.size() + 1);
            for (double& v : avg) v *= inv;
            std::vector<double> g =
                gradient(model, avg, idx.by_node[static_cast<std::size_t>(j)]->samples);
            next[h].resize(static_cast<std::size_t>(P));
            for (int k = 0; k < P; ++k) {
                double v = avg[static_cast<std::size_t>(k)] - rho * g[static_cast<std::size_t>(k)];
                if (!std::isfinite(v))
                    throw NumericFault("DGD produced a non-finite value [node " +
                                       std::to_string(j) + ", r=" + std::to_string(r) + "]");
                next[h][static_cast<std::size_t>(k)] = v;
            }
        }
        states.swap(next);

        if (hook && (r % cfg.cadence_stride == 0 || r == cfg.rounds)) {
            IterationSnapshot snap;
            snap.r = r;
            snap.k_pos = P;
            snap.coord = P - 1;
            snap.t = 1;
            snap.t_c = communication_iteration(r, P, 1, 1, P);
            snap.honest_ids = &idx.honest_ids;
            snap.states = &states;
            hook(snap);
        }
    }
    return RunResult{std::move(idx.honest_ids), std::move(states)};
}

namespace {

struct Bracket {
    double lo, hi;
};

Bracket bracket_minimum(const std::function<double(double)>& f, double x0) {
    double step = 1.0;
    double f0 = f(x0);
    double fp = f(x0 + step);
    double fm = f(x0 - step);
    if (f0 <= fp && f0 <= fm) return {x0 - step, x0 + step};
    double dir = fp < fm ? 1.0 : -1.0;
    double x1 = x0 + dir * step;
    double f1 = std::min(fp, fm);
    double xa = x0;
    for (int iter = 0; iter < 200; ++iter) {
        step *= 2.0;
        double x2 = x1 + dir * step;
        double f2 = f(x2);
        if (f2 >= f1) return {std::min(xa, x2), std::max(xa, x2)};
        xa = x1;
        x1 = x2;
        f1 = f2;
    }
    throw NumericFault("line search failed to bracket a minimum");
}

} // namespace

double golden_section_minimize(const std::function<double(double)>& f, double x0,
                               double bracket_tol) {
    Bracket br = bracket_minimum(f, x0);
    const double invphi = 0.6180339887498948482;
    double a = br.lo, b = br.hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > bracket_tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

namespace {

// Per-vector cache for exact coordinate minimization of the linear kinds:
// margins m_i = w.x_i and the squared norm of w, both refreshed per sweep and
// updated incrementally within it.
struct SliceCache {
    std::vector<double> margins;
    double reg_sq = 0;

    void refresh(std::span<const Sample> data, const std::vector<double>& w) {
        margins.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            double m = 0;
            for (std::size_t k = 0; k < w.size(); ++k) m += w[k] * data[i].x[k];
            margins[i] = m;
        }
        reg_sq = 0;
        for (double v : w) reg_sq += v * v;
    }
};

double slice_risk(std::span<const Sample> data, const LossModel& model, const SliceCache& cache,
                  int k, double wk, double a) {
    double acc = 0;
    const double delta = a - wk;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double m = cache.margins[i] + delta * data[i].x[static_cast<std::size_t>(k)];
        const double z = data[i].y * m;
        if (model.kind == LossKind::Square) {
            double d = 1.0 - z;
            acc += d * d;
        } else if (model.kind == LossKind::SquareHinge) {
            double d = std::max(0.0, 1.0 - z);
            acc += d * d;
        } else {
            acc += z >= 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
        }
    }
    return acc / static_cast<double>(data.size()) +
           0.5 * model.lambda * (cache.reg_sq - wk * wk + a * a);
}

// Exact minimization of coordinate k; updates w and the cache in place.
void coordinate_line_search(std::span<const Sample> data, const LossModel& model,
                            std::vector<double>& w, int k, SliceCache& cache) {
    const double wk = w[static_cast<std::size_t>(k)];
    double best = golden_section_minimize(
        [&](double a) { return slice_risk(data, model, cache, k, wk, a); }, wk);
    const double delta = best - wk;
    for (std::size_t i = 0; i < data.size(); ++i)
        cache.margins[i] += delta * data[i].x[static_cast<std::size_t>(k)];
    cache.reg_sq += best * best - wk * wk;
    w[static_cast<std::size_t>(k)] = best;
}

} // namespace

CdResult run_centralized_cd(std::span<const Sample> data, const LossModel& model,
                            const CentralizedCdOptions& opts, const SweepHook& hook) {
    if (!(opts.tolerance > 0)) throw ConfigError("centralized CD needs tolerance > 0");
    if (opts.max_sweeps < 1) throw ConfigError("centralized CD needs max_sweeps >= 1");
    if (data.empty()) throw ConfigError("empty dataset");
    if (model.kind == LossKind::MlpSoftmax) opts.step.validate();

    const int P = model.param_dim(static_cast<int>(data.front().x.size()));
    CdResult res;
    res.w = opts.w0.empty() ? std::vector<double>(static_cast<std::size_t>(P), 0.0) : opts.w0;
    if (static_cast<int>(res.w.size()) != P)
        throw ConfigError("initial vector has wrong dimension");

    SliceCache cache;
    double prev = risk(model, res.w, data);
    for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        if (model.kind == LossKind::MlpSoftmax) {
            const double rho = opts.step.at(sweep);
            for (int k = 0; k < P; ++k)
                res.w[static_cast<std::size_t>(k)] -= rho * coord_gradient(model, res.w, data, k);
        } else {
            cache.refresh(data, res.w);
            for (int k = 0; k < P; ++k) coordinate_line_search(data, model, res.w, k, cache);
        }
        double cur = risk(model, res.w, data);
        res.sweeps = sweep;
        if (hook) hook(sweep, res.w, cur);
        double decrease = prev - cur;
        prev = cur;
        // |.|: at the optimum the line search can wobble by FP noise.
        if (std::abs(decrease) < opts.tolerance) {
            res.converged = true;
            break;
        }
    }
    res.risk = prev;
    if (!res.converged && opts.strict)
        throw NumericFault("centralized CD did not converge within " +
                           std::to_string(opts.max_sweeps) + " sweeps");
    return res;
}

RunResult run_local_cd(const std::vector<Shard>& shards, const LossModel& model,
                       const BaselineConfig& cfg, const IterationHook& hook) {
    cfg.validate();
    if (shards.empty()) throw ConfigError("local CD needs at least one shard");

    std::vector<int> ids;
    for (const auto& s : shards) ids.push_back(s.owner);

    int feature_dim = static_cast<int>(shards.front().samples.front().x.size());
    const int P = model.param_dim(feature_dim);
    std::vector<std::vector<double>> states = make_initial_states(cfg.init, shards.size(), P);
    std::vector<SliceCache> caches(shards.size());

    auto emit = [&](int r, int k_pos) {
        IterationSnapshot snap;
        snap.r = r;
        snap.k_pos = k_pos;
        snap.coord = k_pos - 1;
        snap.t = 1;
        snap.t_c = communication_iteration(r, k_pos, 1, 1, P);
        snap.honest_ids = &ids;
        snap.states = &states;
        hook(snap);
    };

    for (int r = 1; r <= cfg.rounds; ++r) {
        if (model.kind != LossKind::MlpSoftmax)
            for (std::size_t h = 0; h < shards.size(); ++h)
                caches[h].refresh(shards[h].samples, states[h]);
        for (int k = 0; k < P; ++k) {
            for (std::size_t h = 0; h < shards.size(); ++h) {
                auto& w = states[h];
                if (model.kind == LossKind::MlpSoftmax) {
                    double g = coord_gradient(model, w, shards[h].samples, k);
                    w[static_cast<std::size_t>(k)] -= cfg.step.at(r) * g;
                } else {
                    coordinate_line_search(shards[h].samples, model, w, k, caches[h]);
                }
            }
            if (hook && (cfg.cadence == Cadence::PerK || cfg.cadence == Cadence::PerT))
                emit(r, k + 1);
        }
        if (hook && cfg.cadence == Cadence::PerR &&
            (r % cfg.cadence_stride == 0 || r == cfg.rounds))
            emit(r, P);
    }
    return RunResult{std::move(ids), std::move(states)};
}

} // namespace byrdie
