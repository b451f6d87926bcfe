#ifndef BYRDIE_BASELINES_HPP
#define BYRDIE_BASELINES_HPP

#include <span>
#include <vector>

#include "byrdie/protocol.hpp"

namespace byrdie {

struct BaselineConfig {
    StepSchedule step{};
    int rounds = 1;
    InitSpec init{};
    Cadence cadence = Cadence::PerR; // local CD also supports PerK
    int cadence_stride = 1;

    void validate() const;
};

// Distributed gradient descent: each honest node averages the full parameter
// vectors of N_j and itself with equal weights 1/(|N_j|+1), then takes a
// gradient step with rho(r) from the averaged point. No screening; Byzantine
// neighbors contribute whatever the attack spec dictates. Hook records carry
// k_pos = P and t = 1, so t_c = r*P (one vector broadcast counted as P scalar
// broadcasts).
RunResult run_dgd(const DirectedGraph& graph, const std::vector<Shard>& shards,
                  const LossModel& model, const BaselineConfig& cfg, const AttackSpec& attack,
                  const IterationHook& hook = {});

// Cyclic coordinate descent on each node's own shard, no communication.
// Convex kinds take an exact line-search step per coordinate; the MLP takes a
// single gradient-coordinate step with rho(r). Hook records carry t = 1, so
// t_c = (r-1)*P + k_pos counts per-dimension updates.
RunResult run_local_cd(const std::vector<Shard>& shards, const LossModel& model,
                       const BaselineConfig& cfg, const IterationHook& hook = {});

struct CentralizedCdOptions {
    double tolerance = 1e-9; // stop when the risk decrease over a sweep falls below this
    int max_sweeps = 10000;
    StepSchedule step{};     // used by the MLP gradient-step variant only
    std::vector<double> w0;  // empty = zeros
    bool strict = true;      // throw on non-convergence instead of returning
};

struct CdResult {
    std::vector<double> w;
    double risk = 0.0;
    int sweeps = 0;
    bool converged = false;
};

using SweepHook = std::function<void(int sweep, const std::vector<double>& w, double risk)>;

// High-precision cyclic coordinate descent on pooled data; the empirical
// stand-in for the ERM solution and the oracle behind excess-risk metrics.
// Convex kinds minimize each coordinate exactly (golden section to a 1e-10
// bracket); the MLP variant takes gradient-coordinate steps.
CdResult run_centralized_cd(std::span<const Sample> data, const LossModel& model,
                            const CentralizedCdOptions& opts, const SweepHook& hook = {});

// Exact minimizer of a one-dimensional convex slice via bracketing + golden
// section. Exposed for test oracles.
double golden_section_minimize(const std::function<double(double)>& f, double x0,
                               double bracket_tol = 1e-10);

} // namespace byrdie

#endif
