#ifndef BYRDIE_PROTOCOL_HPP
#define BYRDIE_PROTOCOL_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "byrdie/graph.hpp"
#include "byrdie/model.hpp"

namespace byrdie {

// rho(tau) = rho0 / (tau + tau0)^power. Restricting power to (0.5, 1] keeps
// every admissible schedule non-increasing, non-summable and square-summable.
struct StepSchedule {
    double rho0 = 1.0;
    double tau0 = 0.0;
    double power = 1.0;

    void validate() const;
    double at(long long tau) const;
};

enum class CoordOrder { Natural, Permuted };
enum class InitKind { Zero, Gaussian, Shared, PerNode };

struct InitSpec {
    InitKind kind = InitKind::Zero;
    double sigma = 0.1;         // Gaussian
    std::uint64_t seed = 0;     // Gaussian
    std::vector<double> shared; // Shared: one vector for every honest node
    std::vector<std::vector<double>> per_node; // PerNode: aligned with honest ids
};

enum class Cadence { PerT, PerK, PerR };

struct ProtocolConfig {
    int trim = 0;        // b
    int inner_iters = 1; // T
    int rounds = 1;      // r_bar
    StepSchedule step{};
    CoordOrder order = CoordOrder::Natural;
    std::uint64_t order_seed = 0;
    InitSpec init{};
    Cadence cadence = Cadence::PerK;
    int cadence_stride = 1;     // with Cadence::PerR, emit every this many rounds
    bool zero_gradient = false; // diagnostic: run the consensus part only

    void validate() const;
};

// Byzantine behavior. Emitted values are a pure function of the protocol
// indices, the receiver (ValueSpoof only) and the seed, so runs replay.
struct AttackSpec {
    enum class Kind { None, UniformRandom, Constant, SignFlip, ValueSpoof };

    Kind kind = Kind::None;
    std::vector<int> byzantine; // sorted node ids
    double lo = 0.0, hi = 1.0;  // UniformRandom / ValueSpoof range
    double value = 0.0;         // Constant
    double scale = 1.0;         // SignFlip: emits scale * (-1)^{t_c}
    std::uint64_t seed = 0;

    static Kind kind_from_string(const std::string& name);
    bool is_byzantine(int node) const;
    // Scalar broadcast for coordinate subproblem (r, k_pos, t). Broadcast kinds
    // ignore the receiver; ValueSpoof draws a fresh value per receiver.
    double scalar_value(int node, int r, int k_pos, int t, long long t_c, int receiver) const;
    // Per-coordinate component of the full-vector message used by DGD.
    double vector_component(int node, int r, int coord, int receiver) const;
    void validate(int node_count) const;
};

struct ScreenResult {
    std::vector<std::pair<int, double>> kept; // (sender, value), ascending (value, sender)
    std::vector<int> removed_low;             // N^s senders
    std::vector<int> removed_high;            // N^l senders
};

// Removes the b smallest and b largest received values; ties break by
// (value, sender id). Non-finite values sort as +infinity. The self value is
// not part of the received set; it joins at the update step.
ScreenResult screen(const std::vector<std::pair<int, double>>& received, int b);

// [w]_k <- (self + sum kept) / (|N_j| - 2b + 1) - rho * g_k.
double update_coordinate(double self_value, std::span<const double> kept, int neighborhood_size,
                         int b, double rho, double coord_grad);

// State exposed to per-iteration hooks. Indices are 1-based protocol counters;
// k_pos is the position of the current subproblem in this round's coordinate
// order (equal to the coordinate index + 1 under the natural order), so that
// t_c = (r-1)*T*P + (k_pos-1)*T + t always holds. coord is the 0-based
// coordinate actually updated.
struct IterationSnapshot {
    int r = 0;
    int k_pos = 0;
    int coord = 0;
    int t = 0;
    long long t_c = 0;
    const std::vector<int>* honest_ids = nullptr;
    const std::vector<std::vector<double>>* states = nullptr;
};

using IterationHook = std::function<void(const IterationSnapshot&)>;

struct RunResult {
    std::vector<int> honest_ids;
    std::vector<std::vector<double>> states; // aligned with honest_ids
};

long long communication_iteration(int r, int k_pos, int t, int T, int P);

// Initial parameter vectors for `count` nodes of dimension P.
std::vector<std::vector<double>> make_initial_states(const InitSpec& init, std::size_t count,
                                                     int P);

// Round-synchronous ByRDiE: for r = 1..rounds, each coordinate subproblem runs
// T broadcast/screen/update iterations with step rho(r+t-1); a coordinate is
// frozen between its subproblem in round r and round r+1. Honest nodes send
// their true coordinate value to every neighbor; Byzantine nodes send whatever
// the attack spec dictates. Fully deterministic given the seeds.
RunResult run_byrdie(const DirectedGraph& graph, const std::vector<Shard>& shards,
                     const LossModel& model, const ProtocolConfig& cfg, const AttackSpec& attack,
                     const IterationHook& hook = {});

} // namespace byrdie

#endif
