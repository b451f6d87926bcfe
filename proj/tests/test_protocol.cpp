#include <doctest.h>

#include <cmath>
#include <limits>

#include "byrdie/baselines.hpp"
#include "byrdie/dataset.hpp"
#include "byrdie/errors.hpp"
#include "byrdie/metrics.hpp"
#include "byrdie/protocol.hpp"

using namespace byrdie;

namespace {

std::vector<Shard> equal_shards(const Dataset& ds, const std::vector<int>& owners) {
    std::vector<Shard> out;
    for (int id : owners) {
        Shard s;
        s.owner = id;
        s.samples = ds.samples;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Shard> partition_shards(const Dataset& ds, const std::vector<int>& honest, int N,
                                    std::uint64_t seed) {
    Rng rng(seed);
    return partition(ds, honest, N, true, rng).shards;
}

} // namespace

TEST_CASE("screening removes one value from each tail") {
    std::vector<std::pair<int, double>> vals{{1, 0.1}, {2, 0.5}, {3, 0.9}, {4, 0.3}, {5, 0.7}};
    ScreenResult res = screen(vals, 1);
    REQUIRE(res.kept.size() == 3);
    CHECK(res.kept[0] == std::pair<int, double>{4, 0.3});
    CHECK(res.kept[1] == std::pair<int, double>{2, 0.5});
    CHECK(res.kept[2] == std::pair<int, double>{5, 0.7});
    CHECK(res.removed_low == std::vector<int>{1});
    CHECK(res.removed_high == std::vector<int>{3});
}

TEST_CASE("screening with b=0 keeps everything") {
    std::vector<std::pair<int, double>> vals{{3, 0.2}, {1, 0.8}};
    ScreenResult res = screen(vals, 0);
    CHECK(res.kept.size() == 2);
    CHECK(res.removed_low.empty());
    CHECK(res.removed_high.empty());
}

TEST_CASE("screening ties break by sender id") {
    std::vector<std::pair<int, double>> vals{{1, 0.4}, {2, 0.4}, {3, 0.4}, {4, 0.4}, {5, 0.4}};
    ScreenResult res = screen(vals, 2);
    REQUIRE(res.kept.size() == 1);
    CHECK(res.kept[0].first == 3);
    CHECK(res.removed_low == std::vector<int>{1, 2});
    CHECK(res.removed_high == std::vector<int>{4, 5});
}

TEST_CASE("screening needs 2b+1 values") {
    std::vector<std::pair<int, double>> vals{{1, 0.1}, {2, 0.2}};
    CHECK_THROWS_AS(screen(vals, 1), ProtocolViolation);
}

TEST_CASE("non-finite values sort high and are screened when b >= 1") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, double>> vals{{1, 0.5}, {2, nan}, {3, 0.1}, {4, inf}, {5, 0.3}};
    ScreenResult res = screen(vals, 2);
    REQUIRE(res.kept.size() == 1);
    CHECK(res.kept[0].first == 1); // 0.5 survives; nan/inf trimmed into the high tail
    CHECK(res.removed_high == std::vector<int>{2, 4});
}

TEST_CASE("update rule follows the trimmed-average-minus-step form") {
    std::vector<double> kept{0.3, 0.5, 0.7};
    CHECK(update_coordinate(0.4, kept, 5, 1, 0.0, 123.0) == doctest::Approx(0.475));
    std::vector<double> same{0.4, 0.4, 0.4};
    CHECK(update_coordinate(0.4, same, 5, 1, 0.0, 0.0) == doctest::Approx(0.4));
    std::vector<double> ones{1.0, 1.0, 1.0};
    CHECK(update_coordinate(0.0, ones, 5, 1, 0.1, 2.0) == doctest::Approx(0.55));
}

TEST_CASE("update rejects wrong kept-set sizes and non-finite inputs") {
    std::vector<double> kept{0.3, 0.5};
    CHECK_THROWS_AS(update_coordinate(0.4, kept, 5, 1, 0.0, 0.0), ProtocolViolation);
    std::vector<double> bad{0.3, std::numeric_limits<double>::quiet_NaN(), 0.7};
    CHECK_THROWS_AS(update_coordinate(0.4, bad, 5, 1, 0.0, 0.0), NumericFault);
}

TEST_CASE("step schedule values and summability checks") {
    StepSchedule s{1.0, 0.0, 1.0};
    CHECK(s.at(1) == doctest::Approx(1.0));
    CHECK(s.at(4) == doctest::Approx(0.25));
    CHECK_THROWS_AS(s.at(0), ConfigError);

    double sum = 0, sum_sq = 0;
    for (long long tau = 1; tau <= 1000000; ++tau) {
        double v = s.at(tau);
        sum += v;
        sum_sq += v * v;
    }
    CHECK(sum >= 13.8);
    CHECK(sum_sq <= 1.6449340668482264); // pi^2/6

    CHECK_THROWS_AS((StepSchedule{1.0, 0.0, 0.5}.validate()), ConfigError);
    CHECK_THROWS_AS((StepSchedule{1.0, 0.0, 1.2}.validate()), ConfigError);
    CHECK_THROWS_AS((StepSchedule{0.0, 0.0, 1.0}.validate()), ConfigError);
    CHECK_NOTHROW((StepSchedule{0.5, 3.0, 0.75}.validate()));
}

TEST_CASE("t_c counter matches the (r,k,t) decomposition") {
    CHECK(communication_iteration(1, 1, 1, 1, 5) == 1);
    CHECK(communication_iteration(2, 3, 1, 1, 5) == 8);
    CHECK(communication_iteration(3, 2, 2, 4, 7) == 2 * 4 * 7 + 1 * 4 + 2);
}

TEST_CASE("faultless run reaches consensus and keeps shrinking") {
    Rng drng(101);
    Dataset ds = synth_two_class(3, 1.0, 0.5, 400, drng);
    augment_bias(ds);
    std::vector<int> honest;
    for (int i = 1; i <= 8; ++i) honest.push_back(i);
    std::vector<Shard> shards = partition_shards(ds, honest, 50, 5);
    DirectedGraph g = complete_graph(8);
    LossModel model{LossKind::Logistic, 0.01, {}};

    ProtocolConfig cfg;
    cfg.trim = 0;
    cfg.inner_iters = 1;
    cfg.rounds = 200;
    cfg.cadence = Cadence::PerR;

    double diam_at_10 = -1, diam_at_200 = -1;
    auto hook = [&](const IterationSnapshot& snap) {
        double d = consensus_stats(*snap.states).diameter;
        if (snap.r == 10) diam_at_10 = d;
        if (snap.r == 200) diam_at_200 = d;
    };
    run_byrdie(g, shards, model, cfg, AttackSpec{}, hook);
    CHECK(diam_at_200 < 1e-2);
    CHECK(diam_at_200 < diam_at_10);
}

TEST_CASE("identical shards and identical init keep all nodes identical") {
    Rng drng(7);
    Dataset ds = synth_two_class(2, 1.0, 0.4, 30, drng);
    std::vector<int> owners{1, 2, 3, 4, 5};
    std::vector<Shard> shards = equal_shards(ds, owners);
    DirectedGraph g = complete_graph(5);
    LossModel model{LossKind::SquareHinge, 0.01, {}};

    ProtocolConfig cfg;
    cfg.trim = 1;
    cfg.rounds = 20;
    cfg.cadence = Cadence::PerT;
    auto hook = [&](const IterationSnapshot& snap) {
        const auto& states = *snap.states;
        for (std::size_t h = 1; h < states.size(); ++h) CHECK(states[h] == states[0]);
    };
    run_byrdie(g, shards, model, cfg, AttackSpec{}, hook);
}

TEST_CASE("byrdie runs are deterministic") {
    Rng drng(33);
    Dataset ds = synth_two_class(3, 1.0, 0.5, 200, drng);
    augment_bias(ds);
    DirectedGraph g = complete_graph(7);
    AttackSpec attack;
    attack.kind = AttackSpec::Kind::UniformRandom;
    attack.byzantine = {7};
    attack.seed = 99;
    std::vector<int> honest{1, 2, 3, 4, 5, 6};
    std::vector<Shard> shards = partition_shards(ds, honest, 20, 6);
    LossModel model{LossKind::Logistic, 0.01, {}};

    ProtocolConfig cfg;
    cfg.trim = 1;
    cfg.rounds = 30;
    cfg.order = CoordOrder::Permuted;
    cfg.order_seed = 4;

    RunResult a = run_byrdie(g, shards, model, cfg, attack);
    RunResult b = run_byrdie(g, shards, model, cfg, attack);
    CHECK(a.states == b.states);
    CHECK(a.honest_ids == std::vector<int>{1, 2, 3, 4, 5, 6});
}

TEST_CASE("screening safety: kept values bracketed by honest neighborhood values") {
    Rng rng(61);
    for (int trial = 0; trial < 200; ++trial) {
        int b = 1 + static_cast<int>(rng.below(2));
        int n = 2 * b + 1 + static_cast<int>(rng.below(6));
        int byz_in_nbhd = static_cast<int>(rng.below(static_cast<std::uint64_t>(b) + 1));
        std::vector<std::pair<int, double>> received;
        double honest_min = 1e300, honest_max = -1e300;
        for (int i = 1; i <= n; ++i) {
            bool is_byz = i <= byz_in_nbhd;
            double v = is_byz ? rng.uniform(-100.0, 100.0) : rng.uniform(-1.0, 1.0);
            if (!is_byz) {
                honest_min = std::min(honest_min, v);
                honest_max = std::max(honest_max, v);
            }
            received.emplace_back(i, v);
        }
        ScreenResult res = screen(received, b);
        for (const auto& [sender, v] : res.kept) {
            CHECK(v >= honest_min);
            CHECK(v <= honest_max);
        }
    }
}

TEST_CASE("convex hull preservation with the gradient zeroed") {
    Rng rng(404);
    for (int trial = 0; trial < 40; ++trial) {
        const int M = 6 + static_cast<int>(rng.below(4));
        const int b = static_cast<int>(rng.below(2)) + (trial % 2); // 0..2
        DirectedGraph g = complete_graph(M);
        std::vector<int> byz;
        for (int i = 1; i <= M && static_cast<int>(byz.size()) < b; ++i)
            if (rng.uniform01() < 0.3) byz.push_back(i);

        AttackSpec attack;
        attack.kind = AttackSpec::Kind::ValueSpoof;
        attack.byzantine = byz;
        attack.lo = -1e6;
        attack.hi = 1e6;
        attack.seed = rng.next();

        std::vector<int> honest;
        for (int i = 1; i <= M; ++i)
            if (!attack.is_byzantine(i)) honest.push_back(i);

        Dataset dummy;
        dummy.dim = 3;
        dummy.class_count = 2;
        dummy.samples = {{{0.1, 0.1, 0.1}, 1.0}};
        update_norm_bound(dummy);
        std::vector<Shard> shards = equal_shards(dummy, honest);

        ProtocolConfig cfg;
        cfg.trim = b;
        cfg.inner_iters = 2;
        cfg.rounds = 4;
        cfg.zero_gradient = true;
        cfg.cadence = Cadence::PerT;
        cfg.init.kind = InitKind::PerNode;
        std::vector<double> lo(3, 1e300), hi(3, -1e300);
        for (std::size_t h = 0; h < honest.size(); ++h) {
            std::vector<double> w(3);
            for (int k = 0; k < 3; ++k) {
                w[static_cast<std::size_t>(k)] = rng.uniform(-5.0, 5.0);
                lo[static_cast<std::size_t>(k)] = std::min(lo[static_cast<std::size_t>(k)],
                                                           w[static_cast<std::size_t>(k)]);
                hi[static_cast<std::size_t>(k)] = std::max(hi[static_cast<std::size_t>(k)],
                                                           w[static_cast<std::size_t>(k)]);
            }
            cfg.init.per_node.push_back(std::move(w));
        }
        LossModel model{LossKind::Logistic, 0.0, {}};
        auto hook = [&](const IterationSnapshot& snap) {
            for (const auto& w : *snap.states)
                for (int k = 0; k < 3; ++k) {
                    CHECK(w[static_cast<std::size_t>(k)] >=
                          lo[static_cast<std::size_t>(k)] - 1e-12);
                    CHECK(w[static_cast<std::size_t>(k)] <=
                          hi[static_cast<std::size_t>(k)] + 1e-12);
                }
        };
        run_byrdie(g, shards, model, cfg, attack, hook);
    }
}

TEST_CASE("inner endpoint approaches the scalar minimizer for large T") {
    // Identical shards on a complete faultless graph: every node runs the same
    // diminishing-step descent on one coordinate, whose limit is the minimizer
    // of the common (equal-weight) risk slice.
    Rng drng(17);
    Dataset ds = synth_two_class(1, 1.0, 0.3, 50, drng);
    std::vector<int> owners{1, 2, 3, 4};
    std::vector<Shard> shards = equal_shards(ds, owners);
    LossModel model{LossKind::Logistic, 1.0, {}};

    ProtocolConfig cfg;
    cfg.trim = 0;
    cfg.inner_iters = 4000;
    cfg.rounds = 1;
    cfg.step.rho0 = 2.0;
    RunResult res = run_byrdie(complete_graph(4), shards, model, cfg, AttackSpec{});

    double target = golden_section_minimize(
        [&](double a) { return risk(model, {a}, ds.samples); }, 0.0);
    for (const auto& w : res.states) CHECK(std::abs(w[0] - target) < 5e-3);
}

TEST_CASE("byzantine nodes need no shards; attack change alters honest trajectories") {
    Rng drng(3);
    Dataset ds = synth_two_class(2, 1.0, 0.4, 60, drng);
    DirectedGraph g = complete_graph(6);
    std::vector<int> honest{1, 2, 3, 4, 5};
    std::vector<Shard> shards = partition_shards(ds, honest, 10, 8);

    AttackSpec uniform;
    uniform.kind = AttackSpec::Kind::UniformRandom;
    uniform.byzantine = {6};
    uniform.seed = 1;
    AttackSpec constant;
    constant.kind = AttackSpec::Kind::Constant;
    constant.byzantine = {6};
    constant.value = 0.25;

    ProtocolConfig cfg;
    cfg.trim = 1;
    cfg.rounds = 10;
    LossModel model{LossKind::SquareHinge, 0.01, {}};
    RunResult a = run_byrdie(g, shards, model, cfg, uniform);
    RunResult b = run_byrdie(g, shards, model, cfg, constant);
    CHECK(a.states != b.states);
}

TEST_CASE("nan attack with b=0 is a numeric fault; b=1 screens it out") {
    Dataset ds;
    ds.dim = 1;
    ds.class_count = 2;
    ds.samples = {{{0.5}, 1.0}};
    update_norm_bound(ds);
    DirectedGraph g = complete_graph(4);
    std::vector<Shard> shards = equal_shards(ds, {1, 2, 3});

    AttackSpec nan_attack;
    nan_attack.kind = AttackSpec::Kind::Constant;
    nan_attack.byzantine = {4};
    nan_attack.value = std::numeric_limits<double>::quiet_NaN();

    LossModel model{LossKind::Logistic, 0.0, {}};
    ProtocolConfig cfg;
    cfg.rounds = 2;
    cfg.trim = 0;
    CHECK_THROWS_AS(run_byrdie(g, shards, model, cfg, nan_attack), NumericFault);
    cfg.trim = 1;
    CHECK_NOTHROW(run_byrdie(g, shards, model, cfg, nan_attack));
}

TEST_CASE("degree violations abort the run with a report") {
    DirectedGraph ring(4);
    for (int i = 1; i <= 4; ++i) ring.add_edge(i, i % 4 + 1);
    Dataset ds;
    ds.dim = 1;
    ds.class_count = 2;
    ds.samples = {{{0.5}, 1.0}};
    update_norm_bound(ds);
    std::vector<Shard> shards = equal_shards(ds, {1, 2, 3, 4});
    LossModel model{LossKind::Logistic, 0.0, {}};
    ProtocolConfig cfg;
    cfg.trim = 1;
    cfg.rounds = 1;
    CHECK_THROWS_AS(run_byrdie(ring, shards, model, cfg, AttackSpec{}), ConfigError);
}

TEST_CASE("sign-flip and spoof attack values are replayable") {
    AttackSpec flip;
    flip.kind = AttackSpec::Kind::SignFlip;
    flip.byzantine = {2};
    flip.scale = 3.0;
    CHECK(flip.scalar_value(2, 1, 1, 1, 1, 0) == -3.0);
    CHECK(flip.scalar_value(2, 1, 1, 2, 2, 0) == 3.0);

    AttackSpec spoof;
    spoof.kind = AttackSpec::Kind::ValueSpoof;
    spoof.byzantine = {2};
    spoof.seed = 42;
    double v1 = spoof.scalar_value(2, 3, 1, 1, 11, 4);
    double v2 = spoof.scalar_value(2, 3, 1, 1, 11, 5);
    CHECK(v1 == spoof.scalar_value(2, 3, 1, 1, 11, 4));
    CHECK(v1 != v2); // per-receiver values differ
}
