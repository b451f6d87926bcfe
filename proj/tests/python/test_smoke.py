"""Smoke tests for the byrdie python module."""

import math

import pytest

import byrdie


def test_version():
    assert byrdie.__version__


def test_graph_and_certification():
    g = byrdie.complete_graph(4)
    assert g.node_count == 4
    assert g.edge_count() == 12
    assert byrdie.validate_degrees(g, 1)["ok"]
    assert byrdie.certify_assumption3(g, 1, mode="exact")["status"] == "certified"

    ring = byrdie.DirectedGraph(4)
    for i in range(1, 5):
        ring.add_edge(i, i % 4 + 1)
    res = byrdie.certify_assumption3(ring, 1, mode="exact")
    assert res["status"] == "refuted"
    assert res["witness_byzantine"] is not None

    sampled = byrdie.certify_assumption3(g, 1, mode="sampled", trials=50, seed=3)
    assert sampled["status"] == "inconclusive"  # sampling never certifies


def test_erdos_renyi_deterministic():
    a = byrdie.generate_erdos_renyi(20, 0.5, seed=7)
    b = byrdie.generate_erdos_renyi(20, 0.5, seed=7)
    assert a.edges() == b.edges()


def test_screen_and_update():
    res = byrdie.screen([(1, 0.1), (2, 0.5), (3, 0.9), (4, 0.3), (5, 0.7)], 1)
    assert [v for (_, v) in res["kept"]] == [0.3, 0.5, 0.7]
    assert res["removed_low"] == [1] and res["removed_high"] == [3]
    got = byrdie.update_coordinate(0.4, [0.3, 0.5, 0.7], 5, 1, 0.0, 0.0)
    assert got == pytest.approx(0.475)


def test_gradient_matches_finite_difference():
    model = byrdie.LossModel("logistic", 0.01)
    X = [[0.3, -0.2, 0.5], [-0.1, 0.4, 0.2], [0.6, 0.1, -0.3]]
    y = [1.0, -1.0, 1.0]
    w = [0.2, -0.4, 0.1]
    g = byrdie.gradient(model, w, X, y)
    h = 1e-6
    for k in range(3):
        up = list(w)
        up[k] += h
        down = list(w)
        down[k] -= h
        fd = (byrdie.risk(model, up, X, y) - byrdie.risk(model, down, X, y)) / (2 * h)
        assert g[k] == pytest.approx(fd, abs=1e-5)
        assert byrdie.coord_gradient(model, w, X, y, k) == pytest.approx(g[k], abs=1e-14)


def test_end_to_end_byrdie_run():
    ds = byrdie.synth_two_class(3, 1.0, 0.4, 200, seed=11)
    byrdie.augment_bias(ds)
    part = byrdie.partition(ds, honest_nodes=[1, 2, 3, 4, 5], per_node=20,
                            class_balanced=True, seed=12)
    shards = part["shards"]
    assert len(shards) == 5
    graph = byrdie.complete_graph(6)
    model = byrdie.LossModel("logistic", 0.01)
    attack = byrdie.AttackSpec("uniform_random", byzantine=[6], seed=13)

    trace = []
    result = byrdie.run_byrdie(graph, shards, model, b=1, T=1, rounds=60,
                               step=byrdie.StepSchedule(1.0), attack=attack,
                               on_round=lambda r, t_c, diam, mean, states: trace.append((r, diam)))
    assert result.honest_ids == [1, 2, 3, 4, 5]
    assert len(trace) == 60
    # consensus tightens over time under screening
    assert trace[-1][1] < trace[4][1]

    diam, mean = byrdie.consensus_stats(result.states)
    assert diam >= mean >= 0

    test_X, test_y = part["test"]
    final_acc = sum(byrdie.accuracy(model, w, test_X, test_y) for w in result.states) / 5
    assert final_acc > 0.7


def test_baselines_and_oracle():
    ds = byrdie.synth_two_class(3, 1.5, 0.3, 300, seed=21)
    byrdie.augment_bias(ds)
    X, y = ds.arrays()
    model = byrdie.LossModel("logistic", 0.01)
    oracle = byrdie.run_centralized_cd(X, y, model, tolerance=1e-8)
    assert oracle["converged"]
    assert byrdie.accuracy(model, oracle["w"], X, y) > 0.95

    part = byrdie.partition(ds, honest_nodes=[1, 2, 3], per_node=30,
                            class_balanced=True, seed=22)
    local = byrdie.run_local_cd(part["shards"], model, rounds=5)
    assert len(local.states) == 3
    dgd = byrdie.run_dgd(byrdie.complete_graph(3), part["shards"], model, rounds=20)
    d, _ = byrdie.consensus_stats(dgd.states)
    assert d < 0.5


def test_lipschitz_estimate():
    ds = byrdie.synth_two_class(2, 1.0, 0.2, 50, seed=5)
    model = byrdie.LossModel("logistic", 0.0)
    assert byrdie.estimate_lipschitz(model, ds) == pytest.approx(0.25)
    mlp = byrdie.LossModel("mlp", 0.0, mlp_layers=[4, 3, 3])
    assert mlp.param_dim(4) == 27
    with pytest.raises(Exception):
        byrdie.estimate_lipschitz(mlp, ds)


def test_errors_are_typed():
    with pytest.raises(byrdie.ConfigError):
        byrdie.generate_erdos_renyi(1, 0.5, seed=0)
    with pytest.raises(byrdie.ProtocolViolation):
        byrdie.screen([(1, 0.5)], 1)
    with pytest.raises(byrdie.NumericFault):
        byrdie.update_coordinate(math.nan, [0.1], 3, 1, 0.1, 0.0)
