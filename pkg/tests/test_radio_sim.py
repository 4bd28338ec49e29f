import itertools
import math
import os

import numpy as np
import pandas as pd
import pytest

from netcoding.config import load_config
from netcoding.errors import UsageError
from netcoding.fixtures import load_network, read_dump
from netcoding.radio_sim import (
    RadioNetwork,
    RadioNetworkSpec,
    ScaleRule,
    build_network,
    coding_throughput,
    fit_throughput_scaling,
    forwarding_throughput,
    per_hop_cuts,
    radio_trial,
    throughput_sweep,
)
from netcoding.rng import derive_seed, make_rng


def brute_force_paths(net):
    """Largest set of source-to-destination paths sharing no relay and no channel of any layer"""
    paths = []
    for relays in itertools.product(range(net.M), repeat=net.H):
        usable = all(net.rx_active[h, j] and net.tx_active[h, j] for h, j in enumerate(relays))
        linked = all(net.rx[h, relays[h]] == net.tx[h - 1, relays[h - 1]] for h in range(1, net.H))
        if usable and linked:
            channels = [int(net.rx[0, relays[0]])] + [int(net.tx[h, relays[h]]) for h in range(net.H)]
            paths.append((relays, channels))

    def disjoint(combo):
        for layer in range(net.H + 1):
            if len({channels[layer] for _, channels in combo}) < len(combo):
                return False
        for hop in range(net.H):
            if len({relays[hop] for relays, _ in combo}) < len(combo):
                return False
        return True

    best = 0
    for size in range(1, net.N + 1):
        if not any(disjoint(combo) for combo in itertools.combinations(paths, size)):
            break
        best = size
    return best


def manual_network(N, rx, tx, rx_active=None, tx_active=None):
    rx, tx = np.array(rx), np.array(tx)
    H, M = rx.shape
    return RadioNetwork(
        spec=RadioNetworkSpec(N=N, H=H, M=M),
        rx=rx,
        tx=tx,
        rx_active=np.ones((H, M), dtype=bool) if rx_active is None else np.array(rx_active),
        tx_active=np.ones((H, M), dtype=bool) if tx_active is None else np.array(tx_active),
        priority=np.tile(np.arange(M, dtype=float), (H, 1)),
    )


def test_spec_validation():
    assert RadioNetworkSpec(N=8, H=3).M == 24
    assert RadioNetworkSpec(N=8, H=3, M=8).M == 8
    assert RadioNetworkSpec(N=8, H=3, density=1.5).M == 12
    timeslot = RadioNetworkSpec(N=64, H=3, mode="timeslot", p_tx=0.4, p_rx=0.4, p_sleep=0.2)
    assert timeslot.M == 1200
    with pytest.raises(UsageError):
        RadioNetworkSpec(N=8, H=3, density=0.0)
    with pytest.raises(UsageError):
        RadioNetworkSpec(N=0, H=1)
    with pytest.raises(UsageError):
        RadioNetworkSpec(N=4, H=1, mode="timeslot", p_tx=0.5, p_rx=0.4, p_sleep=0.0)
    with pytest.raises(UsageError):
        RadioNetworkSpec(N=4, H=1, collision="loudest")


def test_single_channel_always_carries_one_packet():
    for H in (1, 4, 9):
        net = build_network(RadioNetworkSpec(N=1, H=H, M=3), make_rng(H))
        assert not net.rx.any() and not net.tx.any()
        assert coding_throughput(net).value == 1
        assert forwarding_throughput(net) == 1


def test_networks_are_reproducible():
    spec = RadioNetworkSpec(N=16, H=5, collision="random")
    first, second = build_network(spec, make_rng(1)), build_network(spec, make_rng(1))
    for name in ("rx", "tx", "rx_active", "tx_active", "priority"):
        assert np.array_equal(getattr(first, name), getattr(second, name))


def test_receive_channel_coverage():
    N, M, H = 64, 64, 500
    net = build_network(RadioNetworkSpec(N=N, H=H, M=M), make_rng(2))
    covered = np.mean([np.unique(net.rx[h]).size / N for h in range(H)])
    p = 1 - (1 - 1 / N) ** M
    assert abs(covered - p) < 3 * math.sqrt(p * (1 - p) / (N * H))


def test_silent_hop_blocks_everything():
    net = manual_network(3, [[0, 1, 2], [0, 1, 2]], [[0, 1, 2], [0, 1, 2]],
                         rx_active=[[False] * 3, [True] * 3])
    assert coding_throughput(net).value == 0
    assert forwarding_throughput(net) == 0


def test_identity_relays_forward_every_packet():
    net = manual_network(4, [[0, 1, 2, 3]] * 3, [[0, 1, 2, 3]] * 3)
    assert coding_throughput(net).value == 4
    assert forwarding_throughput(net) == 4


def test_hand_traced_fixture(fixture_dir):
    document = read_dump(os.path.join(fixture_dir, "forwarding_n4_h2.json"))
    net = load_network(document)
    flow = coding_throughput(net)
    assert forwarding_throughput(net) == document["expected"]["forwarding"]
    assert flow.value == document["expected"]["coding"]
    assert flow.per_hop_cut == [3, 3]


def test_collision_keeps_the_lowest_index():
    net = manual_network(2, [[0, 1]], [[0, 0]])
    assert forwarding_throughput(net) == 1
    reordered = RadioNetwork(
        spec=net.spec, rx=net.rx, tx=net.tx, rx_active=net.rx_active, tx_active=net.tx_active,
        priority=np.array([[1.0, 0.0]]),
    )
    assert forwarding_throughput(reordered) == 1
    assert coding_throughput(net).value == 1


def test_flow_matches_brute_force_paths():
    rng = make_rng(3)
    for _ in range(300):
        N, H, M = (int(v) for v in rng.integers(1, 4, size=3))
        mode = "timeslot" if rng.random() < 0.3 else "frequency"
        spec = RadioNetworkSpec(N=N, H=H, M=M, mode=mode, p_tx=0.4, p_rx=0.4, p_sleep=0.2)
        net = build_network(spec, rng)
        assert coding_throughput(net).value == brute_force_paths(net)


def test_forwarding_never_beats_coding():
    rng = make_rng(4)
    for _ in range(200):
        N, H, M = (int(v) for v in rng.integers(1, 9, size=3))
        collision = "random" if rng.random() < 0.5 else "lowest"
        net = build_network(RadioNetworkSpec(N=N, H=H, M=M, collision=collision), rng)
        flow = coding_throughput(net)
        assert forwarding_throughput(net) <= flow.value <= min(flow.per_hop_cut + [N])


def test_per_hop_cuts_count_distinct_active_channels():
    net = manual_network(4, [[0, 0, 1]], [[2, 3, 3]], tx_active=[[True, True, False]])
    assert per_hop_cuts(net) == [2]


def test_adding_a_relay_never_lowers_the_flow():
    rng = make_rng(5)
    for _ in range(50):
        spec = RadioNetworkSpec(N=6, H=4, M=5)
        net = build_network(spec, rng)
        before = coding_throughput(net).value
        hop = int(rng.integers(1, spec.H + 1))
        extended = net.with_node(hop, int(rng.integers(0, 6)), int(rng.integers(0, 6)))
        assert extended.M == net.M + 1
        assert coding_throughput(extended).value >= before


def test_with_node_rejects_bad_hops():
    net = build_network(RadioNetworkSpec(N=3, H=2), make_rng(6))
    with pytest.raises(UsageError):
        net.with_node(0, 0, 0)
    with pytest.raises(UsageError):
        net.with_node(3, 0, 0)


def test_timeslot_roles_follow_their_probabilities():
    spec = RadioNetworkSpec(N=16, H=200, M=16, mode="timeslot", p_tx=0.3, p_rx=0.5, p_sleep=0.2)
    net = build_network(spec, make_rng(7))
    cells = spec.H * spec.M
    for observed, p in ((net.rx_active.mean(), 0.5), (net.tx_active.mean(), 0.3)):
        assert abs(observed - p) < 5 * math.sqrt(p * (1 - p) / cells)


def test_trial_uses_the_derived_generator():
    spec = RadioNetworkSpec(N=8, H=8, seed=9)
    net = build_network(spec, make_rng(derive_seed(9, 2)))
    outcome = radio_trial(spec, 2)
    assert outcome.coding == coding_throughput(net).value
    assert outcome.forwarding == forwarding_throughput(net)


def test_scale_rules():
    assert ScaleRule.parse("linear").resolve(12) == 12
    assert ScaleRule.parse("const:4").resolve(12) == 4
    assert ScaleRule.parse(7).resolve(12) == 7
    assert ScaleRule.parse("scaled:3").resolve(16) == 48
    assert ScaleRule.parse("scaled:0.5").resolve(3) == 2
    with pytest.raises(UsageError):
        ScaleRule.parse("quadratic")


def test_sweep_rows_respect_the_bounds():
    table = throughput_sweep([1, 4, 8], hop_rule="linear", m_rule="linear", trials=5, seed=10)
    assert table["N"].tolist() == [1, 4, 8]
    assert table.loc[0, "mean_coding"] == 1.0
    assert (table["mean_forwarding"] <= table["mean_coding"]).all()
    assert (table["mean_coding"] <= table["N"]).all()


def test_single_trial_sweep_matches_a_direct_trial():
    table = throughput_sweep([6], hop_rule="const:3", m_rule=4, trials=1, seed=11)
    outcome = radio_trial(RadioNetworkSpec(N=6, H=3, M=4, seed=11), 0)
    assert table.loc[0, "mean_coding"] == outcome.coding
    assert table.loc[0, "mean_forwarding"] == outcome.forwarding


def test_scaling_fit_on_exact_line():
    table = pd.DataFrame({"N": [16, 32, 64], "mean_coding": [6.0, 11.0, 21.0]})
    fit = fit_throughput_scaling(table)
    assert fit["slope"] == pytest.approx(5 / 16)
    assert fit["intercept"] == pytest.approx(1.0)
    assert fit["r2"] == pytest.approx(1.0)
    with pytest.raises(UsageError):
        fit_throughput_scaling(table.head(1))


def test_one_relay_per_channel_starves_long_chains():
    table = throughput_sweep([64], hop_rule="linear", m_rule="linear", trials=5, seed=29)
    assert table.loc[0, "mean_coding"] <= 0.1 * 64


def test_dense_relays_keep_a_constant_fraction_of_the_channels():
    table = throughput_sweep([32], hop_rule="linear", trials=4, seed=29)
    assert table.loc[0, "mean_coding"] >= 0.25 * 32
    assert table.loc[0, "mean_forwarding"] <= table.loc[0, "mean_coding"]


def test_timeslot_config_carries_traffic(config_dir):
    config = load_config(os.path.join(config_dir, "radio_timeslot.json"))
    spec = config.parameters.to_spec(config.seed)
    assert spec.mode == "timeslot"
    for trial in range(2):
        outcome = radio_trial(spec, trial)
        assert outcome.coding >= 0.25 * spec.N
        assert outcome.forwarding <= outcome.coding
