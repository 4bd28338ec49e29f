"""
Desk-scale Monte Carlo reproductions of the scaling claims behind each code.

Slow; run with ``pytest -m acceptance``.
"""

import math
import os

import numpy as np
import pytest

from netcoding.config import load_config
from netcoding.fountain import FountainSpec, build_fountain, peel_decode
from netcoding.harness import ExperimentRunner
from netcoding.matrix import recoverable_unknowns
from netcoding.radio_sim import RadioNetworkSpec, build_network, coding_throughput, forwarding_throughput
from netcoding.rng import make_rng
from netcoding.selftest import run_selftest
from netcoding.storage_code import random_payloads

from tests.test_radio_sim import brute_force_paths

pytestmark = pytest.mark.acceptance


def run_config(config_dir, name, tmp_path, workers=os.cpu_count() or 1):
    config = load_config(os.path.join(config_dir, f"{name}.json"),
                         {"output_path": str(tmp_path / f"{name}.csv"), "format": "csv"})
    return ExperimentRunner(config, workers=workers, timing=False).run()


@pytest.fixture(scope="module")
def radio_scaling(config_dir, tmp_path_factory):
    return run_config(config_dir, "radio_scaling", tmp_path_factory.mktemp("radio"))


@pytest.fixture(scope="module")
def config_dir():
    return os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "configs")


def test_field_and_matrix_oracles():
    assert all(result.passed for result in run_selftest())


def test_any_k_queries_decode(config_dir, tmp_path):
    (point,) = run_config(config_dir, "storage_any_k", tmp_path)["points"]
    assert point["rate"] >= 0.99


def test_constant_degree_fails_and_success_grows_with_c(config_dir, tmp_path):
    points = run_config(config_dir, "storage_degree_probe", tmp_path)["points"]
    assert points[0]["rate"] < 0.5

    rates = [p["rate"] for p in points[1:]]
    for lower, higher in zip(rates, rates[1:]):
        slack = 2 * math.sqrt((lower * (1 - lower) + higher * (1 - higher)) / 2000)
        assert higher >= lower - slack


def test_success_does_not_fall_as_the_network_grows(config_dir, tmp_path):
    points = run_config(config_dir, "storage_n_scaling", tmp_path)["points"]
    assert [p["parameters"]["n"] for p in points] == [40, 80, 160, 320]
    assert all(p["trials"] >= 2000 for p in points)

    rates = [p["rate"] for p in points]
    for lower, higher in zip(rates, rates[1:]):
        slack = 2 * math.sqrt((lower * (1 - lower) + higher * (1 - higher)) / 2000)
        assert higher >= lower - slack


def test_every_decode_has_a_saturating_flow(config_dir, tmp_path):
    (point,) = run_config(config_dir, "storage_flow_check", tmp_path)["points"]
    assert point["flow_decodable_rate"] >= point["rate"]


def test_fountain_meets_its_target_with_constant_degree(config_dir, tmp_path):
    small, large = run_config(config_dir, "fountain_relaxation", tmp_path)["points"]
    assert large["rate_meeting_target"] >= 0.95
    change = abs(large["mean_prerouting_degree"] - small["mean_prerouting_degree"])
    assert change / small["mean_prerouting_degree"] < 0.10


def test_peeling_never_exceeds_elimination():
    rng = make_rng(1)
    for _ in range(1000):
        k = int(rng.integers(1, 13))
        spec = FountainSpec(k=k, n=2 * k + 1, epsilon=0.5, d_max=min(4, k), payload_len=4)
        data = random_payloads(rng, k, 4)
        queried = build_fountain(spec, data, rng)[:int(rng.integers(1, 2 * k + 2))]
        result = peel_decode(queried, k)
        assert set(result.recovered) <= recoverable_unknowns(np.stack([p.coeffs for p in queried]))
        assert all(np.array_equal(v, data[i]) for i, v in result.recovered.items())


def test_coding_throughput_grows_linearly(radio_scaling):
    fit = radio_scaling["scaling_fit"]["coding"]
    assert fit["r2"] >= 0.99
    assert fit["slope"] >= 0.2


def test_forwarding_throughput_does_not_grow(radio_scaling):
    first, last = radio_scaling["points"][0], radio_scaling["points"][-1]
    assert (first["N"], last["N"]) == (16, 256)
    sigma = math.sqrt(first["std_forwarding"] ** 2 + last["std_forwarding"] ** 2) / math.sqrt(last["trials"])
    assert last["mean_forwarding"] <= first["mean_forwarding"] + 3 * sigma
    assert last["mean_forwarding"] < 10


def test_coding_over_n_is_stable_at_256(radio_scaling):
    last = radio_scaling["points"][-1]
    assert last["N"] == 256
    assert last["coding_over_N_stderr"] < 0.02


def test_max_flow_agrees_with_disjoint_paths():
    rng = make_rng(2)
    for _ in range(1000):
        N, H, M = (int(v) for v in rng.integers(1, 4, size=3))
        net = build_network(RadioNetworkSpec(N=N, H=H, M=M), rng)
        value = coding_throughput(net).value
        assert value == brute_force_paths(net)
        assert forwarding_throughput(net) <= value


@pytest.mark.parametrize("name", ["storage_flow_check", "radio_timeslot"])
def test_output_is_identical_across_worker_counts(config_dir, tmp_path, name):
    outputs = []
    for workers in (1, 3):
        directory = tmp_path / f"w{workers}"
        directory.mkdir()
        run_config(config_dir, name, directory, workers=workers)
        outputs.append(((directory / f"{name}.csv").read_bytes(),
                        (directory / f"{name}.summary.json").read_bytes()))
    assert outputs[0] == outputs[1]
