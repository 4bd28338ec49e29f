"""
JSON trial dumps for radio networks and dissemination graphs.

A dump records every assignment of one trial so that a test or a person can
trace it by hand.
"""

import json
import os
from typing import Any, Dict, Union

import numpy as np

from netcoding.errors import UsageError
from netcoding.radio_sim import RadioNetwork, RadioNetworkSpec
from netcoding.storage_code import DisseminationGraph

SCHEMA_VERSION = 1


def dump_network(net: RadioNetwork) -> Dict[str, Any]:
    spec = net.spec
    return {
        "schema_version": SCHEMA_VERSION,
        "type": "radio_network",
        "spec": {
            "N": spec.N, "H": spec.H, "M": spec.M, "density": spec.density, "mode": spec.mode,
            "p_tx": spec.p_tx, "p_rx": spec.p_rx, "p_sleep": spec.p_sleep,
            "collision": spec.collision, "seed": spec.seed,
        },
        "rx": net.rx.tolist(),
        "tx": net.tx.tolist(),
        "rx_active": net.rx_active.tolist(),
        "tx_active": net.tx_active.tolist(),
        "priority": net.priority.tolist(),
    }


def load_network(document: Dict[str, Any]) -> RadioNetwork:
    _check(document, "radio_network")
    spec = RadioNetworkSpec(**document["spec"])
    rx = np.array(document["rx"], dtype=np.int64).reshape(spec.H, -1)
    shape = rx.shape
    # Active flags and priorities may be omitted in hand-written fixtures.
    rx_active = np.array(document.get("rx_active", np.ones(shape, dtype=bool)), dtype=bool)
    tx_active = np.array(document.get("tx_active", np.ones(shape, dtype=bool)), dtype=bool)
    priority = np.array(document.get("priority", np.tile(np.arange(shape[1]), (shape[0], 1))), dtype=float)
    return RadioNetwork(
        spec=spec,
        rx=rx,
        tx=np.array(document["tx"], dtype=np.int64).reshape(shape),
        rx_active=rx_active.reshape(shape),
        tx_active=tx_active.reshape(shape),
        priority=priority.reshape(shape),
    )


def dump_graph(graph: DisseminationGraph) -> Dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "type": "dissemination_graph",
        "k": graph.k,
        "n": graph.n,
        "edges": [[i, j] for i, j in graph.edges],
    }


def load_graph(document: Dict[str, Any]) -> DisseminationGraph:
    _check(document, "dissemination_graph")
    return DisseminationGraph(
        k=int(document["k"]),
        n=int(document["n"]),
        edges=[(int(i), int(j)) for i, j in document["edges"]],
    )


def _check(document: Dict[str, Any], expected_type: str):
    if document.get("type") != expected_type:
        raise UsageError(f"expected a {expected_type} dump, got {document.get('type')!r}")
    if document.get("schema_version") != SCHEMA_VERSION:
        raise UsageError(f"unsupported dump schema_version {document.get('schema_version')!r}")


def write_dump(document: Dict[str, Any], path: Union[str, os.PathLike]):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")


def read_dump(path: Union[str, os.PathLike]) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
