"""
Decentralized erasure code for networked storage.

k data nodes each pre-route their packet to ceil(c·ln n) storage nodes picked
uniformly without replacement. Each storage node keeps a single coded packet:
the sum of nonzero random multiples of every packet it received. Querying any
k storage nodes then recovers all k packets with high probability.
"""

import logging
import math
from dataclasses import dataclass, field as dataclass_field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from netcoding import field
from netcoding.errors import UsageError
from netcoding.matrix import SingularReport, solve_system
from netcoding.rng import RngHandle, derive_seed, make_rng

logger = logging.getLogger(__name__)

DEFAULT_DEGREE_CONSTANT = 5.0
DEFAULT_PAYLOAD_LEN = 32


@dataclass(frozen=True)
class StorageCodeSpec:
    k: int
    n: int
    c: float = DEFAULT_DEGREE_CONSTANT
    payload_len: int = DEFAULT_PAYLOAD_LEN
    seed: int = 0
    # Fixed pre-routing degree; replaces the logarithmic rule when set.
    degree: Optional[int] = None

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise UsageError(f"need 1 ≤ k ≤ n, got k={self.k}, n={self.n}")
        if not self.c > 0:
            raise UsageError(f"degree constant c must be > 0, got {self.c}")
        if self.payload_len < 1:
            raise UsageError(f"payload_len must be ≥ 1, got {self.payload_len}")
        if self.degree is not None and self.degree < 1:
            raise UsageError(f"degree must be ≥ 1, got {self.degree}")

    def prerouting_degree(self) -> int:
        """ceil(c·ln n) clamped to [1, n], unless a fixed degree was given"""
        if self.degree is not None:
            return min(self.degree, self.n)
        raw = math.ceil(self.c * math.log(self.n))
        return max(1, min(self.n, raw))


@dataclass
class CodedPacket:
    """The single unit a storage node holds: coefficients over the k data packets plus the payload"""
    coeffs: np.ndarray
    payload: np.ndarray
    node: int = -1
    neighbors: Optional[Tuple[int, ...]] = None

    @classmethod
    def zero(cls, k: int, payload_len: int, node: int = -1) -> "CodedPacket":
        return cls(
            coeffs=np.zeros(k, dtype=np.uint8),
            payload=np.zeros(payload_len, dtype=np.uint8),
            node=node,
        )

    def is_zero(self) -> bool:
        return not self.coeffs.any() and not self.payload.any()


@dataclass
class DisseminationGraph:
    k: int
    n: int
    edges: List[Tuple[int, int]] = dataclass_field(default_factory=list)

    def targets_of(self, data_node: int) -> List[int]:
        return [j for i, j in self.edges if i == data_node]


@dataclass(frozen=True)
class SuccessStats:
    successes: int
    trials: int
    rate: float
    mean_rank_deficit: float


@dataclass(frozen=True)
class StorageTrialOutcome:
    success: bool
    rank: int
    rank_deficit: int
    flow_decodable: bool
    payload_exact: bool
    pivot_columns: Tuple[int, ...] = ()


def as_payloads(data, k: int, payload_len: int) -> np.ndarray:
    """Normalize k payloads (bytes or symbol sequences) into a (k, payload_len) uint8 array"""
    if isinstance(data, np.ndarray):
        array = data.astype(np.uint8, copy=False)
    else:
        rows = [np.frombuffer(bytes(p), dtype=np.uint8) if isinstance(p, (bytes, bytearray))
                else np.asarray(p, dtype=np.uint8) for p in data]
        if len(rows) != k:
            raise UsageError(f"expected {k} payloads, got {len(rows)}")
        lengths = {row.shape for row in rows}
        if lengths != {(payload_len,)}:
            raise UsageError(f"every payload must hold {payload_len} symbols, got {sorted(lengths)}")
        array = np.stack(rows) if rows else np.zeros((0, payload_len), dtype=np.uint8)
    if array.shape != (k, payload_len):
        raise UsageError(f"payloads must have shape ({k}, {payload_len}), got {array.shape}")
    return array


def random_payloads(rng: RngHandle, k: int, payload_len: int) -> np.ndarray:
    return rng.integers(0, field.FIELD_SIZE, size=(k, payload_len), dtype=np.uint8)


def disseminate(spec: StorageCodeSpec, data, rng: RngHandle) -> Tuple[List[CodedPacket], DisseminationGraph]:
    """Pre-route every data packet to its random storage nodes and accumulate the coded sums"""
    payloads = as_payloads(data, spec.k, spec.payload_len)
    degree = spec.prerouting_degree()
    coeffs = np.zeros((spec.n, spec.k), dtype=np.uint8)
    stored = np.zeros((spec.n, spec.payload_len), dtype=np.uint8)
    graph = DisseminationGraph(k=spec.k, n=spec.n)

    for i in range(spec.k):
        targets = rng.choice(spec.n, size=degree, replace=False)
        factors = field.random_nonzero_array(rng, degree)
        # Targets are distinct, so each (j, i) cell is written once.
        coeffs[targets, i] ^= factors
        stored[targets] ^= field.mul_array(factors[:, None], payloads[i][None, :])
        graph.edges.extend((i, int(j)) for j in targets)

    storage = [CodedPacket(coeffs=coeffs[j].copy(), payload=stored[j].copy(), node=j) for j in range(spec.n)]
    return storage, graph


def query_indices(n: int, m: int, rng: RngHandle) -> np.ndarray:
    if not 1 <= m <= n:
        raise UsageError(f"query size must satisfy 1 ≤ m ≤ n, got m={m}, n={n}")
    if m == n:
        return np.arange(n)
    return np.sort(rng.choice(n, size=m, replace=False))


def query(storage: Sequence[CodedPacket], m: int, rng: RngHandle) -> List[CodedPacket]:
    """Uniform random m-subset of the storage nodes, returned in node order"""
    return [storage[int(j)] for j in query_indices(len(storage), m, rng)]


def decode(queried: Sequence[CodedPacket], k: int) -> Union[np.ndarray, SingularReport]:
    """Recover the k data payloads from m ≥ k coded packets, or report the rank reached"""
    if len(queried) < k:
        raise UsageError(f"decoding {k} packets needs at least {k} coded packets, got {len(queried)}")
    coeffs = np.stack([p.coeffs for p in queried])
    if coeffs.shape[1] != k:
        raise UsageError(f"coded packets carry {coeffs.shape[1]} coefficients, expected {k}")
    payloads = np.stack([p.payload for p in queried])
    return solve_system(coeffs, payloads)


def graph_flow_decodable(graph: DisseminationGraph, queried: Iterable[int], k: int) -> bool:
    """True iff the dissemination graph restricted to the queried nodes has a matching saturating all k data nodes"""
    columns = {int(j): position for position, j in enumerate(sorted(set(int(q) for q in queried)))}
    if k == 0:
        return True
    if len(columns) < k:
        return False
    rows, cols = [], []
    for i, j in graph.edges:
        if j in columns:
            rows.append(i)
            cols.append(columns[j])
    if not rows:
        return False
    biadjacency = csr_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)),
        shape=(k, len(columns)),
    )
    matching = maximum_bipartite_matching(biadjacency, perm_type="column")
    return bool(np.all(matching >= 0))


def storage_trial(spec: StorageCodeSpec, trial_index: int, query_size: Optional[int] = None) -> StorageTrialOutcome:
    """One disseminate → query → decode trial on the generator derived from (seed, trial_index)"""
    rng = make_rng(derive_seed(spec.seed, trial_index))
    m = spec.k if query_size is None else query_size
    data = random_payloads(rng, spec.k, spec.payload_len)
    storage, graph = disseminate(spec, data, rng)
    picked = query_indices(spec.n, m, rng)
    result = decode([storage[int(j)] for j in picked], spec.k)
    flow = graph_flow_decodable(graph, picked, spec.k)

    if isinstance(result, SingularReport):
        logger.debug(
            "trial %d: rank %d of %d, pivots %s",
            trial_index, result.rank, spec.k, list(result.pivot_columns),
        )
        return StorageTrialOutcome(
            success=False,
            rank=result.rank,
            rank_deficit=spec.k - result.rank,
            flow_decodable=flow,
            payload_exact=False,
            pivot_columns=result.pivot_columns,
        )
    return StorageTrialOutcome(
        success=True,
        rank=spec.k,
        rank_deficit=0,
        flow_decodable=flow,
        payload_exact=bool(np.array_equal(result, data)),
    )


def aggregate_success(outcomes: Sequence[StorageTrialOutcome]) -> SuccessStats:
    trials = len(outcomes)
    successes = sum(1 for o in outcomes if o.success)
    deficit = sum(o.rank_deficit for o in outcomes)
    return SuccessStats(
        successes=successes,
        trials=trials,
        rate=successes / trials,
        mean_rank_deficit=deficit / trials,
    )


def estimate_success(spec: StorageCodeSpec, trials: int, query_size: Optional[int] = None) -> SuccessStats:
    """Monte Carlo estimate of the probability that a random query decodes"""
    if trials < 1:
        raise UsageError(f"trials must be ≥ 1, got {trials}")
    outcomes = [storage_trial(spec, t, query_size) for t in range(trials)]
    return aggregate_success(outcomes)
