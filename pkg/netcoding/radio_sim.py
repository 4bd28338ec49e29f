"""
Untuned-radio backplane between a tuned source and a tuned destination.

N unit-capacity channels, H hops of M relays. Every relay receives on one
uniformly random channel and transmits on another. With random linear network
coding the achievable rate is the max-flow of the layered channel/relay graph;
blind forwarding is a composition of random channel maps with collisions.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

from netcoding.errors import InvariantViolation, UsageError
from netcoding.rng import RngHandle, derive_seed, make_rng

logger = logging.getLogger(__name__)

FREQUENCY = "frequency"
TIMESLOT = "timeslot"
MODES = (FREQUENCY, TIMESLOT)

LOWEST_INDEX = "lowest"
RANDOM_WINNER = "random"
COLLISION_RULES = (LOWEST_INDEX, RANDOM_WINNER)

# Role codes drawn in timeslot mode.
TRANSMIT, RECEIVE, SLEEP = 0, 1, 2


# Usable relays per channel per hop. Above 1 a constant fraction of the
# channels stays live across hops; at or below 1 the live fraction dies out.
DEFAULT_DENSITY = 3.0


@dataclass(frozen=True)
class RadioNetworkSpec:
    N: int
    H: int
    M: Optional[int] = None
    mode: str = FREQUENCY
    p_tx: float = 0.5
    p_rx: float = 0.5
    p_sleep: float = 0.0
    collision: str = LOWEST_INDEX
    seed: int = 0
    density: float = DEFAULT_DENSITY

    def __post_init__(self):
        for name in ("N", "H"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be ≥ 1, got {getattr(self, name)}")
        if self.mode not in MODES:
            raise UsageError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.collision not in COLLISION_RULES:
            raise UsageError(f"collision must be one of {COLLISION_RULES}, got {self.collision!r}")
        roles = (self.p_tx, self.p_rx, self.p_sleep)
        if any(p < 0 for p in roles) or abs(sum(roles) - 1.0) > 1e-12:
            raise UsageError(f"p_tx + p_rx + p_sleep must equal 1, got {sum(roles)!r}")
        if not self.density > 0:
            raise UsageError(f"density must be > 0, got {self.density}")
        if self.M is None:
            object.__setattr__(self, "M", self.default_relays())
        if self.M < 1:
            raise UsageError(f"M must be ≥ 1, got {self.M}")

    def usable_fraction(self) -> float:
        """Probability that a relay both listens and talks"""
        return self.p_rx * self.p_tx if self.mode == TIMESLOT else 1.0

    def default_relays(self) -> int:
        """ceil(density·N / usable fraction): density·N relays per hop expected to listen and talk"""
        usable = self.usable_fraction() or 1.0
        return max(1, math.ceil(round(self.density * self.N / usable, 9)))


@dataclass(frozen=True, eq=False)
class RadioNetwork:
    """Channel assignments per hop; row h of every array describes the relays of hop h+1"""
    spec: RadioNetworkSpec
    rx: np.ndarray
    tx: np.ndarray
    rx_active: np.ndarray
    tx_active: np.ndarray
    priority: np.ndarray

    def __post_init__(self):
        shape = self.rx.shape
        for name in ("tx", "rx_active", "tx_active", "priority"):
            if getattr(self, name).shape != shape:
                raise UsageError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        if shape[0] != self.spec.H:
            raise UsageError(f"assignments cover {shape[0]} hops, spec says H={self.spec.H}")
        for name in ("rx", "tx"):
            values = getattr(self, name)
            if values.size and (values.min() < 0 or values.max() >= self.spec.N):
                raise UsageError(f"{name} channels must lie in [0, {self.spec.N})")
        for name in ("rx", "tx", "rx_active", "tx_active", "priority"):
            getattr(self, name).setflags(write=False)

    @property
    def N(self) -> int:
        return self.spec.N

    @property
    def H(self) -> int:
        return self.spec.H

    @property
    def M(self) -> int:
        return self.rx.shape[1]

    def with_node(self, hop: int, rx: int, tx: int) -> "RadioNetwork":
        """Copy of the network with one more relay, active only at the given hop (1-based)"""
        if not 1 <= hop <= self.H:
            raise UsageError(f"hop must lie in [1, {self.H}], got {hop}")
        h = hop - 1
        column = np.zeros((self.H, 1), dtype=self.rx.dtype)
        inactive = np.zeros((self.H, 1), dtype=bool)
        rx_col, tx_col = column.copy(), column.copy()
        rx_col[h, 0], tx_col[h, 0] = rx, tx
        active = inactive.copy()
        active[h, 0] = True
        priority_col = np.full((self.H, 1), self.priority.max(initial=0) + 1, dtype=self.priority.dtype)
        return RadioNetwork(
            spec=replace(self.spec, M=self.M + 1),
            rx=np.hstack([self.rx, rx_col]),
            tx=np.hstack([self.tx, tx_col]),
            rx_active=np.hstack([self.rx_active, active]),
            tx_active=np.hstack([self.tx_active, active]),
            priority=np.hstack([self.priority, priority_col]),
        )


@dataclass(frozen=True)
class FlowResult:
    value: int
    per_hop_cut: List[int]


def build_network(spec: RadioNetworkSpec, rng: RngHandle) -> RadioNetwork:
    """Independent uniform rx/tx channels per relay, plus role sampling in timeslot mode"""
    shape = (spec.H, spec.M)
    rx = rng.integers(0, spec.N, size=shape)
    tx = rng.integers(0, spec.N, size=shape)
    if spec.mode == TIMESLOT:
        role_p = [spec.p_tx, spec.p_rx, spec.p_sleep]
        rx_active = rng.choice(3, size=shape, p=role_p) == RECEIVE
        tx_active = rng.choice(3, size=shape, p=role_p) == TRANSMIT
    else:
        rx_active = np.ones(shape, dtype=bool)
        tx_active = np.ones(shape, dtype=bool)
    if spec.collision == RANDOM_WINNER:
        priority = rng.random(shape)
    else:
        priority = np.tile(np.arange(spec.M, dtype=float), (spec.H, 1))
    return RadioNetwork(spec=spec, rx=rx, tx=tx, rx_active=rx_active, tx_active=tx_active, priority=priority)


def per_hop_cuts(net: RadioNetwork) -> List[int]:
    """For each hop, the smaller of its distinct active receive and transmit channel counts"""
    cuts = []
    for h in range(net.H):
        receive = np.unique(net.rx[h][net.rx_active[h]]).size
        transmit = np.unique(net.tx[h][net.tx_active[h]]).size
        cuts.append(int(min(receive, transmit)))
    return cuts


def _layered_graph(net: RadioNetwork) -> csr_matrix:
    """
    Vertex-split flow graph. Vertex 0 is the source and 1 the sink; every
    channel of every layer and every relay is an (in, out) pair joined by a
    unit edge, which caps each at one packet per hop.
    """
    N, H, M = net.N, net.H, net.M
    channel_base = 2
    relay_base = channel_base + 2 * N * (H + 1)
    size = relay_base + 2 * M * H

    def channel_in(layer, c):
        return channel_base + 2 * (layer * N + c)

    def relay_in(hop, j):
        return relay_base + 2 * (hop * M + j)

    channels = np.arange(N)
    layers = np.arange(H + 1)
    ch_in = channel_in(layers[:, None], channels[None, :]).ravel()
    tails = [np.zeros(N, dtype=np.int64), ch_in]
    heads = [channel_in(0, channels), ch_in + 1]

    hops = np.repeat(np.arange(H), M)
    relays = np.tile(np.arange(M), H)
    r_in = relay_in(hops, relays)
    tails.append(r_in)
    heads.append(r_in + 1)

    rx, tx = net.rx.ravel(), net.tx.ravel()
    listening = net.rx_active.ravel()
    talking = net.tx_active.ravel()
    tails.append(channel_in(hops[listening], rx[listening]) + 1)
    heads.append(r_in[listening])
    tails.append(r_in[talking] + 1)
    heads.append(channel_in(hops[talking] + 1, tx[talking]))

    tails.append(channel_in(H, channels) + 1)
    heads.append(np.ones(N, dtype=np.int64))

    tail = np.concatenate(tails).astype(np.int32)
    head = np.concatenate(heads).astype(np.int32)
    graph = csr_matrix((np.ones(tail.size, dtype=np.int32), (tail, head)), shape=(size, size))
    graph.sum_duplicates()
    return graph


def coding_throughput(net: RadioNetwork) -> FlowResult:
    """Max-flow from the tuned source to the tuned destination, the rate network coding achieves"""
    flow = maximum_flow(_layered_graph(net), 0, 1, method="dinic")
    cuts = per_hop_cuts(net)
    value = int(flow.flow_value)
    if value > min(cuts + [net.N]):
        raise InvariantViolation(f"flow {value} exceeds the per-hop cut bound {min(cuts + [net.N])}")
    return FlowResult(value=value, per_hop_cut=cuts)


def forwarding_throughput(net: RadioNetwork) -> int:
    """
    Blind forwarding of N packets, one per channel. A relay copies whatever
    its receive channel carries onto its transmit channel; when several relays
    of a hop hit the same transmit channel, the lowest priority value wins.
    Returns the number of distinct packets reaching the destination.
    """
    carried = np.arange(net.N)
    for h in range(net.H):
        held = np.where(net.rx_active[h], carried[net.rx[h]], -1)
        senders = np.flatnonzero((held >= 0) & net.tx_active[h])
        following = np.full(net.N, -1)
        if senders.size:
            order = senders[np.argsort(net.priority[h, senders], kind="stable")]
            _, first = np.unique(net.tx[h, order], return_index=True)
            winners = order[first]
            following[net.tx[h, winners]] = held[winners]
        carried = following
    return int(np.unique(carried[carried >= 0]).size)


@dataclass(frozen=True)
class RadioTrialOutcome:
    coding: int
    forwarding: int
    min_cut: int


def radio_trial(spec: RadioNetworkSpec, trial_index: int) -> RadioTrialOutcome:
    net = build_network(spec, make_rng(derive_seed(spec.seed, trial_index)))
    flow = coding_throughput(net)
    forwarded = forwarding_throughput(net)
    if forwarded > flow.value:
        raise InvariantViolation(
            f"trial {trial_index}: forwarding delivered {forwarded} packets, coding only {flow.value}"
        )
    return RadioTrialOutcome(coding=flow.value, forwarding=forwarded, min_cut=min(flow.per_hop_cut))


@dataclass(frozen=True)
class ScaleRule:
    """How a quantity (hop count, relays per hop) follows N: equal to N, a constant, or ceil(factor·N)"""
    kind: str
    value: float = 0

    @classmethod
    def parse(cls, descriptor: Union[str, int, "ScaleRule"]) -> "ScaleRule":
        if isinstance(descriptor, ScaleRule):
            return descriptor
        if isinstance(descriptor, int):
            return cls("const", descriptor)
        text = str(descriptor).strip().lower()
        try:
            if text in ("linear", "n"):
                return cls("linear")
            if text.startswith("const:"):
                return cls("const", int(text.split(":", 1)[1]))
            if text.startswith("scaled:"):
                factor = float(text.split(":", 1)[1])
                if factor > 0:
                    return cls("scaled", factor)
            if text.isdigit():
                return cls("const", int(text))
        except ValueError:
            pass
        raise UsageError(
            f"unknown scale rule {descriptor!r}; use 'linear', 'const:<value>', 'scaled:<factor>' or an integer"
        )

    def resolve(self, N: int) -> int:
        if self.kind == "linear":
            return N
        if self.kind == "scaled":
            return max(1, math.ceil(round(self.value * N, 9)))
        return int(self.value)


def summarize_radio(N: int, codings: Sequence[int], forwardings: Sequence[int]) -> Dict[str, float]:
    coding = np.asarray(codings, dtype=float)
    forwarding = np.asarray(forwardings, dtype=float)
    trials = coding.size
    ratio = coding / N
    spread = ratio.std(ddof=1) if trials > 1 else 0.0
    return {
        "mean_coding": float(coding.mean()),
        "std_coding": float(coding.std(ddof=1)) if trials > 1 else 0.0,
        "mean_forwarding": float(forwarding.mean()),
        "std_forwarding": float(forwarding.std(ddof=1)) if trials > 1 else 0.0,
        "coding_over_N": float(ratio.mean()),
        "coding_over_N_stderr": float(spread / math.sqrt(trials)),
    }


def throughput_sweep(
    Ns: Sequence[int],
    hop_rule: Union[str, int, ScaleRule] = "linear",
    m_rule: Optional[Union[str, int, ScaleRule]] = None,
    trials: int = 1,
    seed: int = 0,
    mode: str = FREQUENCY,
    collision: str = LOWEST_INDEX,
) -> pd.DataFrame:
    """
    Monte Carlo means of coding and forwarding throughput for each N.

    Without an m_rule the relay count follows RadioNetworkSpec.density.
    """
    if trials < 1:
        raise UsageError(f"trials must be ≥ 1, got {trials}")
    hops = ScaleRule.parse(hop_rule)
    relays = None if m_rule is None else ScaleRule.parse(m_rule)
    rows = []
    for N in Ns:
        spec = RadioNetworkSpec(
            N=N,
            H=hops.resolve(N),
            M=None if relays is None else relays.resolve(N),
            mode=mode,
            collision=collision,
            seed=seed,
        )
        outcomes = [radio_trial(spec, t) for t in range(trials)]
        row = {"N": N, "H": spec.H, "M": spec.M, "trials": trials}
        row.update(summarize_radio(N, [o.coding for o in outcomes], [o.forwarding for o in outcomes]))
        logger.info(
            "N=%d H=%d M=%d: coding %.2f, forwarding %.2f, coding/N %.4f",
            N, spec.H, spec.M, row["mean_coding"], row["mean_forwarding"], row["coding_over_N"],
        )
        rows.append(row)
    return pd.DataFrame(rows)


def fit_throughput_scaling(table: pd.DataFrame, column: str = "mean_coding") -> Dict[str, float]:
    """Least-squares line of a throughput column against N"""
    if len(table) < 2:
        raise UsageError("a scaling fit needs at least two values of N")
    x = table[["N"]].to_numpy(dtype=float)
    y = table[column].to_numpy(dtype=float)
    model = LinearRegression().fit(x, y)
    return {
        "slope": float(model.coef_[0]),
        "intercept": float(model.intercept_),
        "r2": float(r2_score(y, model.predict(x))),
    }
