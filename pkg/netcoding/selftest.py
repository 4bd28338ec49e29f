"""
Exhaustive and randomized oracle checks for the field and matrix layers,
run by ``python run.py selftest``.
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from netcoding import field
from netcoding.matrix import FieldMatrix, SingularReport, solve
from netcoding.rng import make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def check_tables() -> str:
    for a in range(field.FIELD_SIZE):
        for b in range(field.FIELD_SIZE):
            if field.mul(a, b) != field.slow_mul(a, b):
                raise AssertionError(f"mul(0x{a:02X}, 0x{b:02X}) disagrees with shift-and-reduce")
    return "65536 products match shift-and-reduce"


def check_inverses() -> str:
    for a in range(1, field.FIELD_SIZE):
        partners = [b for b in range(1, field.FIELD_SIZE) if field.mul(a, b) == field.ONE]
        if partners != [field.inv(a)]:
            raise AssertionError(f"inverse of 0x{a:02X}: search found {partners}, inv gave {field.inv(a)}")
    return "all 255 inverses unique and correct"


def check_axioms(samples: int = 10_000, seed: int = 1) -> str:
    rng = make_rng(seed)
    a, b, c = (rng.integers(0, field.FIELD_SIZE, size=samples, dtype=np.uint8) for _ in range(3))
    mul = field.mul_array
    checks = {
        "additive commutativity": np.array_equal(a ^ b, b ^ a),
        "multiplicative commutativity": np.array_equal(mul(a, b), mul(b, a)),
        "additive associativity": np.array_equal((a ^ b) ^ c, a ^ (b ^ c)),
        "multiplicative associativity": np.array_equal(mul(mul(a, b), c), mul(a, mul(b, c))),
        "distributivity": np.array_equal(mul(a, b ^ c), mul(a, b) ^ mul(a, c)),
        "identities": np.array_equal(mul(a, np.uint8(1)), a) and np.array_equal(a ^ np.uint8(0), a),
        "self-inverse addition": np.array_equal(a ^ (a ^ b), b),
    }
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        raise AssertionError(f"axioms failed: {', '.join(failed)}")
    return f"{len(checks)} axioms hold on {samples} random triples"


def check_solve_round_trips(systems: int = 100, max_k: int = 64, seed: int = 2) -> str:
    rng = make_rng(seed)
    solved = 0
    while solved < systems:
        k = int(rng.integers(1, max_k + 1))
        m = FieldMatrix.random(rng, k, k)
        x = rng.integers(0, field.FIELD_SIZE, size=(k, 8), dtype=np.uint8)
        result = solve(m, m @ x)
        if isinstance(result, SingularReport):
            continue
        if not np.array_equal(result, x):
            raise AssertionError(f"solve round-trip failed for a random {k}x{k} system")
        solved += 1
    return f"{systems} random invertible systems up to k={max_k} solved exactly"


CHECKS: List[Callable[[], str]] = [check_tables, check_inverses, check_axioms, check_solve_round_trips]


def run_selftest() -> List[CheckResult]:
    results = []
    for check in CHECKS:
        started = time.perf_counter()
        try:
            detail, passed = check(), True
        except AssertionError as exc:
            detail, passed = str(exc), False
        elapsed = time.perf_counter() - started
        name = check.__name__.replace("check_", "")
        logger.info("%s %s: %s (%.2fs)", "✅" if passed else "❌", name, detail, elapsed)
        results.append(CheckResult(name, passed, detail, elapsed))
    return results
