"""
Arithmetic over GF(256), the coding alphabet for every linear combination.

One symbol is one byte. Multiplication goes through log/antilog tables built
once at import time from the generator 0x03 under the reduction polynomial
x^8 + x^4 + x^3 + x + 1. The tables are read-only afterwards, so the module
can be used from any number of workers.
"""

import logging
from typing import Tuple

import numpy as np

from netcoding.errors import FieldDomainError, InvariantViolation
from netcoding.rng import RngHandle

logger = logging.getLogger(__name__)

FIELD_SIZE = 256
REDUCTION_POLY = 0x11B
GENERATOR = 0x03
ORDER = FIELD_SIZE - 1

ZERO = 0
ONE = 1

# Plain ints in [0, 255]; payloads and coefficient vectors are uint8 arrays.
FieldElement = int


def slow_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    """Carryless shift-and-reduce multiplication, used to build and check the tables"""
    result = 0
    while b:
        if b & 1:
            result ^= a
        a <<= 1
        if a & 0x100:
            a ^= REDUCTION_POLY
        b >>= 1
    return result


def _build_tables() -> Tuple[np.ndarray, np.ndarray]:
    exp = np.zeros(2 * ORDER, dtype=np.uint8)
    log = np.zeros(FIELD_SIZE, dtype=np.int16)
    x = ONE
    for power in range(ORDER):
        exp[power] = x
        log[x] = power
        x = slow_mul(x, GENERATOR)
        if x == ONE and power < ORDER - 1:
            raise InvariantViolation(
                f"generator 0x{GENERATOR:02X} has order {power + 1}, expected {ORDER}"
            )
    if x != ONE:
        raise InvariantViolation(f"generator 0x{GENERATOR:02X} does not cycle back to 1")
    exp[ORDER:] = exp[:ORDER]
    exp.setflags(write=False)
    log.setflags(write=False)
    logger.debug("GF(256) tables built, generator 0x%02X has order %d", GENERATOR, ORDER)
    return exp, log


EXP, LOG = _build_tables()
_EXP = [int(v) for v in EXP]
_LOG = [int(v) for v in LOG]


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a ^ b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    if a == 0 or b == 0:
        return ZERO
    return _EXP[_LOG[a] + _LOG[b]]


def inv(a: FieldElement) -> FieldElement:
    if a == 0:
        raise FieldDomainError("no inverse of zero")
    return _EXP[ORDER - _LOG[a]]


def random_nonzero(rng: RngHandle) -> FieldElement:
    """Uniform draw from [1, 255]"""
    return int(rng.integers(1, FIELD_SIZE))


def random_nonzero_array(rng: RngHandle, size) -> np.ndarray:
    return rng.integers(1, FIELD_SIZE, size=size, dtype=np.uint8)


def mul_array(a, b) -> np.ndarray:
    """Elementwise product of two broadcastable uint8 arrays"""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    product = EXP[LOG[a] + LOG[b]]
    return np.where((a == 0) | (b == 0), np.uint8(0), product)


def scale(vector, factor: FieldElement) -> np.ndarray:
    return mul_array(vector, np.uint8(factor))


def combine(coeffs, rows) -> np.ndarray:
    """Σ coeffs[i] · rows[i], the linear combination of a stack of symbol vectors"""
    coeffs = np.asarray(coeffs, dtype=np.uint8)
    rows = np.asarray(rows, dtype=np.uint8)
    if rows.shape[0] == 0:
        return np.zeros(rows.shape[1:], dtype=np.uint8)
    return np.bitwise_xor.reduce(mul_array(coeffs[:, None], rows), axis=0)
