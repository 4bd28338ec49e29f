"""
Dense linear algebra over GF(256): rank, Gauss-Jordan elimination, inversion
and linear-system solving.

Pivoting takes the first nonzero entry of each column, scanning rows from the
lowest index, so results are identical across runs and platforms. Inputs are
never mutated; elimination runs on copies.
"""

from dataclasses import dataclass, field as dataclass_field
from typing import List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from netcoding import field
from netcoding.errors import UsageError
from netcoding.rng import RngHandle


@dataclass(frozen=True)
class SingularReport:
    """Outcome of a solve that hit a rank-deficient system"""
    rank: int
    pivot_columns: Tuple[int, ...] = ()
    unknowns: int = 0

    @property
    def rank_deficit(self) -> int:
        return self.unknowns - self.rank


class FieldMatrix:
    """Immutable rows x cols matrix of field elements"""

    def __init__(self, entries):
        array = np.array(entries, dtype=np.uint8)
        if array.ndim != 2:
            raise UsageError(f"a matrix needs two dimensions, got shape {array.shape}")
        array.setflags(write=False)
        self._entries = array

    @classmethod
    def identity(cls, size: int) -> "FieldMatrix":
        return cls(np.eye(size, dtype=np.uint8))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "FieldMatrix":
        return cls(np.zeros((rows, cols), dtype=np.uint8))

    @classmethod
    def diagonal(cls, values: Sequence[int]) -> "FieldMatrix":
        return cls(np.diag(np.asarray(values, dtype=np.uint8)))

    @classmethod
    def random(cls, rng: RngHandle, rows: int, cols: int) -> "FieldMatrix":
        return cls(rng.integers(0, field.FIELD_SIZE, size=(rows, cols), dtype=np.uint8))

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def rows(self) -> int:
        return self._entries.shape[0]

    @property
    def cols(self) -> int:
        return self._entries.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def row(self, index: int) -> np.ndarray:
        return self._entries[index]

    def __matmul__(self, other):
        right = other.entries if isinstance(other, FieldMatrix) else np.asarray(other, dtype=np.uint8)
        vector = right.ndim == 1
        if vector:
            right = right[:, None]
        if right.shape[0] != self.cols:
            raise UsageError(f"cannot multiply {self.shape} by {right.shape}")
        product = multiply(self._entries, right)
        if vector:
            return product[:, 0]
        return FieldMatrix(product) if isinstance(other, FieldMatrix) else product

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._entries, other._entries))

    def __hash__(self) -> int:
        return hash((self.shape, self._entries.tobytes()))

    def __repr__(self) -> str:
        return f"FieldMatrix({self._entries.tolist()})"


def multiply(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Matrix product of two uint8 arrays over the field"""
    if left.shape[1] == 0:
        return np.zeros((left.shape[0], right.shape[1]), dtype=np.uint8)
    terms = field.mul_array(left[:, :, None], right[None, :, :])
    return np.bitwise_xor.reduce(terms, axis=1)


@dataclass
class Elimination:
    """Reduced row echelon form of a matrix, with the right-hand side carried along"""
    reduced: np.ndarray
    rhs: Optional[np.ndarray]
    pivot_columns: List[int] = dataclass_field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.pivot_columns)


def eliminate(m: Union[FieldMatrix, np.ndarray], rhs=None) -> Elimination:
    """Gauss-Jordan reduction of m (and rhs, row for row) to reduced row echelon form"""
    a = np.array(m.entries if isinstance(m, FieldMatrix) else m, dtype=np.uint8)
    b = None
    if rhs is not None:
        b = np.array(rhs, dtype=np.uint8)
        if b.ndim == 1:
            b = b[:, None]
        if b.shape[0] != a.shape[0]:
            raise UsageError(f"right-hand side has {b.shape[0]} rows, matrix has {a.shape[0]}")

    rows, cols = a.shape
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        candidates = np.flatnonzero(a[r:, c])
        if candidates.size == 0:
            continue
        p = r + int(candidates[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
            if b is not None:
                b[[r, p]] = b[[p, r]]

        factor = field.inv(int(a[r, c]))
        if factor != field.ONE:
            a[r] = field.scale(a[r], factor)
            if b is not None:
                b[r] = field.scale(b[r], factor)

        others = np.flatnonzero(a[:, c])
        others = others[others != r]
        if others.size:
            multipliers = a[others, c][:, None]
            a[others] ^= field.mul_array(multipliers, a[r][None, :])
            if b is not None:
                b[others] ^= field.mul_array(multipliers, b[r][None, :])

        pivots.append(c)
        r += 1
    return Elimination(reduced=a, rhs=b, pivot_columns=pivots)


def rank(m: Union[FieldMatrix, np.ndarray]) -> int:
    return eliminate(m).rank


def _rhs_array(rhs, rows: int) -> np.ndarray:
    try:
        array = np.array(rhs, dtype=np.uint8)
    except ValueError as exc:
        raise UsageError(f"right-hand side vectors must have equal length: {exc}") from exc
    if array.ndim == 1:
        array = array[:, None]
    if array.ndim != 2 or array.shape[0] != rows:
        raise UsageError(f"right-hand side must have {rows} vectors, got shape {array.shape}")
    return array


def solve(m: FieldMatrix, rhs) -> Union[np.ndarray, SingularReport]:
    """
    Solve M·x = rhs for a square M, column by column across the payload.

    Returns the unique x as a (k, payload) array, or a SingularReport with the
    achieved rank when M is not invertible.
    """
    if m.rows != m.cols:
        raise UsageError(f"solve needs a square matrix, got {m.shape}")
    return solve_system(m, _rhs_array(rhs, m.rows))


def solve_system(m: Union[FieldMatrix, np.ndarray], rhs) -> Union[np.ndarray, SingularReport]:
    """Solve a consistent (possibly overdetermined) system with at least as many rows as unknowns"""
    entries = m.entries if isinstance(m, FieldMatrix) else np.asarray(m, dtype=np.uint8)
    unknowns = entries.shape[1]
    reduction = eliminate(entries, _rhs_array(rhs, entries.shape[0]))
    if reduction.rank < unknowns:
        return SingularReport(
            rank=reduction.rank,
            pivot_columns=tuple(reduction.pivot_columns),
            unknowns=unknowns,
        )
    return reduction.rhs[:unknowns].copy()


def invert(m: FieldMatrix) -> Union[FieldMatrix, SingularReport]:
    solution = solve(m, np.eye(m.rows, dtype=np.uint8))
    if isinstance(solution, SingularReport):
        return solution
    return FieldMatrix(solution)


def recoverable_unknowns(m: Union[FieldMatrix, np.ndarray]) -> Set[int]:
    """
    Unknowns whose unit vector lies in the row space, i.e. the columns that
    elimination alone can pin down even when the system is rank deficient.
    """
    reduction = eliminate(m)
    recovered = set()
    for r, c in enumerate(reduction.pivot_columns):
        if np.count_nonzero(reduction.reduced[r]) == 1:
            recovered.add(c)
    return recovered
