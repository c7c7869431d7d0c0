"""Antenna selection sets for switch-network receivers.

Every public surface here uses 1-based antenna indices. A selection set
``{1, 2, 5, 7}`` means that RF chains are wired to antennas 1, 2, 5 and 7 of
an ``N``-element half-wavelength ULA.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "GeometryError",
    "SelectionSet",
    "CoarrayReport",
    "SelectionMatrix",
    "ExpandedSelector",
    "nested_array",
    "mra",
    "coprime_array",
    "ula_prefix",
    "difference_coarray",
    "selection_operator",
    "expanded_selector",
    "MRA_TABLE",
]


class GeometryError(ValueError):
    """Raised when a requested selection set cannot be built."""


@dataclass(frozen=True)
class SelectionSet:
    """Ordered antenna indices (1-based) selected out of an ``N``-element ULA.

    Parameters
    ----------
    indices : sequence of int
        Strictly increasing, starting at 1.
    full_aperture : int
        Number of antennas ``N`` of the underlying ULA.
    """

    indices: tuple[int, ...]
    full_aperture: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "full_aperture", int(self.full_aperture))
        if not idx:
            raise GeometryError("selection set is empty")
        if idx[0] != 1:
            raise GeometryError(f"first selected index must be 1, got {idx[0]}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise GeometryError("indices must be strictly increasing")
        if idx[-1] > self.full_aperture:
            raise GeometryError(
                f"index {idx[-1]} exceeds aperture N={self.full_aperture}")

    @property
    def M(self) -> int:
        return len(self.indices)

    @property
    def N(self) -> int:
        return self.full_aperture

    @property
    def zero_based(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp) - 1

    def with_aperture(self, N: int) -> "SelectionSet":
        return SelectionSet(self.indices, N)

    def to_json(self) -> str:
        return json.dumps(list(self.indices))

    @classmethod
    def from_json(cls, text: str, full_aperture: int | None = None) -> "SelectionSet":
        idx = json.loads(text)
        if not isinstance(idx, list) or not all(isinstance(i, int) for i in idx):
            raise GeometryError("expected a JSON array of integers")
        return cls(tuple(idx), full_aperture if full_aperture is not None else max(idx))

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


@dataclass(frozen=True)
class CoarrayReport:
    lags: tuple[int, ...]
    contiguous_span: int
    holes: tuple[int, ...] = field(default=())

    @property
    def hole_free(self) -> bool:
        return not self.holes

    def covers(self, n: int) -> bool:
        """True when every lag ``0..n-1`` is present."""
        return self.contiguous_span >= n - 1


@dataclass(frozen=True)
class SelectionMatrix:
    """Sparse form of the M x N switch matrix: one unit entry per row."""

    row_count: int
    column_count: int
    active_columns: tuple[int, ...]  # 0-based

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[0] != self.column_count:
            raise ValueError(f"expected {self.column_count} rows, got {x.shape[0]}")
        return x[list(self.active_columns)]

    def adjoint(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        out = np.zeros((self.column_count,) + v.shape[1:], dtype=np.result_type(v, float))
        out[list(self.active_columns)] = v
        return out

    def dense(self) -> np.ndarray:
        W = np.zeros((self.row_count, self.column_count))
        W[np.arange(self.row_count), list(self.active_columns)] = 1.0
        return W


@dataclass(frozen=True)
class ExpandedSelector:
    """The ``I_L kron W`` operator acting on snapshot-major NL-vectors."""

    selection: SelectionMatrix
    snapshots: int

    @property
    def rows(self) -> np.ndarray:
        """Positions (0-based) of the NL-vector kept by the selector."""
        N = self.selection.column_count
        cols = np.asarray(self.selection.active_columns)
        return (np.arange(self.snapshots)[:, None] * N + cols[None, :]).ravel()

    @property
    def shape(self) -> tuple[int, int]:
        return (self.selection.row_count * self.snapshots,
                self.selection.column_count * self.snapshots)

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[0] != self.shape[1]:
            raise ValueError(f"expected length {self.shape[1]}, got {x.shape[0]}")
        return x[self.rows]

    def adjoint(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        out = np.zeros((self.shape[1],) + v.shape[1:], dtype=np.result_type(v, float))
        out[self.rows] = v
        return out

    def dense(self) -> np.ndarray:
        return np.kron(np.eye(self.snapshots), self.selection.dense())


# Restricted minimum-redundancy arrays, 1-based. Apertures 1, 3, 6, 9, 13,
# 17, 23, 29, 36 are the largest achievable with a hole-free coarray.
MRA_TABLE: dict[int, tuple[int, ...]] = {
    2: (1, 2),
    3: (1, 2, 4),
    4: (1, 2, 5, 7),
    5: (1, 2, 3, 7, 10),
    6: (1, 2, 3, 7, 11, 14),
    7: (1, 2, 3, 4, 9, 14, 18),
    8: (1, 2, 5, 11, 17, 19, 22, 24),
    9: (1, 2, 5, 11, 17, 23, 25, 28, 30),
    10: (1, 2, 4, 7, 14, 21, 28, 32, 36, 37),
}


def nested_split(N: int, M: int) -> tuple[int, int]:
    """Dense/sparse sizes ``(N1, N2)`` for a nested array of M antennas.

    Picks the split maximizing ``(N2 + 1) * N1`` subject to fitting in N;
    ties go to the larger dense part.
    """
    best = None
    for n1 in range(1, M):
        n2 = M - n1
        span = (n2 + 1) * n1
        if span > N:
            continue
        key = (span, n1)
        if best is None or key > best[0]:
            best = (key, (n1, n2))
    if best is None:
        raise GeometryError(
            f"no nested split of M={M} fits in N={N}; "
            f"best achievable aperture needs N >= {min((M - k + 1) * k for k in range(1, M))}")
    return best[1]


def nested_array(N: int, M: int) -> SelectionSet:
    """Two-level nested array: ``{1..N1} U {2N1, 3N1, ..., (N2+1)N1}``."""
    if not 2 <= M <= N:
        raise GeometryError(f"nested array needs 2 <= M <= N, got M={M}, N={N}")
    n1, n2 = nested_split(N, M)
    dense = list(range(1, n1 + 1))
    sparse = [k * n1 for k in range(2, n2 + 2)]
    return SelectionSet(tuple(dense + sparse), N)


def mra(M: int, N: int) -> SelectionSet:
    if M not in MRA_TABLE:
        raise GeometryError(
            f"MRA table covers M in [{min(MRA_TABLE)}, {max(MRA_TABLE)}], got M={M}")
    idx = MRA_TABLE[M]
    if idx[-1] > N:
        raise GeometryError(f"MRA with M={M} spans {idx[-1]} antennas, exceeds N={N}")
    return SelectionSet(idx, N)


def coprime_array(M1: int, M2: int, N: int) -> SelectionSet:
    """Extended coprime layout ``{1 + n M2}_{n<M1} U {1 + m M1}_{m<2 M2}``."""
    if M1 < 1 or M2 < 1:
        raise GeometryError("coprime factors must be positive")
    if gcd(M1, M2) != 1:
        raise GeometryError(f"M1={M1} and M2={M2} are not coprime")
    idx = sorted({1 + n * M2 for n in range(M1)} | {1 + m * M1 for m in range(2 * M2)})
    if idx[-1] > N:
        raise GeometryError(f"coprime layout spans {idx[-1]} antennas, exceeds N={N}")
    return SelectionSet(tuple(idx), N)


def coprime_for_count(M: int, N: int) -> SelectionSet:
    """Coprime layout with exactly M antennas (``M1 + 2 M2 - 1 = M``).

    Among admissible pairs, the one with the longest contiguous coarray wins.
    """
    best = None
    for m2 in range(1, M):
        m1 = M + 1 - 2 * m2
        if m1 < 1 or gcd(m1, m2) != 1:
            continue
        try:
            s = coprime_array(m1, m2, N)
        except GeometryError:
            continue
        if len(s) != M:
            continue
        span = difference_coarray(s).contiguous_span
        if best is None or span > best[0]:
            best = (span, s)
    if best is None:
        raise GeometryError(f"no coprime layout with M={M} fits in N={N}")
    return best[1]


def ula_prefix(M: int, N: int) -> SelectionSet:
    if not 1 <= M <= N:
        raise GeometryError(f"ULA prefix needs 1 <= M <= N, got M={M}, N={N}")
    return SelectionSet(tuple(range(1, M + 1)), N)


def difference_coarray(s: SelectionSet | Iterable[int]) -> CoarrayReport:
    idx = np.asarray(list(s.indices if isinstance(s, SelectionSet) else s))
    diffs = np.unique(np.abs(idx[:, None] - idx[None, :]))
    lags = tuple(int(d) for d in diffs)
    present = np.zeros(lags[-1] + 2, dtype=bool)
    present[list(lags)] = True
    span = int(np.argmin(present)) - 1
    holes = tuple(int(h) for h in np.flatnonzero(~present[: lags[-1] + 1]))
    return CoarrayReport(lags=lags, contiguous_span=span, holes=holes)


def selection_operator(s: SelectionSet) -> SelectionMatrix:
    return SelectionMatrix(s.M, s.N, tuple(int(i) for i in s.zero_based))


def expanded_selector(s: SelectionSet, L: int) -> ExpandedSelector:
    if L < 1:
        raise ValueError("need at least one snapshot")
    return ExpandedSelector(selection_operator(s), int(L))


def build(kind: str, N: int, M: int) -> SelectionSet:
    """Dispatch by array-type name (``nested``, ``mra``, ``coprime``, ``ula``)."""
    kind = kind.lower()
    if kind in ("nested", "na"):
        return nested_array(N, M)
    if kind == "mra":
        return mra(M, N)
    if kind in ("coprime", "ca"):
        return coprime_for_count(M, N)
    if kind in ("ula", "ula_prefix"):
        return ula_prefix(M, N)
    raise GeometryError(f"unknown array type {kind!r}")


def parse_indices(values: Sequence[int] | str, N: int) -> SelectionSet:
    """Accept a sequence, a JSON array or a comma separated list of 1-based indices."""
    if isinstance(values, str):
        text = values.strip()
        if text.startswith("["):
            return SelectionSet.from_json(text, N)
        try:
            values = [int(v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            raise GeometryError(f"cannot parse indices {values!r}") from exc
    return SelectionSet(tuple(values), N)
