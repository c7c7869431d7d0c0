"""Hermitian Toeplitz-block-Toeplitz (TBT) matrices.

A TBT matrix of size ``NL x NL`` is stored through its lag coefficients
``c(d, m)`` (temporal lag ``d``, spatial lag ``m``). Block ``(i, j)`` is the
``N x N`` Toeplitz matrix with entries ``c(i - j, p - q)``, which matches the
``v(f) kron a(theta)`` ordering of the vectorized snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import SelectionSet, difference_coarray

__all__ = [
    "TbtError",
    "TbtParams",
    "TbtDecomposition",
    "materialize",
    "tbt_adjoint",
    "tbt_project",
    "selected_submatrix",
    "lift_from_selected",
    "class_spread",
    "class_sizes",
    "from_atoms",
]


class TbtError(ValueError):
    pass


@dataclass(frozen=True)
class TbtParams:
    N: int
    L: int
    coeffs: np.ndarray  # (2L-1, 2N-1), coeffs[d+L-1, m+N-1] = c(d, m)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (2 * self.L - 1, 2 * self.N - 1):
            raise TbtError(
                f"coefficient grid {c.shape} does not match N={self.N}, L={self.L}")
        object.__setattr__(self, "coeffs", c)

    def __call__(self, d: int, m: int) -> complex:
        return self.coeffs[d + self.L - 1, m + self.N - 1]

    @classmethod
    def zeros(cls, N: int, L: int) -> "TbtParams":
        return cls(N, L, np.zeros((2 * L - 1, 2 * N - 1), complex))

    @classmethod
    def identity(cls, N: int, L: int, scale: float = 1.0) -> "TbtParams":
        t = cls.zeros(N, L)
        t.coeffs[L - 1, N - 1] = scale
        return t

    @property
    def size(self) -> int:
        return self.N * self.L

    def symmetry_error(self) -> float:
        c = self.coeffs
        return float(np.max(np.abs(c - c[::-1, ::-1].conj())))

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.coeffs))))
        return self.symmetry_error() <= tol * scale

    def hermitian_part(self) -> "TbtParams":
        c = self.coeffs
        return TbtParams(self.N, self.L, 0.5 * (c + c[::-1, ::-1].conj()))

    def scaled(self, alpha: float) -> "TbtParams":
        return TbtParams(self.N, self.L, alpha * self.coeffs)

    def inner(self, other: "TbtParams") -> complex:
        """Complex inner product ``sum conj(c) c'`` over the coefficient grid."""
        return complex(np.vdot(self.coeffs, other.coeffs))

    def to_csv(self) -> str:
        lines = ["d,m,re,im"]
        for di in range(2 * self.L - 1):
            for mi in range(2 * self.N - 1):
                v = self.coeffs[di, mi]
                lines.append(f"{di - self.L + 1},{mi - self.N + 1},{float(v.real)!r},{float(v.imag)!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TbtDecomposition:
    """Atoms ``(theta_k, f_k, p_k)`` plus noise floor ``sigma``."""

    theta: np.ndarray
    f: np.ndarray
    p: np.ndarray
    sigma: float = 0.0
    residual: float = float("nan")

    @property
    def K(self) -> int:
        return int(np.size(self.theta))

    def params(self, N: int, L: int) -> TbtParams:
        return from_atoms(self.theta, self.f, self.p, self.sigma, N, L)


def class_sizes(N: int, L: int) -> np.ndarray:
    """Number of entries in each lag class: ``(L-|d|)(N-|m|)``."""
    d = L - np.abs(np.arange(-(L - 1), L))
    m = N - np.abs(np.arange(-(N - 1), N))
    return np.outer(d, m).astype(float)


def from_atoms(theta, f, p, sigma: float, N: int, L: int) -> TbtParams:
    """Coefficients of ``sum p_k (v v^H) kron (a a^H) + sigma I``."""
    theta = np.atleast_1d(np.asarray(theta, float))
    f = np.atleast_1d(np.asarray(f, float))
    p = np.atleast_1d(np.asarray(p, float))
    d = np.arange(-(L - 1), L)
    m = np.arange(-(N - 1), N)
    Vd = np.exp(2j * np.pi * np.outer(d, f))
    Am = np.exp(1j * np.pi * np.outer(m, np.sin(theta)))
    c = (Vd * p) @ Am.T
    c[L - 1, N - 1] += sigma
    return TbtParams(N, L, c)


def materialize(t: TbtParams, check: bool = True) -> np.ndarray:
    if check and not t.is_hermitian():
        raise TbtError(f"coefficients violate Hermitian symmetry (err={t.symmetry_error():.3g})")
    return kernels.materialize(t.coeffs, t.N, t.L)


def tbt_adjoint(M: np.ndarray, N: int, L: int) -> TbtParams:
    """Adjoint of :func:`materialize`: sum of entries per lag class."""
    M = np.asarray(M)
    if M.shape != (N * L, N * L):
        raise TbtError(f"expected {(N * L, N * L)} matrix, got {M.shape}")
    return TbtParams(N, L, kernels.class_sum(M, N, L))


def tbt_project(M: np.ndarray, N: int, L: int) -> TbtParams:
    """Nearest TBT matrix in Frobenius norm (class averages)."""
    return TbtParams(N, L, tbt_adjoint(M, N, L).coeffs / class_sizes(N, L))


def selected_submatrix(t: TbtParams, s: SelectionSet, L: int) -> np.ndarray:
    """``Gamma T Gamma^H`` assembled straight from the coefficients."""
    if s.N != t.N or L != t.L:
        raise TbtError("selection/snapshot count do not match the TBT size")
    return kernels.selected_materialize(t.coeffs, s.zero_based, t.N, L)


def selected_counts(s: SelectionSet, L: int) -> np.ndarray:
    ones = np.ones((s.M * L, s.M * L))
    return kernels.selected_class_sum(ones, s.zero_based, s.N, L).real


def class_spread(T_omega: np.ndarray, s: SelectionSet, L: int) -> float:
    """Largest deviation of an entry of ``T_omega`` from its lag-class mean."""
    idx = kernels.selected_class_index(s.zero_based, s.N, L)
    cnt = selected_counts(s, L).ravel()
    sums = kernels.selected_class_sum(T_omega, s.zero_based, s.N, L).ravel()
    mean = np.where(cnt > 0, sums / np.maximum(cnt, 1), 0)
    return float(np.max(np.abs(np.asarray(T_omega) - mean[idx]))) if T_omega.size else 0.0


def lift_from_selected(T_omega: np.ndarray, s: SelectionSet, L: int,
                       max_spread: float | None = None) -> TbtParams:
    """Recover the full TBT coefficients from its selected submatrix.

    Each lag is the average of every ``T_omega`` entry that samples it, so the
    spatial coarray must contain all lags ``0..N-1``.
    """
    T_omega = np.asarray(T_omega)
    n = s.M * L
    if T_omega.shape != (n, n):
        raise TbtError(f"expected {(n, n)} matrix, got {T_omega.shape}")
    co = difference_coarray(s)
    if not co.covers(s.N):
        missing = [m for m in range(s.N) if m not in set(co.lags)]
        raise TbtError(f"coarray misses spatial lags {missing[:8]}; TBT not identifiable")
    if max_spread is not None:
        spread = class_spread(T_omega, s, L)
        if spread > max_spread:
            raise TbtError(f"selected matrix is not TBT-consistent (spread {spread:.3g})")
    cnt = selected_counts(s, L)
    sums = kernels.selected_class_sum(T_omega, s.zero_based, s.N, L)
    return TbtParams(s.N, L, sums / cnt)

