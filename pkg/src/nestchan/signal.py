"""Channel and snapshot synthesis for the switch-network uplink.

Conventions: half-wavelength ULA, ``a(theta)[n] = exp(j pi n sin theta)`` for
``n = 0..N-1``; Doppler vector ``v(f)[t] = exp(j 2 pi f t)`` for ``t = 1..L``.
Noise level ``sigma`` is the per-entry complex variance.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import SelectionSet, expanded_selector

__all__ = [
    "PathSet",
    "SnapshotBlock",
    "NoiseSpec",
    "steering_vector",
    "steering_matrix",
    "doppler_vector",
    "doppler_matrix",
    "normalized_doppler",
    "synthesize_snapshots",
    "vectorize",
    "true_channel",
    "random_paths",
    "snr_to_sigma",
]


@dataclass(frozen=True)
class PathSet:
    """K propagation paths: AoA (rad), normalized Doppler, complex gain."""

    theta: np.ndarray
    f: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        th = np.atleast_1d(np.asarray(self.theta, dtype=float))
        f = np.atleast_1d(np.asarray(self.f, dtype=float))
        g = np.atleast_1d(np.asarray(self.g, dtype=complex))
        if not (th.shape == f.shape == g.shape) or th.ndim != 1:
            raise ValueError("theta, f and g must be 1-D arrays of equal length")
        if th.size < 1:
            raise ValueError("need at least one path")
        if np.any(np.abs(th) >= np.pi / 2):
            raise ValueError("AoA must lie in (-pi/2, pi/2)")
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)

    @property
    def K(self) -> int:
        return self.theta.size

    def pairs_distinct(self) -> bool:
        pairs = {(float(a), float(b)) for a, b in zip(self.theta, self.f)}
        return len(pairs) == self.K


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("noise variance must be nonnegative")


@dataclass(frozen=True)
class SnapshotBlock:
    """``M x L`` matrix of combined training samples."""

    data: np.ndarray
    selection: SelectionSet

    def __post_init__(self):
        X = np.asarray(self.data, dtype=complex)
        if X.ndim != 2 or X.shape[0] != self.selection.M:
            raise ValueError(
                f"block shape {X.shape} inconsistent with M={self.selection.M}")
        object.__setattr__(self, "data", X)

    @property
    def L(self) -> int:
        return self.data.shape[1]

    def to_csv(self) -> str:
        """Rows are antennas; columns alternate re/im per snapshot."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["antenna"] + [f"{p}{t + 1}" for t in range(self.L) for p in ("re", "im")])
        for idx, row in zip(self.selection.indices, self.data):
            vals = []
            for v in row:
                vals += [repr(float(v.real)), repr(float(v.imag))]
            w.writerow([idx] + vals)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, selection: SelectionSet) -> "SnapshotBlock":
        rows = list(csv.reader(io.StringIO(text)))[1:]
        vals = np.array([[float(x) for x in r[1:]] for r in rows])
        return cls(vals[:, 0::2] + 1j * vals[:, 1::2], selection)


def steering_vector(theta: float, N: int) -> np.ndarray:
    if abs(theta) >= np.pi / 2:
        raise ValueError("AoA must lie in (-pi/2, pi/2)")
    return np.exp(1j * np.pi * np.arange(N) * np.sin(theta))


def steering_matrix(theta: Sequence[float], N: int) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    return np.exp(1j * np.pi * np.outer(np.arange(N), np.sin(theta)))


def doppler_vector(f: float, L: int) -> np.ndarray:
    if L < 1:
        raise ValueError("L must be positive")
    return np.exp(2j * np.pi * f * np.arange(1, L + 1))


def doppler_matrix(f: Sequence[float], L: int) -> np.ndarray:
    f = np.atleast_1d(np.asarray(f, dtype=float))
    return np.exp(2j * np.pi * np.outer(np.arange(1, L + 1), f))


def normalized_doppler(v: float, T: float, lam: float) -> float:
    """Doppler shift in cycles per snapshot: ``T v / lambda``."""
    if T <= 0 or lam <= 0:
        raise ValueError("sampling interval and wavelength must be positive")
    return T * v / lam


def snr_to_sigma(snr_db: float, path_power: float = 1.0) -> float:
    return path_power * 10.0 ** (-snr_db / 10.0)


def _complex_normal(rng: np.random.Generator, shape, var: float) -> np.ndarray:
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def synthesize_snapshots(paths: PathSet, s: SelectionSet, L: int,
                         noise: NoiseSpec) -> SnapshotBlock:
    A = steering_matrix(paths.theta, s.N)[s.zero_based]
    V = doppler_matrix(paths.f, L)
    X = (A * paths.g) @ V.T
    if noise.sigma > 0:
        rng = np.random.default_rng(noise.seed)
        X = X + _complex_normal(rng, X.shape, noise.sigma)
    return SnapshotBlock(X, s)


def vectorize(X: SnapshotBlock | np.ndarray) -> np.ndarray:
    data = X.data if isinstance(X, SnapshotBlock) else np.asarray(X)
    return data.reshape(-1, order="F")


def true_channel(paths: PathSet, N: int) -> np.ndarray:
    return steering_matrix(paths.theta, N) @ paths.g


def atom_matrix(theta: Sequence[float], f: Sequence[float], N: int, L: int) -> np.ndarray:
    """Columns ``v(f_k) kron a(theta_k)``, shape ``(N L, K)``."""
    A = steering_matrix(theta, N)
    V = doppler_matrix(f, L)
    return (V[:, None, :] * A[None, :, :]).reshape(N * L, -1)


def selected_atoms(theta, f, s: SelectionSet, L: int) -> np.ndarray:
    return expanded_selector(s, L).apply(atom_matrix(theta, f, s.N, L))


def random_paths(rng: np.random.Generator, K: int,
                 theta_range_deg: tuple[float, float] = (-30.0, 30.0),
                 f_range: tuple[float, float] = (0.1, 0.7),
                 gain: str = "gaussian") -> PathSet:
    """Draw K paths; ``gain='unit'`` gives unit-modulus random-phase gains."""
    lo, hi = np.deg2rad(theta_range_deg)
    theta = rng.uniform(lo, hi, K)
    f = rng.uniform(*f_range, K)
    if gain == "gaussian":
        g = _complex_normal(rng, K, 1.0)
    elif gain == "unit":
        g = np.exp(2j * np.pi * rng.uniform(size=K))
    else:
        raise ValueError(f"unknown gain model {gain!r}")
    return PathSet(theta, f, g)
