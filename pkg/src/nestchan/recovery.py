"""Atom retrieval from a PSD Toeplitz-block-Toeplitz matrix.

The signal subspace of ``T - sigma I`` is shift-invariant along the spatial
index (inside each block) and along the temporal index (across blocks). The
two rotation operators share eigenvectors, so diagonalizing a random
combination of them pairs each angle with its Doppler.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as sla
from scipy.optimize import nnls

from .geometry import SelectionSet
from .signal import atom_matrix, selected_atoms
from .tbt import TbtDecomposition, TbtParams, materialize

__all__ = [
    "DecompositionError",
    "noise_floor",
    "model_order",
    "md_vandermonde",
    "least_squares_gains",
    "DEFAULT_TAU",
]

DEFAULT_TAU = 1e-3


class DecompositionError(RuntimeError):
    pass


def _dense(t) -> np.ndarray:
    return materialize(t) if isinstance(t, TbtParams) else np.asarray(t)


def noise_floor(t: TbtParams) -> float:
    """Smallest eigenvalue of the materialized matrix, clamped at zero."""
    lam = sla.eigvalsh(_dense(t), subset_by_index=[0, 0])[0]
    return max(float(lam), 0.0)


def model_order(t: TbtParams, sigma_hat: float | None = None, tau: float = DEFAULT_TAU) -> int:
    """Number of eigenvalues of ``T - sigma_hat I`` above ``tau * lambda_max``."""
    T = _dense(t)
    if sigma_hat is None:
        sigma_hat = noise_floor(t)
    lam = np.linalg.eigvalsh(T) - sigma_hat
    top = lam[-1]
    if top <= 0:
        return 0
    return int(np.count_nonzero(lam > tau * top))


def _shift_rows(N: int, L: int):
    blk = np.arange(L)[:, None] * N
    s1 = (blk + np.arange(N - 1)[None, :]).ravel()
    t1 = np.arange((L - 1) * N)
    return s1, s1 + 1, t1, t1 + N


def _rotation(U1, U2):
    return np.linalg.lstsq(U1, U2, rcond=None)[0]


def _joint_eigs(Phi_s, Phi_t, rng, attempts: int = 8):
    K = Phi_s.shape[0]
    scale = 1.0
    for _ in range(attempts):
        beta = rng.uniform(0.2, 1.0) * np.exp(2j * np.pi * rng.uniform())
        lam, P = np.linalg.eig(Phi_s + beta * Phi_t)
        if K > 1:
            sep = np.min(np.abs(lam[:, None] - lam[None, :]) + np.eye(K) * 10)
            if sep < 1e-8 * scale:
                continue
        Pinv = np.linalg.inv(P)
        return np.diag(Pinv @ Phi_s @ P), np.diag(Pinv @ Phi_t @ P)
    raise DecompositionError("rotation eigenvalues collide for every pairing combination")


def _fit_powers(R: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Nonnegative ``p`` minimizing ``|R - B diag(p) B^H|_F``."""
    G = np.abs(B.conj().T @ B) ** 2
    h = np.real(np.einsum("ik,ij,jk->k", B.conj(), R, B))
    try:
        C = np.linalg.cholesky(G).T
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(G)
        C = (V * np.sqrt(np.clip(w, 0, None))).T
    rhs = np.linalg.lstsq(C.T, h, rcond=None)[0]
    p, _ = nnls(C, rhs)
    return p


def md_vandermonde(t: TbtParams, K_hat: int, sigma_hat: float | None = None,
                   tol: float = 1e-6, seed: int = 0) -> TbtDecomposition:
    """Decompose ``T = sum p_k (v v^H) kron (a a^H) + sigma I``.

    Raises :class:`DecompositionError` when the relative reconstruction
    residual exceeds ``tol``.
    """
    N, L = t.N, t.L
    if K_hat < 1:
        raise DecompositionError("K_hat must be >= 1")
    if K_hat > N * L - max(N, L):
        raise DecompositionError(f"K_hat={K_hat} exceeds the shift-invariance limit")
    T = materialize(t, check=False)
    T = 0.5 * (T + T.conj().T)
    if sigma_hat is None:
        sigma_hat = noise_floor(T)
    R = T - sigma_hat * np.eye(N * L)
    w, U = np.linalg.eigh(R)
    U = U[:, -K_hat:]
    s1, s2, t1, t2 = _shift_rows(N, L)
    rng = np.random.default_rng(seed)
    if N > 1:
        Phi_s = _rotation(U[s1], U[s2])
    else:
        Phi_s = np.eye(K_hat)
    if L > 1:
        Phi_t = _rotation(U[t1], U[t2])
    else:
        Phi_t = np.eye(K_hat)
    zs, zt = _joint_eigs(Phi_s, Phi_t, rng)
    theta = np.arcsin(np.clip(np.angle(zs) / np.pi, -1.0, 1.0))
    f = np.mod(np.angle(zt) / (2 * np.pi), 1.0)
    B = atom_matrix(theta, f, N, L)
    p = _fit_powers(R, B)
    if np.any(p <= 0):
        warnings.warn("some atoms received zero power", RuntimeWarning, stacklevel=2)
    That = (B * p) @ B.conj().T + sigma_hat * np.eye(N * L)
    resid = float(np.linalg.norm(T - That) / max(np.linalg.norm(T), 1e-300))
    order = np.argsort(theta)
    dec = TbtDecomposition(theta[order], f[order], p[order], float(sigma_hat), resid)
    if not resid <= tol:
        err = DecompositionError(f"reconstruction residual {resid:.3g} above tolerance {tol:.3g}")
        err.decomposition = dec
        raise err
    return dec


def least_squares_gains(y_omega, s: SelectionSet, L: int, atoms: TbtDecomposition,
                        max_condition: float = 1e10):
    """Path gains by least squares against the selected atoms; returns ``(g, residual)``."""
    B = selected_atoms(atoms.theta, atoms.f, s, L)
    if B.shape[1] > B.shape[0]:
        raise DecompositionError(f"{B.shape[1]} atoms but only {B.shape[0]} observations")
    sv = np.linalg.svd(B, compute_uv=False)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    if cond > max_condition:
        raise DecompositionError(f"atom matrix is rank deficient (condition {cond:.3g})")
    y = np.asarray(y_omega, complex).ravel()
    g, *_ = np.linalg.lstsq(B, y, rcond=None)
    return g, float(np.linalg.norm(y - B @ g))
