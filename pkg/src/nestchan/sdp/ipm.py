"""Primal-dual interior-point method for complex Hermitian SDPs.

Solves the standard-form pair

    (P)  min <C, X>   s.t.  A(X) = b,  X >= 0
    (D)  max b^T y    s.t.  A*(y) + S = C,  S >= 0

with block-diagonal Hermitian ``X, S`` and real ``y``, where
``<U, V> = Re tr(U V)``. The problem object supplies the operators and the
Schur complement ``M_ij = <A_i, X A_j S^{-1}>``; the method is Mehrotra's
predictor-corrector with the HKM search direction.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np
import scipy.linalg as sla

Blocks = list  # list of square complex ndarrays


class ConicProblem(Protocol):
    block_sizes: Sequence[int]
    C: Blocks
    b: np.ndarray

    def A(self, X: Blocks) -> np.ndarray: ...

    def At(self, y: np.ndarray) -> Blocks: ...

    def schur(self, X: Blocks, Sinv: Blocks) -> np.ndarray: ...


@dataclass
class IpmResult:
    X: Blocks
    y: np.ndarray
    S: Blocks
    primal_objective: float
    dual_objective: float
    iterations: int
    converged: bool
    pinf: float
    dinf: float
    relgap: float
    wall_time: float
    trace: list = field(default_factory=list)


def _ip(U: Blocks, V: Blocks) -> float:
    return float(sum(np.vdot(u, v).real for u, v in zip(U, V)))


def _herm(P):
    return 0.5 * (P + P.conj().T)


def _norm(U: Blocks) -> float:
    return float(np.sqrt(sum(np.vdot(u, u).real for u in U)))


def _chol_inv(S):
    c = sla.cholesky(S, lower=True, check_finite=False)
    ci = sla.solve_triangular(c, np.eye(S.shape[0]), lower=True, check_finite=False)
    return c, ci.conj().T @ ci


def _max_step(chol, D) -> float:
    """Largest alpha with ``X + alpha D >= 0`` given ``X = chol chol^H``."""
    W = sla.solve_triangular(chol, D, lower=True, check_finite=False)
    W = sla.solve_triangular(chol, W.conj().T, lower=True, check_finite=False)
    lam = sla.eigvalsh(_herm(W), check_finite=False)[0]
    return np.inf if lam >= 0 else -1.0 / lam


def solve(problem: ConicProblem, X0: Blocks | None = None, y0=None, S0: Blocks | None = None,
          max_iterations: int = 100, rel_tolerance: float = 1e-9, abs_tolerance: float = 1e-9,
          callback: Callable[[dict], None] | None = None) -> IpmResult:
    t_start = time.perf_counter()
    sizes = list(problem.block_sizes)
    n_tot = float(sum(sizes))
    C, b = problem.C, np.asarray(problem.b, float)
    X = [np.eye(n, dtype=complex) for n in sizes] if X0 is None else [x.astype(complex) for x in X0]
    S = [np.eye(n, dtype=complex) for n in sizes] if S0 is None else [s.astype(complex) for s in S0]
    y = np.zeros(b.size) if y0 is None else np.asarray(y0, float).copy()
    norm_b, norm_C = 1.0 + np.linalg.norm(b), 1.0 + _norm(C)
    gamma = 0.9
    trace = []
    converged = False
    it = 0
    best = None
    for it in range(max_iterations + 1):
        At_y = problem.At(y)
        Rp = b - problem.A(X)
        Rd = [c - s - a for c, s, a in zip(C, S, At_y)]
        pobj, dobj = _ip(C, X), float(b @ y)
        mu = _ip(X, S) / n_tot
        pinf = np.linalg.norm(Rp) / norm_b
        dinf = _norm(Rd) / norm_C
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        rec = dict(iteration=it, primal_objective=pobj, dual_objective=dobj,
                   pinf=pinf, dinf=dinf, relgap=relgap, mu=mu)
        trace.append(rec)
        if callback is not None:
            callback(rec)
        score = max(relgap, pinf, dinf)
        if best is None or score < best[0]:
            best = (score, [x.copy() for x in X], y.copy(), [s.copy() for s in S], rec)
        if relgap <= rel_tolerance and pinf <= abs_tolerance and dinf <= abs_tolerance:
            converged = True
            break
        if it == max_iterations:
            break

        try:
            chols_S, Sinv = zip(*(_chol_inv(s) for s in S))
            chols_X = [sla.cholesky(x, lower=True, check_finite=False) for x in X]
        except np.linalg.LinAlgError:
            break
        Mschur = problem.schur(X, list(Sinv))
        try:
            Mfac = sla.cho_factor(Mschur, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            reg = 1e-14 * np.trace(Mschur) / Mschur.shape[0]
            Mfac = sla.cho_factor(Mschur + reg * np.eye(Mschur.shape[0]), lower=True,
                                  check_finite=False)
        XRdSi = problem.A([x @ r @ si for x, r, si in zip(X, Rd, Sinv)])
        SinvA = problem.A(list(Sinv))

        def direction(sigma_mu, corr=None):
            rhs = b - sigma_mu * SinvA + XRdSi
            if corr is not None:
                rhs = rhs + problem.A(corr)
            dy = sla.cho_solve(Mfac, rhs, check_finite=False)
            Aty = problem.At(dy)
            dS = [r - a for r, a in zip(Rd, Aty)]
            dX = []
            for k in range(len(sizes)):
                P = X[k] @ dS[k] @ Sinv[k]
                if corr is not None:
                    P = P + corr[k]
                dX.append(sigma_mu * Sinv[k] - X[k] - _herm(P))
            return dX, dy, dS

        def steps(dX, dS, g):
            ap = min([1.0] + [g * _max_step(c, d) for c, d in zip(chols_X, dX)])
            ad = min([1.0] + [g * _max_step(c, d) for c, d in zip(chols_S, dS)])
            return ap, ad

        # predictor
        dXa, dya, dSa = direction(0.0)
        ap, ad = steps(dXa, dSa, 1.0)
        mu_aff = _ip([x + ap * d for x, d in zip(X, dXa)],
                     [s + ad * d for s, d in zip(S, dSa)]) / n_tot
        sigma = float(np.clip((mu_aff / mu) ** 3, 0.0, 1.0)) if mu > 0 else 0.0
        # corrector
        corr = [da @ ds @ si for da, ds, si in zip(dXa, dSa, Sinv)]
        dX, dy, dS = direction(sigma * mu, corr)
        ap, ad = steps(dX, dS, gamma)
        X = [_herm(x + ap * d) for x, d in zip(X, dX)]
        y = y + ad * dy
        S = [_herm(s + ad * d) for s, d in zip(S, dS)]
        gamma = 0.9 + 0.09 * min(ap, ad)

    if not converged and best is not None:
        _, X, y, S, rec = best
        pobj, dobj = rec["primal_objective"], rec["dual_objective"]
        pinf, dinf, relgap = rec["pinf"], rec["dinf"], rec["relgap"]
    return IpmResult(X=X, y=y, S=S, primal_objective=pobj, dual_objective=dobj,
                     iterations=it, converged=converged, pinf=pinf, dinf=dinf,
                     relgap=relgap, wall_time=time.perf_counter() - t_start, trace=trace)
