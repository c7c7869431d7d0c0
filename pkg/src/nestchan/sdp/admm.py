"""Operator-splitting (ADMM) backend over the same standard-form problems.

Both problems used here have basis matrices with pairwise orthogonal supports,
so ``A A*`` is diagonal and every linear subproblem is a class-sum followed by
a diagonal scaling, i.e. a projection onto the TBT structure. The remaining
work per iteration is one Hermitian eigendecomposition per PSD block.

Two splittings are provided:

``solve_multipliers``
    alternating minimization of the augmented Lagrangian of ``(D)``; iterates
    on ``(y, S)`` with ``X`` as the multiplier. Used for the primal route.
``solve_cone_split``
    ``X`` in the affine set, ``W`` in the cone, consensus ``X = W``; the cone
    multiplier gives ``S``. Used for the dual route.

The penalty ``rho`` stays fixed by default, which keeps the optimality error of
the tracked objective monotone; ``balance_every`` enables residual balancing,
which is faster but makes the objective jump whenever ``rho`` changes.
"""

from __future__ import annotations

import time

import numpy as np

from .ipm import IpmResult, _herm, _ip, _norm

def _psd_split(V):
    """Return ``(P+, P-)`` with ``V = P+ - P-``, both PSD."""
    w, U = np.linalg.eigh(_herm(V))
    pos = (U * np.clip(w, 0, None)) @ U.conj().T
    neg = (U * np.clip(-w, 0, None)) @ U.conj().T
    return pos, neg


def _finish(problem, X, y, S, it, converged, trace, t0, best):
    if not converged and best is not None:
        X, y, S = best[1:]
    b = np.asarray(problem.b, float)
    pobj, dobj = _ip(problem.C, X), float(b @ y)
    rec = _metrics(problem, X, y, S)
    return IpmResult(X=X, y=y, S=S, primal_objective=pobj, dual_objective=dobj,
                     iterations=it, converged=converged, pinf=rec["pinf"], dinf=rec["dinf"],
                     relgap=rec["relgap"], wall_time=time.perf_counter() - t0, trace=trace)


def _metrics(problem, X, y, S):
    b = np.asarray(problem.b, float)
    Rp = b - problem.A(X)
    Rd = [c - s - a for c, s, a in zip(problem.C, S, problem.At(y))]
    pobj, dobj = _ip(problem.C, X), float(b @ y)
    return dict(primal_objective=pobj, dual_objective=dobj,
                pinf=np.linalg.norm(Rp) / (1.0 + np.linalg.norm(b)),
                dinf=_norm(Rd) / (1.0 + _norm(problem.C)),
                relgap=abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj)),
                mu=_ip(X, S) / sum(problem.block_sizes))


def _converged(rec, rel_tol, abs_tol):
    return rec["relgap"] <= rel_tol and rec["pinf"] <= abs_tol and rec["dinf"] <= abs_tol


def solve_multipliers(problem, X0, y0, S0, max_iterations=20000, rel_tolerance=1e-6,
                      abs_tolerance=1e-8, rho=1.0, check_every=10, balance_every=None,
                      callback=None) -> IpmResult:
    """ADMM on ``max b^T y s.t. A*(y) + S = C, S >= 0`` with multiplier ``X``."""
    t0 = time.perf_counter()
    b = np.asarray(problem.b, float)
    C = problem.C
    d = problem.A(problem.At(np.ones(b.size)))  # diag of A A*
    X = [x.copy() for x in X0]
    S = [s.copy() for s in S0]
    y = np.asarray(y0, float).copy()
    trace, best, converged, it = [], None, False, 0
    for it in range(1, max_iterations + 1):
        # linear step: structured least squares for y
        y = (rho * (b - problem.A(X)) + problem.A([c - s for c, s in zip(C, S)])) / d
        Aty = problem.At(y)
        # cone step
        V = [c - a - rho * x for c, a, x in zip(C, Aty, X)]
        S_old = S
        S, neg = zip(*(_psd_split(v) for v in V))
        S = list(S)
        X = [n / rho for n in neg]
        if it % check_every == 0 or it == max_iterations:
            rec = _metrics(problem, X, y, S)
            rec["iteration"] = it
            trace.append(rec)
            if callback is not None:
                callback(rec)
            score = max(rec["relgap"], rec["pinf"], rec["dinf"])
            if best is None or score < best[0]:
                best = (score, [x.copy() for x in X], y.copy(), [s.copy() for s in S])
            if _converged(rec, rel_tolerance, abs_tolerance):
                converged = True
                break
            if balance_every and it % balance_every == 0:
                # residual balancing: primal residual of (D) vs. change in S
                r = rec["dinf"]
                sdiff = _norm([s - so for s, so in zip(S, S_old)]) / (1.0 + _norm(C))
                if r > 10 * sdiff:
                    rho /= 2.0
                elif sdiff > 10 * r:
                    rho *= 2.0
    return _finish(problem, X, y, S, it, converged, trace, t0, best)


def solve_cone_split(problem, X0, y0, S0, max_iterations=20000, rel_tolerance=1e-6,
                     abs_tolerance=1e-8, rho=1.0, check_every=10, balance_every=None,
                     callback=None) -> IpmResult:
    """ADMM on ``min <C, X> s.t. A(X) = b`` with the copy ``W = X`` kept in the cone."""
    t0 = time.perf_counter()
    b = np.asarray(problem.b, float)
    C = problem.C
    d = problem.A(problem.At(np.ones(b.size)))
    W = [x.copy() for x in X0]
    U = [np.zeros_like(x) for x in X0]  # scaled multiplier of X = W
    y = np.asarray(y0, float).copy()
    S = [s.copy() for s in S0]
    trace, best, converged, it = [], None, False, 0
    for it in range(1, max_iterations + 1):
        # affine step: X = argmin <C,X> + (1/2rho)|X - W + U|^2 on A(X) = b
        V = [w - u - rho * c for w, u, c in zip(W, U, C)]
        lam = (problem.A(V) - b) / d
        X = [v - a for v, a in zip(V, problem.At(lam))]
        W_old = W
        W, _ = zip(*(_psd_split(x + u) for x, u in zip(X, U)))
        W = list(W)
        U = [u + x - w for u, x, w in zip(U, X, W)]
        if it % check_every == 0 or it == max_iterations:
            # multipliers: S = -U / rho (cone), y from the affine step
            S = [_herm(-u / rho) for u in U]
            y = -lam / rho
            rec = _metrics(problem, W, y, S)
            rec["iteration"] = it
            trace.append(rec)
            if callback is not None:
                callback(rec)
            score = max(rec["relgap"], rec["pinf"], rec["dinf"])
            if best is None or score < best[0]:
                best = (score, [w.copy() for w in W], y.copy(), [s.copy() for s in S])
            if _converged(rec, rel_tolerance, abs_tolerance):
                converged = True
                break
            if balance_every and it % balance_every == 0:
                r = _norm([x - w for x, w in zip(X, W)]) / (1.0 + _norm(W))
                s_ = _norm([w - wo for w, wo in zip(W, W_old)]) / (1.0 + _norm(W))
                if r > 10 * s_:
                    rho /= 2.0
                    U = [2.0 * u for u in U]
                elif s_ > 10 * r:
                    rho *= 2.0
                    U = [0.5 * u for u in U]
    return _finish(problem, W, y, S, it, converged, trace, t0, best)
