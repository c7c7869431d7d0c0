"""Public solve entry points: covariance fitting (two routes) and the ANM baseline.

All solves normalize the data vector to unit norm first. The covariance-fitting
criterion is homogeneous, so with ``y = a * y_n`` the optimal ``T`` scales by
``a^2`` and ``z`` is unchanged; the dual variables map as ``u -> a^2 u``,
``w -> a w`` with ``V`` and ``Z`` unchanged. For ANM the weight is scaled by
``1 / a`` and ``T`` comes back with a single factor of ``a``.
"""

from __future__ import annotations

import time

import numpy as np

from ..geometry import SelectionSet
from ..tbt import TbtError, TbtParams, lift_from_selected
from . import admm, ipm
from .options import DualSolution, SdpOptions, SdpSolution, SolverError
from .problems import AtomicDenoising, CovarianceFitting

__all__ = ["solve_primal", "solve_dual", "solve_anm_baseline", "anm_weight"]

# interior-point gap is driven somewhat below the requested tolerance so the
# reported gap in original units stays inside it after un-normalizing
_GAP_MARGIN = 0.1


def _prepare(y_omega, s: SelectionSet, L: int):
    y = np.asarray(y_omega, dtype=complex).ravel()
    if y.size != s.M * L:
        raise SolverError(f"y_omega has {y.size} entries, expected M*L = {s.M * L}")
    if not np.all(np.isfinite(y)):
        raise SolverError("y_omega contains non-finite entries")
    return y, float(np.linalg.norm(y))


def _run(problem, start, opts: SdpOptions, splitting=None):
    X0, th0, S0 = start
    if opts.backend == "iterative-splitting":
        return splitting(problem, X0, th0, S0, max_iterations=opts.max_iterations,
                         rel_tolerance=opts.rel_tolerance, abs_tolerance=opts.abs_tolerance)
    return ipm.solve(problem, X0, th0, S0,
                     max_iterations=min(opts.max_iterations, opts.ipm_max_iterations),
                     rel_tolerance=_GAP_MARGIN * opts.rel_tolerance,
                     abs_tolerance=opts.abs_tolerance)


def _residuals(res) -> dict:
    return {"pinf": res.pinf, "dinf": res.dinf, "relgap": res.relgap}


def solve_primal(y_omega, s: SelectionSet, L: int, opts: SdpOptions | None = None) -> SdpSolution:
    """Covariance-fitting SDP solved for ``(z, T)`` directly.

    The returned ``t_hat`` is the TBT multiplier itself, so no lift is needed
    and coarray holes are tolerated (``T >= 0`` fills the missing lags).
    """
    t0 = time.perf_counter()
    opts = opts or SdpOptions()
    y, nrm = _prepare(y_omega, s, L)
    if nrm == 0:
        raise SolverError("y_omega is identically zero")
    prob = CovarianceFitting(y / nrm, s, L)
    res = _run(prob, prob.slack_feasible_start(), opts, admm.solve_multipliers)
    a2 = nrm ** 2
    t = TbtParams(s.N, L, a2 * prob.tbt_grid(res.y)).hermitian_part()
    return SdpSolution(
        t_hat=t, z=float(res.y[0]),
        objective=-a2 * res.dual_objective, dual_objective=-a2 * res.primal_objective,
        gap=a2 * abs(res.primal_objective - res.dual_objective),
        iterations=res.iterations, wall_time_s=time.perf_counter() - t0, converged=res.converged,
        route="primal", backend=opts.backend, residuals=_residuals(res),
        trace=res.trace if opts.trace else [])


def solve_dual(y_omega, s: SelectionSet, L: int, opts: SdpOptions | None = None
               ) -> tuple[DualSolution, SdpSolution]:
    """Dual problem in ``(u, w, V, Z)``; ``T`` is read back from the multiplier of ``Q >= 0``.

    The multiplier is the selected block ``T_Omega`` only, so the full TBT
    matrix is obtained with :func:`lift_from_selected`, which needs a
    hole-free coarray.
    """
    t0 = time.perf_counter()
    opts = opts or SdpOptions()
    y, nrm = _prepare(y_omega, s, L)
    n = y.size
    if nrm == 0:
        dual = DualSolution(u=0.0, w=np.zeros(n, complex), V=np.eye(n, dtype=complex),
                            recovered_T_omega=np.zeros((n, n), complex))
        sol = SdpSolution(t_hat=TbtParams.zeros(s.N, L), z=0.0, objective=0.0,
                          dual_objective=0.0, gap=0.0, iterations=0, wall_time_s=0.0,
                          route="dual", backend=opts.backend)
        return dual, sol
    prob = CovarianceFitting(y / nrm, s, L)
    res = _run(prob, prob.primal_feasible_start(), opts, admm.solve_cone_split)
    a2 = nrm ** 2
    Q, Z = res.X
    S0 = res.S[0]
    T_omega = a2 * 0.5 * (S0[1:, 1:] + S0[1:, 1:].conj().T)
    dual = DualSolution(u=a2 * float(Q[0, 0].real), w=nrm * Q[1:, 0].copy(), V=Q[1:, 1:].copy(),
                        recovered_T_omega=T_omega, Z=Z.copy())
    sol = SdpSolution(
        t_hat=_lift(T_omega, s, L), z=float(S0[0, 0].real),
        objective=-a2 * res.dual_objective, dual_objective=-a2 * res.primal_objective,
        gap=a2 * abs(res.primal_objective - res.dual_objective),
        iterations=res.iterations, wall_time_s=time.perf_counter() - t0, converged=res.converged,
        route="dual", backend=opts.backend, residuals=_residuals(res),
        trace=res.trace if opts.trace else [])
    return dual, sol


def _lift(T_omega, s, L) -> TbtParams:
    try:
        return lift_from_selected(T_omega, s, L)
    except TbtError as exc:
        raise SolverError(f"dual route cannot lift T_Omega: {exc}") from exc


def anm_weight(sigma: float, N: int, L: int, kappa: float = 1.0, floor: float = 1e-4) -> float:
    """Regularization ``kappa * sqrt(sigma * NL * log NL)`` (unit-norm data scale)."""
    nl = N * L
    return max(kappa * np.sqrt(max(sigma, 0.0) * nl * np.log(max(nl, 2))), floor)


def solve_anm_baseline(y_omega, s: SelectionSet, L: int, sigma_true: float,
                       opts: SdpOptions | None = None, kappa: float = 1.0) -> SdpSolution:
    """Regularized 2-D atomic-norm denoising; needs the true noise variance."""
    t0 = time.perf_counter()
    opts = opts or SdpOptions()
    if sigma_true is None or sigma_true < 0:
        raise SolverError("ANM needs a nonnegative noise variance")
    y, nrm = _prepare(y_omega, s, L)
    if nrm == 0:
        raise SolverError("y_omega is identically zero")
    lam = anm_weight(sigma_true / nrm ** 2, s.N, L, kappa)
    prob = AtomicDenoising(y / nrm, s, L, lam)
    res = _run(prob, prob.start(), opts, admm.solve_multipliers)
    a2 = nrm ** 2
    t = TbtParams(s.N, L, nrm * prob.tbt_grid(res.y)).hermitian_part()
    return SdpSolution(
        t_hat=t, z=0.0,
        objective=-a2 * res.dual_objective, dual_objective=-a2 * res.primal_objective,
        gap=a2 * abs(res.primal_objective - res.dual_objective),
        iterations=res.iterations, wall_time_s=time.perf_counter() - t0, converged=res.converged,
        route="anm", backend=opts.backend,
        residuals={**_residuals(res), "lambda": lam * nrm},
        trace=res.trace if opts.trace else [])
