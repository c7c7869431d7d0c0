"""Solver options and result containers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..tbt import TbtParams

BACKENDS = ("interior-point", "iterative-splitting")


class SolverError(RuntimeError):
    """Raised for invalid solver input; non-convergence is flagged on the result instead."""


@dataclass(frozen=True)
class SdpOptions:
    max_iterations: int = 20000
    abs_tolerance: float = 1e-8
    rel_tolerance: float = 1e-6
    backend: str = "interior-point"
    trace: bool = False
    # interior-point iterations are capped separately; 20000 only makes sense for splitting
    ipm_max_iterations: int = 120

    def __post_init__(self):
        if self.abs_tolerance <= 0 or self.rel_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; choose from {BACKENDS}")


@dataclass
class SdpSolution:
    t_hat: TbtParams
    z: float
    objective: float
    dual_objective: float
    gap: float
    iterations: int
    wall_time_s: float
    converged: bool = True
    route: str = "primal"
    backend: str = "interior-point"
    residuals: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)

    def trace_csv(self) -> str:
        if not self.trace:
            return ""
        keys = list(self.trace[0])
        lines = [",".join(keys)]
        for rec in self.trace:
            lines.append(",".join(repr(float(rec[k])) if k != "iteration" else str(rec[k])
                                  for k in keys))
        return "\n".join(lines) + "\n"


@dataclass
class DualSolution:
    u: float
    w: np.ndarray
    V: np.ndarray
    recovered_T_omega: np.ndarray
    Z: np.ndarray | None = None

    @property
    def Q(self) -> np.ndarray:
        n = self.w.size
        Q = np.empty((n + 1, n + 1), complex)
        Q[0, 0] = self.u
        Q[1:, 0] = self.w
        Q[0, 1:] = self.w.conj()
        Q[1:, 1:] = self.V
        return Q
