"""Covariance-fitting and atomic-norm SDPs cast in the engine's standard form.

Both problems keep the TBT coefficients in the real Hermitian basis of
:mod:`structure`; every dense Schur block over lag classes comes from the FFT
cross Gram, so the cost per interior-point iteration is dominated by
``O(ncls^3)`` for the Cholesky of the Schur matrix rather than by assembly.

Data vectors are expected normalized to unit norm; the callers undo the
scaling afterwards.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..geometry import SelectionSet
from .structure import basis, col_gather, cross_gram, outer_class_sum, row_gather, sparse_gram


def _scatter(Xl: np.ndarray, rows: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((n, n), dtype=complex)
    out[np.ix_(rows, rows)] = Xl
    return out


def expanded_rows(s: SelectionSet, L: int) -> np.ndarray:
    cols = s.zero_based
    return (np.arange(L)[:, None] * s.N + cols[None, :]).ravel()


class CovarianceFitting:
    """Engine form of the covariance-fitting SDP.

    Multipliers ``theta = [z, c]`` with ``c`` the Hermitian TBT parameters;
    slack blocks are the Schur matrix ``[[z, y^H], [y, T_Omega]]`` and ``T``.
    The engine's primal variables are the dual pair ``(Q, Z)``.
    """

    def __init__(self, y: np.ndarray, s: SelectionSet, L: int):
        self.y = np.asarray(y, complex).ravel()
        self.s, self.L = s, int(L)
        self.N = s.N
        self.cols = s.zero_based
        self.ml = s.M * self.L
        self.nl = self.N * self.L
        if self.y.size != self.ml:
            raise ValueError(f"y has {self.y.size} entries, expected M*L = {self.ml}")
        self.rows = expanded_rows(s, self.L)
        self.hb = basis(self.N, self.L)
        self.block_sizes = (self.ml + 1, self.nl)
        C0 = np.zeros((self.ml + 1, self.ml + 1), complex)
        C0[0, 1:] = self.y.conj()
        C0[1:, 0] = self.y
        self.C = [C0, np.zeros((self.nl, self.nl), complex)]
        self.b = np.zeros(1 + self.hb.dim)
        self.b[0] = -float(np.vdot(self.y, self.y).real)
        self.b[1] = -float(self.ml)

    # coefficient helpers ---------------------------------------------------
    def tbt_grid(self, theta: np.ndarray) -> np.ndarray:
        return self.hb.grid(theta[1:])

    def A(self, X) -> np.ndarray:
        X0, X1 = X
        cs0 = kernels.selected_class_sum(X0[1:, 1:], self.cols, self.N, self.L)
        cs1 = kernels.class_sum(X1, self.N, self.L)
        out = np.empty(1 + self.hb.dim)
        out[0] = -X0[0, 0].real
        out[1:] = -self.hb.adjoint(cs0 + cs1)
        return out

    def At(self, theta: np.ndarray):
        g = self.tbt_grid(theta)
        S0 = np.zeros((self.ml + 1, self.ml + 1), complex)
        S0[0, 0] = theta[0]
        S0[1:, 1:] = kernels.selected_materialize(g, self.cols, self.N, self.L)
        return [-S0, -kernels.materialize(g, self.N, self.L)]

    def schur(self, X, Sinv) -> np.ndarray:
        X0, X1 = X
        Y0, Y1 = Sinv
        m = 1 + self.hb.dim
        M = np.empty((m, m))
        M[0, 0] = (X0[0, 0] * Y0[0, 0]).real
        K = np.outer(X0[0, 1:], Y0[1:, 0])
        cs = kernels.selected_class_sum(K, self.cols, self.N, self.L).ravel()
        M[0, 1:] = self.hb.combine_columns(cs).real
        M[1:, 0] = M[0, 1:]
        pairs = [(_scatter(X0[1:, 1:], self.rows, self.nl), _scatter(Y0[1:, 1:], self.rows, self.nl)),
                 (X1, Y1)]
        M[1:, 1:] = self.hb.gram(cross_gram(pairs, self.N, self.L))
        return M

    # starting points -------------------------------------------------------
    def slack_feasible_start(self):
        """``T = I``, ``z = 1 + |y|^2``: strictly feasible multipliers."""
        theta = np.zeros(1 + self.hb.dim)
        theta[0] = 1.0 + float(np.vdot(self.y, self.y).real)
        theta[1] = 1.0
        S = [c - a for c, a in zip(self.C, self.At(theta))]
        X = [np.eye(n, dtype=complex) for n in self.block_sizes]
        return X, theta, S

    def primal_feasible_start(self):
        """``Q = diag(|y|^2, I/2)``, ``Z = (M / 2N) I`` satisfies the equality constraints."""
        Q = np.eye(self.ml + 1, dtype=complex) * 0.5
        Q[0, 0] = float(np.vdot(self.y, self.y).real)
        Z = np.eye(self.nl, dtype=complex) * (self.s.M / (2.0 * self.N))
        theta = np.zeros(1 + self.hb.dim)
        S = [np.eye(n, dtype=complex) for n in self.block_sizes]
        return [Q, Z], theta, S


class AtomicDenoising:
    """Engine form of regularized 2-D atomic-norm denoising.

    minimize  0.5 |y - Gamma x|^2 + (lam / 2) (c00 + t)
    s.t.      [[T, x], [x^H, t]] >= 0

    with ``T`` Hermitian TBT. Multipliers ``theta = [c, Re x, Im x, t, s]``,
    ``s`` bounding the squared residual through ``[[s, r^H], [r, I]] >= 0``.
    """

    def __init__(self, y: np.ndarray, s: SelectionSet, L: int, lam: float):
        self.y = np.asarray(y, complex).ravel()
        self.s, self.L, self.lam = s, int(L), float(lam)
        self.N = s.N
        self.nl = self.N * self.L
        self.ml = s.M * self.L
        self.hb = basis(self.N, self.L)
        self.rows = expanded_rows(s, self.L)
        nc, nl = self.hb.dim, self.nl
        self.i_re = nc
        self.i_im = nc + nl
        self.i_t = nc + 2 * nl
        self.i_s = nc + 2 * nl + 1
        self.m = nc + 2 * nl + 2
        self.block_sizes = (nl + 1, self.ml + 1)
        CB = np.eye(self.ml + 1, dtype=complex)
        CB[0, 0] = 0.0
        CB[0, 1:] = self.y.conj()
        CB[1:, 0] = self.y
        self.C = [np.zeros((nl + 1, nl + 1), complex), CB]
        self.b = np.zeros(self.m)
        self.b[0] = -0.5 * self.lam  # tr(T) / NL = c00
        self.b[self.i_t] = -0.5 * self.lam
        self.b[self.i_s] = -0.5
        self._build_sparse()

    def _build_sparse(self):
        nl, ml = self.nl, self.ml
        k = np.arange(nl)
        sel = np.full(nl, -1)
        sel[self.rows] = np.arange(ml)
        self.sel = sel
        # block A: x entries at (k, nl) / (nl, k), t at (nl, nl)
        rA = np.zeros((2 * nl + 2, 2), int)
        cA = np.zeros_like(rA)
        vA = np.zeros((2 * nl + 2, 2), complex)
        rA[:nl], cA[:nl], vA[:nl] = np.c_[k, np.full(nl, nl)], np.c_[np.full(nl, nl), k], -1.0
        rA[nl:2 * nl], cA[nl:2 * nl] = rA[:nl], cA[:nl]
        vA[nl:2 * nl] = np.array([-1j, 1j])
        rA[2 * nl] = cA[2 * nl] = nl
        vA[2 * nl, 0] = -1.0
        # block B: selected x entries at (kappa+1, 0) / (0, kappa+1), s at (0, 0)
        rB = np.zeros_like(rA)
        cB = np.zeros_like(rA)
        vB = np.zeros_like(vA)
        on = sel >= 0
        kap = np.where(on, sel + 1, 0)
        rB[:nl], cB[:nl] = np.c_[kap, np.zeros(nl, int)], np.c_[np.zeros(nl, int), kap]
        vB[:nl] = np.where(on[:, None], 1.0, 0.0)
        rB[nl:2 * nl], cB[nl:2 * nl] = rB[:nl], cB[:nl]
        vB[nl:2 * nl] = np.where(on[:, None], np.array([1j, -1j]), 0.0)
        vB[2 * nl + 1, 0] = -1.0
        self.sp = [(rA, cA, vA), (rB, cB, vB)]

    def tbt_grid(self, theta: np.ndarray) -> np.ndarray:
        return self.hb.grid(theta[:self.hb.dim])

    def _x(self, theta):
        return theta[self.i_re:self.i_im] + 1j * theta[self.i_im:self.i_t]

    def A(self, X) -> np.ndarray:
        XA, XB = X
        nl = self.nl
        out = np.zeros(self.m)
        cs = kernels.class_sum(XA[:nl, :nl], self.N, self.L)
        out[:self.hb.dim] = -self.hb.adjoint(cs)
        for Xk, (r, c, v) in zip(X, self.sp):
            out[self.hb.dim:] += (v * Xk[c, r]).sum(axis=1).real
        return out

    def At(self, theta: np.ndarray):
        nl, ml = self.nl, self.ml
        x = self._x(theta)
        SA = np.zeros((nl + 1, nl + 1), complex)
        SA[:nl, :nl] = kernels.materialize(self.tbt_grid(theta), self.N, self.L)
        SA[:nl, nl] = x
        SA[nl, :nl] = x.conj()
        SA[nl, nl] = theta[self.i_t]
        AB = np.zeros((ml + 1, ml + 1), complex)
        gx = x[self.rows]
        AB[0, 0] = -theta[self.i_s]
        AB[1:, 0] = gx
        AB[0, 1:] = gx.conj()
        return [-SA, AB]

    def schur(self, X, Sinv) -> np.ndarray:
        XA, XB = X
        YA, YB = Sinv
        nl, nc = self.nl, self.hb.dim
        M = np.zeros((self.m, self.m))
        M[:nc, :nc] = self.hb.gram(cross_gram([(XA[:nl, :nl], YA[:nl, :nl])], self.N, self.L))
        for Xk, Yk, (r, c, v) in zip(X, Sinv, self.sp):
            M[nc:, nc:] += sparse_gram(r, c, v, Xk, Yk)
        # lag classes against the x / t entries of block A
        P1 = row_gather(YA[nl, :nl], self.N, self.L) @ XA[:nl, :nl]
        P2 = col_gather(XA[:nl, nl], self.N, self.L) @ YA[:nl, :nl].T
        cross = np.empty((self.hb.ncls, 2 * nl + 2), complex)
        cross[:, :nl] = -P1 - P2
        cross[:, nl:2 * nl] = -1j * P1 + 1j * P2
        cross[:, 2 * nl] = -outer_class_sum(YA[nl, :nl], XA[:nl, nl], self.N, self.L)
        cross[:, 2 * nl + 1] = 0.0
        Mc = -self.hb.combine_rows(cross).real
        M[:nc, nc:] = Mc
        M[nc:, :nc] = Mc.T
        return M

    def start(self):
        theta = np.zeros(self.m)
        theta[0] = 1.0
        theta[self.i_t] = 1.0
        theta[self.i_s] = 1.0 + float(np.vdot(self.y, self.y).real)
        S = [c - a for c, a in zip(self.C, self.At(theta))]
        X = [np.eye(n, dtype=complex) for n in self.block_sizes]
        return X, theta, S
