"""Real parametrization of Hermitian TBT coefficients and Schur-complement blocks.

The coefficient grid is flattened to ``ncls = (2L-1)(2N-1)`` lag classes; the
class mirrored through the origin of class ``k`` is ``ncls - 1 - k``. A
Hermitian grid has ``ncls`` real degrees of freedom, ordered as

    [c(0, 0), Re c_h for h in upper half, Im c_h for h in upper half].

For lag-class indicator matrices ``E_k`` the cross Gram
``G[k, k'] = tr(E_k X E_k' Y)`` is a 4-D correlation of ``X`` against the
transposed ``Y`` tensor, evaluated with FFTs.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .. import kernels


class HermitianBasis:
    """Maps real parameter vectors to Hermitian coefficient grids and back."""

    def __init__(self, N: int, L: int):
        self.N, self.L = int(N), int(L)
        self.shape = (2 * self.L - 1, 2 * self.N - 1)
        self.ncls = self.shape[0] * self.shape[1]
        self.center = (self.ncls - 1) // 2
        self.upper = np.arange(self.center + 1, self.ncls)
        self.lower = self.ncls - 1 - self.upper
        self.dim = self.ncls
        self.nh = self.upper.size

    # parameter vector <-> grid -------------------------------------------
    def grid(self, theta: np.ndarray) -> np.ndarray:
        c = np.empty(self.ncls, dtype=complex)
        re = theta[1:1 + self.nh]
        im = theta[1 + self.nh:]
        c[self.center] = theta[0]
        c[self.upper] = re + 1j * im
        c[self.lower] = re - 1j * im
        return c.reshape(self.shape)

    def theta(self, grid: np.ndarray) -> np.ndarray:
        c = np.asarray(grid).ravel()
        return np.concatenate([[c[self.center].real], c[self.upper].real, c[self.upper].imag])

    def adjoint(self, cs: np.ndarray) -> np.ndarray:
        """``Re tr(A_i X)`` for every basis matrix, given class sums of X.

        ``cs`` is ``class_sum(X)``; since ``tr(E_k X)`` samples the transposed
        entries it is the class sum of the mirrored class.
        """
        cs = np.asarray(cs).ravel()
        tr = cs[::-1]
        out = np.empty(self.ncls)
        out[0] = tr[self.center].real
        out[1:1 + self.nh] = (tr[self.upper] + tr[self.lower]).real
        out[1 + self.nh:] = (1j * (tr[self.upper] - tr[self.lower])).real
        return out

    def combine_columns(self, G: np.ndarray) -> np.ndarray:
        """``G @ B`` where column i of B holds the class weights of basis i."""
        out = np.empty(G.shape[:-1] + (self.ncls,), dtype=complex)
        out[..., 0] = G[..., self.center]
        gu, gl = G[..., self.upper], G[..., self.lower]
        out[..., 1:1 + self.nh] = gu + gl
        out[..., 1 + self.nh:] = 1j * (gu - gl)
        return out

    def combine_rows(self, G: np.ndarray) -> np.ndarray:
        """``B^T @ G``."""
        return np.swapaxes(self.combine_columns(np.swapaxes(G, 0, -1)), 0, -1)

    def gram(self, G: np.ndarray) -> np.ndarray:
        """``Re(B^T G B)`` for a class-by-class complex Gram matrix."""
        M = self.combine_rows(self.combine_columns(G)).real
        return 0.5 * (M + M.T)


@lru_cache(maxsize=32)
def basis(N: int, L: int) -> HermitianBasis:
    return HermitianBasis(N, L)


def _fft_shape(N, L):
    return (2 * L - 1, 2 * N - 1, 2 * L - 1, 2 * N - 1)


def cross_gram(pairs, N: int, L: int) -> np.ndarray:
    """``sum_j tr(E_k X_j E_k' Y_j)`` over pairs ``(X_j, Y_j)`` of NL x NL matrices."""
    shape = _fft_shape(N, L)
    acc = None
    for X, Y in pairs:
        X4 = np.asarray(X).reshape(L, N, L, N)
        Yt = np.asarray(Y).reshape(L, N, L, N).transpose(2, 3, 0, 1)
        ax = (0, 1, 2, 3)
        prod = np.conj(np.fft.fftn(np.conj(X4), shape, ax)) * np.fft.fftn(Yt, shape, ax)
        acc = prod if acc is None else acc + prod
    corr = np.fft.ifftn(acc, axes=(0, 1, 2, 3))
    G4 = np.roll(corr, (L - 1, N - 1, L - 1, N - 1), axis=(0, 1, 2, 3))
    ncls = shape[0] * shape[1]
    return G4[:, :, ::-1, ::-1].reshape(ncls, ncls)


def outer_class_sum(u: np.ndarray, w: np.ndarray, N: int, L: int) -> np.ndarray:
    """Class sums of ``u w^T`` (flat, length ncls)."""
    return kernels.class_sum(np.outer(u, w), N, L).ravel()


@lru_cache(maxsize=32)
def _gather_maps(N, L):
    CI = kernels.class_index(N, L)
    n = N * L
    cols = np.broadcast_to(np.arange(n)[None, :], (n, n))
    rows = np.broadcast_to(np.arange(n)[:, None], (n, n))
    return CI, rows, cols


def row_gather(u: np.ndarray, N: int, L: int) -> np.ndarray:
    """``U[k, b] = u[a]`` for the unique row a with ``(a, b)`` in class k."""
    CI, rows, cols = _gather_maps(N, L)
    ncls = (2 * L - 1) * (2 * N - 1)
    U = np.zeros((ncls, N * L), dtype=complex)
    U[CI, cols] = np.asarray(u)[rows]
    return U


def col_gather(w: np.ndarray, N: int, L: int) -> np.ndarray:
    """``W[k, a] = w[b]`` for the unique column b with ``(a, b)`` in class k."""
    CI, rows, cols = _gather_maps(N, L)
    ncls = (2 * L - 1) * (2 * N - 1)
    W = np.zeros((ncls, N * L), dtype=complex)
    W[CI, rows] = np.asarray(w)[cols]
    return W


def sparse_gram(rows, cols, vals, X, Y, rows2=None, cols2=None, vals2=None) -> np.ndarray:
    """``Re tr(A_i X A_j Y)`` for sparse Hermitian bases.

    Basis i has entries ``A_i[rows[i, e], cols[i, e]] = vals[i, e]`` (zero
    padded along e). The second basis defaults to the first.
    """
    if rows2 is None:
        rows2, cols2, vals2 = rows, cols, vals
    Xg = X[cols[:, :, None, None], rows2[None, None, :, :]]
    Yg = Y[cols2[None, None, :, :], rows[:, :, None, None]]
    terms = vals[:, :, None, None] * vals2[None, None, :, :] * Xg * Yg
    return terms.sum(axis=(1, 3)).real
