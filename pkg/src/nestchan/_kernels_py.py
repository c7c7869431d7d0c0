"""Pure-numpy Toeplitz-block-Toeplitz kernels (fallback for ``_kernels``).

Coefficient grids have shape ``(2L-1, 2N-1)`` with ``grid[d+L-1, m+N-1]``
holding the lag-``(d, m)`` coefficient. Matrix rows are snapshot-major:
row ``i*N + p`` is snapshot ``i``, antenna ``p``.
"""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _class_index(N, L):
    t = np.arange(N * L)
    i, p = np.divmod(t, N)
    idx = (i[:, None] - i[None, :] + L - 1) * (2 * N - 1) + (p[:, None] - p[None, :] + N - 1)
    idx.setflags(write=False)
    return idx


@lru_cache(maxsize=256)
def _selected_index(N, L, cols):
    rows = (np.arange(L)[:, None] * N + np.asarray(cols)[None, :]).ravel()
    idx = _class_index(N, L)[np.ix_(rows, rows)]
    idx.setflags(write=False)
    return idx


def class_index(N, L):
    return _class_index(int(N), int(L))


def selected_class_index(cols, N, L):
    return _selected_index(int(N), int(L), tuple(int(c) for c in cols))


def _bincount_complex(idx, M, size):
    flat = idx.ravel()
    M = np.asarray(M)
    if np.iscomplexobj(M):
        return (np.bincount(flat, M.real.ravel(), size)
                + 1j * np.bincount(flat, M.imag.ravel(), size))
    return np.bincount(flat, M.ravel(), size).astype(complex)


def materialize(grid, N, L):
    return np.asarray(grid).ravel()[class_index(N, L)]


def class_sum(M, N, L):
    size = (2 * L - 1) * (2 * N - 1)
    return _bincount_complex(class_index(N, L), M, size).reshape(2 * L - 1, 2 * N - 1)


def selected_materialize(grid, cols, N, L):
    return np.asarray(grid).ravel()[selected_class_index(cols, N, L)]


def selected_class_sum(M, cols, N, L):
    size = (2 * L - 1) * (2 * N - 1)
    idx = selected_class_index(cols, N, L)
    return _bincount_complex(idx, M, size).reshape(2 * L - 1, 2 * N - 1)
