import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from nestchan.geometry import nested_array
from nestchan.recovery import (DecompositionError, least_squares_gains, md_vandermonde,
                               model_order, noise_floor)
from nestchan.signal import NoiseSpec, PathSet, synthesize_snapshots, vectorize
from nestchan.tbt import TbtDecomposition, TbtParams, from_atoms

from oracles import dense_tbt


def separated_atoms(rng, K, min_sep=0.05):
    """Random (theta, f) pairs with a minimum spacing in sin(theta) and f."""
    while True:
        u = rng.uniform(-0.8, 0.8, K)
        f = rng.uniform(0.0, 1.0, K)
        du = np.abs(u[:, None] - u[None, :]) + np.eye(K)
        df = np.abs((f[:, None] - f[None, :] + 0.5) % 1 - 0.5) + np.eye(K)
        if np.all(np.maximum(du, df) > min_sep):
            return np.arcsin(u), f, rng.uniform(0.5, 2.0, K)


def match_error(theta, f, p, dec):
    cost = np.abs(np.subtract.outer(theta, dec.theta)) + np.abs(
        (np.subtract.outer(f, dec.f) + 0.5) % 1 - 0.5)
    r, c = linear_sum_assignment(cost)
    return (np.max(np.abs(theta[r] - dec.theta[c])),
            np.max(np.abs((f[r] - dec.f[c] + 0.5) % 1 - 0.5)),
            np.max(np.abs(p[r] - dec.p[c])),
            cost[r, c].sum())


class TestNoiseFloorModelOrder:
    def test_scaled_identity(self):
        t = TbtParams.identity(4, 3, 3.0)
        assert noise_floor(t) == pytest.approx(3.0)
        assert model_order(t, 3.0) == 0

    def test_synthesized_floor(self):
        rng = np.random.default_rng(0)
        th, f, p = separated_atoms(rng, 2)
        t = from_atoms(th, f, p, 0.7, 8, 4)
        assert noise_floor(t) == pytest.approx(0.7, abs=1e-10)
        assert noise_floor(from_atoms(th, f, p, 0.0, 8, 4)) == pytest.approx(0.0, abs=1e-10)

    def test_order_over_rank(self):
        rng = np.random.default_rng(1)
        th, f, p = separated_atoms(rng, 7)
        assert model_order(from_atoms(th, f, p, 0.0, 32, 5)) == 7

    def test_order_threshold_sensitivity(self):
        rng = np.random.default_rng(2)
        th, f, _ = separated_atoms(rng, 3)
        t = from_atoms(th, f, [1.0, 1.0, 1e-8], 0.0, 16, 4)
        assert model_order(t) == 2
        assert model_order(t, tau=1e-12) == 3

    def test_negative_floor_clamped(self):
        c = np.zeros((1, 3), complex)
        c[0, 0] = c[0, 2] = 1.0  # eigenvalues -1, 1
        assert noise_floor(TbtParams(2, 1, c)) == 0.0


class TestVandermonde:
    def test_single_atom_origin(self):
        dec = md_vandermonde(from_atoms([0.0], [0.0], [1.0], 0.0, 6, 3), 1)
        assert dec.theta[0] == pytest.approx(0.0, abs=1e-10)
        assert dec.f[0] == pytest.approx(0.0, abs=1e-10) or dec.f[0] == pytest.approx(1.0, abs=1e-10)
        assert dec.p[0] == pytest.approx(1.0, abs=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(3, 16), st.integers(2, 6), st.integers(0, 2**32 - 1))
    def test_exact_recovery_and_pairing(self, N, L, seed):
        rng = np.random.default_rng(seed)
        K = int(rng.integers(1, min(N, L) + 1))
        th, f, p = separated_atoms(rng, K)
        sigma = float(rng.uniform(0, 0.5))
        t = TbtParams(N, L, from_atoms(th, f, p, sigma, N, L).coeffs)
        dec = md_vandermonde(t, K)
        e_th, e_f, e_p, cost = match_error(th, f, p, dec)
        assert max(e_th, e_f, e_p) < 1e-7
        assert cost < 1e-7
        assert abs(dec.sigma - sigma) < 1e-9
        assert dec.residual <= 1e-6
        assert np.all(dec.p > 0) and dec.sigma >= 0
        # reconstruction against the dense Kronecker oracle
        T_hat = dense_tbt(dec.theta, dec.f, dec.p, dec.sigma, N, L)
        T = dense_tbt(th, f, p, sigma, N, L)
        assert np.linalg.norm(T_hat - T) / np.linalg.norm(T) < 1e-6

    def test_over_rank_fig3_size(self):
        rng = np.random.default_rng(7)
        th, f, p = separated_atoms(rng, 7)
        dec = md_vandermonde(from_atoms(th, f, p, 0.0, 32, 5), 7)
        assert max(match_error(th, f, p, dec)[:3]) < 1e-8

    def test_errors(self):
        t = from_atoms([0.1, 0.2], [0.1, 0.2], [1, 1], 0.0, 4, 2)
        with pytest.raises(DecompositionError):
            md_vandermonde(t, 0)
        with pytest.raises(DecompositionError, match="shift-invariance"):
            md_vandermonde(t, 5)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_residual_surfaced(self):
        rng = np.random.default_rng(3)
        c = rng.standard_normal((5, 9)) + 1j * rng.standard_normal((5, 9))
        c = 0.5 * (c + c[::-1, ::-1].conj())
        c[2, 4] += 20.0
        with pytest.raises(DecompositionError, match="residual") as info:
            md_vandermonde(TbtParams(5, 3, c), 3, tol=1e-6)
        assert isinstance(info.value.decomposition, TbtDecomposition)


class TestGains:
    def test_exact_atoms_noiseless(self):
        rng = np.random.default_rng(4)
        s = nested_array(32, 11)
        th, f, _ = separated_atoms(rng, 3)
        g = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        y = vectorize(synthesize_snapshots(PathSet(th, f, g), s, 3, NoiseSpec(0.0)))
        g_hat, res = least_squares_gains(y, s, 3, TbtDecomposition(th, f, np.ones(3)))
        np.testing.assert_allclose(g_hat, g, atol=1e-10)
        assert res < 1e-10

    def test_trivial_scaling(self):
        s = nested_array(8, 4)
        g, _ = least_squares_gains(2 * np.ones(8), s, 2, TbtDecomposition([0.0], [0.0], [1.0]))
        assert g[0] == pytest.approx(2.0)

    def test_residual_shrinks_toward_truth(self):
        rng = np.random.default_rng(5)
        s = nested_array(16, 6)
        th, f, _ = separated_atoms(rng, 2)
        y = vectorize(synthesize_snapshots(PathSet(th, f, [1.0, 0.7j]), s, 4, NoiseSpec(0.0)))
        res = []
        for off in (3e-2, 1e-2, 3e-3, 1e-3, 0.0):
            g, r = least_squares_gains(y, s, 4, TbtDecomposition(th + off, f + off, np.ones(2)))
            assert np.all(np.isfinite(g))
            res.append(r)
        assert all(a >= b for a, b in zip(res, res[1:]))
        assert res[-2] > 0 and res[-1] < 1e-10

    def test_rank_deficiency(self):
        s = nested_array(8, 4)
        atoms = TbtDecomposition([0.1, 0.1], [0.3, 0.3], [1.0, 1.0])
        with pytest.raises(DecompositionError, match="condition"):
            least_squares_gains(np.ones(8), s, 2, atoms)
