import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nestchan.geometry import (MRA_TABLE, GeometryError, SelectionSet, build, coprime_array,
                               coprime_for_count, difference_coarray, expanded_selector, mra,
                               nested_array, nested_split, parse_indices, selection_operator,
                               ula_prefix)

from oracles import coarray_lags, min_redundancy_aperture, selector


@st.composite
def selection_sets(draw, max_n=40):
    N = draw(st.integers(1, max_n))
    rest = draw(st.sets(st.integers(2, N), max_size=N - 1)) if N > 1 else set()
    return SelectionSet(tuple([1] + sorted(rest)), N)


class TestSelectionSet:
    def test_rejects_bad_sets(self):
        with pytest.raises(GeometryError):
            SelectionSet((2, 3), 4)
        with pytest.raises(GeometryError):
            SelectionSet((1, 3, 3), 4)
        with pytest.raises(GeometryError):
            SelectionSet((1, 5), 4)
        with pytest.raises(GeometryError):
            SelectionSet((), 4)

    def test_json_roundtrip(self):
        s = nested_array(32, 11)
        assert json.loads(s.to_json()) == list(s.indices)
        assert SelectionSet.from_json(s.to_json(), 32) == s

    def test_parse_indices_forms(self):
        ref = SelectionSet((1, 2, 5, 7), 7)
        assert parse_indices("1,2,5,7", 7) == ref
        assert parse_indices("[1, 2, 5, 7]", 7) == ref
        assert parse_indices([1, 2, 5, 7], 7) == ref
        with pytest.raises(GeometryError):
            parse_indices("1,x", 7)


class TestNested:
    def test_paper_layout(self):
        assert nested_array(32, 11).indices == (1, 2, 3, 4, 5, 6, 7, 8, 16, 24, 32)

    def test_trivial(self):
        assert nested_array(2, 2).indices == (1, 2)

    @pytest.mark.parametrize("N,M", [(6, 4), (14, 6), (32, 11), (20, 7), (64, 11)])
    def test_split_rule_by_enumeration(self, N, M):
        cands = [(n1, M - n1) for n1 in range(1, M) if (M - n1 + 1) * n1 <= N]
        best = max(cands, key=lambda c: ((c[1] + 1) * c[0], c[0]))
        assert nested_split(N, M) == best
        s = nested_array(N, M)
        lags = coarray_lags(s.indices)
        span = min(N, (best[1] + 1) * best[0]) - 1
        assert set(range(span + 1)) <= set(lags)

    def test_n6_m4_contiguous(self):
        s = nested_array(6, 4)
        assert difference_coarray(s).contiguous_span == 5

    def test_infeasible_reports_aperture(self):
        with pytest.raises(GeometryError, match="N >="):
            nested_split(2, 3)
        with pytest.raises(GeometryError):
            nested_array(4, 1)


class TestMRA:
    def test_paper_example(self):
        assert mra(4, 7).indices == (1, 2, 5, 7)
        assert set(range(7)) <= set(difference_coarray(mra(4, 7)).lags)

    def test_trivial(self):
        assert mra(2, 2).indices == (1, 2)

    def test_m6(self):
        s = mra(6, 14)
        assert difference_coarray(s).contiguous_span == 13

    @pytest.mark.parametrize("M", [2, 3, 4, 5, 6])
    def test_table_is_minimal(self, M):
        # exhaustive search for the shortest hole-free aperture
        idx = MRA_TABLE[M]
        assert idx[-1] == min_redundancy_aperture(M)
        assert difference_coarray(idx).hole_free

    def test_table_entries_hole_free(self):
        for M, idx in MRA_TABLE.items():
            assert len(idx) == M
            assert difference_coarray(idx).hole_free, M

    def test_errors(self):
        with pytest.raises(GeometryError):
            mra(11, 64)
        with pytest.raises(GeometryError):
            mra(6, 10)


class TestCoprime:
    def test_layout_union(self):
        # {1, 4} U {1, 3, 5, 7, 9, 11}
        assert coprime_array(2, 3, 11).indices == (1, 3, 4, 5, 7, 9, 11)

    def test_overflow_is_error(self):
        with pytest.raises(GeometryError):
            coprime_array(2, 3, 10)

    def test_trivial(self):
        assert coprime_array(1, 1, 2).indices == (1, 2)

    def test_has_holes(self):
        s = coprime_array(3, 4, 22)
        assert len(s) == 10
        assert not difference_coarray(s).hole_free

    def test_non_coprime(self):
        with pytest.raises(GeometryError):
            coprime_array(2, 4, 30)

    def test_count_variant(self):
        s = coprime_for_count(6, 14)
        assert len(s) == 6 and s.indices[-1] <= 14


class TestUla:
    def test_examples(self):
        assert ula_prefix(4, 7).indices == (1, 2, 3, 4)
        assert ula_prefix(1, 5).indices == (1,)
        assert ula_prefix(7, 7).indices == tuple(range(1, 8))

    def test_build_dispatch(self):
        assert build("na", 32, 11) == nested_array(32, 11)
        assert build("ula", 7, 4) == ula_prefix(4, 7)
        with pytest.raises(GeometryError):
            build("planar", 7, 4)


class TestCoarray:
    def test_paper_examples(self):
        r = difference_coarray(SelectionSet((1, 2, 5, 7), 7))
        assert r.lags == tuple(range(7)) and r.contiguous_span == 6 and r.holes == ()
        assert difference_coarray(SelectionSet((1,), 1)).lags == (0,)
        assert difference_coarray(nested_array(32, 11)).contiguous_span == 31

    @settings(max_examples=200, deadline=None)
    @given(selection_sets())
    def test_matches_brute_force(self, s):
        r = difference_coarray(s)
        lags = coarray_lags(s.indices)
        assert list(r.lags) == lags
        span = 0
        while span + 1 in lags:
            span += 1
        assert r.contiguous_span == span
        assert list(r.holes) == [h for h in range(max(lags) + 1) if h not in lags]
        assert 0 in r.lags and r.contiguous_span <= max(r.lags)


class TestSelectors:
    def test_small_examples(self):
        s = SelectionSet((1, 3), 3)
        np.testing.assert_array_equal(selection_operator(s).apply(np.array([1.0, 2.0, 3.0])), [1.0, 3.0])
        g = expanded_selector(SelectionSet((1, 2), 2), 2)
        np.testing.assert_array_equal(g.apply(np.arange(1.0, 5.0)), np.arange(1.0, 5.0))
        np.testing.assert_array_equal(expanded_selector(s, 1).dense(), selection_operator(s).dense())

    @settings(max_examples=60, deadline=None)
    @given(selection_sets(max_n=16), st.integers(1, 4))
    def test_rows_orthonormal_and_dense_match(self, s, L):
        W = selection_operator(s).dense()
        np.testing.assert_array_equal(W @ W.T, np.eye(s.M))
        G = expanded_selector(s, L)
        D = G.dense()
        np.testing.assert_array_equal(D, selector(s.indices, s.N, L))
        np.testing.assert_array_equal(D @ D.T, np.eye(s.M * L))
        x = np.arange(s.N * L) + 1j
        np.testing.assert_array_equal(G.apply(x), D @ x)
        v = np.arange(s.M * L) * 1.0
        np.testing.assert_array_equal(G.adjoint(v), D.T @ v)
