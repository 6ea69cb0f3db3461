import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import lds_dp, lis_dp
from tourlink import DeterministicRng, StructuredFailure, Tournament, random_tournament
from tourlink.chains import (
    DECREASING,
    INCREASING,
    OUT_DOMINANT,
    audit_chain,
    audit_nearly_regular,
    multi_order_monotone_subset,
    nearly_regular_subset,
    nearly_regular_window_subset,
)

from test_tournament import transitive


def rotational(n):
    """Circulant tournament on odd n: u -> u+1, ..., u+(n-1)/2 (mod n)."""
    assert n % 2 == 1
    half = (n - 1) // 2
    rows = [
        [
            None if i == j else (1 if ((j - i) % n) <= half and ((j - i) % n) >= 1 else 0)
            for j in range(n)
        ]
        for i in range(n)
    ]
    return Tournament.from_matrix(n, rows)


class TestNearlyRegularSubset:
    def test_rotational_all_qualify(self):
        t = rotational(11)
        w = nearly_regular_subset(t)
        assert w.side == OUT_DOMINANT
        assert len(w.members) == 11
        assert not audit_nearly_regular(t, w)

    def test_transitive_20_matches_degree_scan(self):
        t = transitive(20)
        w = nearly_regular_subset(t)
        expected = set()
        for v in range(20):
            dout, din = t.degrees()[v]
            if w.side == OUT_DOMINANT:
                if din <= dout <= 4 * din:
                    expected.add(v)
            else:
                if dout <= din <= 4 * dout:
                    expected.add(v)
        assert w.members == frozenset(expected)
        assert not audit_nearly_regular(t, w)

    def test_random_100_meets_floor(self):
        t = random_tournament(100, 17)
        w = nearly_regular_subset(t)
        assert len(w.members) >= math.ceil(100 / 10)
        assert not w.small_instance
        assert not audit_nearly_regular(t, w)

    def test_small_instance_flagged(self):
        w = nearly_regular_subset(random_tournament(5, 0))
        assert w.small_instance

    def test_n2_has_no_qualifying_vertices(self):
        w = nearly_regular_subset(random_tournament(2, 0))
        assert w.small_instance
        assert w.members == frozenset()


class TestWindowSubset:
    def test_t1_trivial(self):
        t = random_tournament(30, 2)
        w = nearly_regular_window_subset(t, 1)
        assert len(w.members) == 1
        assert not audit_nearly_regular(t, w)

    def test_rotational_single_bucket(self):
        t = rotational(31)
        w = nearly_regular_window_subset(t, 3)
        assert len(w.members) == 3
        assert w.center_m == 15
        assert not audit_nearly_regular(t, w)

    def test_random_200_window_check(self):
        t = random_tournament(200, 5)
        w = nearly_regular_window_subset(t, 5)
        assert len(w.members) == 5
        for v in w.members:
            assert w.center_m - 50 <= t.in_degree(v) <= w.center_m + 50
        assert not audit_nearly_regular(t, w)

    def test_spread_bound(self):
        for seed in range(10):
            t = random_tournament(120, seed)
            w = nearly_regular_window_subset(t, 4)
            degs = [t.in_degree(v) for v in w.members]
            assert max(degs) - min(degs) <= 20 * 4

    def test_t_exceeds_n(self):
        with pytest.raises(ValueError):
            nearly_regular_window_subset(random_tournament(5, 1), 6)

    def test_shortfall_is_structured(self):
        # n=2 has no qualifying vertices at all
        with pytest.raises(StructuredFailure):
            nearly_regular_window_subset(random_tournament(2, 1), 1)


class TestMultiOrderMonotone:
    def test_single_ordering_returns_everything_sorted(self):
        items = [3, 1, 4, 1 + 4, 9, 2, 6]
        w = multi_order_monotone_subset(items, [sorted(items)])
        assert w.items == tuple(sorted(items))
        assert w.directions == (INCREASING,)

    def test_two_identical_orderings_keep_all(self):
        items = list(range(16))
        w = multi_order_monotone_subset(items, [items, items])
        assert len(w.items) == 16
        assert w.directions == (INCREASING, INCREASING)

    def test_reversed_second_ordering_keeps_all_decreasing(self):
        items = list(range(10))
        w = multi_order_monotone_subset(items, [items, list(reversed(items))])
        assert len(w.items) == 10
        assert w.directions[1] == DECREASING

    def test_seeded_random_permutation_floor(self):
        rng = DeterministicRng(99)
        items = list(range(16))
        perm = rng.shuffle(list(items))
        w = multi_order_monotone_subset(items, [items, perm])
        assert len(w.items) >= 4
        assert not audit_chain(w, [items, perm])

    def test_not_total_rejected(self):
        with pytest.raises(ValueError, match="not total"):
            multi_order_monotone_subset([1, 2, 3], [[1, 2]])

    def test_duplicate_in_ordering_rejected(self):
        with pytest.raises(ValueError, match="duplicates"):
            multi_order_monotone_subset([1, 2], [[1, 1, 2]])

    def test_floor_many_seeds(self):
        for n, ell in ((16, 2), (81, 3)):
            items = list(range(n))
            for seed in range(25):
                rng = DeterministicRng(seed)
                orderings = [items] + [rng.shuffle(list(items)) for _ in range(ell - 1)]
                w = multi_order_monotone_subset(items, orderings)
                assert len(w.items) >= math.ceil(n ** (1 / 2 ** (ell - 1)))
                assert not audit_chain(w, orderings)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(), unique=True, min_size=1, max_size=64), st.randoms())
    def test_per_stage_optimality_matches_dp(self, items, rnd):
        # the per-ordering extraction is a true longest monotone subsequence
        perm = list(items)
        rnd.shuffle(perm)
        w = multi_order_monotone_subset(items, [sorted(items), perm])
        ranks = {item: i for i, item in enumerate(perm)}
        seq = [ranks[it] for it in sorted(items)]
        assert len(w.items) == max(lis_dp(seq), lds_dp(seq))
