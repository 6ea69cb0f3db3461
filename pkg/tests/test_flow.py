import pytest

from oracles import (
    brute_min_disjoint_total,
    brute_min_internal_cut,
    brute_vertex_connectivity,
)
from tourlink import InfeasibleSystemError, Tournament, random_tournament
from tourlink.flow import (
    audit_path_system,
    is_k_connected,
    local_connectivity,
    min_cost_disjoint_system,
    min_vertex_cut,
    vertex_connectivity,
)
from tourlink.tournament import mask_of

from test_tournament import three_cycle, transitive


class TestMinVertexCut:
    def test_direct_edge_uncuttable(self):
        cert = min_vertex_cut(three_cycle(), 0, 1)
        assert cert.uncuttable
        assert cert.cut == frozenset()
        assert cert.direct_path == (0, 1)
        assert cert.local_connectivity == 1

    def test_unreachable_pair(self):
        cert = min_vertex_cut(transitive(4), 3, 0)
        assert cert.cut == frozenset()
        assert cert.witness_paths == ()
        assert not cert.uncuttable

    def test_same_vertex_rejected(self):
        with pytest.raises(ValueError):
            min_vertex_cut(three_cycle(), 1, 1)

    def test_duality_and_brute_force_agreement(self):
        for seed in range(6):
            T = random_tournament(9, seed)
            for s in range(T.n):
                for t in range(T.n):
                    if s == t:
                        continue
                    cert = min_vertex_cut(T, s, t)
                    assert len(cert.witness_paths) == len(cert.cut)
                    brute = brute_min_internal_cut(T, s, t, max_size=4)
                    if len(cert.cut) <= 4:
                        assert brute == len(cert.cut)
                    else:
                        assert brute is None
                    for p in cert.witness_paths:
                        assert T.is_path(p)
                        assert p[0] == s and p[-1] == t
                    interiors = [set(p[1:-1]) for p in cert.witness_paths]
                    for i, a in enumerate(interiors):
                        for b in interiors[i + 1 :]:
                            assert not (a & b)

    def test_cut_actually_separates(self):
        T = random_tournament(10, 3)
        for s in range(T.n):
            for t in range(T.n):
                if s == t or T.has_edge(s, t):
                    continue
                cert = min_vertex_cut(T, s, t)
                allowed = T.full_mask & ~mask_of(cert.cut)
                assert not (T.reach_mask(1 << s, allowed) >> t) & 1


class TestConnectivity:
    def test_three_cycle(self):
        assert vertex_connectivity(three_cycle()) == 1

    def test_transitive_is_disconnected(self):
        assert vertex_connectivity(transitive(6)) == 0

    def test_matches_brute_force(self):
        for seed in range(10):
            for n in (4, 6, 8, 10):
                T = random_tournament(n, seed)
                assert vertex_connectivity(T) == brute_vertex_connectivity(T)

    def test_single_vertex(self):
        assert vertex_connectivity(random_tournament(1, 0)) == 0

    def test_is_k_connected_too_few_vertices(self):
        v = is_k_connected(three_cycle(), 3)
        assert not v.connected
        assert v.reason == "too few vertices"

    def test_is_k_connected_agrees_with_kappa(self):
        for seed in range(5):
            T = random_tournament(11, seed)
            kappa = vertex_connectivity(T)
            assert is_k_connected(T, kappa).connected
            bad = is_k_connected(T, kappa + 1)
            if T.n >= kappa + 2:
                assert not bad.connected

    def test_negative_verdict_carries_separator(self):
        T = random_tournament(12, 4)
        kappa = vertex_connectivity(T)
        v = is_k_connected(T, kappa + 1)
        assert not v.connected
        assert v.separator is not None and len(v.separator) <= kappa
        from oracles import strongly_connected

        assert not strongly_connected(T, v.separator)

    def test_positive_witnesses_are_valid(self):
        T = random_tournament(10, 8)
        k = vertex_connectivity(T)
        v = is_k_connected(T, k)
        assert v.connected
        for s, t, paths in v.pair_witnesses:
            assert len(paths) >= k
            interiors = []
            for p in paths:
                assert T.is_path(p) and p[0] == s and p[-1] == t
                interiors.append(set(p[1:-1]))
            for i, a in enumerate(interiors):
                for b in interiors[i + 1 :]:
                    assert not (a & b)

    def test_local_connectivity_counts_direct_edge(self):
        t = three_cycle()
        assert local_connectivity(t, 0, 1) == 1
        assert local_connectivity(t, 1, 0) == 1
        assert local_connectivity(transitive(4), 0, 3) == 3


class TestMinCostDisjointSystem:
    def test_single_edge(self):
        T = three_cycle()
        ps = min_cost_disjoint_system(T, [0], [1], count=1)
        assert ps.paths == ((0, 1),)
        assert ps.total_vertices() == 2

    def test_infeasible_carries_menger_separator(self):
        T = transitive(5)
        with pytest.raises(InfeasibleSystemError) as exc:
            min_cost_disjoint_system(T, [3, 4], [0, 1], count=2)
        sep = exc.value.separator
        assert len(sep) < 2
        allowed = T.full_mask & ~mask_of(sep)
        src = mask_of({3, 4} - sep)
        reach = T.reach_mask(src, allowed)
        for y in {0, 1} - sep:
            assert not (reach >> y) & 1

    def test_matches_exhaustive_optimum(self):
        checked = 0
        for seed in range(30):
            T = random_tournament(8, seed)
            sources = [0, 1]
            sinks = [6, 7]
            try:
                ps = min_cost_disjoint_system(T, sources, sinks, count=2)
            except InfeasibleSystemError:
                assert brute_min_disjoint_total(T, sources, sinks, count=2) is None
                continue
            best = brute_min_disjoint_total(T, sources, sinks, count=2)
            assert best == ps.total_vertices()
            checked += 1
        assert checked >= 20

    def test_special_sink_covered(self):
        for seed in range(10):
            T = random_tournament(9, seed + 100)
            try:
                ps = min_cost_disjoint_system(T, [0, 1, 2], [7, 8], special=6, count=3)
            except InfeasibleSystemError:
                continue
            ends = {p[-1] for p in ps.paths}
            assert ends == {6, 7, 8}
            assert not audit_path_system(T, ps)

    def test_forbidden_respected(self):
        for seed in range(10):
            T = random_tournament(10, seed + 50)
            try:
                ps = min_cost_disjoint_system(T, [0], [9], forbidden=[4, 5], count=1)
            except InfeasibleSystemError:
                continue
            assert not (set(ps.paths[0]) & {4, 5})

    def test_validation_errors(self):
        T = random_tournament(6, 1)
        with pytest.raises(ValueError):
            min_cost_disjoint_system(T, [0], [0], count=1)
        with pytest.raises(ValueError):
            min_cost_disjoint_system(T, [0, 1], [2], count=2)
        with pytest.raises(ValueError):
            min_cost_disjoint_system(T, [0], [2], forbidden=[2], count=1)

    def test_deterministic(self):
        T = random_tournament(12, 9)
        a = min_cost_disjoint_system(T, [0, 1, 2], [9, 10, 11], count=3)
        b = min_cost_disjoint_system(T, [0, 1, 2], [9, 10, 11], count=3)
        assert a == b

    def test_local_unimprovability(self):
        # No single path can be replaced by a shorter one that stays
        # disjoint from the rest of the system.
        for seed in range(10):
            T = random_tournament(10, seed)
            try:
                ps = min_cost_disjoint_system(T, [0, 1], [8, 9], count=2)
            except InfeasibleSystemError:
                continue
            for i, p in enumerate(ps.paths):
                others = set()
                for j, q in enumerate(ps.paths):
                    if j != i:
                        others.update(q)
                allowed = T.full_mask & ~mask_of(others)
                # BFS shortest path p[0] -> p[-1] in the residual
                dist = {p[0]: 0}
                frontier = [p[0]]
                while frontier and p[-1] not in dist:
                    nxt = []
                    for u in frontier:
                        for v in range(T.n):
                            if ((allowed >> v) & 1) and v not in dist and T.has_edge(u, v):
                                dist[v] = dist[u] + 1
                                nxt.append(v)
                    frontier = nxt
                assert dist[p[-1]] == len(p) - 1
