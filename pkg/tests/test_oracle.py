import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from indset import errors, oracle
from indset.graph import Graph, complement, complete_graph, cycle_graph, path_graph, set_weights, star_graph
from indset.generate import erdos_renyi, random_udg

from conftest import brute_independent_sets, brute_mwis, brute_z


def members(sets):
    return [s.members for s in sets]


class TestEnumeration:
    def test_p3(self, p3):
        got = members(oracle.enumerate_independent_sets(p3))
        assert sorted(got) == sorted([(), (0,), (1,), (2,), (0, 2)])
        assert got == [(), (0,), (0, 2), (1,), (2,)]  # lexicographic

    def test_k3(self, k3):
        assert len(list(oracle.enumerate_independent_sets(k3))) == 4

    def test_empty_graph(self):
        assert len(list(oracle.enumerate_independent_sets(Graph(3, [])))) == 8

    def test_cap(self):
        with pytest.raises(errors.SizeCapError):
            list(oracle.enumerate_independent_sets(Graph(30, []), cap=24))

    def test_maximal(self, p3):
        assert members(oracle.enumerate_maximal_independent_sets(p3)) == [(0, 2), (1,)]


class TestMWIS:
    def test_p3_uniform(self, p3):
        sol = oracle.mwis_exact(p3)
        assert sol.set.members == (0, 2) and sol.objective == 2 and sol.optimal

    def test_p3_weighted(self, p3):
        sol = oracle.mwis_exact(set_weights(p3, [1, 5, 1]))
        assert sol.set.members == (1,) and sol.objective == 5

    def test_empty_graph(self):
        sol = oracle.mwis_exact(Graph(4, []))
        assert sol.set.members == (0, 1, 2, 3) and sol.objective == 4

    def test_zero_vertices(self):
        assert oracle.mwis_exact(Graph(0, [])).objective == 0

    def test_lexicographic_tie_break(self):
        # C4 has optima {0,2} and {1,3}
        assert oracle.mwis_exact(cycle_graph(4)).set.members == (0, 2)
        assert oracle.mwis_exact(Graph(2, [(0, 1)])).set.members == (0,)

    def test_rejects_nonpositive_weights(self, p3):
        with pytest.warns(UserWarning):
            g = set_weights(p3, [1, 0, 1])
        with pytest.raises(errors.InputError):
            oracle.mwis_exact(g)

    def test_cap(self):
        with pytest.raises(errors.SizeCapError):
            oracle.mwis_exact(Graph(61, []))

    def test_time_limit_returns_incumbent(self):
        g = erdos_renyi(60, 0.1, np.random.default_rng(0))
        sol = oracle.mwis_exact(g, time_limit=0.0)
        assert sol.set.members is not None
        assert g.is_independent_mask(sol.set.mask())

    def test_larger_instance_fast(self):
        g = erdos_renyi(60, 0.3, np.random.default_rng(1))
        t0 = time.perf_counter()
        sol = oracle.mwis_exact(g)
        assert time.perf_counter() - t0 < 10
        assert oracle.verify(g, sol)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 11), st.floats(0.1, 0.9), st.integers(0, 2**32 - 1), st.booleans())
    def test_matches_brute_force(self, n, p, seed, weighted):
        rng = np.random.default_rng(seed)
        g = erdos_renyi(n, p, rng)
        if weighted:
            g = set_weights(g, rng.integers(1, 6, n).astype(float))
        sol = oracle.mwis_exact(g)
        assert sol.objective == brute_mwis(g)
        assert oracle.verify(g, sol)
        # the returned optimum is the lexicographically smallest one
        best = [s for s in brute_independent_sets(g) if sum(g.weights[v] for v in s) == sol.objective]
        assert list(sol.set.members) == min(best)


class TestPartitionFunction:
    def test_p3(self, p3):
        res = oracle.partition_function(p3, 1.0)
        assert res.z == 5 and res.count == 5 and res.count_mode

    @pytest.mark.parametrize("n", range(1, 21))
    def test_paths_fibonacci(self, n):
        fib = [0, 1]
        while len(fib) < n + 3:
            fib.append(fib[-1] + fib[-2])
        res = oracle.partition_function(path_graph(n))
        assert res.count == fib[n + 2]
        assert isinstance(res.count, int)

    def test_single_vertex(self):
        assert oracle.partition_function(Graph(1, []), 0.25).z == pytest.approx(1.25, abs=1e-15)

    def test_per_vertex_activities(self, p3):
        nu = [0.5, 2.0, 3.0]
        assert oracle.partition_function(p3, nu).z == pytest.approx(brute_z(p3, nu), rel=1e-14)

    def test_rejects_negative_activity(self, p3):
        with pytest.raises(errors.InputError):
            oracle.partition_function(p3, -1.0)

    def test_memo_limit_does_not_change_value(self):
        g = random_udg(18, 1.0, 2.0, np.random.default_rng(2))
        full = oracle.partition_function(g, 0.7).z
        tiny = oracle.partition_function(g, 0.7, memo_limit=3).z
        assert tiny == pytest.approx(full, rel=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 10), st.integers(0, 2**32 - 1), st.sampled_from([0.3, 1.0, 3.0]))
    def test_matches_enumeration(self, n, seed, nu):
        g = erdos_renyi(n, 0.4, np.random.default_rng(seed))
        assert oracle.partition_function(g, nu).z == pytest.approx(brute_z(g, nu), rel=1e-12)


class TestExpectation:
    def test_single_vertex(self):
        assert oracle.expectation(Graph(1, []), 1.0, len) == pytest.approx(0.5)

    def test_p3_size(self, p3):
        # sizes 0,1,1,1,2 over five equally weighted sets
        assert oracle.expectation(p3, 1.0, len) == pytest.approx(1.0)

    def test_p3_weight(self, p3):
        g = set_weights(p3, [1, 5, 1])
        assert oracle.expectation(g, 1.0, lambda s: s.weight) == pytest.approx(9 / 5)

    def test_normalization(self):
        g = erdos_renyi(8, 0.3, np.random.default_rng(4))
        assert oracle.expectation(g, 1.7, lambda s: 1.0) == pytest.approx(1.0)


class TestDominating:
    def test_star(self):
        g = star_graph(3)
        assert oracle.mds_exact(g).set.members == (0,)
        assert oracle.mcds_exact(g).set.members == (0,)
        assert oracle.min_maximal_is_exact(g).set.members == (0,)

    def test_p5(self):
        sol = oracle.mds_exact(path_graph(5))
        assert len(sol.set) == 2
        assert oracle.verify(path_graph(5), sol)

    def test_k3(self, k3):
        assert len(oracle.mds_exact(k3).set) == 1

    def test_mcds_requires_connected(self):
        with pytest.raises(errors.InputError):
            oracle.mcds_exact(Graph(2, []))

    def test_mcds_path(self):
        assert oracle.mcds_exact(path_graph(5)).set.members == (1, 2, 3)


class TestChromatic:
    @pytest.mark.parametrize("g, k", [(complete_graph(3), 3), (path_graph(3), 2), (cycle_graph(5), 3),
                                      (Graph(3, []), 1), (Graph(0, []), 0)])
    def test_values(self, g, k):
        got, colors = oracle.chromatic_number_exact(g)
        assert got == k
        assert oracle.is_proper_coloring(g, colors)

    def test_cap(self):
        with pytest.raises(errors.SizeCapError):
            oracle.chromatic_number_exact(Graph(13, []))


class TestDualities:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 10), st.integers(0, 2**32 - 1))
    def test_gallai_and_clique(self, n, seed):
        g = erdos_renyi(n, 0.3, np.random.default_rng(seed))
        mis = oracle.mis_exact(g)
        cover = [v for v in range(n) if v not in mis.set.members]
        assert oracle.verify(g, oracle.ExactSolution("vcover", oracle.VertexSet.of(g, cover), len(cover), True, 0))
        assert len(mis.set) + len(cover) == n
        assert oracle.mis_exact(complement(g)).objective == max(
            len(s) for s in brute_independent_sets(complement(g)))


def test_to_dict(p3):
    d = oracle.mwis_exact(p3).to_dict()
    assert d["set"] == [0, 2] and d["objective"] == 2.0 and d["problem"] == "mwis"
