from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from indset import errors, postprocess
from indset.generate import random_udg
from indset.graph import Graph, classify_set, complete_graph, path_graph, star_graph
from indset.oracle import mds_exact, mis_exact
from indset.rng import make_rng


class TestComplete:
    def test_p3_from_empty(self, p3):
        outs = {postprocess.complete_to_maximal(p3, [], seed).members for seed in range(40)}
        assert outs == {(1,), (0, 2)}

    def test_forced(self, p3):
        for seed in range(5):
            assert postprocess.complete_to_maximal(p3, [0], seed).members == (0, 2)

    def test_empty_graph(self):
        assert postprocess.complete_to_maximal(Graph(4, []), [], 0).members == (0, 1, 2, 3)

    def test_rejects_dependent_input(self, p3):
        with pytest.raises(errors.RepairError):
            postprocess.complete_to_maximal(p3, [0, 1], 0)

    def test_trace(self, p3):
        out, tr = postprocess.complete_to_maximal(p3, [0], 0, trace=True)
        assert list(tr.added) == [2] and tr.objective_after == 2.0


class TestRepair:
    def test_triangle(self, k3):
        assert len(postprocess.repair_to_independent(k3, [0, 1, 2], 0)) == 1

    def test_fixed_point(self, p3):
        assert postprocess.repair_to_independent(p3, [0, 2], 0).members == (0, 2)

    def test_p3_pair_is_fair(self, p3):
        c = Counter(postprocess.repair_to_independent(p3, [0, 1], s).members for s in range(2000))
        assert set(c) == {(0,), (1,)}
        assert c[(0,)] / 2000 == pytest.approx(0.5, abs=0.05)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_never_grows(self, seed):
        rng = np.random.default_rng(seed)
        g = random_udg(10, 1.0, 2.5, rng)
        s = [v for v in range(g.n) if rng.random() < 0.6]
        out, tr = postprocess.repair_to_independent(g, s, rng, trace=True)
        assert classify_set(g, out).independent
        assert len(out) <= len(s) and len(tr.removed) <= len(s)


class TestConnect:
    def test_star(self):
        assert postprocess.connect_dominating(star_graph(3), [0]).members == (0,)

    def test_p5(self):
        assert postprocess.connect_dominating(path_graph(5), [1, 3]).members == (1, 2, 3)

    def test_p7(self):
        assert postprocess.connect_dominating(path_graph(7), [1, 3, 5]).members == (1, 2, 3, 4, 5)

    def test_rejects_non_dominating(self):
        with pytest.raises(errors.InputError):
            postprocess.connect_dominating(path_graph(5), [0])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_bounds(self, seed):
        g = random_udg(12, 1.0, 3.0, np.random.default_rng(seed), connected=True)
        d = mds_exact(g).set
        c = postprocess.connect_dominating(g, d)
        f = classify_set(g, c)
        assert f.dominating and f.connected
        assert len(d) <= len(c) <= 3 * len(d)


class TestImmunize:
    def test_full_budget(self, p3):
        s, score, _ = postprocess.immunize_budget(p3, 3)
        assert s.members == (0, 1, 2) and score == 0

    def test_p3_one(self, p3):
        s, score, _ = postprocess.immunize_budget(p3, 1)
        assert s.members == (1,) and score == 0

    def test_triangle_one(self, k3):
        s, score, _ = postprocess.immunize_budget(k3, 1, seed=0)
        assert len(s) == 1
        assert score == pytest.approx(2.0, abs=1e-8)

    def test_laplacian_known_spectra(self):
        assert postprocess.laplacian_lambda_max(complete_graph(4)) == pytest.approx(4.0, abs=1e-7)
        assert postprocess.laplacian_lambda_max(star_graph(3)) == pytest.approx(4.0, abs=1e-7)
        assert postprocess.laplacian_lambda_max(Graph(3, [])) == 0.0

    def test_laplacian_matches_numpy(self):
        g = random_udg(12, 1.0, 2.0, np.random.default_rng(7))
        lap = np.zeros((g.n, g.n))
        for u, v in g.edges:
            lap[u, v] = lap[v, u] = -1
        np.fill_diagonal(lap, -lap.sum(axis=1))
        assert postprocess.laplacian_lambda_max(g) == pytest.approx(np.linalg.eigvalsh(lap)[-1], rel=1e-6)

    def test_score_nonincreasing_in_budget(self):
        g = random_udg(12, 1.0, 2.0, np.random.default_rng(3))
        tau = g.n - len(mis_exact(g).set)
        scores = [postprocess.immunize_budget(g, k, seed=5)[1] for k in range(0, g.n + 1)]
        assert all(a >= b - 1e-9 for a, b in zip(scores, scores[1:]))
        assert all(s == 0 for s in scores[tau:])

    def test_budget_range(self, p3):
        with pytest.raises(errors.InputError):
            postprocess.immunize_budget(p3, 4)
