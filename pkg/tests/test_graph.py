import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from indset import errors
from indset.generate import chain, erdos_renyi, lattice, random_udg
from indset.graph import (
    Graph,
    VertexSet,
    build_unit_disk_graph,
    classify_set,
    complement,
    component_masks,
    complete_graph,
    cycle_graph,
    delete_vertices,
    graph_from_dict,
    graph_to_dict,
    induced,
    is_connected,
    load_graph,
    path_graph,
    save_graph,
    set_weights,
    star_graph,
)
from indset.oracle import enumerate_maximal_independent_sets


@st.composite
def graphs(draw, max_n=10):
    n = draw(st.integers(0, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    return Graph(n, chosen)


class TestUnitDisk:
    def test_path_from_collinear_points(self):
        g = build_unit_disk_graph([(0, 0), (1, 0), (2, 0)], 1.2)
        assert g.edges == ((0, 1), (1, 2))
        assert g.kind == "unitdisk"

    def test_far_points_have_no_edge(self):
        assert build_unit_disk_graph([(0, 0), (3, 0)], 1.0).edges == ()

    def test_boundary_is_inclusive(self):
        assert build_unit_disk_graph([(0, 0), (1, 0)], 1.0).edges == ((0, 1),)

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
    def test_rejects_bad_radius(self, bad):
        with pytest.raises(errors.InputError):
            build_unit_disk_graph([(0, 0)], bad)

    def test_rejects_nonfinite_points(self):
        with pytest.raises(errors.InputError):
            build_unit_disk_graph([(0, 0), (math.nan, 1)], 1.0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_permuting_points_permutes_graph(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0, 3, size=(8, 2))
        perm = rng.permutation(8)
        g = build_unit_disk_graph(pts, 1.0)
        h = build_unit_disk_graph(pts[perm], 1.0)
        # vertex k of h is vertex perm[k] of g
        mapped = {tuple(sorted((int(perm[a]), int(perm[b])))) for a, b in h.edges}
        assert mapped == set(g.edges)

    def test_unitdisk_edges_must_match_rule(self):
        with pytest.raises(errors.InputError):
            Graph(2, [], coords=[(0, 0), (0.5, 0)], radius=1.0, kind="unitdisk")


class TestValidation:
    def test_self_loop(self):
        with pytest.raises(errors.InputError):
            Graph(2, [(1, 1)])

    def test_duplicate_edge(self):
        with pytest.raises(errors.InputError):
            Graph(3, [(0, 1), (1, 0)])

    def test_out_of_range(self):
        with pytest.raises(errors.InputError):
            Graph(2, [(0, 2)])

    def test_nonfinite_weight(self):
        with pytest.raises(errors.InputError):
            Graph(2, [], [1.0, math.inf])


class TestComplement:
    def test_triangle_becomes_empty(self, k3):
        assert complement(k3).edges == ()

    def test_empty_becomes_triangle(self, k3):
        assert complement(Graph(3, [])).edges == k3.edges

    def test_path(self, p3):
        assert complement(p3).edges == ((0, 2),)

    @settings(max_examples=60, deadline=None)
    @given(graphs())
    def test_involution(self, g):
        assert complement(complement(g)).edges == g.edges

    @settings(max_examples=25, deadline=None)
    @given(graphs(max_n=8))
    def test_independent_iff_clique_in_complement(self, g):
        h = complement(g)
        for mask in range(1 << g.n):
            s = [v for v in range(g.n) if mask >> v & 1]
            assert classify_set(g, s).independent == classify_set(h, s).clique


class TestClassify:
    def test_p3_ends(self, p3):
        f = classify_set(p3, [0, 2])
        assert f.independent and f.maximal_independent and f.dominating
        assert not f.connected
        # both edges (0,1) and (1,2) have an endpoint in {0, 2}
        assert f.vertex_cover

    def test_p3_middle(self, p3):
        f = classify_set(p3, [1])
        assert f.independent and f.maximal_independent and f.dominating and f.vertex_cover

    def test_k3_pair(self, k3):
        f = classify_set(k3, [0, 1])
        assert not f.independent and f.clique and f.vertex_cover

    def test_empty_set_is_connected(self, p3):
        assert classify_set(p3, []).connected

    def test_out_of_range_member(self, p3):
        with pytest.raises(errors.InputError):
            classify_set(p3, [5])

    @settings(max_examples=30, deadline=None)
    @given(graphs(max_n=9))
    def test_maximal_independent_sets_dominate(self, g):
        for s in enumerate_maximal_independent_sets(g):
            assert classify_set(g, s).dominating


class TestDelete:
    def test_open_middle(self, p3):
        h, remap = delete_vertices(p3, [1])
        assert h.n == 2 and h.edges == ()
        assert remap == {0: 0, 2: 1}

    def test_closed_middle(self, p3):
        h, _ = delete_vertices(p3, [1], closed=True)
        assert h.n == 0

    def test_triangle_minus_one(self, k3):
        h, _ = delete_vertices(k3, [0])
        assert h.edges == ((0, 1),)

    def test_weights_follow_vertices(self):
        g = Graph(3, [(0, 1)], [1.0, 2.0, 3.0])
        h, _ = delete_vertices(g, [0])
        assert h.weights == (2.0, 3.0)

    def test_induced(self):
        h, remap = induced(cycle_graph(5), [0, 1, 2])
        assert h.edges == ((0, 1), (1, 2))
        assert remap == {0: 0, 1: 1, 2: 2}


class TestWeights:
    def test_uniform_weight_is_cardinality(self, p3):
        g = set_weights(p3, [1.0] * 3)
        for s in ([], [0], [0, 2]):
            assert VertexSet.of(g, s).weight == len(s)

    def test_weighted_sum(self, p3):
        g = set_weights(p3, [1, 5, 1])
        assert VertexSet.of(g, [0, 2]).weight == 2.0
        assert VertexSet.of(g, [1]).weight == 5.0

    def test_negative_weight_warns(self, p3):
        with pytest.warns(UserWarning, match="nonpositive"):
            set_weights(p3, [1, -1, 1])

    def test_wrong_length(self, p3):
        with pytest.raises(errors.InputError):
            set_weights(p3, [1, 2])


class TestConnectivity:
    def test_components_ordered_by_smallest_member(self):
        g = Graph(5, [(3, 4), (0, 2)])
        assert component_masks(g) == [0b101, 0b10, 0b11000]

    def test_is_connected(self):
        assert is_connected(path_graph(4))
        assert not is_connected(Graph(2, []))


class TestSerialization:
    def test_round_trip(self, tmp_path):
        g = random_udg(9, 1.0, 1.5, np.random.default_rng(3))
        save_graph(g, tmp_path / "g.json")
        h = load_graph(tmp_path / "g.json")
        assert h.edges == g.edges and h.weights == g.weights and h.kind == "unitdisk"

    def test_vertex_count_shorthand(self):
        g = graph_from_dict({"vertices": 3, "edges": [[0, 1]]})
        assert g.n == 3 and g.edges == ((0, 1),)

    def test_inconsistent_unitdisk_rejected(self):
        d = graph_to_dict(build_unit_disk_graph([(0, 0), (0.5, 0)], 1.0))
        d["edges"] = []
        with pytest.raises(errors.InputError):
            graph_from_dict(d)

    def test_malformed(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"edges": []}))
        with pytest.raises(errors.InputError):
            load_graph(p)


class TestGenerators:
    def test_named(self):
        assert len(complete_graph(4).edges) == 6
        assert star_graph(3).degree(0) == 3
        assert len(cycle_graph(5).edges) == 5

    def test_chain_is_path(self):
        assert chain(5).edges == path_graph(5).edges

    def test_lattice_full_filling(self):
        g = lattice(2, 3, 1.0, 1.0, 1.0, np.random.default_rng(0))
        assert g.n == 6 and len(g.edges) == 7

    def test_er_seeded(self):
        a = erdos_renyi(10, 0.3, np.random.default_rng(5))
        b = erdos_renyi(10, 0.3, np.random.default_rng(5))
        assert a.edges == b.edges

    def test_connected_udg(self):
        g = random_udg(10, 1.0, 1.5, np.random.default_rng(1), connected=True)
        assert is_connected(g)
