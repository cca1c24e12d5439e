from collections import Counter

import numpy as np
import pytest

from indset import errors, sampling
from indset.graph import Graph, classify_set, cycle_graph, set_weights
from indset.oracle import enumerate_independent_sets, partition_function
from indset.rng import make_rng, spawn, stream_key


def exact_distribution(g, nu):
    z = partition_function(g, nu).z
    return {s.members: nu ** len(s) / z for s in enumerate_independent_sets(g)}


class TestRng:
    def test_named_streams_differ(self):
        a = make_rng(1, "a").integers(2**62)
        b = make_rng(1, "b").integers(2**62)
        assert a != b

    def test_stable_values(self):
        # frozen: PCG64 seeded from [7, crc32("gibbs")]
        assert stream_key("gibbs") == 2123026980
        assert make_rng(7, "gibbs").integers(2**62) == 2990462174317600874

    def test_spawn(self):
        rngs = spawn(3, 4, "chains")
        assert len({r.integers(2**62) for r in rngs}) == 4

    def test_generator_passthrough(self):
        g = np.random.default_rng(0)
        assert make_rng(g) is g


class TestGreedy:
    def test_empty_graph(self):
        for seed in range(5):
            assert sampling.greedy_maximal_is(Graph(5, []), seed).members == (0, 1, 2, 3, 4)

    def test_triangle(self, k3):
        assert len(sampling.greedy_maximal_is(k3, 0)) == 1

    def test_p3_frequencies(self, p3):
        rng = make_rng(11, "greedy-test")
        counts = Counter(sampling.greedy_maximal_is(p3, rng).members for _ in range(10_000))
        assert set(counts) == {(1,), (0, 2)}
        assert counts[(0, 2)] / 10_000 == pytest.approx(2 / 3, abs=0.02)

    def test_outputs_are_maximal(self):
        g = cycle_graph(9)
        rng = make_rng(0)
        for _ in range(50):
            s = sampling.greedy_maximal_is(g, rng)
            f = classify_set(g, s)
            assert f.maximal_independent and f.dominating

    def test_min_degree_order(self):
        g = Graph(4, [(0, 1), (0, 2), (0, 3)])
        assert sampling.greedy_maximal_is(g, 0, order="min_degree").members == (1, 2, 3)

    def test_bad_order(self, p3):
        with pytest.raises(errors.InputError):
            sampling.greedy_maximal_is(p3, 0, order="bogus")


class TestGibbs:
    def test_defaults(self):
        assert sampling.SamplerConfig(activity=2.0).resolved(5) == (100, 5)
        assert sampling.SamplerConfig(activity=0.5).resolved(5) == (50, 5)

    def test_single_vertex(self):
        samples = sampling.gibbs_sample_is(Graph(1, []), sampling.SamplerConfig(seed=3), 5000)
        frac = sum(len(s) for s in samples) / len(samples)
        assert frac == pytest.approx(0.5, abs=0.02)

    @pytest.mark.parametrize("nu", [0.5, 1.0, 2.0])
    def test_p3_total_variation(self, p3, nu):
        samples = sampling.gibbs_sample_is(p3, sampling.SamplerConfig(seed=5, activity=nu), 20_000)
        emp = sampling.empirical_distribution(samples)
        assert sampling.total_variation(emp, exact_distribution(p3, nu)) <= 0.05

    def test_triangle_high_activity(self, k3):
        nu = 100.0
        samples = sampling.gibbs_sample_is(k3, sampling.SamplerConfig(seed=1, activity=nu), 4000)
        empty = sum(1 for s in samples if len(s) == 0) / len(samples)
        assert empty == pytest.approx(1 / (1 + 3 * nu), abs=0.01)
        assert sum(1 for s in samples if len(s) == 1) / len(samples) > 0.98

    def test_samples_independent(self):
        g = cycle_graph(7)
        for s in sampling.gibbs_sample_is(g, sampling.SamplerConfig(seed=2, activity=3.0), 500):
            assert classify_set(g, s).independent

    def test_reproducible_and_thread_independent(self):
        g = cycle_graph(6)
        cfg = sampling.SamplerConfig(seed=9)
        a = sampling.gibbs_sample_is(g, cfg, 200, n_chains=4, threads=1)
        b = sampling.gibbs_sample_is(g, cfg, 200, n_chains=4, threads=4)
        assert [s.members for s in a] == [s.members for s in b]

    def test_rejects_bad_config(self, p3):
        with pytest.raises(errors.InputError):
            sampling.gibbs_sample_is(p3, sampling.SamplerConfig(activity=0.0), 10)


class TestEstimates:
    def test_constant(self, p3):
        samples = sampling.gibbs_sample_is(p3, sampling.SamplerConfig(seed=0), 100)
        mean, se = sampling.estimate_expectation(samples, lambda s: 1.0)
        assert mean == 1.0 and se == 0.0

    def test_size_on_p3(self, p3):
        samples = sampling.gibbs_sample_is(p3, sampling.SamplerConfig(seed=4), 20_000)
        mean, se = sampling.estimate_expectation(samples, len)
        assert abs(mean - 1.0) < 4 * se + 1e-3

    def test_weight_on_p3(self, p3):
        g = set_weights(p3, [1, 5, 1])
        samples = sampling.gibbs_sample_is(g, sampling.SamplerConfig(seed=8), 20_000)
        mean, se = sampling.estimate_expectation(samples, lambda s: s.weight)
        assert abs(mean - 9 / 5) < 4 * se + 1e-3

    def test_needs_two_samples(self):
        with pytest.raises(errors.InputError):
            sampling.estimate_expectation([], len)


def test_jsonl_round_trip(tmp_path, p3):
    cfg = sampling.SamplerConfig(seed=1)
    samples = sampling.gibbs_sample_is(p3, cfg, 10)
    header = sampling.sampler_metadata(cfg, p3.n, "gibbs", 10)
    sampling.write_samples(tmp_path / "s.jsonl", samples, header)
    h, sets = sampling.read_samples(tmp_path / "s.jsonl")
    assert h == header and sets == [s.members for s in samples]
    assert h["burn_in"] == 30 and h["thinning"] == 3 and h["bit_generator"] == "PCG64"
