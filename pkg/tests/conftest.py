"""Shared helpers: small random instances and brute-force reference solvers.

The brute-force functions here deliberately share no code with the package so
they can serve as independent oracles.
"""

from itertools import combinations

import numpy as np
import pytest

from indset.generate import erdos_renyi, random_udg
from indset.graph import Graph


def subsets(n):
    for mask in range(1 << n):
        yield [v for v in range(n) if mask >> v & 1]


def brute_independent(g: Graph, members) -> bool:
    s = set(members)
    return not any(u in s and v in s for u, v in g.edges)


def brute_independent_sets(g: Graph):
    return [s for s in subsets(g.n) if brute_independent(g, s)]


def brute_mwis(g: Graph) -> float:
    return max(sum(g.weights[v] for v in s) for s in brute_independent_sets(g))


def brute_max_clique(g: Graph) -> int:
    edges = set(g.edges)
    best = 0
    for s in subsets(g.n):
        if all((u, v) in edges for u, v in combinations(s, 2)):
            best = max(best, len(s))
    return best


def brute_z(g: Graph, nu) -> float:
    nu = [nu] * g.n if np.isscalar(nu) else list(nu)
    return sum(float(np.prod([nu[v] for v in s])) for s in brute_independent_sets(g))


def subset_table(n):
    """Boolean membership table, row k = subset with bitmask k."""
    masks = np.arange(1 << n, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)


def independent_rows(g: Graph, table):
    ok = np.ones(len(table), dtype=bool)
    for u, v in g.edges:
        ok &= ~(table[:, u] & table[:, v])
    return ok


def fast_brute_mwis(g: Graph) -> float:
    table = subset_table(g.n)
    w = table.astype(float) @ np.asarray(g.weights, dtype=float) if g.n else np.zeros(1)
    return float(w[independent_rows(g, table)].max())


def fast_brute_min_cover(g: Graph) -> int:
    table = subset_table(g.n)
    ok = np.ones(len(table), dtype=bool)
    for u, v in g.edges:
        ok &= table[:, u] | table[:, v]
    return int(table[ok].sum(axis=1).min()) if g.n else 0


def fast_brute_max_clique(g: Graph) -> int:
    table = subset_table(g.n)
    edges = set(g.edges)
    ok = np.ones(len(table), dtype=bool)
    for u in range(g.n):
        for v in range(u + 1, g.n):
            if (u, v) not in edges:
                ok &= ~(table[:, u] & table[:, v])
    return int(table[ok].sum(axis=1).max()) if g.n else 0


def instance_family(seed=2024, count=100, n_max=14):
    """``count`` Erdos-Renyi graphs (p=0.3) and ``count`` random unit-disk graphs, n <= n_max."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        out.append(erdos_renyi(int(rng.integers(1, n_max + 1)), 0.3, rng))
    for _ in range(count):
        out.append(random_udg(int(rng.integers(1, n_max + 1)), 1.0, 1.5, rng))
    return out


@pytest.fixture
def p3():
    return Graph(3, [(0, 1), (1, 2)])


@pytest.fixture
def k3():
    return Graph(3, [(0, 1), (0, 2), (1, 2)])
