"""Random and structured instance generators."""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .graph import Graph, build_unit_disk_graph
from .rng import make_rng


def erdos_renyi(n: int, p: float, seed=None) -> Graph:
    if not 0 <= p <= 1:
        raise InputError(f"edge probability must lie in [0, 1], got {p}")
    rng = make_rng(seed)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return Graph(n, edges)


def random_udg(n: int, radius: float = 1.0, density: float = 1.5, seed=None,
               connected: bool = False, max_tries: int = 1000) -> Graph:
    """Uniform points in a square sized so the mean vertex count per unit disk area is ``density``.

    With ``connected=True`` the draw is repeated until the graph is connected.
    """
    from .graph import is_connected

    rng = make_rng(seed)
    side = radius * np.sqrt(max(n, 1) * np.pi / density)
    for _ in range(max_tries):
        pts = rng.uniform(0.0, side, size=(n, 2))
        g = build_unit_disk_graph(pts, radius)
        if not connected or is_connected(g):
            return g
    raise InputError(f"no connected unit-disk draw in {max_tries} tries")


def lattice(rows: int, cols: int, spacing: float = 1.0, radius: float = 1.5,
            filling: float = 1.0, seed=None) -> Graph:
    """Square lattice unit-disk graph, optionally with random vacancies."""
    rng = make_rng(seed)
    pts = [(c * spacing, r * spacing) for r in range(rows) for c in range(cols)]
    if filling < 1.0:
        keep = rng.random(len(pts)) < filling
        pts = [p for p, k in zip(pts, keep) if k]
    return build_unit_disk_graph(pts, radius)


def chain(n: int, spacing: float = 0.8, radius: float = 1.0) -> Graph:
    """Atoms on a line; with ``spacing < radius < 2*spacing`` this is the path graph."""
    return build_unit_disk_graph([(i * spacing, 0.0) for i in range(n)], radius)
