"""Graph representation shared by every solver.

Vertices are dense ids ``0..n-1``. Adjacency is held as one Python int bitmask
per vertex (the operational source of truth) plus a sorted edge list for
serialization. Graphs are immutable; every transformation returns a new one.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

KINDS = ("general", "geometric", "unitdisk")


def bits(mask: int):
    """Yield set bit positions of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


class Graph:
    """Undirected simple graph with per-vertex weights.

    Args:
        n: number of vertices.
        edges: unordered vertex pairs. Order and orientation are normalized.
        weights: per-vertex weights, default all 1.0.
        coords: optional 2D position per vertex.
        radius: unit-disk radius, required for ``kind="unitdisk"``.
        kind: one of ``general``, ``geometric``, ``unitdisk``.
    """

    __slots__ = ("n", "edges", "weights", "coords", "radius", "kind", "adj")

    def __init__(
        self,
        n: int,
        edges: Iterable[Sequence[int]] = (),
        weights: Sequence[float] | None = None,
        coords: Sequence[Sequence[float]] | None = None,
        radius: float | None = None,
        kind: str = "general",
    ):
        if n < 0:
            raise InputError(f"vertex count must be nonnegative, got {n}")
        if kind not in KINDS:
            raise InputError(f"unknown graph kind {kind!r}")
        adj = [0] * n
        norm = set()
        for e in edges:
            i, j = int(e[0]), int(e[1])
            if not (0 <= i < n and 0 <= j < n):
                raise InputError(f"edge ({i}, {j}) has an endpoint outside [0, {n})")
            if i == j:
                raise InputError(f"self-loop on vertex {i}")
            key = (min(i, j), max(i, j))
            if key in norm:
                raise InputError(f"duplicate edge {key}")
            norm.add(key)
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        if weights is None:
            w = (1.0,) * n
        else:
            w = tuple(float(x) for x in weights)
            if len(w) != n:
                raise InputError(f"expected {n} weights, got {len(w)}")
            if not all(math.isfinite(x) for x in w):
                raise InputError("weights must be finite")
        xy = None
        if coords is not None:
            xy = tuple((float(p[0]), float(p[1])) for p in coords)
            if len(xy) != n:
                raise InputError(f"expected {n} coordinates, got {len(xy)}")
            if not all(math.isfinite(c) for p in xy for c in p):
                raise InputError("coordinates must be finite")
        if kind == "unitdisk":
            if xy is None or radius is None:
                raise InputError("unit-disk graphs need coords and radius")
            if norm != _disk_edges(xy, radius):
                raise InputError("edge set does not match the unit-disk rule")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "coords", xy)
        object.__setattr__(self, "radius", None if radius is None else float(radius))
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "adj", tuple(adj))

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    def __repr__(self):
        return f"Graph(n={self.n}, m={len(self.edges)}, kind={self.kind!r})"

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n, self.edges, self.weights, self.coords, self.radius, self.kind) == (
            other.n, other.edges, other.weights, other.coords, other.radius, other.kind)

    def __hash__(self):
        return hash((self.n, self.edges, self.weights))

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def neighbors(self, v: int) -> list[int]:
        return list(bits(self.adj[v]))

    def closed(self, v: int) -> int:
        """Closed-neighbourhood bitmask of ``v``."""
        return self.adj[v] | (1 << v)

    def degree(self, v: int) -> int:
        return popcount(self.adj[v])

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i] >> j & 1)

    def mask(self, members: Iterable[int]) -> int:
        m = 0
        for v in members:
            v = int(v)
            if not 0 <= v < self.n:
                raise InputError(f"vertex {v} outside [0, {self.n})")
            m |= 1 << v
        return m

    def weight_of(self, members: Iterable[int]) -> float:
        return math.fsum(self.weights[v] for v in sorted(members))

    def is_independent_mask(self, m: int) -> bool:
        return all(not (self.adj[v] & m) for v in bits(m))

    def uniform(self) -> "Graph":
        """Copy with every weight set to 1."""
        return set_weights(self, [1.0] * self.n)


@dataclass(frozen=True)
class VertexSet:
    """Sorted vertex subset with its cached total weight."""

    members: tuple[int, ...]
    weight: float

    @classmethod
    def of(cls, g: Graph, members: Iterable[int]) -> "VertexSet":
        ms = tuple(sorted({int(v) for v in members}))
        g.mask(ms)
        return cls(ms, g.weight_of(ms))

    @classmethod
    def from_mask(cls, g: Graph, m: int) -> "VertexSet":
        ms = tuple(bits(m))
        return cls(ms, g.weight_of(ms))

    def mask(self) -> int:
        m = 0
        for v in self.members:
            m |= 1 << v
        return m

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, v):
        return v in self.members


@dataclass(frozen=True)
class SetFlags:
    independent: bool
    maximal_independent: bool
    clique: bool
    vertex_cover: bool
    dominating: bool
    connected: bool


def _disk_edges(xy, radius) -> set[tuple[int, int]]:
    pts = np.asarray(xy, dtype=float).reshape(-1, 2)
    out = set()
    n = len(pts)
    for i in range(n):
        d = np.hypot(pts[i + 1:, 0] - pts[i, 0], pts[i + 1:, 1] - pts[i, 1])
        for k in np.nonzero(d <= radius)[0]:
            out.add((i, i + 1 + int(k)))
    return out


def build_unit_disk_graph(points, radius: float, weights=None) -> Graph:
    """Unit-disk graph: an edge joins every pair at distance ``<= radius``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise InputError("coordinates must be finite")
    if not (radius > 0 and math.isfinite(radius)):
        raise InputError(f"radius must be positive, got {radius}")
    xy = [tuple(p) for p in pts.tolist()]
    return Graph(len(xy), _disk_edges(xy, radius), weights, xy, radius, "unitdisk")


def complement(g: Graph) -> Graph:
    """Same vertices and weights, exactly the missing edges. Coordinates are dropped."""
    edges = [(i, j) for i in range(g.n) for j in range(i + 1, g.n) if not g.has_edge(i, j)]
    return Graph(g.n, edges, g.weights)


def set_weights(g: Graph, w: Sequence[float]) -> Graph:
    """Copy of ``g`` with new vertex weights.

    Nonpositive weights are accepted here with a warning; MWIS solvers reject them.
    """
    w = [float(x) for x in w]
    if len(w) != g.n:
        raise InputError(f"expected {g.n} weights, got {len(w)}")
    if any(x <= 0 for x in w):
        warnings.warn("nonpositive vertex weight; graph is not valid MWIS input", stacklevel=2)
    return Graph(g.n, g.edges, w, g.coords, g.radius, g.kind)


def induced(g: Graph, keep: Iterable[int]) -> tuple[Graph, dict[int, int]]:
    """Induced subgraph on ``keep``, re-indexed in ascending order."""
    keep = sorted(set(keep))
    remap = {old: new for new, old in enumerate(keep)}
    edges = [(remap[i], remap[j]) for i, j in g.edges if i in remap and j in remap]
    weights = [g.weights[v] for v in keep]
    coords = None if g.coords is None else [g.coords[v] for v in keep]
    return Graph(len(keep), edges, weights, coords, g.radius, g.kind), remap


def delete_vertices(g: Graph, s, closed: bool = False) -> tuple[Graph, dict[int, int]]:
    """Remove ``s`` (or ``s`` plus its neighbours when ``closed``).

    Returns the re-indexed graph and the old-to-new id map of the survivors.
    """
    m = s.mask() if isinstance(s, VertexSet) else g.mask(s)
    gone = m
    if closed:
        for v in bits(m):
            gone |= g.adj[v]
    return induced(g, (v for v in range(g.n) if not gone >> v & 1))


def component_masks(g: Graph, within: int | None = None) -> list[int]:
    """Connected components of the subgraph induced by ``within``, ordered by smallest member."""
    rest = g.full_mask if within is None else within
    comps = []
    while rest:
        seed = rest & -rest
        comp = seed
        frontier = seed
        while frontier:
            nxt = 0
            for v in bits(frontier):
                nxt |= g.adj[v]
            nxt &= rest & ~comp
            comp |= nxt
            frontier = nxt
        comps.append(comp)
        rest &= ~comp
    return comps


def is_connected(g: Graph, within: int | None = None) -> bool:
    """Empty vertex sets count as connected."""
    return len(component_masks(g, within)) <= 1


def classify_set(g: Graph, s) -> SetFlags:
    """Evaluate every set predicate directly from its definition.

    The empty set is reported as connected so that connected-dominating-set
    code paths stay total.
    """
    members = s.members if isinstance(s, VertexSet) else s
    m = g.mask(members)
    independent = g.is_independent_mask(m)
    covered = m
    for v in bits(m):
        covered |= g.adj[v]
    dominating = covered == g.full_mask
    maximal = independent and dominating
    clique = all((g.adj[v] | (1 << v)) & m == m for v in bits(m))
    cover = all((m >> i & 1) or (m >> j & 1) for i, j in g.edges)
    return SetFlags(independent, maximal, clique, cover, dominating, is_connected(g, m))


# --- serialization ---------------------------------------------------------

def graph_to_dict(g: Graph) -> dict:
    verts = []
    for v in range(g.n):
        rec = {"id": v, "weight": g.weights[v]}
        if g.coords is not None:
            rec["pos"] = list(g.coords[v])
        verts.append(rec)
    out = {"kind": g.kind, "vertices": verts, "edges": [list(e) for e in g.edges]}
    if g.radius is not None:
        out["radius"] = g.radius
    return out


def graph_from_dict(d: dict) -> Graph:
    try:
        kind = d.get("kind", "general")
        verts = d["vertices"]
        if isinstance(verts, int):  # shorthand: a bare vertex count
            verts = [{"id": v} for v in range(verts)]
        verts = sorted(verts, key=lambda r: r["id"])
        n = len(verts)
        if [r["id"] for r in verts] != list(range(n)):
            raise InputError("vertex ids must be 0..n-1")
        weights = [r.get("weight", 1.0) for r in verts]
        has_pos = all("pos" in r for r in verts) and n > 0
        coords = [r["pos"] for r in verts] if has_pos else None
        radius = d.get("radius")
        if kind == "unitdisk":
            if coords is None or radius is None:
                raise InputError("unitdisk graph needs pos on every vertex and a radius")
            g = build_unit_disk_graph(coords, radius, weights)
            if "edges" in d and {tuple(sorted(e)) for e in d["edges"]} != set(g.edges):
                raise InputError("stored edges disagree with the unit-disk rule")
            return g
        return Graph(n, d.get("edges", []), weights, coords, radius, kind)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed graph JSON: {exc}") from exc


def load_graph(path) -> Graph:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    return graph_from_dict(data)


def save_graph(g: Graph, path) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(g), indent=1) + "\n")


# --- small named graphs used throughout tests and docs -----------------------

def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)] if n > 2 else [(i, i + 1) for i in range(n - 1)])


def complete_graph(n: int) -> Graph:
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves: int) -> Graph:
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])
