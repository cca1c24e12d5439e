"""Classical steps of the hybrid pipelines.

Sampled sets are repaired into independent sets, grown into maximal ones
(which are dominating), connected into connected dominating sets, or trimmed
into budgeted immunization plans.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, RepairError
from .graph import Graph, VertexSet, bits, classify_set, component_masks, is_connected, popcount
from .rng import make_rng
from .sampling import greedy_maximal_is


@dataclass
class PipelineTrace:
    """Audit record of one postprocessing step."""

    stage: str
    input_set: VertexSet
    output_set: VertexSet
    added: list[int] = field(default_factory=list)
    removed: list[int] = field(default_factory=list)
    objective_before: float = 0.0
    objective_after: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "input_set": list(self.input_set.members),
            "output_set": list(self.output_set.members),
            "added": self.added,
            "removed": self.removed,
            "objective_before": self.objective_before,
            "objective_after": self.objective_after,
            **self.extra,
        }


def _members(s):
    return s.members if isinstance(s, VertexSet) else tuple(s)


def complete_to_maximal(g: Graph, s, seed=None, trace: bool = False):
    """Grow an independent set into a maximal one, adding eligible vertices in random order."""
    start = VertexSet.of(g, _members(s))
    m = start.mask()
    if not g.is_independent_mask(m):
        raise RepairError("complete_to_maximal needs an independent set; repair it first")
    rng = make_rng(seed)
    blocked = m
    for v in bits(m):
        blocked |= g.adj[v]
    added = []
    for v in rng.permutation(g.n).tolist():
        if not blocked >> v & 1:
            m |= 1 << v
            blocked |= g.adj[v] | (1 << v)
            added.append(v)
    out = VertexSet.from_mask(g, m)
    if trace:
        return out, PipelineTrace("complete_to_maximal", start, out, added, [],
                                  start.weight, out.weight)
    return out


def repair_to_independent(g: Graph, s, seed=None, trace: bool = False):
    """Drop vertices until independent, each time a random one among the most conflicted."""
    start = VertexSet.of(g, _members(s))
    m = start.mask()
    rng = make_rng(seed)
    removed = []
    while True:
        conflicts = {v: popcount(g.adj[v] & m) for v in bits(m)}
        worst = max(conflicts.values(), default=0)
        if worst == 0:
            break
        ties = [v for v, c in conflicts.items() if c == worst]
        v = ties[int(rng.integers(len(ties)))]
        m &= ~(1 << v)
        removed.append(v)
    out = VertexSet.from_mask(g, m)
    if trace:
        return out, PipelineTrace("repair_to_independent", start, out, [], removed,
                                  start.weight, out.weight)
    return out


def connect_dominating(g: Graph, d, trace: bool = False):
    """Connect a dominating set by repeatedly splicing in a shortest connector path.

    The component holding the smallest id grows first; a multi-source BFS from
    it finds the nearest vertex of another component, and the interior of that
    path (at most two vertices, since the set dominates) is added.
    """
    start = VertexSet.of(g, _members(d))
    if not is_connected(g):
        raise InputError("connect_dominating needs a connected graph")
    if not classify_set(g, start).dominating:
        raise InputError("connect_dominating needs a dominating set")
    m = start.mask()
    added: list[int] = []
    while True:
        comps = component_masks(g, m)
        if len(comps) <= 1:
            break
        root = comps[0]
        others = m & ~root
        parent = {v: -1 for v in bits(root)}
        queue = deque(bits(root))
        hit = -1
        while queue and hit < 0:
            u = queue.popleft()
            for w in bits(g.adj[u]):
                if w in parent:
                    continue
                parent[w] = u
                if others >> w & 1:
                    hit = w
                    break
                queue.append(w)
        path = []
        u = parent[hit]
        while not root >> u & 1:
            path.append(u)
            u = parent[u]
        for v in reversed(path):
            m |= 1 << v
            added.append(v)
    out = VertexSet.from_mask(g, m)
    if trace:
        return out, PipelineTrace("connect_dominating", start, out, added, [],
                                  float(len(start)), float(len(out)))
    return out


def laplacian_lambda_max(g: Graph, keep_mask: int | None = None, tol: float = 1e-9,
                         max_iter: int = 1000) -> float:
    """Largest Laplacian eigenvalue of the subgraph induced by ``keep_mask``, by power iteration."""
    keep = list(bits(g.full_mask if keep_mask is None else keep_mask))
    if not keep:
        return 0.0
    idx = {v: i for i, v in enumerate(keep)}
    k = len(keep)
    lap = np.zeros((k, k))
    for v in keep:
        for u in bits(g.adj[v]):
            if u in idx:
                lap[idx[v], idx[u]] = -1.0
        lap[idx[v], idx[v]] = -lap[idx[v]].sum()
    if not lap.any():
        return 0.0
    # alternating start vector: never orthogonal to every high eigenvector of a graph with edges
    x = np.cos(np.arange(k) * 2.399963) + 0.5 * (-1.0) ** np.arange(k)
    x -= x.mean()
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(max_iter):
        y = lap @ x
        new = float(x @ y)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        x = y / ny
        if abs(new - lam) <= tol * max(1.0, abs(new)):
            lam = new
            break
        lam = new
    return lam


def immunize_budget(g: Graph, k: int, seed=None, oracle_cap: int = 40,
                    tol: float = 1e-9, max_iter: int = 1000):
    """Pick at most ``k`` vertices to immunize, minimizing the residual Laplacian's top eigenvalue.

    Returns ``(VertexSet, score, trace)``. When ``k`` reaches the minimum vertex
    cover size a minimum cover is returned and the score is 0. Otherwise the
    search starts from the complement of a random maximal independent set (a
    cover) and hands back, one at a time, the vertex whose return raises the
    spectral score least, until ``k`` remain.
    """
    from .oracle import mis_exact

    if not 0 <= k <= g.n:
        raise InputError(f"budget k must lie in [0, {g.n}], got {k}")
    full = g.full_mask
    if k == g.n:
        out = VertexSet.from_mask(g, full)
        return out, 0.0, PipelineTrace("immunize", out, out, extra={"k": k, "score": 0.0})
    if g.n <= oracle_cap:
        cover_mask = full & ~mis_exact(g).set.mask()
        exact = True
    else:
        cover_mask = full & ~greedy_maximal_is(g, make_rng(seed, "cover")).mask()
        exact = False
    if k >= popcount(cover_mask):
        out = VertexSet.from_mask(g, cover_mask)
        return out, 0.0, PipelineTrace("immunize", out, out,
                                       extra={"k": k, "score": 0.0, "exact_cover": exact})
    start = full & ~greedy_maximal_is(g, make_rng(seed, "immunize")).mask()
    immune = start
    removed = []
    while popcount(immune) > k:
        best_v, best_lam = -1, np.inf
        for v in bits(immune):
            lam = laplacian_lambda_max(g, full & ~(immune & ~(1 << v)), tol, max_iter)
            if best_v < 0 or lam < best_lam - 1e-7 * max(1.0, best_lam):
                best_v, best_lam = v, lam
        immune &= ~(1 << best_v)
        removed.append(best_v)
    score = laplacian_lambda_max(g, full & ~immune, tol, max_iter)
    before = VertexSet.from_mask(g, start)
    out = VertexSet.from_mask(g, immune)
    tr = PipelineTrace("immunize", before, out, [], removed, 0.0, score,
                       extra={"k": k, "score": score, "exact_cover": exact})
    return out, score, tr
