"""Exact solvers and counters.

These are the ground truth every heuristic and the simulator are checked
against. All of them work on bitmask adjacency rows and are meant for desk
scale instances; each one refuses inputs above a configurable cap.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterator, Sequence

from .errors import InputError, InvariantError, SizeCapError
from .graph import Graph, VertexSet, bits, classify_set, component_masks, is_connected, popcount

ENUMERATION_CAP = 24
MWIS_CAP = 60
SUBSET_SEARCH_CAP = 20
CHROMATIC_CAP = 12
PARTITION_CAP = 96
MEMO_LIMIT = 4_000_000  # entries; roughly 1 GiB of Python ints and dict slots


def _check_cap(g: Graph, cap: int, what: str) -> None:
    if g.n > cap:
        raise SizeCapError(f"{what}: n={g.n} exceeds cap {cap}")


@dataclass
class ExactSolution:
    problem: str
    set: VertexSet
    objective: float
    optimal: bool
    nodes_explored: int

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "set": list(self.set.members),
            "objective": self.objective,
            "optimal": self.optimal,
            "nodes_explored": self.nodes_explored,
        }


@dataclass
class PartitionFunctionResult:
    z: float
    activities: tuple[float, ...]
    count_mode: bool
    count: int | None = None

    def to_dict(self) -> dict:
        out = {"z": self.z, "count_mode": self.count_mode, "activities": list(self.activities)}
        if self.count is not None:
            out["count"] = self.count
        return out


# --- enumeration -------------------------------------------------------------

def enumerate_independent_sets(g: Graph, cap: int = ENUMERATION_CAP) -> Iterator[VertexSet]:
    """Every independent set exactly once, empty set first, in lexicographic order of member lists."""
    _check_cap(g, cap, "enumerate_independent_sets")
    for m in _enumerate_masks(g, g.full_mask):
        yield VertexSet.from_mask(g, m)


def _enumerate_masks(g: Graph, allowed: int) -> Iterator[int]:
    # preorder DFS: a prefix is emitted before its extensions
    stack = [(0, allowed)]
    while stack:
        cur, cand = stack.pop()
        yield cur
        children = []
        for v in bits(cand):
            rest = cand & ~((1 << (v + 1)) - 1) & ~g.adj[v]
            children.append((cur | (1 << v), rest))
        stack.extend(reversed(children))


def enumerate_maximal_independent_sets(g: Graph, cap: int = ENUMERATION_CAP) -> list[VertexSet]:
    _check_cap(g, cap, "enumerate_maximal_independent_sets")
    out = []
    for m in _enumerate_masks(g, g.full_mask):
        covered = m
        for v in bits(m):
            covered |= g.adj[v]
        if covered == g.full_mask:
            out.append(VertexSet.from_mask(g, m))
    return out


# --- maximum weight independent set ------------------------------------------

class _Timeout(Exception):
    pass


class _MWISSearch:
    """Branch on a maximum-degree vertex, bound by a greedy weighted clique cover."""

    def __init__(self, g: Graph, deadline: float | None):
        self.g = g
        self.w = g.weights
        self.deadline = deadline
        self.nodes = 0
        self.best = -math.inf
        self.best_mask = 0
        self.target = math.inf

    def bound(self, p: int) -> float:
        adj, w = self.g.adj, self.w
        order = sorted(bits(p), key=lambda v: (-w[v], v))
        commons: list[int] = []
        total = 0.0
        for v in order:
            for k, c in enumerate(commons):
                if c >> v & 1:
                    commons[k] = c & adj[v]
                    break
            else:
                commons.append(adj[v])
                total += w[v]
        return total

    def run(self, p: int, cur: float = 0.0, cur_mask: int = 0) -> None:
        self.nodes += 1
        if self.deadline is not None and self.nodes & 1023 == 0 and time.monotonic() > self.deadline:
            raise _Timeout
        adj, w = self.g.adj, self.w
        # isolated vertices of the residual graph are always taken
        iso = 0
        for v in bits(p):
            if not adj[v] & p:
                iso |= 1 << v
        if iso:
            cur += sum(w[v] for v in bits(iso))
            cur_mask |= iso
            p &= ~iso
        if not p:
            if cur > self.best:
                self.best, self.best_mask, self.found = cur, cur_mask, True
            return
        if cur + self.bound(p) <= self.best:
            return
        v = max(bits(p), key=lambda u: (popcount(adj[u] & p), -u))
        self.run(p & ~(adj[v] | (1 << v)), cur + w[v], cur_mask | (1 << v))
        if self.found and self.best >= self.target:
            return
        self.run(p & ~(1 << v), cur, cur_mask)

    def max_weight(self, p: int, floor: float = -math.inf, target: float = math.inf) -> float:
        self.best, self.best_mask, self.target = floor, 0, target
        self.found = False
        self.run(p)
        return self.best if self.found else -math.inf


def mwis_exact(g: Graph, cap: int = MWIS_CAP, time_limit: float | None = None) -> ExactSolution:
    """Maximum weight independent set by branch and bound.

    Among optimal sets the one with the lexicographically smallest sorted
    member list is returned, so output is reproducible. On timeout the best
    set found so far is returned with ``optimal=False``.
    """
    _check_cap(g, cap, "mwis_exact")
    if any(x <= 0 for x in g.weights):
        raise InputError("mwis_exact needs strictly positive weights")
    deadline = None if time_limit is None else time.monotonic() + time_limit
    search = _MWISSearch(g, deadline)
    try:
        opt = search.max_weight(g.full_mask)
    except _Timeout:
        vs = VertexSet.from_mask(g, search.best_mask)
        return ExactSolution("mwis", vs, vs.weight, False, search.nodes)
    if g.n == 0:
        return ExactSolution("mwis", VertexSet((), 0.0), 0.0, True, search.nodes)

    tol = 1e-9 * max(1.0, abs(opt))
    chosen, acc, p = 0, 0.0, g.full_mask
    for v in range(g.n):
        if not p >> v & 1:
            continue
        need = opt - acc - g.weights[v]
        rest = p & ~(g.adj[v] | (1 << v))
        try:
            ok = -tol <= need <= tol or need > tol and search.max_weight(rest, floor=need - tol, target=need - tol) >= need - tol
        except _Timeout:
            vs = VertexSet.from_mask(g, search.best_mask)
            return ExactSolution("mwis", vs, vs.weight, False, search.nodes)
        if ok:
            chosen |= 1 << v
            acc += g.weights[v]
            p = rest
        else:
            p &= ~(1 << v)
    vs = VertexSet.from_mask(g, chosen)
    if not g.is_independent_mask(chosen) or abs(vs.weight - opt) > tol:
        raise InvariantError("lexicographic reconstruction lost optimality")
    return ExactSolution("mwis", vs, vs.weight, True, search.nodes)


def mis_exact(g: Graph, **kw) -> ExactSolution:
    sol = mwis_exact(g.uniform(), **kw)
    members = sol.set.members
    return ExactSolution("mis", VertexSet.of(g, members), float(len(members)), sol.optimal,
                         sol.nodes_explored)


# --- counting ------------------------------------------------------------------

def _activities(g: Graph, activities) -> tuple[float, ...]:
    if activities is None:
        activities = 1.0
    if isinstance(activities, (int, float)):
        nu = (float(activities),) * g.n
    else:
        nu = tuple(float(x) for x in activities)
        if len(nu) != g.n:
            raise InputError(f"expected {g.n} activities, got {len(nu)}")
    if any(not math.isfinite(x) or x < 0 for x in nu):
        raise InputError("activities must be finite and nonnegative")
    return nu


class PartitionFunction:
    """Hard-core partition function with a memo shared across queries.

    ``z(mask)`` evaluates the induced subgraph on ``mask`` using
    ``Z(G) = Z(G - v) + nu_v * Z(G - N[v])`` on a maximum-degree vertex and
    factorizes over connected components. When every activity is 1 the
    arithmetic is done in Python integers, so counts are exact.
    """

    def __init__(self, g: Graph, activities=1.0, memo_limit: int = MEMO_LIMIT):
        self.g = g
        self.nu = _activities(g, activities)
        self.count_mode = all(x == 1.0 for x in self.nu)
        self._nu = [1 if self.count_mode else x for x in self.nu]
        self.memo: dict[int, float | int] = {}
        self.memo_limit = memo_limit

    def z(self, mask: int | None = None):
        mask = self.g.full_mask if mask is None else mask
        return self._z(mask)

    def _z(self, p: int):
        if not p:
            return 1
        hit = self.memo.get(p)
        if hit is not None:
            return hit
        adj, nu = self.g.adj, self._nu
        comps = component_masks(self.g, p)
        if len(comps) > 1:
            val = 1
            for c in comps:
                val *= self._z(c)
        elif p & (p - 1) == 0:
            val = 1 + nu[p.bit_length() - 1]
        else:
            v = max(bits(p), key=lambda u: (popcount(adj[u] & p), -u))
            val = self._z(p & ~(1 << v)) + nu[v] * self._z(p & ~(adj[v] | (1 << v)))
        if len(self.memo) < self.memo_limit:
            self.memo[p] = val
        return val


def partition_function(g: Graph, activities=1.0, cap: int = PARTITION_CAP,
                       memo_limit: int = MEMO_LIMIT) -> PartitionFunctionResult:
    """Sum over independent sets of the product of member activities."""
    _check_cap(g, cap, "partition_function")
    pf = PartitionFunction(g, activities, memo_limit)
    val = pf.z()
    if pf.count_mode:
        return PartitionFunctionResult(float(val), pf.nu, True, int(val))
    return PartitionFunctionResult(float(val), pf.nu, False, None)


def expectation(g: Graph, activities, f: Callable[[VertexSet], float],
                cap: int = ENUMERATION_CAP) -> float:
    """Exact activity-weighted average of ``f`` over all independent sets."""
    nu = _activities(g, activities)
    num, den = [], []
    for s in enumerate_independent_sets(g, cap):
        p = math.prod(nu[v] for v in s.members)
        num.append(p * f(s))
        den.append(p)
    return math.fsum(num) / math.fsum(den)


# --- dominating sets -------------------------------------------------------------

def _closed_cover(g: Graph, members) -> int:
    m = 0
    for v in members:
        m |= g.adj[v] | (1 << v)
    return m


def _min_subset(g: Graph, problem: str, pred: Callable[[tuple[int, ...], int], bool],
                cap: int) -> ExactSolution:
    _check_cap(g, cap, problem)
    maxdeg = max((g.degree(v) for v in range(g.n)), default=0)
    start = math.ceil(g.n / (maxdeg + 1)) if g.n else 0
    nodes = 0
    for k in range(start, g.n + 1):
        for combo in combinations(range(g.n), k):
            nodes += 1
            m = 0
            for v in combo:
                m |= 1 << v
            if pred(combo, m):
                vs = VertexSet.of(g, combo)
                return ExactSolution(problem, vs, float(k), True, nodes)
    raise InvariantError(f"{problem}: no feasible subset found")


def mds_exact(g: Graph, cap: int = SUBSET_SEARCH_CAP) -> ExactSolution:
    """Minimum dominating set; lexicographically first among minimum ones."""
    full = g.full_mask
    return _min_subset(g, "mds", lambda c, m: _closed_cover(g, c) == full, cap)


def mcds_exact(g: Graph, cap: int = SUBSET_SEARCH_CAP) -> ExactSolution:
    """Minimum connected dominating set of a connected graph."""
    if not is_connected(g):
        raise InputError("mcds_exact needs a connected graph")
    full = g.full_mask
    return _min_subset(
        g, "mcds", lambda c, m: _closed_cover(g, c) == full and is_connected(g, m), cap)


def min_maximal_is_exact(g: Graph, cap: int = SUBSET_SEARCH_CAP) -> ExactSolution:
    """Minimum independent dominating set (smallest maximal independent set)."""
    full = g.full_mask
    return _min_subset(
        g, "min_maximal_is",
        lambda c, m: g.is_independent_mask(m) and _closed_cover(g, c) == full, cap)


# --- colouring -------------------------------------------------------------------

def chromatic_number_exact(g: Graph, cap: int = CHROMATIC_CAP) -> tuple[int, list[int]]:
    """Smallest K with a proper K-colouring, and one witness colouring."""
    _check_cap(g, cap, "chromatic_number_exact")
    if g.n == 0:
        return 0, []
    order = sorted(range(g.n), key=lambda v: (-g.degree(v), v))
    for k in range(1, g.n + 1):
        colors = [-1] * g.n
        if _color(g, order, 0, colors, k, 0):
            return k, colors
    raise InvariantError("no colouring found with n colours")


def _color(g: Graph, order, i, colors, k, used) -> bool:
    if i == len(order):
        return True
    v = order[i]
    taken = {colors[u] for u in bits(g.adj[v])}
    # a fresh colour is interchangeable with any other unused one
    for c in range(min(k, used + 1)):
        if c in taken:
            continue
        colors[v] = c
        if _color(g, order, i + 1, colors, k, max(used, c + 1)):
            return True
    colors[v] = -1
    return False


def is_proper_coloring(g: Graph, colors: Sequence[int | None]) -> bool:
    return all(colors[i] is None or colors[j] is None or colors[i] != colors[j]
               for i, j in g.edges)


def verify(g: Graph, sol: ExactSolution) -> bool:
    """Re-check a solution against its defining predicate."""
    f = classify_set(g, sol.set)
    return {
        "mwis": f.independent,
        "mis": f.independent,
        "mds": f.dominating,
        "mcds": f.dominating and f.connected,
        "min_maximal_is": f.maximal_independent,
        "clique": f.clique,
        "vcover": f.vertex_cover,
    }.get(sol.problem, True)
