"""Scenario drivers: loss networks, site planning, market graphs, scheduling, antennas.

Each driver builds a domain graph, calls the solvers, and returns a result
object with ``rows()`` for the CSV table and ``plot_rows()`` for the
long-format plotting file.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, SizeCapError
from .graph import Graph, VertexSet, bits, build_unit_disk_graph, complement, delete_vertices
from .oracle import PartitionFunction, enumerate_maximal_independent_sets, mwis_exact
from .reductions import coloring_to_mis, decode
from .rng import make_rng
from .sampling import greedy_maximal_is

log = logging.getLogger(__name__)


# --- loss networks -------------------------------------------------------------

@dataclass
class RouteSet:
    """Routes over the links of a network. Links are network edges ``(u, v)``."""

    network: Graph
    routes: list[frozenset]
    activity: float = 0.1

    def __post_init__(self):
        if not self.activity > 0:
            raise InputError("route activity must be positive")
        links = set(self.network.edges)
        norm = []
        for r in self.routes:
            rr = frozenset(tuple(sorted(map(int, link))) for link in r)
            if not rr:
                raise InputError("routes must be nonempty")
            unknown = rr - links
            if unknown:
                raise InputError(f"unknown link(s) {sorted(unknown)}")
            norm.append(rr)
        self.routes = norm


def route_interaction_graph(rs: RouteSet) -> Graph:
    """One vertex per route; an edge when two routes share a link."""
    n = len(rs.routes)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rs.routes[i] & rs.routes[j]]
    return Graph(n, edges)


@dataclass
class BlockingResult:
    graph: Graph
    activity: float
    z: float
    success: list[float]
    removal: str = "closed"

    def rows(self) -> list[dict]:
        return [{"route": r, "success": p, "failure": 1.0 - p}
                for r, p in enumerate(self.success)]

    def plot_rows(self) -> list[dict]:
        return [{"series": "success", "x": r, "y": p} for r, p in enumerate(self.success)]


REMOVALS = ("closed", "vertex")


def blocking_probabilities(rs: RouteSet, activity: float | None = None,
                           removal: str = "closed") -> BlockingResult:
    """Success probability per route, ``Z(G minus r) / Z(G)`` on the route interaction graph.

    ``removal="closed"`` (default) deletes route r together with every route
    sharing a link with it, so the ratio is the probability that all links of
    r are free and a new call on r is carried. ``removal="vertex"`` deletes r
    alone, giving the probability that r itself is idle; that variant is not
    monotone in the activity (a route crossing several disjoint routes is idle
    more often once they become busy).
    """
    if removal not in REMOVALS:
        raise InputError(f"removal must be one of {REMOVALS}, got {removal!r}")
    g = route_interaction_graph(rs)
    nu = rs.activity if activity is None else activity
    pf = PartitionFunction(g, nu)
    z = pf.z()
    drop = g.closed if removal == "closed" else (lambda r: 1 << r)
    success = [float(pf.z(g.full_mask & ~drop(r)) / z) for r in range(g.n)]
    return BlockingResult(g, nu, float(z), success, removal)


# --- site planning -----------------------------------------------------------------

@dataclass
class SitePlanProblem:
    candidates: np.ndarray
    min_distance: float
    weights: np.ndarray | None = None
    plan_probability: Callable[[VertexSet], float] | dict | None = None

    def __post_init__(self):
        self.candidates = np.asarray(self.candidates, dtype=float).reshape(-1, 2)
        if len(self.candidates) == 0:
            raise InputError("no candidate sites")
        if not self.min_distance > 0:
            raise InputError("minimum distance must be positive")
        w = np.ones(len(self.candidates)) if self.weights is None else np.asarray(self.weights, float)
        if len(w) != len(self.candidates) or np.any(w <= 0):
            raise InputError("site weights must be positive, one per candidate")
        self.weights = w

    def graph(self) -> Graph:
        return build_unit_disk_graph(self.candidates, self.min_distance, self.weights)

    def probability(self, plan: VertexSet) -> float:
        p = self.plan_probability
        if p is None:
            return 1.0
        if callable(p):
            return float(p(plan))
        return float(p.get(plan.members, p.get(",".join(map(str, plan.members)), 0.0)))


@dataclass
class SiteScores:
    scores: list[float]
    ranking: list[int]
    mode: str
    stderr: list[float] | None = None
    n_plans: int = 0

    @property
    def best(self) -> int:
        return self.ranking[0]

    def rows(self) -> list[dict]:
        out = []
        for rank, s in enumerate(self.ranking):
            row = {"rank": rank + 1, "site": s, "score": self.scores[s]}
            if self.stderr is not None:
                row["stderr"] = self.stderr[s]
            out.append(row)
        return out

    def plot_rows(self) -> list[dict]:
        return [{"series": "score", "x": s, "y": v} for s, v in enumerate(self.scores)]


def greedy_plan_probability(g: Graph, plan_mask: int) -> float:
    """Probability that random-order greedy insertion returns exactly ``plan_mask``.

    The greedy output equals a maximal set M iff every vertex outside M is
    preceded by one of its M-neighbours; permutations are counted by a DP over
    the set of already placed vertices.
    """
    n = g.n
    ways = {0: 1}
    for _ in range(n):
        nxt: dict[int, int] = {}
        for placed, cnt in ways.items():
            for v in range(n):
                if placed >> v & 1:
                    continue
                if not plan_mask >> v & 1 and not g.adj[v] & plan_mask & placed:
                    continue
                key = placed | (1 << v)
                nxt[key] = nxt.get(key, 0) + cnt
        ways = nxt
    return ways.get(g.full_mask, 0) / math.factorial(n)


def next_store_selection(p: SitePlanProblem, mode: str = "exact", n_samples: int = 2000,
                         seed=None, normalization: str = "joint",
                         plan_value: Callable[[VertexSet], float] | None = None,
                         cap: int = 18) -> SiteScores:
    """Score each candidate ``s`` by ``(1/Z) sum_{M contains s} w(M) P(M)`` over maximal plans M.

    ``Z`` sums ``P(M)`` over all plans. With ``normalization="conditional"``
    the sum is instead normalized by the probability mass of plans that
    contain ``s``. ``mode="sampler"`` draws plans with random greedy insertion
    and reweights each by ``P(M) / q(M)``, where ``q`` is the exact greedy
    output probability, giving a self-normalized importance estimate.
    """
    g = p.graph()
    value = plan_value or (lambda plan: plan.weight)
    if normalization not in ("joint", "conditional"):
        raise InputError(f"unknown normalization {normalization!r}")
    if g.n > cap:
        raise SizeCapError(f"{g.n} candidates exceed the site-planning cap {cap}")
    n = g.n
    if mode == "exact":
        plans = enumerate_maximal_independent_sets(g, cap)
        num = [[] for _ in range(n)]
        mass = [[] for _ in range(n)]
        zs = []
        for plan in plans:
            pr = p.probability(plan)
            zs.append(pr)
            wv = value(plan) * pr
            for s in plan.members:
                num[s].append(wv)
                mass[s].append(pr)
        z = math.fsum(zs)
        if normalization == "joint":
            scores = [math.fsum(num[s]) / z for s in range(n)]
        else:
            scores = [math.fsum(num[s]) / math.fsum(mass[s]) if mass[s] else 0.0 for s in range(n)]
        ranking = sorted(range(n), key=lambda s: (-scores[s], s))
        return SiteScores(scores, ranking, "exact", None, len(plans))
    if mode != "sampler":
        raise InputError(f"unknown mode {mode!r}")
    rng = make_rng(seed, "siteplan")
    q_cache: dict[int, float] = {}
    a = np.zeros((n_samples, n))
    b = np.zeros(n_samples)
    c = np.zeros((n_samples, n))
    for i in range(n_samples):
        plan = greedy_maximal_is(g, rng)
        m = plan.mask()
        if m not in q_cache:
            q_cache[m] = greedy_plan_probability(g, m)
        iw = p.probability(plan) / q_cache[m]
        b[i] = iw
        for s in plan.members:
            a[i, s] = value(plan) * iw
            c[i, s] = iw
    denom = c if normalization == "conditional" else np.repeat(b[:, None], n, axis=1)
    scores, errs = [], []
    for s in range(n):
        mb = denom[:, s].mean()
        if mb == 0:
            scores.append(0.0)
            errs.append(0.0)
            continue
        r = a[:, s].mean() / mb
        resid = a[:, s] - r * denom[:, s]
        scores.append(float(r))
        errs.append(float(resid.std(ddof=1) / (np.sqrt(n_samples) * mb)))
    ranking = sorted(range(n), key=lambda s: (-scores[s], s))
    return SiteScores(scores, ranking, "sampler", errs, len(q_cache))


# --- market graphs -------------------------------------------------------------------

MARKET_MODES = ("anticorrelated", "correlated", "uncorrelated")


@dataclass
class ReturnsMatrix:
    returns: np.ndarray
    threshold: float
    mode: str = "anticorrelated"
    names: list[str] | None = None

    def __post_init__(self):
        self.returns = np.asarray(self.returns, dtype=float)
        if self.returns.ndim != 2 or self.returns.shape[1] < 2:
            raise InputError("returns must be assets x time with at least 2 time points")
        if not np.all(np.isfinite(self.returns)):
            raise InputError("returns must be finite")
        if self.names is not None and len(self.names) != len(self.returns):
            raise InputError(f"{len(self.names)} names for {len(self.returns)} assets")
        _check_mode(self.mode, self.threshold)


def _check_mode(mode: str, theta: float) -> None:
    if mode not in MARKET_MODES:
        raise InputError(f"mode must be one of {MARKET_MODES}")
    if mode == "anticorrelated" and theta > 0:
        raise InputError("anticorrelated mode needs threshold <= 0")
    if mode == "correlated" and theta < 0:
        raise InputError("correlated mode needs threshold >= 0")
    if mode == "uncorrelated" and theta <= 0:
        raise InputError("uncorrelated mode needs threshold > 0")


@dataclass
class MarketGraph:
    graph: Graph
    assets: list[int]
    correlation: np.ndarray
    shift: float
    excluded: list[int] = field(default_factory=list)
    names: list[str] | None = None

    def max_clique(self):
        """Maximum weight clique, via MWIS on the complement."""
        sol = mwis_exact(complement(self.graph))
        return [self.assets[v] for v in sol.set.members], sol

    def rows(self) -> list[dict]:
        members, _ = self.max_clique()
        rows = []
        for i, a in enumerate(self.assets):
            row = {"asset": a, "weight": self.graph.weights[i], "in_clique": a in members}
            if self.names is not None:
                row["name"] = self.names[a]
            rows.append(row)
        return rows

    def plot_rows(self) -> list[dict]:
        out = []
        for i, a in enumerate(self.assets):
            for j, b in enumerate(self.assets):
                out.append({"series": "correlation", "x": a, "y": b,
                            "value": float(self.correlation[i, j])})
        return out


def market_edges(theta: np.ndarray, threshold: float, mode: str) -> list[tuple[int, int]]:
    _check_mode(mode, threshold)
    n = len(theta)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if mode == "anticorrelated":
        return [(i, j) for i, j in pairs if theta[i, j] <= threshold]
    if mode == "correlated":
        return [(i, j) for i, j in pairs if theta[i, j] >= threshold]
    return [(i, j) for i, j in pairs if abs(theta[i, j]) < threshold]


def market_graph_from_correlation(theta, threshold: float, mode: str,
                                  weights: Sequence[float] | None = None) -> Graph:
    theta = np.asarray(theta, dtype=float)
    return Graph(len(theta), market_edges(theta, threshold, mode), weights)


def market_graph(r: ReturnsMatrix) -> MarketGraph:
    """Pearson-correlation market graph; weights are mean returns shifted to be positive.

    Assets with zero variance have no correlation and are dropped with a warning.
    """
    std = r.returns.std(axis=1)
    keep = [i for i in range(len(std)) if std[i] > 0]
    excluded = [i for i in range(len(std)) if std[i] == 0]
    for i in excluded:
        log.warning("asset %d has zero variance; excluded from the market graph", i)
    if not keep:
        raise InputError("no asset with nonzero variance")
    data = r.returns[keep]
    theta = np.corrcoef(data) if len(keep) > 1 else np.ones((1, 1))
    mean = data.mean(axis=1)
    low = float(mean.min())
    shift = 0.0 if low > 0 else -low + 1e-6 * max(1.0, float(np.abs(mean).max()))
    g = market_graph_from_correlation(theta, r.threshold, r.mode, mean + shift)
    return MarketGraph(g, keep, theta, shift, excluded, r.names)


# --- scheduling -------------------------------------------------------------------------

@dataclass
class ScheduleResult:
    conflict_graph: Graph
    k: int
    rounds: list[int | None]
    feasible: bool
    excluded: list[int]

    def rows(self) -> list[dict]:
        return [{"task": t, "round": r if r is not None else "", "excluded": r is None}
                for t, r in enumerate(self.rounds)]

    def plot_rows(self) -> list[dict]:
        return [{"series": "round", "x": t, "y": r if r is not None else 0}
                for t, r in enumerate(self.rounds)]


def schedule_tasks(tasks: Sequence[Sequence], k: int, weights: Sequence[float] | None = None) -> ScheduleResult:
    """Assign tasks to ``k`` rounds so tasks sharing an asset never share a round.

    Built on the colouring gadget; when no proper k-colouring exists, the
    least valuable tasks are left out (rounds are 1-based, ``None`` = excluded).
    """
    if k < 1:
        raise InputError("need at least one round")
    sets = [set(t) for t in tasks]
    n = len(sets)
    g = Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n) if sets[i] & sets[j]], weights)
    cert = coloring_to_mis(g, k, g.weights)
    sol = mwis_exact(cert.derived)
    ans = decode(cert, sol.set)
    colors = ans.payload["colors"]
    rounds = [None if c is None else c + 1 for c in colors]
    excluded = [t for t, r in enumerate(rounds) if r is None]
    return ScheduleResult(g, k, rounds, not excluded, excluded)


# --- antennas -----------------------------------------------------------------------------

@dataclass
class AntennaPlan:
    graph: Graph
    placement: VertexSet
    unit_disk: bool
    register: object = None
    schedule: object = None

    def rows(self) -> list[dict]:
        return [{"antenna": i, "value": self.graph.weights[i], "placed": i in self.placement}
                for i in range(self.graph.n)]

    def plot_rows(self) -> list[dict]:
        return [{"series": "placed" if i in self.placement else "idle",
                 "x": self.graph.coords[i][0], "y": self.graph.coords[i][1]}
                for i in range(self.graph.n)]


def antenna_plan(locations, ranges, values=None) -> AntennaPlan:
    """Most valuable set of antennas with pairwise distance above the summed ranges."""
    from .rydberg import compile_register

    pts = np.asarray(locations, dtype=float).reshape(-1, 2)
    rng_ = np.asarray(ranges, dtype=float).reshape(-1)
    if len(rng_) == 1 and len(pts) > 1:
        rng_ = np.repeat(rng_, len(pts))
    if len(rng_) != len(pts) or np.any(rng_ <= 0):
        raise InputError("ranges must be positive, one per location")
    vals = np.ones(len(pts)) if values is None else np.asarray(values, dtype=float)
    uniform = bool(np.all(rng_ == rng_[0])) if len(rng_) else True
    if uniform and len(pts):
        g = build_unit_disk_graph(pts, 2 * rng_[0], vals)
    else:
        edges = [(i, j) for i in range(len(pts)) for j in range(i + 1, len(pts))
                 if np.hypot(*(pts[i] - pts[j])) <= rng_[i] + rng_[j]]
        g = Graph(len(pts), edges, vals, pts.tolist(), None, "geometric")
    sol = mwis_exact(g)
    plan = AntennaPlan(g, sol.set, uniform)
    if uniform and len(pts):
        plan.register, plan.schedule = compile_register(g)
    return plan
