"""Classical samplers over independent sets.

``greedy_maximal_is`` draws maximal independent sets by random-order greedy
insertion. ``gibbs_sample_is`` runs a single-site Metropolis chain whose
stationary law is the hard-core measure ``P(I) ~ prod_{i in I} nu_i``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import InputError
from .graph import Graph, VertexSet
from .rng import BIT_GENERATOR, make_rng


@dataclass
class SamplerConfig:
    """Markov chain settings. ``None`` for burn-in or thinning picks the calibrated default."""

    seed: int = 0
    burn_in: int | None = None
    thinning: int | None = None
    activity: float | Sequence[float] = 1.0

    def __post_init__(self):
        nu = self.activity
        vals = [nu] if isinstance(nu, (int, float)) else list(nu)
        if any(not (x > 0 and math.isfinite(x)) for x in vals):
            raise InputError("activities must be positive and finite")
        if self.burn_in is not None and self.burn_in < 0:
            raise InputError("burn_in must be >= 0")
        if self.thinning is not None and self.thinning < 1:
            raise InputError("thinning must be >= 1")

    def activities(self, n: int) -> list[float]:
        if isinstance(self.activity, (int, float)):
            return [float(self.activity)] * n
        nu = [float(x) for x in self.activity]
        if len(nu) != n:
            raise InputError(f"expected {n} activities, got {len(nu)}")
        return nu

    def resolved(self, n: int) -> tuple[int, int]:
        """Burn-in ``10 * n * max(1, nu_max)`` and thinning ``n`` unless set explicitly."""
        nu_max = max(self.activities(n), default=1.0)
        burn = self.burn_in if self.burn_in is not None else int(math.ceil(10 * n * max(1.0, nu_max)))
        thin = self.thinning if self.thinning is not None else max(1, n)
        return burn, thin


def greedy_maximal_is(g: Graph, seed=None, order: str = "uniform") -> VertexSet:
    """Insert vertices in random order whenever independence allows.

    ``order="uniform"`` uses a uniformly random permutation. ``order="min_degree"``
    visits low-degree vertices first with random tie-breaks.
    """
    rng = make_rng(seed)
    perm = rng.permutation(g.n)
    if order == "min_degree":
        perm = sorted(perm.tolist(), key=lambda v: g.degree(v))
    elif order != "uniform":
        raise InputError(f"unknown greedy order {order!r}")
    chosen = blocked = 0
    for v in perm:
        v = int(v)
        if not blocked >> v & 1:
            chosen |= 1 << v
            blocked |= g.adj[v] | (1 << v)
    return VertexSet.from_mask(g, chosen)


def _chain(g: Graph, nu: list[float], burn: int, thin: int, n_samples: int,
           rng: np.random.Generator) -> list[int]:
    n = g.n
    out: list[int] = []
    if n == 0:
        return [0] * n_samples
    total = burn + thin * n_samples
    picks = rng.integers(0, n, size=total)
    coins = rng.random(total)
    p_in = [min(1.0, x) for x in nu]
    p_out = [min(1.0, 1.0 / x) for x in nu]
    adj = g.adj
    state = 0
    for t in range(total):
        v = int(picks[t])
        bit = 1 << v
        if state & bit:
            if coins[t] < p_out[v]:
                state ^= bit
        elif not adj[v] & state and coins[t] < p_in[v]:
            state |= bit
        if t >= burn and (t - burn + 1) % thin == 0:
            out.append(state)
    return out


def gibbs_sample_is(g: Graph, cfg: SamplerConfig, n_samples: int, n_chains: int = 1,
                    threads: int = 1) -> list[VertexSet]:
    """Samples from the hard-core measure via single-site Metropolis toggles.

    Each step picks a uniform vertex and proposes flipping it. Insertions that
    would break independence are rejected; otherwise insertion is accepted with
    probability ``min(1, nu_v)`` and deletion with ``min(1, 1/nu_v)``. With
    several chains the samples are split evenly and concatenated in chain order.
    """
    if n_samples < 0:
        raise InputError("n_samples must be >= 0")
    nu = cfg.activities(g.n)
    burn, thin = cfg.resolved(g.n)
    counts = [n_samples // n_chains + (i < n_samples % n_chains) for i in range(n_chains)]
    rngs = [make_rng(cfg.seed, "gibbs", f"chain{i}") for i in range(n_chains)]
    jobs = [(g, nu, burn, thin, c, r) for c, r in zip(counts, rngs)]
    if threads > 1 and n_chains > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda a: _chain(*a), jobs))
    else:
        results = [_chain(*a) for a in jobs]
    return [VertexSet.from_mask(g, m) for chain in results for m in chain]


def estimate_expectation(samples: Sequence[VertexSet], f: Callable[[VertexSet], float]) -> tuple[float, float]:
    """Sample mean of ``f`` and its standard error."""
    if len(samples) < 2:
        raise InputError("need at least two samples")
    vals = np.array([f(s) for s in samples], dtype=float)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(len(vals)))


def empirical_distribution(samples: Sequence[VertexSet]) -> dict[tuple[int, ...], float]:
    counts: dict[tuple[int, ...], int] = {}
    for s in samples:
        counts[s.members] = counts.get(s.members, 0) + 1
    total = len(samples)
    return {k: c / total for k, c in counts.items()}


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def write_samples(path, samples: Sequence[VertexSet], header: dict) -> None:
    """JSON-lines dump: a header record, then one set per line."""
    with Path(path).open("w") as fh:
        fh.write(json.dumps({"header": header}, sort_keys=True) + "\n")
        for s in samples:
            fh.write(json.dumps({"set": list(s.members), "weight": s.weight}) + "\n")


def read_samples(path) -> tuple[dict, list[tuple[int, ...]]]:
    lines = Path(path).read_text().splitlines()
    header = json.loads(lines[0])["header"]
    return header, [tuple(json.loads(line)["set"]) for line in lines[1:] if line.strip()]


def sampler_metadata(cfg: SamplerConfig, n: int, kind: str, n_samples: int) -> dict:
    burn, thin = cfg.resolved(n)
    meta = asdict(cfg)
    meta.update(kind=kind, n_samples=n_samples, burn_in=burn, thinning=thin,
                bit_generator=BIT_GENERATOR)
    if not isinstance(meta["activity"], (int, float)):
        meta["activity"] = list(meta["activity"])
    return meta
