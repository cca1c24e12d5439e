"""Reductions from other problems to (weighted) maximum independent set.

Each constructor returns a :class:`ReductionCertificate` holding the derived
graph and a label per derived vertex, so any MWIS backend's answer can be
decoded and checked on the source side.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Sequence

from .errors import InputError
from .graph import Graph, VertexSet, complement, graph_from_dict, graph_to_dict


@dataclass
class ReductionCertificate:
    derived: Graph
    source_kind: str
    decode_map: list[tuple]
    threshold: float
    source: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "source_kind": self.source_kind,
            "threshold": self.threshold,
            "source": self.source,
            "decode_map": [list(lbl) for lbl in self.decode_map],
            "derived": graph_to_dict(self.derived),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReductionCertificate":
        try:
            return cls(graph_from_dict(d["derived"]), d["source_kind"],
                       [tuple(x) for x in d["decode_map"]], d["threshold"], d.get("source", {}))
        except KeyError as exc:
            raise InputError(f"malformed certificate: missing {exc}") from exc


# --- graph colouring -----------------------------------------------------------

def coloring_to_mis(g: Graph, k: int, weights: Sequence[float] | None = None) -> ReductionCertificate:
    """K copies of each vertex joined in a clique; equal colours of adjacent vertices conflict.

    Derived vertex ``v*k + c`` means "vertex v gets colour c". The source graph
    is K-colourable exactly when the derived MIS reaches ``|V|``. Optional
    ``weights`` carry a per-source-vertex value onto all its copies.
    """
    if k < 1:
        raise InputError(f"need at least one colour, got {k}")
    edges = []
    for v in range(g.n):
        for a in range(k):
            for b in range(a + 1, k):
                edges.append((v * k + a, v * k + b))
    for u, v in g.edges:
        for c in range(k):
            edges.append((u * k + c, v * k + c))
    w = None if weights is None else [float(weights[v]) for v in range(g.n) for _ in range(k)]
    labels = [(v, c) for v in range(g.n) for c in range(k)]
    return ReductionCertificate(Graph(g.n * k, edges, w), "coloring", labels, float(g.n),
                                {"graph": graph_to_dict(g), "k": k})


# --- satisfiability ----------------------------------------------------------------

def parse_dimacs(text: str) -> list[list[int]]:
    clauses, cur = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line[0] in "cp%":
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(cur)
                cur = []
            else:
                cur.append(lit)
    if cur:
        clauses.append(cur)
    return clauses


def sat_to_mis(cnf: Sequence[Sequence[int]]) -> ReductionCertificate:
    """One vertex per literal occurrence, a clique per clause, edges between x and not-x.

    The formula is satisfiable iff the derived MIS equals the clause count.
    Repeated literals inside a clause are merged. A formula containing an empty
    clause is reported unsatisfiable with an empty derived graph.
    """
    clauses = [list(dict.fromkeys(int(x) for x in c)) for c in cnf]
    if not clauses:
        raise InputError("CNF has no clauses")
    if any(0 in c for c in clauses):
        raise InputError("literal 0 is not allowed")
    n_vars = max((abs(x) for c in clauses for x in c), default=0)
    src = {"clauses": clauses, "n_vars": n_vars}
    if any(len(c) == 0 for c in clauses):
        src["trivially_unsat"] = True
        return ReductionCertificate(Graph(0), "sat", [], float(len(clauses)), src)
    labels = [(ci, lit) for ci, c in enumerate(clauses) for lit in c]
    edges = set()
    for i, (ci, li) in enumerate(labels):
        for j in range(i + 1, len(labels)):
            cj, lj = labels[j]
            if ci == cj or li == -lj:
                edges.add((i, j))
    return ReductionCertificate(Graph(len(labels), edges), "sat", labels, float(len(clauses)), src)


def satisfies(clauses, assignment: dict[int, bool]) -> bool:
    return all(any(assignment.get(abs(x), False) == (x > 0) for x in c) for c in clauses)


# --- binary paint shop ------------------------------------------------------------

def paint_switches(seq: str, first: dict[str, int]) -> int:
    """Colour changes along ``seq`` when each car's first occurrence gets ``first[car]``."""
    seen: set[str] = set()
    colors = []
    for car in seq:
        colors.append(first[car] if car not in seen else 1 - first[car])
        seen.add(car)
    return sum(a != b for a, b in zip(colors, colors[1:]))


def paintshop_to_mwis(seq: str) -> ReductionCertificate:
    """Weighted MIS whose optimum is ``B - (minimum colour switches)``.

    Per car: two vertices ``(car, 0)`` and ``(car, 1)`` (first occurrence painted
    colour 0 or 1), joined by an edge and weighted ``base_unit``. Per adjacent
    position pair of distinct cars: two mutually exclusive bonus vertices of
    weight 1, one for each joint colouring that avoids a switch there; a bonus
    vertex conflicts with the colour choices it contradicts. ``base_unit`` is
    larger than the bonus any single car can unlock, so every optimum picks
    exactly one colour per car.
    """
    seq = "".join(seq.split())
    cars = list(dict.fromkeys(seq))
    bad = [c for c in cars if seq.count(c) != 2]
    if bad:
        raise InputError(f"cars must appear exactly twice; offending: {''.join(bad)}")
    if not cars:
        raise InputError("empty paint sequence")
    base_unit = len(seq)
    index = {c: 2 * i for i, c in enumerate(cars)}
    labels: list[tuple] = []
    weights: list[float] = []
    edges = []
    for c in cars:
        labels += [("car", c, 0), ("car", c, 1)]
        weights += [float(base_unit)] * 2
        edges.append((index[c], index[c] + 1))
    seen: set[str] = set()
    second = []
    for car in seq:
        second.append(car in seen)
        seen.add(car)
    forced = 0
    for p in range(len(seq) - 1):
        a, b = seq[p], seq[p + 1]
        if a == b:
            forced += 1
            continue
        flip = int(second[p]) ^ int(second[p + 1])
        pair_ids = []
        for ca in (0, 1):
            cb = ca ^ flip
            vid = len(labels)
            labels.append(("bonus", p, ca, cb))
            weights.append(1.0)
            edges.append((vid, index[a] + (1 - ca)))
            edges.append((vid, index[b] + (1 - cb)))
            pair_ids.append(vid)
        edges.append(tuple(pair_ids))
    base = float(base_unit * len(cars) + len(seq) - 1)
    src = {"sequence": seq, "base": base, "base_unit": base_unit, "forced_switches": forced}
    return ReductionCertificate(Graph(len(labels), edges, weights), "paintshop", labels, base, src)


def paintshop_brute_force(seq: str) -> int:
    cars = list(dict.fromkeys(seq))
    return min(paint_switches(seq, dict(zip(cars, bits_))) for bits_ in product((0, 1), repeat=len(cars)))


# --- clique and vertex cover ------------------------------------------------------

def clique_or_cover(g: Graph, which: str) -> ReductionCertificate:
    if which == "max_clique":
        derived = complement(g)
    elif which == "min_vertex_cover":
        derived = g
    else:
        raise InputError(f"unknown target {which!r}")
    return ReductionCertificate(derived, which, [(v,) for v in range(g.n)], 0.0,
                                {"graph": graph_to_dict(g)})


# --- decoding -----------------------------------------------------------------------

@dataclass
class Answer:
    """Decoded source-side answer. ``valid`` comes from direct verification."""

    kind: str
    valid: bool
    payload: dict

    def to_dict(self) -> dict:
        return {"kind": self.kind, "valid": self.valid, **self.payload}


def decode(cert: ReductionCertificate, solution) -> Answer:
    members = solution.members if isinstance(solution, VertexSet) else tuple(solution)
    m = cert.derived.mask(members)
    if not cert.derived.is_independent_mask(m):
        raise InputError("solution is not independent in the derived graph")
    chosen = sorted(set(members))
    kind = cert.source_kind
    if kind == "coloring":
        src = graph_from_dict(cert.source["graph"])
        colors: list[int | None] = [None] * src.n
        for d in chosen:
            v, c = cert.decode_map[d]
            colors[v] = c
        proper = all(colors[i] is None or colors[j] is None or colors[i] != colors[j]
                     for i, j in src.edges)
        excluded = [v for v in range(src.n) if colors[v] is None]
        return Answer("coloring", proper, {
            "colorable": len(chosen) >= cert.threshold and proper,
            "colors": colors, "excluded": excluded, "k": cert.source["k"]})
    if kind == "sat":
        clauses = cert.source["clauses"]
        if cert.source.get("trivially_unsat"):
            return Answer("sat", True, {"satisfiable": False, "assignment": None,
                                        "reason": "empty clause"})
        assignment = {v: False for v in range(1, cert.source["n_vars"] + 1)}
        for d in chosen:
            _, lit = cert.decode_map[d]
            assignment[abs(lit)] = lit > 0
        if len(chosen) < cert.threshold:
            return Answer("sat", True, {"satisfiable": False, "assignment": None,
                                        "reason": "independent set below clause count"})
        ok = satisfies(clauses, assignment)
        return Answer("sat", ok, {"satisfiable": ok,
                                  "assignment": {str(k): v for k, v in assignment.items()}})
    if kind == "paintshop":
        seq = cert.source["sequence"]
        first: dict[str, int] = {}
        for d in chosen:
            lbl = cert.decode_map[d]
            if lbl[0] == "car":
                first[lbl[1]] = int(lbl[2])
        complete = all(c in first for c in seq)
        for c in seq:
            first.setdefault(c, 0)
        switches = paint_switches(seq, first)
        seen: set[str] = set()
        paint = []
        for car in seq:
            paint.append("RB"[first[car] if car not in seen else 1 - first[car]])
            seen.add(car)
        objective = cert.derived.weight_of(chosen)
        return Answer("paintshop", complete, {
            "paint": "".join(paint), "switches": switches,
            "switches_from_objective": cert.source["base"] - objective, "objective": objective})
    if kind == "max_clique":
        src = graph_from_dict(cert.source["graph"])
        ok = all(src.has_edge(i, j) for i in chosen for j in chosen if i < j)
        return Answer("max_clique", ok, {"clique": chosen})
    if kind == "min_vertex_cover":
        src = graph_from_dict(cert.source["graph"])
        cover = [v for v in range(src.n) if v not in set(chosen)]
        cs = set(cover)
        ok = all(i in cs or j in cs for i, j in src.edges)
        return Answer("min_vertex_cover", ok, {"cover": cover})
    raise InputError(f"unknown certificate kind {kind!r}")


def load_certificate(path) -> ReductionCertificate:
    return ReductionCertificate.from_dict(json.loads(Path(path).read_text()))
