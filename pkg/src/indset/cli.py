"""Command-line entry point: ``indset <command> [<variant>] [options]``.

Every run writes its artifacts plus ``manifest.json`` into ``--out``. Exit
codes: 0 ok, 1 usage, 2 invalid input, 3 size cap exceeded, 4 internal
invariant failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import applications as apps
from . import generate, oracle, plotting, postprocess, reductions, rydberg, sampling
from .errors import IndsetError, InputError, InvariantError
from .graph import Graph, VertexSet, classify_set, complement, graph_to_dict, load_graph, save_graph
from .rng import BIT_GENERATOR, make_rng

log = logging.getLogger("indset")

CAP_KEYS = {
    "enum": "ENUMERATION_CAP",
    "mwis": "MWIS_CAP",
    "subset": "SUBSET_SEARCH_CAP",
    "chromatic": "CHROMATIC_CAP",
    "partition": "PARTITION_CAP",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- output helpers -------------------------------------------------------------------

class Run:
    """Collects artifacts for one invocation and writes them with the manifest."""

    def __init__(self, args, argv):
        self.args = args
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.inputs: dict[str, str] = {}
        self.files: list[str] = []
        self.meta: dict = {}
        self.argv = argv

    def read_input(self, path) -> bytes:
        data = Path(path).read_bytes()
        self.inputs[str(path)] = hashlib.sha256(data).hexdigest()
        return data

    def graph(self, path) -> Graph:
        self.read_input(path)
        return load_graph(path)

    def write_json(self, name: str, obj) -> None:
        (self.out / name).write_text(json.dumps(_plain(obj), indent=1, sort_keys=True) + "\n")
        self.files.append(name)

    def write_csv(self, name: str, rows: list[dict]) -> None:
        fields: list[str] = []
        for r in rows:
            for k in r:
                if k not in fields:
                    fields.append(k)
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(v) for k, v in r.items()})
        (self.out / name).write_text(buf.getvalue())
        self.files.append(name)

    def write_result(self, stem: str, obj: dict) -> None:
        if self.args.format == "csv":
            self.write_csv(stem + ".csv", [obj])
        else:
            self.write_json(stem + ".json", obj)

    def plot_data(self, rows: list[dict], always: bool = False) -> None:
        if always or self.args.emit_plot_data:
            plotting.write_long_csv(rows, self.out / "plot_data.csv")
            self.files.append("plot_data.csv")

    def figure(self, name: str, fn, *a, **kw) -> None:
        if self.args.plot:
            fn(*a, path=self.out / name, **kw)
            self.files.append(name)

    def finish(self, wall: float) -> None:
        snapshot = {k: v for k, v in sorted(vars(self.args).items())
                    if k not in ("out", "func") and not callable(v)}
        manifest = {
            "subcommand": " ".join(x for x in (self.args.command, getattr(self.args, "variant", None)) if x),
            "input_hashes": dict(sorted(self.inputs.items())),
            "seed": self.args.seed,
            "config": _plain(snapshot),
            "tool_version": __version__,
            "bit_generator": BIT_GENERATOR,
            "artifacts": sorted(self.files),
            "metadata": _plain(self.meta),
            "wall_time_s": round(wall, 6),
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, VertexSet):
        return list(obj.members)
    return obj


def _cell(v):
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    if isinstance(v, bool):
        return str(v).lower()
    return v


def _apply_caps(caps: list[str]) -> dict[str, int]:
    out = {}
    for item in caps or []:
        key, _, val = item.partition("=")
        if key not in CAP_KEYS or not val.isdigit():
            raise UsageError(f"--cap expects one of {sorted(CAP_KEYS)}=INT, got {item!r}")
        out[key] = int(val)
    return out


def _cap(args, key: str) -> int:
    return args.caps.get(key, getattr(oracle, CAP_KEYS[key]))


# --- commands ---------------------------------------------------------------------------

def cmd_gen(run: Run, a) -> None:
    seed = make_rng(a.seed, "gen")
    if a.variant == "udg":
        g = generate.random_udg(a.n, a.radius, a.density, seed, connected=a.connected)
    elif a.variant == "er":
        g = generate.erdos_renyi(a.n, a.p, seed)
    elif a.variant == "lattice":
        g = generate.lattice(a.rows, a.cols, a.spacing, a.radius, a.filling, seed)
    else:
        g = generate.chain(a.n, a.spacing, a.radius)
    if a.weights == "random":
        from .graph import set_weights

        g = set_weights(g, np.round(make_rng(a.seed, "weights").uniform(0.5, 2.0, g.n), 6))
    run.write_json("graph.json", graph_to_dict(g))
    run.figure("graph.png", plotting.render_graph, g, title=f"{a.variant} n={g.n}")


def cmd_solve(run: Run, a) -> None:
    g = run.graph(a.graph)
    p = a.variant
    if p == "mis":
        sol = oracle.mis_exact(g, cap=_cap(a, "mwis"), time_limit=a.time_limit)
    elif p == "mwis":
        sol = oracle.mwis_exact(g, cap=_cap(a, "mwis"), time_limit=a.time_limit)
    elif p == "clique":
        cert = reductions.clique_or_cover(g, "max_clique")
        inner = oracle.mwis_exact(cert.derived, cap=_cap(a, "mwis"), time_limit=a.time_limit)
        sol = oracle.ExactSolution("clique", VertexSet.of(g, inner.set.members), inner.objective,
                                   inner.optimal, inner.nodes_explored)
    elif p == "vcover":
        inner = oracle.mwis_exact(g, cap=_cap(a, "mwis"), time_limit=a.time_limit)
        cover = [v for v in range(g.n) if v not in inner.set.members]
        vs = VertexSet.of(g, cover)
        sol = oracle.ExactSolution("vcover", vs, vs.weight, inner.optimal, inner.nodes_explored)
    elif p == "mds":
        sol = oracle.mds_exact(g, cap=_cap(a, "subset"))
    elif p == "mcds":
        sol = oracle.mcds_exact(g, cap=_cap(a, "subset"))
    else:
        k, colors = oracle.chromatic_number_exact(g, cap=_cap(a, "chromatic"))
        if not oracle.is_proper_coloring(g, colors):
            raise InvariantError("chromatic witness is not a proper colouring")
        run.write_result("solution", {"problem": "chromatic", "chromatic_number": k, "coloring": colors})
        run.figure("solution.png", plotting.render_graph, g, title=f"chromatic number {k}")
        return
    if not oracle.verify(g, sol):
        raise InvariantError(f"{p} solution failed re-validation")
    run.write_result("solution", sol.to_dict())
    run.figure("solution.png", plotting.render_graph, g, highlight=sol.set.members,
               title=f"{p}: objective {sol.objective:g}")


def cmd_count(run: Run, a) -> None:
    g = run.graph(a.graph)
    res = oracle.partition_function(g, a.nu, cap=_cap(a, "partition"))
    out = res.to_dict()
    out["n"] = g.n
    run.write_result("count", out)


def cmd_reduce(run: Run, a) -> None:
    if a.variant == "coloring":
        if not a.graph:
            raise InputError("reduce coloring needs --graph")
        cert = reductions.coloring_to_mis(run.graph(a.graph), a.k)
    elif a.variant == "sat":
        if not a.cnf:
            raise InputError("reduce sat needs --cnf")
        cert = reductions.sat_to_mis(reductions.parse_dimacs(run.read_input(a.cnf).decode()))
    else:
        if not a.seq:
            raise InputError("reduce paintshop needs --seq")
        cert = reductions.paintshop_to_mwis(a.seq)
    run.write_json("certificate.json", cert.to_dict())
    run.write_json("derived_graph.json", graph_to_dict(cert.derived))


def cmd_decode(run: Run, a) -> None:
    cert = reductions.ReductionCertificate.from_dict(json.loads(run.read_input(a.cert)))
    if a.solution:
        sol = json.loads(run.read_input(a.solution))
        members = sol["set"] if isinstance(sol, dict) else sol
    else:
        members = oracle.mwis_exact(cert.derived, cap=_cap(a, "mwis")).set.members
    ans = reductions.decode(cert, members)
    out = ans.to_dict()
    out["solution"] = list(members)
    run.write_result("answer", out)


def cmd_sample(run: Run, a) -> None:
    g = run.graph(a.graph)
    cfg = sampling.SamplerConfig(a.seed, a.burn_in, a.thinning, a.nu)
    if a.variant == "greedy":
        rngs = make_rng(a.seed, "greedy")
        samples = [sampling.greedy_maximal_is(g, rngs, a.order) for _ in range(a.n_samples)]
    else:
        samples = sampling.gibbs_sample_is(g, cfg, a.n_samples, a.chains, a.threads)
    for s in samples:
        if not g.is_independent_mask(s.mask()):
            raise InvariantError("sampler emitted a dependent set")
    header = sampling.sampler_metadata(cfg, g.n, a.variant, a.n_samples)
    sampling.write_samples(run.out / "samples.jsonl", samples, header)
    run.files.append("samples.jsonl")
    sizes: dict[int, int] = {}
    for s in samples:
        sizes[len(s)] = sizes.get(len(s), 0) + 1
    run.plot_data([{"series": "size", "x": k, "y": v} for k, v in sorted(sizes.items())])


def _read_set(run: Run, path, g: Graph):
    if not path:
        return None
    data = json.loads(run.read_input(path))
    return VertexSet.of(g, data["set"] if isinstance(data, dict) else data)


def cmd_pipeline(run: Run, a) -> None:
    g = run.graph(a.graph)
    start = _read_set(run, a.set, g)
    seed = make_rng(a.seed, "pipeline", a.variant)
    traces = []
    if a.variant == "dominate":
        s = start if start is not None else VertexSet((), 0.0)
        s, t1 = postprocess.repair_to_independent(g, s, seed, trace=True)
        s, t2 = postprocess.complete_to_maximal(g, s, seed, trace=True)
        traces = [t1, t2]
        result = s
    elif a.variant == "connect":
        d = start if start is not None else oracle.mds_exact(g, cap=_cap(a, "subset")).set
        result, t = postprocess.connect_dominating(g, d, trace=True)
        traces = [t]
    else:
        if a.k is None:
            raise InputError("pipeline immunize needs -k")
        result, score, t = postprocess.immunize_budget(g, a.k, seed)
        traces = [t]
    flags = classify_set(g, result)
    out = {"stages": [t.to_dict() for t in traces], "result": list(result.members),
           "flags": vars(flags)}
    run.write_json("trace.json", out)
    run.figure("pipeline.png", plotting.render_graph, g, highlight=result.members, title=f"pipeline {a.variant}")


def _sim_inputs(run: Run, a):
    g = run.graph(a.graph)
    params = rydberg.CompileParams(a.T, a.omega_max, a.delta0, a.delta_final)
    cfg = rydberg.SimConfig(a.mode, a.step_factor)
    reg, sched = rydberg.compile_register(g, params)
    return g, params, cfg, reg, sched


def cmd_sim(run: Run, a) -> None:
    g, params, cfg, reg, sched = _sim_inputs(run, a)
    run.write_json("register.json", {"register": reg.to_dict(), "schedule": sched.to_dict()})
    run.meta.update(mode=cfg.mode, seed=a.seed,
                    input_hash=rydberg.content_hash(graph_to_dict(g), vars(params), cfg.mode))
    if a.variant == "groundstate":
        gs = rydberg.exact_ground_state(reg, sched, cfg)
        mw = oracle.mwis_exact(g)
        run.write_json("groundstate.json", {
            "energy": gs.energy, "bitstrings": gs.bitstrings(), "sets": gs.sets(),
            "oracle_set": list(mw.set.members),
            "oracle_in_ground_states": mw.set.members in gs.sets()})
        return
    if a.variant == "evolve":
        psi0 = rydberg.initial_state(reg, cfg)
        times, pops = [], []
        occ = ((psi0.basis_index[:, None] >> np.arange(g.n)[None, :]) & 1).astype(float)

        def record(t, psi):
            times.append(t)
            pops.append(float((np.abs(psi) ** 2) @ occ.sum(axis=1)))

        final = rydberg.evolve(psi0, reg, sched, cfg, callback=record)
        hist = rydberg.measure(final, a.shots, make_rng(a.seed, "measure"))
        run.meta.update(step=times[0] if times else 0.0, norm=final.norm)
        run.write_csv("histogram.csv", [{"bitstring": k, "count": v} for k, v in hist.items()])
        stride = max(1, len(times) // 400)
        rows = [{"series": "rydberg_count", "x": t, "y": y} for t, y in zip(times[::stride], pops[::stride])]
        run.plot_data(rows)
        run.figure("rydberg_count.png", plotting.render_lines,
                   {"<n_r>": (times[::stride], pops[::stride])}, xlabel="t", ylabel="mean Rydberg count")
        return
    res = rydberg.adiabatic_solve(g, None, a.shots, cfg, params, seed=make_rng(a.seed, "adiabatic"))
    run.meta.update(step=res.step)
    run.write_json("result.json", res.to_dict())
    run.write_csv("histogram.csv", [{"bitstring": k, "count": v} for k, v in res.histogram.items()])
    good = [rydberg.bitstring(int(b), g.n) for b, ok in
            zip(res.state.basis_index, rydberg.optimal_mask(g, res.state.basis_index, res.optimum)) if ok]
    run.plot_data([{"series": "count", "x": k, "y": v} for k, v in res.histogram.items()])
    run.figure("histogram.png", plotting.render_histogram, res.histogram, good=good,
               title=f"T={params.duration:g}  P(opt)={res.success_probability:.3f}")


def _load_app_input(run: Run, path) -> dict:
    try:
        return json.loads(run.read_input(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def cmd_app(run: Run, a) -> None:
    d = _load_app_input(run, a.input)
    v = a.variant
    try:
        if v == "lossnet":
            from .graph import graph_from_dict

            rs = apps.RouteSet(graph_from_dict(d["network"]), d["routes"], d.get("activity", 0.1))
            res = apps.blocking_probabilities(rs, removal=a.removal)
            run.write_csv("results.csv", res.rows())
            run.plot_data(res.plot_rows(), always=True)
            run.figure("figure.png", plotting.render_bars, list(range(len(res.success))), res.success,
                       xlabel="route", ylabel="success probability", title=f"nu={res.activity:g}")
        elif v == "siteplan":
            table = d.get("plan_probability")
            prob = None if table is None else {tuple(int(x) for x in k.split(",") if x): float(p)
                                               for k, p in table.items()}
            p = apps.SitePlanProblem(d["candidates"], d["min_distance"], d.get("weights"), prob)
            res = apps.next_store_selection(p, a.mode, a.n_samples, make_rng(a.seed, "siteplan"),
                                            a.normalization)
            run.write_csv("results.csv", res.rows())
            run.plot_data(res.plot_rows(), always=True)
            run.figure("figure.png", plotting.render_graph, p.graph(), highlight=[res.best],
                       title=f"next site: {res.best}")
        elif v == "market":
            r = apps.ReturnsMatrix(d["returns"], d["threshold"], d.get("mode", "anticorrelated"),
                                   d.get("names"))
            res = apps.market_graph(r)
            members, _ = res.max_clique()
            run.write_csv("results.csv", res.rows())
            run.plot_data(res.plot_rows(), always=True)
            run.figure("figure.png", plotting.render_heatmap, res.correlation,
                       labels=[str(x) for x in res.assets], title=f"max clique {members}")
        elif v == "schedule":
            res = apps.schedule_tasks(d["tasks"], d.get("rounds", a.k or 1), d.get("weights"))
            run.write_csv("results.csv", res.rows())
            run.plot_data(res.plot_rows(), always=True)
            run.figure("figure.png", plotting.render_graph, res.conflict_graph,
                       highlight=[t for t, r in enumerate(res.rounds) if r is not None],
                       title=f"{res.k} rounds, excluded {res.excluded}")
        else:
            res = apps.antenna_plan(d["locations"], d["ranges"], d.get("values"))
            run.write_csv("results.csv", res.rows())
            run.plot_data(res.plot_rows(), always=True)
            if res.register is not None:
                run.write_json("register.json", {"register": res.register.to_dict(),
                                                 "schedule": res.schedule.to_dict()})
            run.figure("figure.png", plotting.render_graph, res.graph, highlight=res.placement.members,
                       title=f"value {res.placement.weight:g}", show_radius=res.unit_disk)
    except KeyError as exc:
        raise InputError(f"{a.input}: missing field {exc}") from exc
    if a.format == "json":
        run.write_json("results.json", {"rows": res.rows()})


# --- parser --------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="out")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--cap", action="append", default=[], metavar="KEY=N",
                        help=f"override a size cap; keys: {', '.join(sorted(CAP_KEYS))}")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--emit-plot-data", action="store_true")
    common.add_argument("--no-plot", dest="plot", action="store_false")

    p = _Parser(prog="indset", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def variants(name, choices, func, help_):
        sp = sub.add_parser(name, help=help_)
        vs = sp.add_subparsers(dest="variant", required=True, parser_class=_Parser)
        out = {}
        for c in choices:
            out[c] = vs.add_parser(c, parents=[common])
            out[c].set_defaults(func=func)
        return out

    gen = variants("gen", ["udg", "er", "lattice", "chain"], cmd_gen, "generate an instance")
    for name, q in gen.items():
        q.add_argument("--n", type=int, default=10)
        q.add_argument("--radius", type=float, default=1.0)
        q.add_argument("--density", type=float, default=1.5)
        q.add_argument("--connected", action="store_true")
        q.add_argument("--p", type=float, default=0.3)
        q.add_argument("--rows", type=int, default=3)
        q.add_argument("--cols", type=int, default=3)
        q.add_argument("--spacing", type=float, default=0.8 if name == "chain" else 1.0)
        q.add_argument("--filling", type=float, default=1.0)
        q.add_argument("--weights", choices=("uniform", "random"), default="uniform")
        if name == "lattice":
            q.set_defaults(radius=1.5)

    solve = variants("solve", ["mis", "mwis", "clique", "vcover", "mds", "mcds", "chromatic"],
                     cmd_solve, "exact solvers")
    for q in solve.values():
        q.add_argument("--graph", required=True)
        q.add_argument("--time-limit", type=float, default=None)

    cnt = sub.add_parser("count", parents=[common], help="partition function / IS count")
    cnt.set_defaults(func=cmd_count, variant=None)
    cnt.add_argument("--graph", required=True)
    cnt.add_argument("--nu", type=float, default=1.0)

    red = variants("reduce", ["coloring", "sat", "paintshop"], cmd_reduce, "build a reduction certificate")
    for q in red.values():
        q.add_argument("--graph")
        q.add_argument("-k", "--k", type=int, default=3)
        q.add_argument("--cnf")
        q.add_argument("--seq")

    dec = sub.add_parser("decode", parents=[common], help="decode an MIS solution through a certificate")
    dec.set_defaults(func=cmd_decode, variant=None)
    dec.add_argument("--cert", required=True)
    dec.add_argument("--solution", help="solution JSON; solved exactly when omitted")

    smp = variants("sample", ["greedy", "gibbs"], cmd_sample, "sample independent sets")
    for q in smp.values():
        q.add_argument("--graph", required=True)
        q.add_argument("--n-samples", type=int, default=1000)
        q.add_argument("--nu", type=float, default=1.0)
        q.add_argument("--burn-in", type=int, default=None)
        q.add_argument("--thinning", type=int, default=None)
        q.add_argument("--chains", type=int, default=1)
        q.add_argument("--order", choices=("uniform", "min_degree"), default="uniform")

    pipe = variants("pipeline", ["dominate", "connect", "immunize"], cmd_pipeline, "hybrid postprocessing")
    for q in pipe.values():
        q.add_argument("--graph", required=True)
        q.add_argument("--set", help="starting vertex set JSON")
        q.add_argument("-k", "--k", type=int)

    sim = variants("sim", ["evolve", "adiabatic", "groundstate"], cmd_sim, "Rydberg simulation")
    for q in sim.values():
        q.add_argument("--graph", required=True)
        q.add_argument("--T", type=float, default=20.0)
        q.add_argument("--omega-max", type=float, default=1.0)
        q.add_argument("--delta0", type=float, default=2.0)
        q.add_argument("--delta-final", type=float, default=2.0)
        q.add_argument("--mode", choices=rydberg.MODES, default="hard_blockade")
        q.add_argument("--step-factor", type=float, default=0.1)
        q.add_argument("--shots", type=int, default=1000)

    app = variants("app", ["lossnet", "siteplan", "market", "schedule", "antenna"], cmd_app,
                   "application scenarios")
    for q in app.values():
        q.add_argument("--input", required=True)
        q.add_argument("--mode", choices=("exact", "sampler"), default="exact")
        q.add_argument("--n-samples", type=int, default=2000)
        q.add_argument("--normalization", choices=("joint", "conditional"), default="joint")
        q.add_argument("-k", "--k", type=int)
        q.add_argument("--removal", choices=apps.REMOVALS, default="closed",
                       help="lossnet: delete the route's closed neighbourhood or the route alone")
    return p


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        args.caps = _apply_caps(args.cap)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        r = Run(args, argv)
        args.func(r, args)
        r.finish(time.perf_counter() - t0)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except IndsetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # anything else is a bug
        log.exception("internal failure")
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 4
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
