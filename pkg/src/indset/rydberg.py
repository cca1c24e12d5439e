r"""State-vector simulation of the analog Rydberg Hamiltonian.

.. math::

    H(t) = \sum_j \frac{\Omega(t)}{2}\left(e^{i\phi(t)}|g_j\rangle\langle r_j| + h.c.\right)
           - \sum_j (\Delta(t) + \delta_j)\, n_j + \sum_{j<k} \frac{C_6}{|x_j - x_k|^6} n_j n_k

with :math:`\hbar = 1`. Basis states are integer bitmasks, bit ``j`` set when
atom ``j`` is in the Rydberg state. Two interaction modes exist:

``physical``
    full :math:`2^N` basis and :math:`1/R^6` couplings cut off beyond
    ``cutoff_factor * R_b``.
``hard_blockade``
    basis restricted to independent sets of the unit-disk graph at the
    blockade radius; interactions vanish inside the subspace and drive
    elements leaving it are dropped.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import InputError, InvariantError, SizeCapError
from .graph import Graph, build_unit_disk_graph
from .rng import make_rng

MODES = ("physical", "hard_blockade")
DENSE_LIMIT = 64


def blockade_radius(c6: float, delta: float) -> float:
    """Distance at which the pair interaction equals the detuning, ``(C6/Delta)**(1/6)``."""
    if not (c6 > 0 and delta > 0):
        raise InputError(f"c6 and delta must be positive, got {c6}, {delta}")
    return (c6 / delta) ** (1.0 / 6.0)


@dataclass
class AtomRegister:
    positions: np.ndarray
    c6: float
    weights: np.ndarray | None = None
    radius: float | None = None

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(self.positions)):
            raise InputError("atom positions must be finite")
        if not self.c6 > 0:
            raise InputError("c6 must be positive")
        d = self.distances()
        iu = np.triu_indices(self.n, 1)
        if self.n > 1 and np.min(d[iu]) <= 0:
            raise InputError("atom positions must be distinct")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)

    @property
    def n(self) -> int:
        return len(self.positions)

    def distances(self) -> np.ndarray:
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])

    def interactions(self, cutoff: float | None = None) -> np.ndarray:
        """Pair couplings ``C6 / r**6``, zeroed beyond ``cutoff`` and on the diagonal."""
        d = self.distances()
        with np.errstate(divide="ignore"):
            v = self.c6 / d**6
        np.fill_diagonal(v, 0.0)
        if cutoff is not None:
            v[d > cutoff] = 0.0
        return v

    def graph(self) -> Graph:
        if self.radius is None:
            raise InputError("register has no blockade radius")
        return build_unit_disk_graph(self.positions, self.radius)

    def to_dict(self) -> dict:
        return {"positions": self.positions.tolist(), "c6": self.c6,
                "weights": None if self.weights is None else self.weights.tolist(),
                "radius": self.radius}

    @classmethod
    def from_dict(cls, d: dict) -> "AtomRegister":
        return cls(d["positions"], d["c6"], d.get("weights"), d.get("radius"))


@dataclass
class PulseSchedule:
    """Piecewise-linear global drive plus static per-atom detuning offsets."""

    times: np.ndarray
    omega: np.ndarray
    delta: np.ndarray
    local_detuning: np.ndarray
    phase: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.omega = np.asarray(self.omega, dtype=float)
        self.delta = np.asarray(self.delta, dtype=float)
        self.local_detuning = np.asarray(self.local_detuning, dtype=float)
        if self.phase is not None:
            self.phase = np.asarray(self.phase, dtype=float)
        arrays = [self.times, self.omega, self.delta] + ([self.phase] if self.phase is not None else [])
        if len({len(a) for a in arrays}) != 1 or len(self.times) < 2:
            raise InputError("schedule arrays need equal length >= 2")
        if not all(np.all(np.isfinite(a)) for a in arrays + [self.local_detuning]):
            raise InputError("schedule values must be finite")
        if self.times[0] != 0 or np.any(np.diff(self.times) <= 0):
            raise InputError("breakpoints must increase strictly from 0")
        if np.any(self.omega < 0):
            raise InputError("Rabi frequency must be nonnegative")

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    def omega_at(self, t):
        return np.interp(t, self.times, self.omega)

    def delta_at(self, t):
        return np.interp(t, self.times, self.delta)

    def phase_at(self, t):
        return 0.0 if self.phase is None else np.interp(t, self.times, self.phase)

    @classmethod
    def constant(cls, duration: float, omega: float, delta: float, n_atoms: int,
                 local_detuning=None, phase: float | None = None) -> "PulseSchedule":
        loc = np.zeros(n_atoms) if local_detuning is None else local_detuning
        ph = None if phase is None else [phase, phase]
        return cls([0.0, duration], [omega, omega], [delta, delta], loc, ph)

    @classmethod
    def sweep(cls, duration: float, omega_max: float, delta0: float, delta_final: float,
              n_atoms: int, local_detuning=None, ramp: float = 0.1) -> "PulseSchedule":
        """Omega ramps up over the first ``ramp`` fraction, holds, ramps down over the last;
        Delta goes linearly from ``-delta0`` to ``+delta_final``."""
        T = float(duration)
        t = [0.0, ramp * T, (1 - ramp) * T, T]
        omega = [0.0, omega_max, omega_max, 0.0]
        delta = [-delta0 + (delta_final + delta0) * x / T for x in t]
        loc = np.zeros(n_atoms) if local_detuning is None else local_detuning
        return cls(t, omega, delta, loc)

    def to_dict(self) -> dict:
        return {"times": self.times.tolist(), "omega": self.omega.tolist(),
                "delta": self.delta.tolist(), "local_detuning": self.local_detuning.tolist(),
                "phase": None if self.phase is None else self.phase.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "PulseSchedule":
        return cls(d["times"], d["omega"], d["delta"], d["local_detuning"], d.get("phase"))


@dataclass
class SimConfig:
    mode: str = "hard_blockade"
    step_factor: float = 0.1
    cutoff_factor: float = 4.0
    max_full_atoms: int = 16
    max_blockaded_states: int = 2**20
    norm_tol: float = 1e-8

    def __post_init__(self):
        if self.mode not in MODES:
            raise InputError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 < self.step_factor <= 0.1:
            raise InputError("step_factor must lie in (0, 0.1]")


@dataclass
class QuantumState:
    basis: str
    amplitudes: np.ndarray
    basis_index: np.ndarray
    n_atoms: int

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()

    def bitstring(self, k: int) -> str:
        return bitstring(int(self.basis_index[k]), self.n_atoms)

    def amplitude_of(self, mask: int) -> complex:
        k = np.searchsorted(self.basis_index, mask)
        if k < len(self.basis_index) and self.basis_index[k] == mask:
            return complex(self.amplitudes[k])
        return 0j


def bitstring(mask: int, n: int) -> str:
    """Atom 0 first; ``1`` marks a Rydberg excitation."""
    return "".join("1" if mask >> j & 1 else "0" for j in range(n))


def parse_bitstring(s: str) -> int:
    return sum(1 << j for j, ch in enumerate(s) if ch == "1")


# --- Hamiltonian assembly --------------------------------------------------------

def basis_states(register: AtomRegister, cfg: SimConfig) -> np.ndarray:
    if cfg.mode == "physical":
        if register.n > cfg.max_full_atoms:
            raise SizeCapError(f"{register.n} atoms exceed the full-basis cap {cfg.max_full_atoms}")
        return np.arange(1 << register.n, dtype=np.int64)
    from .oracle import _enumerate_masks

    g = register.graph()
    states = []
    for m in _enumerate_masks(g, g.full_mask):
        states.append(m)
        if len(states) > cfg.max_blockaded_states:
            raise SizeCapError(f"blockaded basis exceeds {cfg.max_blockaded_states} states")
    return np.array(sorted(states), dtype=np.int64)


class _Hamiltonian:
    """Time-independent pieces of H, assembled once per (register, basis)."""

    def __init__(self, register: AtomRegister, schedule: PulseSchedule, cfg: SimConfig,
                 basis: np.ndarray):
        n = register.n
        if len(schedule.local_detuning) != n:
            raise InputError(f"schedule has {len(schedule.local_detuning)} local detunings for {n} atoms")
        self.basis = basis
        dim = len(basis)
        occ = ((basis[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
        self.count = occ.sum(axis=1)
        diag = -occ @ schedule.local_detuning
        self.vmax = 0.0
        if cfg.mode == "physical":
            r_b = register.radius if register.radius is not None else _default_radius(register, schedule)
            v = register.interactions(cfg.cutoff_factor * r_b)
            iu = np.triu_indices(n, 1)
            self.vmax = float(v[iu].max()) if n > 1 else 0.0
            diag = diag + np.einsum("kj,jl,kl->k", occ, np.triu(v, 1), occ)
        self.static = diag
        pos = {int(b): k for k, b in enumerate(basis)}
        rows, cols = [], []
        for k, b in enumerate(basis.tolist()):
            for j in range(n):
                if not b >> j & 1:
                    t = pos.get(b | (1 << j))
                    if t is not None:
                        rows.append(k)
                        cols.append(t)
        # lower[g, r]: maps the state with atom j excited onto the one with it in ground
        self.lower = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(dim, dim))
        self.raise_ = self.lower.T.tocsr()
        fanout = np.asarray(self.lower.sum(axis=1)).ravel() + np.asarray(self.lower.sum(axis=0)).ravel()
        self.max_fanout = float(fanout.max()) if dim else 0.0
        self.dense = dim <= DENSE_LIMIT
        if self.dense:
            self.lower_dense = self.lower.toarray()

    def diagonal(self, delta: float) -> np.ndarray:
        return self.static - delta * self.count

    def matrix(self, omega: float, delta: float, phase: float) -> np.ndarray:
        d = self.diagonal(delta)
        off = 0.5 * omega * np.exp(1j * phase) * self.lower_dense
        return np.diag(d).astype(complex) + off + off.conj().T

    def propagate(self, psi: np.ndarray, h: float, omega: float, delta: float,
                  phase: float) -> np.ndarray:
        """``exp(-i h H) psi`` by a Taylor series, substepped so each piece has norm <= 1."""
        d = self.diagonal(delta)
        c = 0.5 * omega * np.exp(1j * phase)
        bound = float(np.max(np.abs(d))) + abs(c) * self.max_fanout
        sub = max(1, math.ceil(h * bound))
        tau = h / sub
        for _ in range(sub):
            term = psi
            out = psi.copy()
            for k in range(1, 60):
                hv = d * term + c * (self.lower @ term) + np.conj(c) * (self.raise_ @ term)
                term = (-1j * tau / k) * hv
                out += term
                if np.linalg.norm(term) < 1e-16 * np.linalg.norm(out):
                    break
            psi = out
        return psi


def _default_radius(register: AtomRegister, schedule: PulseSchedule) -> float:
    peak = float(np.max(schedule.delta + 0.0))
    return blockade_radius(register.c6, peak) if peak > 0 else np.inf


def step_size(schedule: PulseSchedule, ham_vmax: float, cfg: SimConfig) -> tuple[float, int]:
    """Largest step with ``h * (max|Delta_j| + Omega_max + V_max) <= step_factor``, snapped to divide T."""
    loc = np.max(np.abs(schedule.local_detuning), initial=0.0)
    scale = float(np.max(np.abs(schedule.delta))) + loc + float(np.max(schedule.omega)) + ham_vmax
    T = schedule.duration
    if scale == 0.0:
        return T, 1
    steps = max(1, math.ceil(T * scale / cfg.step_factor))
    return T / steps, steps


def initial_state(register: AtomRegister, cfg: SimConfig, mask: int = 0) -> QuantumState:
    """Basis state ``mask`` (default: every atom in the ground state)."""
    basis = basis_states(register, cfg)
    k = np.searchsorted(basis, mask)
    if k >= len(basis) or basis[k] != mask:
        raise InputError("initial bitstring is outside the simulated basis")
    amp = np.zeros(len(basis), dtype=complex)
    amp[k] = 1.0
    return QuantumState("full" if cfg.mode == "physical" else "blockaded", amp, basis, register.n)


def evolve(state: QuantumState, register: AtomRegister, schedule: PulseSchedule,
           cfg: SimConfig | None = None, callback: Callable[[float, np.ndarray], None] | None = None,
           steps: int | None = None) -> QuantumState:
    """Integrate the Schroedinger equation with exponential-midpoint steps.

    Each step applies ``exp(-i h H(t + h/2))`` to machine precision (dense
    eigendecomposition for small bases, a substepped Taylor series otherwise). The norm is checked after each
    step and must stay within ``cfg.norm_tol`` of one.
    """
    cfg = cfg or SimConfig()
    ham = _Hamiltonian(register, schedule, cfg, state.basis_index)
    h, n_steps = step_size(schedule, ham.vmax, cfg)
    if steps is not None:
        n_steps = steps
        h = schedule.duration / steps
    psi = state.amplitudes.astype(complex).copy()
    t = 0.0
    for i in range(n_steps):
        tm = (i + 0.5) * h
        om, de, ph = float(schedule.omega_at(tm)), float(schedule.delta_at(tm)), float(schedule.phase_at(tm))
        if om == 0.0:
            psi = np.exp(-1j * h * ham.diagonal(de)) * psi
        elif ham.dense:
            w, u = scipy.linalg.eigh(ham.matrix(om, de, ph))
            psi = u @ (np.exp(-1j * h * w) * (u.conj().T @ psi))
        else:
            psi = ham.propagate(psi, h, om, de, ph)
        nrm = np.linalg.norm(psi)
        if abs(nrm - 1.0) > cfg.norm_tol:
            raise InvariantError(f"norm drifted to {nrm!r} at step {i}")
        psi /= nrm
        t = (i + 1) * h
        if callback is not None:
            callback(t, psi)
    return QuantumState(state.basis, psi, state.basis_index, state.n_atoms)


@dataclass
class GroundState:
    energy: float
    states: list[int]
    n_atoms: int

    def bitstrings(self) -> list[str]:
        return [bitstring(m, self.n_atoms) for m in self.states]

    def sets(self) -> list[tuple[int, ...]]:
        return [tuple(j for j in range(self.n_atoms) if m >> j & 1) for m in self.states]


def exact_ground_state(register: AtomRegister, schedule: PulseSchedule, cfg: SimConfig | None = None,
                       t: float | None = None, rtol: float = 1e-9) -> GroundState:
    """Lowest-energy bitstrings of the diagonal (Omega = 0) Hamiltonian at time ``t`` (default: end)."""
    cfg = cfg or SimConfig()
    basis = basis_states(register, cfg)
    ham = _Hamiltonian(register, schedule, cfg, basis)
    t = schedule.duration if t is None else t
    e = ham.diagonal(float(schedule.delta_at(t)))
    emin = float(e.min())
    tol = rtol * max(1.0, abs(emin))
    return GroundState(emin, [int(b) for b in basis[e <= emin + tol]], register.n)


def measure(state: QuantumState, shots: int, seed=None) -> dict[str, int]:
    """Born-rule multinomial sample, reported in ascending basis order."""
    if shots < 1:
        raise InputError("shots must be >= 1")
    rng = make_rng(seed)
    counts = rng.multinomial(shots, state.probabilities())
    return {state.bitstring(k): int(c) for k, c in enumerate(counts) if c}


# --- compilation and protocols ------------------------------------------------------

@dataclass
class CompileParams:
    duration: float = 20.0
    omega_max: float = 1.0
    delta0: float = 2.0
    delta_final: float = 2.0
    ramp: float = 0.1


def compile_register(g: Graph, params: CompileParams | None = None) -> tuple[AtomRegister, PulseSchedule]:
    """Place one atom per vertex (lengths in units of the graph radius) and build the default sweep.

    C6 is set so the blockade radius at the smallest final per-atom detuning
    equals the unit-disk radius; per-atom offsets
    ``delta_j = Delta_final * (w_j / w_max - 1)`` encode the vertex weights.
    """
    params = params or CompileParams()
    if g.kind != "unitdisk":
        raise InputError("compile_register needs a unit-disk graph")
    w = np.asarray(g.weights, dtype=float)
    if g.n and np.any(w <= 0):
        raise InputError("weights must be positive")
    if not (params.delta_final > 0 and params.duration > 0):
        raise InputError("delta_final and duration must be positive")
    wmax = float(w.max()) if g.n else 1.0
    rel = w / wmax
    delta_min = params.delta_final * (float(rel.min()) if g.n else 1.0)
    pos = np.asarray(g.coords, dtype=float).reshape(-1, 2) / g.radius
    c6 = delta_min * 1.0**6
    reg = AtomRegister(pos, c6, w, 1.0)
    local = params.delta_final * (rel - 1.0)
    sched = PulseSchedule.sweep(params.duration, params.omega_max, params.delta0,
                                params.delta_final, g.n, local, params.ramp)
    return reg, sched


@dataclass
class AdiabaticResult:
    best_set: tuple[int, ...]
    best_weight: float
    optimum: float
    success_probability: float
    shot_success_fraction: float
    histogram: dict[str, int]
    state: QuantumState = field(repr=False)
    step: float = 0.0

    def to_dict(self) -> dict:
        return {"best_set": list(self.best_set), "best_weight": self.best_weight,
                "optimum": self.optimum, "success_probability": self.success_probability,
                "shot_success_fraction": self.shot_success_fraction, "step": self.step}


def optimal_mask(g: Graph, basis: np.ndarray, optimum: float) -> np.ndarray:
    """Boolean mask over ``basis``: independent bitstrings whose weight reaches ``optimum``."""
    w = np.asarray(g.weights)
    occ = ((basis[:, None] >> np.arange(g.n)[None, :]) & 1).astype(bool)
    weight = occ.astype(float) @ w
    indep = np.array([g.is_independent_mask(int(b)) for b in basis])
    return indep & (weight >= optimum - 1e-9 * max(1.0, abs(optimum)))


def adiabatic_solve(g: Graph, duration: float | None = None, shots: int = 1000,
                    cfg: SimConfig | None = None, params: CompileParams | None = None,
                    seed=0, schedule_override: PulseSchedule | None = None) -> AdiabaticResult:
    """Compile, sweep from all-ground, measure, then repair and complete every shot.

    ``success_probability`` is the exact Born weight on optimal independent
    sets; ``shot_success_fraction`` counts postprocessed shots that reach the
    optimum found by :func:`indset.oracle.mwis_exact`.
    """
    from .oracle import mwis_exact
    from .postprocess import complete_to_maximal, repair_to_independent

    cfg = cfg or SimConfig()
    params = params or CompileParams()
    if duration is not None:
        params = CompileParams(duration, params.omega_max, params.delta0, params.delta_final, params.ramp)
    reg, sched = compile_register(g, params)
    if schedule_override is not None:
        sched = schedule_override
    psi0 = initial_state(reg, cfg)
    ham_vmax = _Hamiltonian(reg, sched, cfg, psi0.basis_index).vmax
    h, _ = step_size(sched, ham_vmax, cfg)
    final = evolve(psi0, reg, sched, cfg)
    opt = mwis_exact(g).objective
    good = optimal_mask(g, final.basis_index, opt)
    success = float(final.probabilities()[good].sum())
    hist = measure(final, shots, make_rng(seed, "measure"))
    rng = make_rng(seed, "postprocess")
    best, best_w, hits = (), -math.inf, 0
    tol = 1e-9 * max(1.0, abs(opt))
    for bs, count in hist.items():
        raw = [j for j, ch in enumerate(bs) if ch == "1"]
        for _ in range(count):
            s = complete_to_maximal(g, repair_to_independent(g, raw, rng), rng)
            if s.weight >= opt - tol:
                hits += 1
            if s.weight > best_w or (s.weight == best_w and s.members < best):
                best, best_w = s.members, s.weight
    return AdiabaticResult(best, best_w, opt, success, hits / shots, hist, final, h)


def parameter_sweep(g: Graph, grid: dict[str, Sequence[float]], shots: int = 200,
                    cfg: SimConfig | None = None, seed=0) -> list[dict]:
    """Grid search over sweep parameters, scoring each point by mean sampled set weight.

    ``grid`` maps any of ``duration``, ``omega_max``, ``delta0``, ``delta_final``
    to candidate values. Rows come back in grid order; the best row has
    ``best=True``.
    """
    from itertools import product

    keys = ["duration", "omega_max", "delta0", "delta_final"]
    base = CompileParams()
    axes = [list(grid.get(k, [getattr(base, k)])) for k in keys]
    rows = []
    for i, combo in enumerate(product(*axes)):
        params = CompileParams(*combo)
        res = adiabatic_solve(g, None, shots, cfg, params, seed=make_rng(seed, f"point{i}").integers(2**62))
        mean_w = sum(
            g.weight_of([j for j, ch in enumerate(bs) if ch == "1"]) * c
            for bs, c in res.histogram.items()
            if g.is_independent_mask(parse_bitstring(bs))) / shots
        rows.append(dict(zip(keys, combo), mean_weight=mean_w,
                         success_probability=res.success_probability, best=False))
    if rows:
        top = max(range(len(rows)), key=lambda k: (rows[k]["mean_weight"], -k))
        rows[top]["best"] = True
    return rows


def gibbs_tv_distance(state: QuantumState, g: Graph, activity: float) -> float:
    """Total-variation distance between the Born distribution and the hard-core measure on ``g``."""
    from .oracle import enumerate_independent_sets

    target = {}
    for s in enumerate_independent_sets(g):
        target[s.mask()] = activity ** len(s)
    z = math.fsum(target.values())
    p = state.probabilities()
    born = {int(b): float(x) for b, x in zip(state.basis_index, p)}
    keys = set(target) | set(born)
    return 0.5 * math.fsum(abs(born.get(k, 0.0) - target.get(k, 0.0) / z) for k in keys)


def content_hash(*objs) -> str:
    h = hashlib.sha256()
    for o in objs:
        h.update(json.dumps(o, sort_keys=True).encode())
    return h.hexdigest()[:16]
