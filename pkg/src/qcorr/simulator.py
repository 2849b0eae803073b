"""Exact piecewise-constant propagation of noisy Clifford circuits.

Each constant slice evolves under ``H = (Omega cos(phi) X + Omega sin(phi) Y
+ delta Z) / 2`` and is exponentiated in closed form. Slices break at pulse
segment edges, at the pi/2 noise grid and at correlated-block edges, so the
result is exact for piecewise-constant noise.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgs, TraceTooShort
from .gateset import FAMILIES, schedule_table
from .noise import (SLOT, NoiseSpec, NoiseTrace, circuit_seed, draw_correlated,
                    draw_uncorrelated, n_slots, task_seed)
from .qcore import inverse_table, multiplication_table

_EPS = 1e-9  # in slot units, same guard as noise.n_slots


@dataclass(frozen=True)
class CircuitSpec:
    """Clifford indices in time order; the last one inverts the rest."""
    indices: tuple
    circuit_id: int = 0

    def __len__(self):
        return len(self.indices)


def random_circuit(J: int, master_seed: int, circuit_id: int) -> CircuitSpec:
    """``J - 1`` uniform Cliffords followed by the inverting element."""
    if J < 1:
        raise InvalidArgs("J must be >= 1")
    rng = np.random.default_rng(circuit_seed(master_seed, circuit_id))
    body = rng.integers(0, 24, size=J - 1)
    return close_circuit(body, circuit_id)


def close_circuit(body, circuit_id: int = 0) -> CircuitSpec:
    mult = multiplication_table()
    prod = 0
    for i in body:
        prod = mult[prod, int(i)]
    last = int(inverse_table()[prod])
    return CircuitSpec(tuple(int(i) for i in body) + (last,), circuit_id)


def random_circuits(J: int, k: int, master_seed: int):
    return [random_circuit(J, master_seed, c) for c in range(k)]


def _pieces(t, length, slot):
    """Split ``[t, t + length)`` on the global ``slot`` grid."""
    end = t + length
    k = math.floor(t / slot + _EPS) + 1
    out = []
    while k * slot < end - _EPS * slot:
        out.append((t, k * slot))
        t = k * slot
        k += 1
    out.append((t, end))
    return out


@dataclass(frozen=True)
class Timeline:
    """Flattened slice table for one circuit and gate family."""
    kind: np.ndarray
    dt: np.ndarray
    hx: np.ndarray
    hy: np.ndarray
    theta: np.ndarray
    sidx: np.ndarray
    lidx: np.ndarray
    gate: np.ndarray
    boundaries: np.ndarray

    @property
    def duration(self) -> float:
        return float(self.boundaries[-1])

    def args(self):
        return (self.kind, self.dt, self.hx, self.hy, self.theta, self.sidx, self.lidx)


def build_timeline(circuit: CircuitSpec, family: str, block_length=None,
                   slot: float = SLOT) -> Timeline:
    scheds = schedule_table(family)
    m = len(circuit) if block_length is None else int(block_length)
    rows = []
    bounds = [0.0]
    t = 0.0

    def drive(t, length, hx, hy, blk, g):
        for a, b in _pieces(t, length, slot):
            rows.append((kernels.EVOLVE, b - a, hx, hy, 0.0,
                         int(math.floor(0.5 * (a + b) / slot)), blk, g))
        return t + length

    for g, idx in enumerate(circuit.indices):
        s = scheds[idx]
        blk = g // m
        for seg in s.segments:
            if seg.is_frame:
                rows.append((kernels.FRAME, 0.0, 0.0, 0.0, seg.theta, 0, blk, g))
            else:
                t = drive(t, seg.duration, seg.amp * math.cos(seg.phase),
                          seg.amp * math.sin(seg.phase), blk, g)
        if s.wait:
            t = drive(t, s.wait, 0.0, 0.0, blk, g)
        bounds.append(t)
    cols = list(zip(*rows)) if rows else [()] * 8
    # accumulated float drift can leave a sliver past the last slot edge
    sidx = np.minimum(np.array(cols[5], dtype=np.int64), n_slots(t, slot) - 1)
    return Timeline(np.array(cols[0], dtype=np.int64), np.array(cols[1], dtype=float),
                    np.array(cols[2], dtype=float), np.array(cols[3], dtype=float),
                    np.array(cols[4], dtype=float), sidx,
                    np.array(cols[6], dtype=np.int64), np.array(cols[7], dtype=np.int64),
                    np.array(bounds))


def gate_boundaries(circuit: CircuitSpec, family: str) -> np.ndarray:
    return build_timeline(circuit, family).boundaries


def _su2(a, b) -> np.ndarray:
    return np.array([[a, -np.conj(b)], [b, np.conj(a)]])


def propagate(schedule, trace: NoiseTrace, t0: float = 0.0) -> np.ndarray:
    """Noisy unitary of one schedule starting at ``t0`` on ``trace``."""
    if trace.duration < t0 + schedule.duration - 1e-9:
        raise TraceTooShort(f"trace ends at {trace.duration}, gate needs "
                            f"{t0 + schedule.duration}")
    rows = []
    t = t0
    inner = trace.edges

    def drive(t, length, hx, hy):
        end = t + length
        cuts = inner[(inner > t + _EPS) & (inner < end - _EPS)]
        pts = np.concatenate(([t], cuts, [end]))
        for a, b in zip(pts[:-1], pts[1:]):
            rows.append((kernels.EVOLVE, b - a, hx, hy, 0.0, float(trace.at(0.5 * (a + b)))))
        return end

    for seg in schedule.segments:
        if seg.is_frame:
            rows.append((kernels.FRAME, 0.0, 0.0, 0.0, seg.theta, 0.0))
        else:
            t = drive(t, seg.duration, seg.amp * math.cos(seg.phase),
                      seg.amp * math.sin(seg.phase))
    if schedule.wait:
        drive(t, schedule.wait, 0.0, 0.0)
    if not rows:
        return np.eye(2, dtype=complex)
    kind, dt, hx, hy, theta, delta = (np.array(c) for c in zip(*rows))
    n = len(kind)
    a, b = kernels.propagate_timeline_numpy(
        kind.astype(np.int64), dt, hx, hy, theta, np.arange(n), np.zeros(n, dtype=np.int64),
        delta[None, :], np.zeros((1, 1)))
    return _su2(a[0], b[0])


def circuit_unitary(circuit: CircuitSpec, family: str, trace: NoiseTrace) -> np.ndarray:
    scheds = schedule_table(family)
    u = np.eye(2, dtype=complex)
    t = 0.0
    for idx in circuit.indices:
        s = scheds[idx]
        u = propagate(s, trace, t) @ u
        t += s.duration
    return u


def run_circuit(circuit: CircuitSpec, family: str, trace: NoiseTrace) -> float:
    """P(|1>) after the noisy circuit acting on |0>."""
    u = circuit_unitary(circuit, family, trace)
    return float(min(1.0, abs(u[1, 0]) ** 2))


def projective_sample(p_true, r: int, rng) -> float:
    """Binomial(r, p) / r; ``rng`` may be a Generator or an int seed."""
    if r < 1:
        raise InvalidArgs("r must be >= 1")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    p = min(max(float(p_true), 0.0), 1.0)
    return rng.binomial(r, p) / r


@dataclass
class RecordTable:
    """Survival records for a k x n grid, stored column-wise."""
    family: str
    circuit_id: np.ndarray
    realization_id: np.ndarray
    p_true: np.ndarray
    p_est: np.ndarray
    seed: np.ndarray = None

    def __len__(self):
        return len(self.circuit_id)

    def grid(self, column: str = "p_est") -> np.ndarray:
        """Values as a ``(k, n)`` matrix indexed by circuit and realization ids."""
        from .errors import IncompleteGrid
        cids = np.unique(self.circuit_id)
        rids = np.unique(self.realization_id)
        if len(cids) * len(rids) != len(self) :
            raise IncompleteGrid(f"{len(self)} records for {len(cids)}x{len(rids)} grid")
        out = np.full((len(cids), len(rids)), np.nan)
        ci = np.searchsorted(cids, self.circuit_id)
        ri = np.searchsorted(rids, self.realization_id)
        out[ci, ri] = getattr(self, column)
        if np.isnan(out).any():
            raise IncompleteGrid("duplicate or missing (circuit, realization) records")
        return out

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("circuit_id", "realization_id", "family", "p_true", "p_est"))
            for row in zip(self.circuit_id, self.realization_id, self.p_true, self.p_est):
                w.writerow((int(row[0]), int(row[1]), self.family, repr(float(row[2])),
                            repr(float(row[3]))))

    @classmethod
    def read_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise InvalidArgs(f"no records in {path}")
        fams = {r["family"] for r in rows}
        if len(fams) != 1:
            raise InvalidArgs("records file mixes gate families")
        return cls(fams.pop(),
                   np.array([int(r["circuit_id"]) for r in rows]),
                   np.array([int(r["realization_id"]) for r in rows]),
                   np.array([float(r["p_true"]) for r in rows]),
                   np.array([float(r["p_est"]) for r in rows]))


def _simulate_circuit(circuit, family, spec: NoiseSpec, n_real, reps, master):
    tl = build_timeline(circuit, family, spec.block_length)
    J = len(circuit)
    n_s = n_slots(tl.duration, spec.slot)
    n_l = -(-J // spec.blocks(J))
    d_s = np.empty((n_real, n_s))
    d_l = np.empty((n_real, n_l))
    rngs = []
    seeds = np.empty(n_real, dtype=np.uint64)
    for j in range(n_real):
        ss = task_seed(master, circuit.circuit_id, j)
        seeds[j] = ss.generate_state(1, np.uint64)[0]
        rng = np.random.default_rng(ss)
        d_s[j] = draw_uncorrelated(spec, tl.duration, rng)
        d_l[j] = draw_correlated(spec, J, rng)
        rngs.append(rng)
    _, b = kernels.propagate_timeline(*tl.args(), d_s, d_l)
    p_true = np.minimum(np.abs(b) ** 2, 1.0)
    p_est = np.array([rng.binomial(reps, p) / reps for rng, p in zip(rngs, p_true)])
    return p_true, p_est, seeds


def run_experiment(config, circuits=None, threads: int = 1) -> RecordTable:
    """Simulate the full k x n grid described by ``config``.

    ``config`` needs ``J, k, n, r, sigma_L2, sigma_S2, M_n, family, seed``;
    ``M_n`` may be ``None`` or ``"J"`` for the quasi-static case. Output is
    keyed by ids and does not depend on ``threads``.
    """
    if config.family not in FAMILIES:
        raise InvalidArgs(f"unknown family {config.family!r}")
    m = None if config.M_n in (None, "J") else int(config.M_n)
    spec = NoiseSpec(config.sigma_L2, config.sigma_S2, m, config.seed)
    spec.blocks(config.J)
    if circuits is None:
        circuits = random_circuits(config.J, config.k, config.seed)

    def work(c):
        return _simulate_circuit(c, config.family, spec, config.n, config.r, config.seed)

    if threads == 1:
        results = [work(c) for c in circuits]
    else:
        with ThreadPoolExecutor(max_workers=threads or None) as pool:
            results = list(pool.map(work, circuits))
    n = config.n
    cid = np.repeat([c.circuit_id for c in circuits], n)
    rid = np.tile(np.arange(n), len(circuits))
    return RecordTable(config.family, cid, rid,
                       np.concatenate([r[0] for r in results]),
                       np.concatenate([r[1] for r in results]),
                       np.concatenate([r[2] for r in results]))
