"""Engineered fractional-detuning noise.

Two Gaussian components are supported:

* an uncorrelated component redrawn on a global grid of primitive pi/2
  durations, independent of gate family;
* a correlated component held constant over blocks of ``block_length``
  consecutive virtual gates (``block_length = J`` is quasi-static).

Random streams are derived from ``(master seed, circuit id, realization id)``
with :class:`numpy.random.SeedSequence`, so any task can be regenerated in
isolation and in any order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DurationMismatch, InvalidArgs

SLOT = np.pi / 2
FULL = None  # sentinel: block length equals the circuit length

_NOISE_KEY = 1
_CIRCUIT_KEY = 0


@dataclass(frozen=True)
class NoiseSpec:
    sigma_L2: float = 0.0
    sigma_S2: float = 0.0
    block_length: Optional[int] = FULL
    seed: int = 0
    slot: float = SLOT

    def __post_init__(self):
        if self.sigma_L2 < 0 or self.sigma_S2 < 0:
            raise InvalidArgs("noise variances must be nonnegative")
        if self.block_length is not None and self.block_length < 1:
            raise InvalidArgs("block_length must be >= 1")

    def blocks(self, n_gates: int) -> int:
        m = n_gates if self.block_length is None else self.block_length
        if m > n_gates:
            raise InvalidArgs(f"block_length {m} exceeds circuit length {n_gates}")
        return m


@dataclass(frozen=True)
class NoiseTrace:
    """Piecewise-constant detuning: ``values[i]`` holds on ``[edges[i], edges[i+1])``."""
    edges: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if e.ndim != 1 or v.shape != (len(e) - 1,):
            raise ValueError("edges must have one more entry than values")
        if len(e) and (e[0] != 0.0 or np.any(np.diff(e) <= 0)):
            raise ValueError("edges must start at 0 and strictly increase")
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "values", v)

    @property
    def duration(self) -> float:
        return float(self.edges[-1])

    def at(self, t) -> np.ndarray:
        idx = np.searchsorted(self.edges, t, side="right") - 1
        return self.values[np.clip(idx, 0, len(self.values) - 1)]

    def rows(self):
        for a, b, v in zip(self.edges[:-1], self.edges[1:], self.values):
            yield float(a), float(b), float(v)

    @classmethod
    def constant(cls, duration, delta=0.0):
        return cls(np.array([0.0, float(duration)]), np.array([float(delta)]))


def task_seed(master: int, circuit_id: int, realization_id: int) -> np.random.SeedSequence:
    """Stable per-(circuit, realization) seed sequence."""
    return np.random.SeedSequence(int(master), spawn_key=(_NOISE_KEY, int(circuit_id),
                                                          int(realization_id)))


def circuit_seed(master: int, circuit_id: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(master), spawn_key=(_CIRCUIT_KEY, int(circuit_id)))


def task_rng(master, circuit_id, realization_id) -> np.random.Generator:
    return np.random.default_rng(task_seed(master, circuit_id, realization_id))


def n_slots(duration: float, slot: float = SLOT) -> int:
    # guard against float noise when duration is an exact multiple of slot
    return max(1, int(np.ceil(duration / slot - 1e-9)))


def slot_edges(duration: float, slot: float = SLOT) -> np.ndarray:
    m = n_slots(duration, slot)
    e = np.arange(m + 1) * slot
    e[-1] = duration
    return e


def draw_uncorrelated(spec: NoiseSpec, duration: float, rng) -> np.ndarray:
    """Slot values of the uncorrelated component (always consumes the stream)."""
    z = rng.standard_normal(n_slots(duration, spec.slot))
    return np.sqrt(spec.sigma_S2) * z


def draw_correlated(spec: NoiseSpec, n_gates: int, rng) -> np.ndarray:
    m = spec.blocks(n_gates)
    z = rng.standard_normal(-(-n_gates // m))
    return np.sqrt(spec.sigma_L2) * z


def sample_uncorrelated(spec: NoiseSpec, boundaries, rng=None) -> NoiseTrace:
    """i.i.d. N(0, sigma_S2) per pi/2 slot over ``[0, boundaries[-1]]``."""
    duration = float(np.asarray(boundaries)[-1])
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    return NoiseTrace(slot_edges(duration, spec.slot), draw_uncorrelated(spec, duration, rng))


def block_edges(boundaries, m: int) -> np.ndarray:
    b = np.asarray(boundaries, dtype=float)
    e = np.append(b[:-1:m], b[-1])
    return np.unique(e)


def sample_correlated(spec: NoiseSpec, boundaries, n_gates: int = None, rng=None) -> NoiseTrace:
    """One N(0, sigma_L2) value per block of ``block_length`` virtual gates.

    ``boundaries`` are the ``J + 1`` gate edge times. Zero-duration gates
    are allowed; a block consisting only of them contributes no interval.
    """
    b = np.asarray(boundaries, dtype=float)
    n_gates = len(b) - 1 if n_gates is None else n_gates
    if len(b) != n_gates + 1:
        raise InvalidArgs("boundaries must have J + 1 entries")
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    vals = draw_correlated(spec, n_gates, rng)
    return correlated_trace(b, spec.blocks(n_gates), vals)


def correlated_trace(boundaries, m: int, block_values) -> NoiseTrace:
    b = np.asarray(boundaries, dtype=float)
    starts = b[:-1:m]
    ends = np.append(b[m::m], b[-1])[:len(starts)]
    keep = ends > starts
    edges = np.append(starts[keep], ends[keep][-1])
    return NoiseTrace(edges, np.asarray(block_values)[keep])


def combine(a: NoiseTrace, b: NoiseTrace) -> NoiseTrace:
    """Interval-wise sum on the merged breakpoint set."""
    if not np.isclose(a.duration, b.duration, rtol=0, atol=1e-9):
        raise DurationMismatch(f"{a.duration} != {b.duration}")
    edges = np.union1d(a.edges, b.edges)
    edges = edges[edges <= min(a.duration, b.duration) + 1e-12]
    edges[-1] = a.duration
    mids = 0.5 * (edges[:-1] + edges[1:])
    return NoiseTrace(edges, a.at(mids) + b.at(mids))


def sample_trace(spec: NoiseSpec, boundaries, rng) -> NoiseTrace:
    """Full mixed trace for one (circuit, realization) task.

    The uncorrelated stream is consumed first so that it is identical for a
    given seed regardless of the correlated block length.
    """
    b = np.asarray(boundaries, dtype=float)
    s = sample_uncorrelated(spec, b, rng)
    c = sample_correlated(spec, b, len(b) - 1, rng)
    return combine(s, c)
