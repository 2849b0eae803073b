"""Analytic error model: per-gate error maps, the Pauli-space walk, first-order
error vectors, their autocorrelation and numerical filter functions.

Frames. For a gate with ideal control ``U_c(t)`` the first-order error vector is
``a = -1/2 int delta(t) r_z(t) dt`` with ``r_z`` the Pauli vector of
``U_c(t)^dag Z U_c(t)``, so that ``R_noisy ~= R (I + i a.sigma)``. The error map
``Lambda = R_noisy R^dag = I + i nu.sigma + ...`` carries the same step rotated
into the post-gate frame.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import LengthMismatch, NoCrossing, SeriesTooShort, TraceTooShort, UnsupportedGate
from .qcore import I2, SX, SY, SZ, clifford_table, rotation, so3

_EZ = np.array([0.0, 0.0, 1.0])

# (axis, angle) -> (a, nu, eta) per unit delta
_MAPS = {
    ("i", np.pi): (np.pi ** 2 / 8, (0.0, 0.0, -np.pi / 2), (0.0, 0.0, 0.0)),
    ("x", np.pi): (0.5, (0.0, 1.0, 0.0), (-np.pi / 4, 0.0, 0.0)),
    ("x", np.pi / 2): (0.25, (0.0, 0.5, -0.5), ((2 - np.pi) / 8, 0.0, 0.0)),
    ("x", -np.pi / 2): (0.25, (0.0, -0.5, -0.5), (-(2 - np.pi) / 8, 0.0, 0.0)),
    ("y", np.pi): (0.5, (-1.0, 0.0, 0.0), (0.0, -np.pi / 4, 0.0)),
    ("y", np.pi / 2): (0.25, (-0.5, 0.0, -0.5), (0.0, (2 - np.pi) / 8, 0.0)),
    ("y", -np.pi / 2): (0.25, (0.5, 0.0, -0.5), (0.0, -(2 - np.pi) / 8, 0.0)),
}

GATES = tuple(_MAPS)


def parse_gate(gate):
    """Normalize a gate spec to ``(axis, angle)``.

    Accepts tuples like ``('x', pi/2)`` or strings ``'I'``, ``'X_pi'``,
    ``'Y_-pi/2'``.
    """
    if isinstance(gate, str):
        g = gate.strip().lower()
        if g in ("i", "id", "identity"):
            return ("i", np.pi)
        try:
            axis, ang = g.split("_", 1)
            angle = {"pi": np.pi, "pi/2": np.pi / 2, "-pi/2": -np.pi / 2}[ang]
        except (ValueError, KeyError):
            raise UnsupportedGate(f"cannot parse gate {gate!r}") from None
        gate = (axis, angle)
    axis, angle = gate
    for key in _MAPS:
        if key[0] == axis and abs(key[1] - angle) < 1e-12:
            return key
    raise UnsupportedGate(f"no error map for {gate!r}")


def ideal_gate(gate) -> np.ndarray:
    axis, angle = parse_gate(gate)
    return I2.copy() if axis == "i" else rotation(axis, angle)


def noisy_gate(gate, delta: float) -> np.ndarray:
    """Exact primitive gate under static detuning ``delta``."""
    axis, angle = parse_gate(gate)
    if axis == "i":
        return rotation("z", np.pi * delta)
    w = {"x": np.array([1.0, 0, 0]), "y": np.array([0, 1.0, 0])}[axis]
    v = 0.5 * angle * w + 0.5 * abs(angle) * delta * _EZ
    norm = np.linalg.norm(v)
    n = v / norm
    return np.cos(norm) * I2 - 1j * np.sin(norm) * (n[0] * SX + n[1] * SY + n[2] * SZ)


def exact_error_map(gate, delta: float) -> np.ndarray:
    return noisy_gate(gate, delta) @ ideal_gate(gate).conj().T


@dataclass(frozen=True)
class ErrorMap:
    """``Lambda = I + i delta nu.sigma + delta^2 (i eta.sigma - a I)``."""
    a: float
    nu: np.ndarray
    eta: np.ndarray
    gate: tuple
    delta: float = 1.0

    def matrix(self, delta: float = None) -> np.ndarray:
        d = self.delta if delta is None else delta
        nu = self.nu[0] * SX + self.nu[1] * SY + self.nu[2] * SZ
        eta = self.eta[0] * SX + self.eta[1] * SY + self.eta[2] * SZ
        return I2 + 1j * d * nu + d * d * (1j * eta - self.a * I2)


def error_map(gate, delta: float = 1.0) -> ErrorMap:
    key = parse_gate(gate)
    a, nu, eta = _MAPS[key]
    return ErrorMap(a, np.array(nu), np.array(eta), key, float(delta))


def map_residual(gate, delta: float) -> float:
    """Max-norm gap between the truncated map and the exact one."""
    return float(np.abs(error_map(gate, delta).matrix() - exact_error_map(gate, delta)).max())


# ---------------------------------------------------------------------------
# toggling-frame integrals


def _rot_minus(n, phi):
    """SO(3) matrix of ``R_n(-phi)``."""
    c, s = math.cos(phi), math.sin(phi)
    cross = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    return c * np.eye(3) - s * cross + (1 - c) * np.outer(n, n)


def _slice_integral(hx, hy, dt):
    """``int_0^dt w(tau) dtau`` with ``w`` the toggled z under a constant xy drive."""
    omega = math.hypot(hx, hy)
    if omega == 0.0:
        return dt * _EZ, np.eye(3)
    n = np.array([hx, hy, 0.0]) / omega
    nxz = np.cross(n, _EZ)
    phi = omega * dt
    integ = _EZ * math.sin(phi) / omega - nxz * (1 - math.cos(phi)) / omega
    return integ, _rot_minus(n, phi)


def toggle_basis(kind, dt, hx, hy, theta, gate=None) -> np.ndarray:
    """Per-slice vectors ``B`` with ``a_gate = sum_i delta_i B_i``.

    The control frame restarts at identity whenever ``gate`` changes.
    """
    n = len(kind)
    out = np.zeros((n, 3))
    m = np.eye(3)
    prev = None
    for i in range(n):
        if gate is not None and gate[i] != prev:
            m = np.eye(3)
            prev = gate[i]
        if kind[i] == kernels.FRAME:
            m = m @ _rot_minus(_EZ, theta[i])
            continue
        integ, step = _slice_integral(hx[i], hy[i], dt[i])
        out[i] = -0.5 * (m @ integ)
        m = m @ step
    return out


def _schedule_rows(schedule, cuts=None, t0=0.0):
    """Slice table for one schedule, optionally split at absolute times ``cuts``."""
    rows = []
    t = t0
    cuts = np.empty(0) if cuts is None else np.asarray(cuts)

    def drive(t, length, hx, hy):
        end = t + length
        inner = cuts[(cuts > t + 1e-12) & (cuts < end - 1e-12)]
        pts = np.concatenate(([t], inner, [end]))
        for a, b in zip(pts[:-1], pts[1:]):
            rows.append((kernels.EVOLVE, b - a, hx, hy, 0.0, 0.5 * (a + b)))
        return end

    for seg in schedule.segments:
        if seg.is_frame:
            rows.append((kernels.FRAME, 0.0, 0.0, 0.0, seg.theta, t))
        else:
            t = drive(t, seg.duration, seg.amp * math.cos(seg.phase),
                      seg.amp * math.sin(seg.phase))
    if schedule.wait:
        drive(t, schedule.wait, 0.0, 0.0)
    if not rows:
        return [np.empty(0)] * 6
    return [np.array(c) for c in zip(*rows)]


@dataclass(frozen=True)
class ErrorVector:
    a: np.ndarray
    index: int = -1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.a))


def error_vector_first_order(schedule, trace, t0: float = 0.0) -> ErrorVector:
    """First Magnus error vector of one gate on a piecewise-constant trace."""
    if trace.duration < t0 + schedule.duration - 1e-9:
        raise TraceTooShort(f"trace ends at {trace.duration}, gate needs "
                            f"{t0 + schedule.duration}")
    kind, dt, hx, hy, theta, mid = _schedule_rows(schedule, trace.edges, t0)
    if len(kind) == 0:
        return ErrorVector(np.zeros(3), schedule.target)
    basis = toggle_basis(kind, dt, hx, hy, theta)
    delta = np.where(kind == kernels.FRAME, 0.0, trace.at(mid))
    return ErrorVector(delta @ basis, schedule.target)


def circuit_error_vectors(timeline, d_s, d_l) -> np.ndarray:
    """Error vectors of every gate, shape ``(realizations, J, 3)``.

    ``timeline`` comes from :func:`qcorr.simulator.build_timeline`; ``d_s`` and
    ``d_l`` hold slot and block noise values per realization.
    """
    basis = toggle_basis(timeline.kind, timeline.dt, timeline.hx, timeline.hy,
                         timeline.theta, timeline.gate)
    d_s = np.atleast_2d(d_s)
    d_l = np.atleast_2d(d_l)
    delta = d_s[:, timeline.sidx] + d_l[:, timeline.lidx]
    J = len(timeline.boundaries) - 1
    out = np.empty((delta.shape[0], J, 3))
    for r in range(delta.shape[0]):
        for k in range(3):
            out[r, :, k] = np.bincount(timeline.gate, weights=delta[r] * basis[:, k],
                                       minlength=J)
    return out


# ---------------------------------------------------------------------------
# bandwidth-resolved steps


def _primitive_physical(gate):
    from .gateset import GateSchedule, PulseSegment
    axis, angle = parse_gate(gate)
    if axis == "i":
        return GateSchedule((), "primitive", -1, wait=np.pi)
    phase = {"x": 0.0, "y": np.pi / 2}[axis] + (np.pi if angle < 0 else 0.0)
    return GateSchedule((PulseSegment.drive(abs(angle), 1.0, phase),), "primitive", -1)


@lru_cache(maxsize=None)
def _subslot_coefficients(gate, n_values):
    sched = _primitive_physical(gate)
    cuts = np.linspace(0.0, sched.duration, n_values + 1)
    kind, dt, hx, hy, theta, _ = _schedule_rows(sched, cuts)
    pre = toggle_basis(kind, dt, hx, hy, theta)
    post = pre @ so3(ideal_gate(gate).conj().T).T
    post.setflags(write=False)
    return post


def subslot_coefficients(gate, n_values: int) -> np.ndarray:
    """Rows ``c_i`` with first-order ``nu = sum_i delta_i c_i`` (post-gate frame).

    The gate's duration is split into ``n_values`` equal slots, each with its
    own detuning.
    """
    if n_values < 1:
        raise ValueError("n_values must be >= 1")
    return _subslot_coefficients(parse_gate(gate), int(n_values))


def two_value_error_map(gate, deltas) -> ErrorMap:
    """First-order map for a gate whose detuning takes ``len(deltas)`` values.

    Works for any number of equal slots (two, eight, sixteen...).
    """
    key = parse_gate(gate)
    if key[0] not in ("i", "x"):
        raise UnsupportedGate("bandwidth maps are defined for I and X gates")
    d = np.atleast_1d(np.asarray(deltas, dtype=float))
    nu = d @ subslot_coefficients(key, len(d))
    return ErrorMap(0.0, nu, np.zeros(3), key, 1.0)


def effective_step(gate, n_values: int) -> np.ndarray:
    """Per-axis single-delta step lengths after summing i.i.d. slot values."""
    c = subslot_coefficients(gate, n_values)
    return np.sqrt((c ** 2).sum(axis=0))


def eight_value_coefficient() -> float:
    """Closed-form per-axis coefficient of the eight-value pi map."""
    return math.sqrt((4 - 2 * math.sqrt(2 + math.sqrt(2))) / 2)


# slots per gate class for each bandwidth setting
_SLOTS = {1: {"pi": 1, "pi/2": 1, "I": 1},
          2: {"pi": 2, "pi/2": 1, "I": 2},
          8: {"pi": 8, "pi/2": 8, "I": 16}}
_CLASS_GATE = {"pi": ("x", np.pi), "pi/2": ("x", np.pi / 2), "I": ("i", np.pi)}

FAMILY_WEIGHTS = {
    "primitive": {"pi": 1.0, "pi/2": 1.0, "I": 1.0},
    "corpse": {"pi": 1.0, "pi/2": 8 / (13 / 3), "I": 2.0},
    "wamf": {"pi": 1.0, "pi/2": 1.57, "I": 2.0},
}


@dataclass(frozen=True)
class StepWeights:
    """Step lengths on one or two orthogonal random axes, times a duration weight."""
    gate_class: str
    lengths: tuple
    weight: float = 1.0

    @property
    def scaled(self) -> np.ndarray:
        return self.weight * np.asarray(self.lengths)


def gate_step_weights(gate_class: str, bandwidth: int = 1,
                      family: str = "primitive") -> StepWeights:
    if gate_class not in _CLASS_GATE:
        raise UnsupportedGate(f"gate class must be pi, pi/2 or I, got {gate_class!r}")
    if bandwidth not in _SLOTS:
        raise ValueError(f"bandwidth must be one of {sorted(_SLOTS)}")
    step = effective_step(_CLASS_GATE[gate_class], _SLOTS[bandwidth][gate_class])
    lengths = tuple(sorted((float(x) for x in step if x > 1e-12), reverse=True))
    return StepWeights(gate_class, lengths, FAMILY_WEIGHTS[family][gate_class])


@lru_cache(maxsize=None)
def gate_class_fractions():
    """Fraction of the 24 Cliffords in each class ('I', 'pi', 'pi/2', 'z')."""
    classes = [c.gate_class for c in clifford_table()]
    return {k: classes.count(k) / len(classes) for k in ("I", "pi", "pi/2", "z")}


def _pair(step: StepWeights):
    s = step.scaled
    return (s[0], s[1] if len(s) > 1 else 0.0)


def projected_moments(long: StepWeights, short: StepWeights = None):
    """Moments of the 2D-projected squared step for a random axis assignment.

    Returns ``(E|L|^2, E|L|^4, E|L|^2 |S|^2)``; the two steps share the same
    random axes.
    """
    short = long if short is None else short
    l1, l2 = _pair(long)
    s1, s2 = _pair(short)
    e2 = 2 / 3 * (l1 ** 2 + l2 ** 2)
    e4 = ((l1 ** 2 + l2 ** 2) ** 2 + l1 ** 4 + l2 ** 4) / 3
    cross = ((l1 ** 2 + l2 ** 2) * (s1 ** 2 + s2 ** 2) + l1 ** 2 * s1 ** 2 + l2 ** 2 * s2 ** 2) / 3
    return e2, e4, cross


# ---------------------------------------------------------------------------
# the walk


@dataclass(frozen=True)
class WalkVector:
    R: np.ndarray

    @property
    def p(self) -> float:
        return float(self.R[0] ** 2 + self.R[1] ** 2)


@lru_cache(maxsize=None)
def _clifford_data():
    tab = clifford_table()
    pre = np.zeros((24, 3))
    for c in tab:
        phys = c.physical
        if phys is not None:
            pre[c.index] = so3(ideal_gate(phys)) @ error_map(phys).nu
    mats = np.array([so3(c.unitary) for c in tab])
    return pre, mats


def toggled_steps(indices, deltas=None) -> np.ndarray:
    """Toggled per-gate steps ``r_j`` (rows), optionally weighted by ``deltas``.

    ``deltas[j]`` may be a scalar (one value per gate) or an array of equal-slot
    values across the gate's physical rotation.
    """
    pre, mats = _clifford_data()
    tab = clifford_table()
    indices = list(indices)
    out = np.zeros((len(indices), 3))
    m = np.eye(3)
    for j, idx in enumerate(indices):
        if deltas is None:
            step = pre[idx]
        else:
            d = np.asarray(deltas[j], dtype=float)
            phys = tab[idx].physical
            if phys is None:
                step = np.zeros(3)
            elif d.ndim == 0:
                step = float(d) * pre[idx]
            else:
                nu = d @ subslot_coefficients(phys, len(d))
                step = so3(ideal_gate(phys)) @ nu
        out[j] = m @ step
        m = m @ mats[idx]
    return out


def walk(circuit, deltas):
    """First-order walk vector and ``p_walk = R_x^2 + R_y^2``.

    ``circuit`` is a CircuitSpec or index sequence; ``deltas`` has one entry
    per gate (see :func:`toggled_steps` for the multi-value form).
    """
    indices = getattr(circuit, "indices", circuit)
    if np.ndim(deltas) == 0:
        raise LengthMismatch("deltas must be a sequence")
    if len(deltas) != len(indices):
        raise LengthMismatch(f"{len(deltas)} deltas for {len(indices)} gates")
    R = toggled_steps(indices, deltas).sum(axis=0)
    wv = WalkVector(R)
    return wv, wv.p


# ---------------------------------------------------------------------------
# autocorrelation


def acf(series, max_lag: int) -> np.ndarray:
    """Biased, mean-subtracted autocorrelation for lags ``0..max_lag``.

    A constant series has no variance to normalize by and returns all ones.
    """
    x = np.asarray(series, dtype=float)
    if len(x) <= max_lag:
        raise SeriesTooShort(f"series of length {len(x)} for max lag {max_lag}")
    x = x - x.mean()
    c0 = np.dot(x, x)
    if c0 <= 1e-300:
        return np.ones(max_lag + 1)
    n = len(x)
    return np.array([np.dot(x[:n - k], x[k:]) for k in range(max_lag + 1)]) / c0


def correlation_length(rho, threshold: float = math.exp(-1)) -> float:
    """First lag where ``rho`` falls to ``threshold``, linearly interpolated."""
    rho = np.asarray(rho, dtype=float)
    below = np.nonzero(rho <= threshold)[0]
    if len(below) == 0:
        raise NoCrossing(f"ACF stays above {threshold:.4g} up to lag {len(rho) - 1}")
    k = int(below[0])
    if k == 0:
        return 0.0
    hi, lo = rho[k - 1], rho[k]
    return k - 1 + (hi - threshold) / (hi - lo)


# ---------------------------------------------------------------------------
# filter functions


def _expint(k, length):
    """``int_0^length exp(i k tau) dtau`` for an array of ``k``."""
    k = np.asarray(k, dtype=float)
    x = k * length
    small = np.abs(x) < 1e-6
    ks = np.where(small, 1.0, k)
    big = (np.exp(1j * x) - 1) / (1j * ks)
    return np.where(small, length * (1 + 0.5j * x), big)


def filter_function(schedule, omegas) -> np.ndarray:
    """``|F(w)|^2`` with ``F(w) = int_0^T exp(i w t) r_z(t) dt`` (all 3 components)."""
    w = np.asarray(omegas, dtype=float)
    F = np.zeros((len(w), 3), dtype=complex)
    m = np.eye(3)
    t = 0.0

    def add(t, length, hx, hy):
        nonlocal m
        omega = math.hypot(hx, hy)
        ph = np.exp(1j * w * t)
        if omega == 0.0:
            F[:] += (ph * _expint(w, length))[:, None] * (m @ _EZ)[None, :]
            return
        n = np.array([hx, hy, 0.0]) / omega
        ep, em = _expint(w + omega, length), _expint(w - omega, length)
        cos_i = 0.5 * (ep + em)
        sin_i = (ep - em) / 2j
        F[:] += (ph * cos_i)[:, None] * (m @ _EZ)[None, :]
        F[:] -= (ph * sin_i)[:, None] * (m @ np.cross(n, _EZ))[None, :]
        m = m @ _rot_minus(n, omega * length)

    for seg in schedule.segments:
        if seg.is_frame:
            m = m @ _rot_minus(_EZ, seg.theta)
            continue
        add(t, seg.duration, seg.amp * math.cos(seg.phase), seg.amp * math.sin(seg.phase))
        t += seg.duration
    if schedule.wait:
        add(t, schedule.wait, 0.0, 0.0)
    return (np.abs(F) ** 2).sum(axis=1)


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
