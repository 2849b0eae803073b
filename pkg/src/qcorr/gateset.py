"""Pulse schedules realising each Clifford as primitive, CORPSE or WAMF gates.

Units: the maximum Rabi rate is 1, so a rotation by ``theta`` at full
amplitude lasts ``theta``. Negative rotations are a pi phase shift of the
drive, never a negative duration.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidAngle
from .qcore import I2, SX, SY, SZ, clifford_table, compose

FAMILIES = ("primitive", "corpse", "wamf")

# WAMF target angles -> (X0, X3) in units of pi
WAMF_COEFFS = {
    np.pi / 4: (2.25, 0.36),
    np.pi / 2: (2.5, 0.64),
    np.pi: (3.0, 1.0),
}

_AXIS_PHASE = {"x": 0.0, "y": np.pi / 2}


@dataclass(frozen=True)
class PulseSegment:
    """A constant-amplitude drive segment or an instantaneous z frame change.

    For drives, ``theta`` is the (positive) rotation angle, ``amp`` the
    relative Rabi rate and ``phase`` the drive phase. Frame changes carry
    ``amp == 0``, ``duration == 0`` and the z angle in ``theta``.
    """
    theta: float
    amp: float
    phase: float
    duration: float

    @property
    def is_frame(self) -> bool:
        return self.amp == 0.0

    @classmethod
    def drive(cls, theta, amp=1.0, phase=0.0):
        if theta <= 0 or not 0 < amp <= 1:
            raise InvalidAngle(f"bad drive segment theta={theta} amp={amp}")
        return cls(float(theta), float(amp), float(phase) % (2 * np.pi),
                   float(theta) / float(amp))

    @classmethod
    def frame(cls, angle):
        return cls(float(angle), 0.0, 0.0, 0.0)

    def ideal(self) -> np.ndarray:
        if self.is_frame:
            return np.cos(self.theta / 2) * I2 - 1j * np.sin(self.theta / 2) * SZ
        n = np.cos(self.phase) * SX + np.sin(self.phase) * SY
        return np.cos(self.theta / 2) * I2 - 1j * np.sin(self.theta / 2) * n


@dataclass(frozen=True)
class GateSchedule:
    """Time-ordered segments plus a trailing idle ``wait``.

    ``duration`` is the total wall-clock length including the wait.
    """
    segments: tuple
    family: str
    target: int
    wait: float = 0.0

    @property
    def duration(self) -> float:
        return sum(s.duration for s in self.segments) + self.wait

    def ideal(self) -> np.ndarray:
        u = I2.copy()
        for s in self.segments:
            u = compose(u, s.ideal())
        return u


def schedule_duration(s: GateSchedule) -> float:
    """Duration in units of the primitive pi/2 pulse."""
    return s.duration / (np.pi / 2)


def corpse_k(theta_t: float) -> float:
    return float(np.arcsin(np.sin(theta_t / 2) / 2))


def _check_axis(axis):
    if axis not in _AXIS_PHASE:
        raise InvalidAngle(f"axis must be 'x' or 'y', got {axis!r}")


def _signed(axis, theta_t):
    """Split a signed target into (|theta|, drive phase offset)."""
    _check_axis(axis)
    phase = _AXIS_PHASE[axis] + (np.pi if theta_t < 0 else 0.0)
    return abs(theta_t), phase


def corpse_segments(axis: str, theta_t: float):
    th, ph = _signed(axis, theta_t)
    if th <= 0:
        raise InvalidAngle("CORPSE target angle must be nonzero")
    k = corpse_k(th)
    return (PulseSegment.drive(2 * np.pi + th / 2 - k, 1.0, ph),
            PulseSegment.drive(2 * np.pi - 2 * k, 1.0, ph + np.pi),
            PulseSegment.drive(th / 2 - k, 1.0, ph))


def wamf_segments(axis: str, theta_t: float):
    th, ph = _signed(axis, theta_t)
    key = next((t for t in WAMF_COEFFS if abs(t - th) < 1e-12), None)
    if key is None:
        raise InvalidAngle(f"WAMF defined for pi/4, pi/2, pi only; got {theta_t}")
    x0, x3 = (c * np.pi for c in WAMF_COEFFS[key])
    outer = PulseSegment.drive((x0 + x3) / 4, 1.0, ph)
    middle = PulseSegment.drive((x0 - x3) / 2, (x0 - x3) / (x0 + x3), ph)
    return (outer, middle, outer)


def corpse_schedule(axis: str, theta_t: float, target: int = -1) -> GateSchedule:
    return GateSchedule(corpse_segments(axis, theta_t), "corpse", target)


def wamf_schedule(axis: str, theta_t: float, target: int = -1) -> GateSchedule:
    return GateSchedule(wamf_segments(axis, theta_t), "wamf", target)


def identity_schedule(family: str, target: int = 0) -> GateSchedule:
    """Identity: a pi-length wait for primitive gates, X_pi then -X_pi for DCGs."""
    if family == "primitive":
        return GateSchedule((), family, target, wait=np.pi)
    build = {"corpse": corpse_segments, "wamf": wamf_segments}[family]
    return GateSchedule(build("x", np.pi) + build("x", -np.pi), family, target)


def _physical_segments(family, axis, angle):
    if family == "primitive":
        th, ph = _signed(axis, angle)
        return (PulseSegment.drive(th, 1.0, ph),)
    if family == "corpse":
        return corpse_segments(axis, angle)
    if family == "wamf":
        return wamf_segments(axis, angle)
    raise ValueError(f"unknown family {family!r}")


def family_schedule(element, family: str) -> GateSchedule:
    """Schedule realising ``element`` with the given gate family."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if element.gate_class == "I":
        return identity_schedule(family, element.index)
    segs = ()
    for axis, angle in element.rotations:
        if axis == "z":
            segs += (PulseSegment.frame(angle),)
        else:
            segs += _physical_segments(family, axis, angle)
    return GateSchedule(segs, family, element.index)


def primitive_schedule(element) -> GateSchedule:
    return family_schedule(element, "primitive")


@lru_cache(maxsize=None)
def schedule_table(family: str):
    """Prebuilt schedules for all 24 Cliffords, shared read-only."""
    return tuple(family_schedule(c, family) for c in clifford_table())


def mean_duration(family: str) -> float:
    return float(np.mean([s.duration for s in schedule_table(family)]))


def schedule_rows(family: str):
    """Rows of the schedule dump: family, index, segment, theta, amp, phase, duration."""
    for s in schedule_table(family):
        for i, seg in enumerate(s.segments):
            yield (family, s.target, i, seg.theta, seg.amp, seg.phase, seg.duration)
        if s.wait:
            yield (family, s.target, len(s.segments), 0.0, 0.0, 0.0, s.wait)
