"""2x2 unitary algebra, Pauli expansions and the single-qubit Clifford group.

Unitaries are plain ``(2, 2)`` complex numpy arrays. Composition follows time
order: ``compose(a, b)`` applies ``a`` first, i.e. returns ``b @ a``.

The Clifford table is built from one physical rotation (identity wait, X or
Y by pi or +-pi/2) followed by a trailing z frame change. Enumeration runs
over frame angles ``(0, pi/2, pi, -pi/2)`` in the outer loop and physical
rotations in the inner loop, keeping the first representative of every
group element. The resulting order is frozen in ``data/cliffords.csv``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import NotClifford

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)

PHASE_TOL = 1e-9

for _m in (I2, SX, SY, SZ):
    _m.setflags(write=False)


def rotation(axis, angle: float) -> np.ndarray:
    """Ideal rotation ``exp(-i angle/2 W)`` about ``axis`` in {'x','y','z','i'}."""
    if axis == "i":
        return I2.copy()
    w = {"x": SX, "y": SY, "z": SZ}[axis]
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * w


def su2(axis_vec, angle: float) -> np.ndarray:
    """``exp(-i angle/2 n.sigma)`` for a unit 3-vector ``axis_vec``."""
    n = np.asarray(axis_vec, dtype=float)
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * (
        n[0] * SX + n[1] * SY + n[2] * SZ)


def compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return b @ a


def dagger(u: np.ndarray) -> np.ndarray:
    return u.conj().T


def fidelity(s: np.ndarray, t: np.ndarray) -> float:
    """Phase-invariant overlap ``|Tr(s^dag t)|^2 / 4``."""
    f = abs(np.trace(dagger(s) @ t)) ** 2 / 4.0
    return float(min(max(f, 0.0), 1.0))


def phase_distance(s: np.ndarray, t: np.ndarray) -> float:
    return 1.0 - fidelity(s, t)


def equal_up_to_phase(s, t, tol: float = PHASE_TOL) -> bool:
    return phase_distance(s, t) < tol


def pauli_coeffs(a: np.ndarray):
    """Expand ``a = c0 I + c.sigma``; returns ``(c0, c)`` with complex entries."""
    c0 = np.trace(a) / 2
    c = np.array([np.trace(p @ a) / 2 for p in PAULIS])
    return c0, c


def from_pauli(c0, c) -> np.ndarray:
    return c0 * I2 + c[0] * SX + c[1] * SY + c[2] * SZ


def pauli_vector(h: np.ndarray) -> np.ndarray:
    """Real Pauli vector of a Hermitian traceless operator."""
    return np.real(pauli_coeffs(h)[1])


def conjugate_vector(u: np.ndarray, v) -> np.ndarray:
    """Pauli vector of ``u^dag (v.sigma) u``."""
    h = v[0] * SX + v[1] * SY + v[2] * SZ
    return pauli_vector(dagger(u) @ h @ u)


def so3(u: np.ndarray) -> np.ndarray:
    """Matrix ``M`` with ``u^dag (v.sigma) u = (M v).sigma``."""
    return np.column_stack([conjugate_vector(u, e) for e in np.eye(3)])


@dataclass(frozen=True)
class CliffordElement:
    """One of the 24 single-qubit Cliffords.

    ``rotations`` lists ``(axis, angle)`` pairs in time order. Axis ``'i'``
    marks the identity wait, ``'z'`` a noiseless frame change.
    """
    index: int
    rotations: tuple
    unitary: np.ndarray

    @property
    def physical(self):
        """The single non-z rotation, or ``None`` for pure frame changes."""
        for axis, angle in self.rotations:
            if axis != "z":
                return axis, angle
        return None

    @property
    def frame(self) -> float:
        for axis, angle in self.rotations:
            if axis == "z":
                return angle
        return 0.0

    @property
    def gate_class(self) -> str:
        """'I' (wait), 'pi', 'pi/2' or 'z' (frame change only)."""
        phys = self.physical
        if phys is None:
            return "z"
        if phys[0] == "i":
            return "I"
        return "pi" if abs(abs(phys[1]) - np.pi) < 1e-12 else "pi/2"

    def label(self) -> str:
        return " ".join(f"{a.upper()}({_angle_str(t)})" for a, t in self.rotations)


_ANGLES = {np.pi: "pi", np.pi / 2: "pi/2", -np.pi / 2: "-pi/2"}


def _angle_str(t: float) -> str:
    for k, v in _ANGLES.items():
        if abs(t - k) < 1e-12:
            return v
    return repr(t)


def _parse_angle(s: str) -> float:
    return {"pi": np.pi, "pi/2": np.pi / 2, "-pi/2": -np.pi / 2}[s]


_PHYSICAL = (("i", np.pi), ("x", np.pi), ("y", np.pi),
             ("x", np.pi / 2), ("x", -np.pi / 2),
             ("y", np.pi / 2), ("y", -np.pi / 2))
_FRAMES = (0.0, np.pi / 2, np.pi, -np.pi / 2)


def _build_table():
    out = []
    for z in _FRAMES:
        for axis, angle in _PHYSICAL:
            if axis == "i" and z != 0.0:
                rots = (("z", z),)
            else:
                rots = ((axis, angle),) + ((("z", z),) if z != 0.0 else ())
            u = I2.copy()
            for a, t in rots:
                u = compose(u, rotation(a, t))
            if any(equal_up_to_phase(u, e.unitary) for e in out):
                continue
            u.setflags(write=False)
            out.append(CliffordElement(len(out), rots, u))
    return tuple(out)


@lru_cache(maxsize=None)
def clifford_table():
    """The canonical 24-element table (cached, immutable)."""
    table = _build_table()
    assert len(table) == 24
    return table


@lru_cache(maxsize=None)
def _unitary_stack():
    return np.array([c.unitary for c in clifford_table()])


def find_clifford(u: np.ndarray) -> CliffordElement:
    """Table element equal to ``u`` up to global phase."""
    overlaps = np.abs(np.einsum("kij,ij->k", _unitary_stack().conj(), u)) ** 2 / 4
    k = int(np.argmax(overlaps))
    if 1.0 - overlaps[k] >= PHASE_TOL:
        raise NotClifford("unitary does not match any Clifford element")
    return clifford_table()[k]


def inverse_in_clifford(u: np.ndarray) -> CliffordElement:
    """Element whose ideal unitary equals ``u^dag`` up to global phase."""
    return find_clifford(dagger(u))


@lru_cache(maxsize=None)
def multiplication_table() -> np.ndarray:
    """``M[a, b]`` = index of ``compose(a, b)`` (a applied first)."""
    tab = clifford_table()
    m = np.empty((24, 24), dtype=np.int64)
    for a in tab:
        for b in tab:
            m[a.index, b.index] = find_clifford(compose(a.unitary, b.unitary)).index
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def inverse_table() -> np.ndarray:
    inv = np.array([inverse_in_clifford(c.unitary).index for c in clifford_table()])
    inv.setflags(write=False)
    return inv


CSV_HEADER = ("index", "decomposition", "re00", "im00", "re01", "im01",
              "re10", "im10", "re11", "im11")


def table_rows():
    for c in clifford_table():
        u = c.unitary
        vals = []
        for i in range(2):
            for j in range(2):
                vals += [u[i, j].real, u[i, j].imag]
        yield [c.index, c.label()] + [f"{round(v, 12) + 0.0:+.12f}" for v in vals]


def table_csv() -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in table_rows():
        w.writerow(row)
    return buf.getvalue()


def read_table_csv(text: str = None):
    """Parse a Clifford CSV (defaults to the packaged data file)."""
    if text is None:
        text = resources.files("qcorr").joinpath("data/cliffords.csv").read_text()
    rows = list(csv.reader(io.StringIO(text)))
    if tuple(rows[0]) != CSV_HEADER:
        raise ValueError("unexpected Clifford CSV header")
    out = []
    for row in rows[1:]:
        rots = []
        for tok in row[1].split():
            axis, ang = tok[0].lower(), tok[2:-1]
            rots.append((axis, _parse_angle(ang)))
        v = [float(x) for x in row[2:]]
        u = np.array([[v[0] + 1j * v[1], v[2] + 1j * v[3]],
                      [v[4] + 1j * v[5], v[6] + 1j * v[7]]])
        out.append((int(row[0]), tuple(rots), u))
    return out
