"""Hot inner loops, each with a numba and a pure-numpy implementation.

The public names (``propagate_timeline``, ``cumulative_variances``) dispatch
on :data:`qcorr._jit.USE_NUMBA`; the ``*_numba`` / ``*_numpy`` variants are
exported for tests and the benchmark.

A propagator is stored as the first column ``(a, b)`` of an SU(2) matrix
``[[a, -conj(b)], [b, conj(a)]]``; ``|b|^2`` is then P(|1>) for input |0>.
"""
import numpy as np

from ._jit import USE_NUMBA, njit

EVOLVE = 0
FRAME = 1


@njit(cache=True, nogil=True)
def _slice_coeffs(hx, hy, hz, dt):
    norm = np.sqrt(hx * hx + hy * hy + hz * hz)
    if norm == 0.0:
        return 1.0 + 0.0j, 0.0 + 0.0j
    half = 0.5 * norm * dt
    s = np.sin(half) / norm
    c = np.cos(half) - 1j * s * hz
    d = s * hy - 1j * s * hx
    return c, d


@njit(cache=True, nogil=True)
def propagate_timeline_numba(kind, dt, hx, hy, theta, sidx, lidx, d_s, d_l):
    n_real = d_s.shape[0]
    a_out = np.empty(n_real, dtype=np.complex128)
    b_out = np.empty(n_real, dtype=np.complex128)
    n_slice = kind.shape[0]
    for r in range(n_real):
        a = 1.0 + 0.0j
        b = 0.0 + 0.0j
        for i in range(n_slice):
            if kind[i] == FRAME:
                c = np.cos(0.5 * theta[i]) - 1j * np.sin(0.5 * theta[i])
                d = 0.0 + 0.0j
            else:
                delta = d_s[r, sidx[i]] + d_l[r, lidx[i]]
                c, d = _slice_coeffs(hx[i], hy[i], delta, dt[i])
            a, b = c * a - np.conj(d) * b, d * a + np.conj(c) * b
        a_out[r] = a
        b_out[r] = b
    return a_out, b_out


def propagate_timeline_numpy(kind, dt, hx, hy, theta, sidx, lidx, d_s, d_l):
    n_real = d_s.shape[0]
    a = np.ones(n_real, dtype=complex)
    b = np.zeros(n_real, dtype=complex)
    for i in range(kind.shape[0]):
        if kind[i] == FRAME:
            c = np.exp(-0.5j * theta[i])
            a, b = c * a, np.conj(c) * b
            continue
        hz = d_s[:, sidx[i]] + d_l[:, lidx[i]]
        norm = np.sqrt(hx[i] ** 2 + hy[i] ** 2 + hz ** 2)
        half = 0.5 * norm * dt[i]
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.where(norm > 0, np.sin(half) / np.where(norm > 0, norm, 1.0), 0.0)
        c = np.cos(half) - 1j * s * hz
        d = s * hy[i] - 1j * s * hx[i]
        a, b = c * a - np.conj(d) * b, d * a + np.conj(c) * b
    return a, b


def propagate_timeline(kind, dt, hx, hy, theta, sidx, lidx, d_s, d_l):
    """Final SU(2) columns for each row (realization) of the noise arrays."""
    d_s = np.ascontiguousarray(d_s, dtype=float)
    d_l = np.ascontiguousarray(d_l, dtype=float)
    if USE_NUMBA:
        return propagate_timeline_numba(kind, dt, hx, hy, theta, sidx, lidx, d_s, d_l)
    return propagate_timeline_numpy(kind, dt, hx, hy, theta, sidx, lidx, d_s, d_l)


@njit(cache=True, nogil=True)
def cumulative_variances_numba(p, perms):
    k, n = p.shape
    n_perm = perms.shape[0]
    out = np.empty((n_perm, n))
    sums = np.empty(k)
    for q in range(n_perm):
        for c in range(k):
            sums[c] = 0.0
        for j in range(n):
            col = perms[q, j]
            m1 = 0.0
            for c in range(k):
                sums[c] += p[c, col]
                m1 += sums[c]
            m1 /= k * (j + 1)
            acc = 0.0
            for c in range(k):
                dev = sums[c] / (j + 1) - m1
                acc += dev * dev
            out[q, j] = acc / k
    return out


def cumulative_variances_numpy(p, perms):
    n = p.shape[1]
    counts = np.arange(1, n + 1)
    out = np.empty((perms.shape[0], n))
    for q, perm in enumerate(perms):
        means = np.cumsum(p[:, perm], axis=1) / counts
        out[q] = means.var(axis=0)
    return out


def cumulative_variances(p, perms):
    """Population variance across circuits of running means, per permutation.

    ``p`` is ``(k circuits, N realizations)``; ``perms`` is ``(R, N)``.
    """
    p = np.ascontiguousarray(p, dtype=float)
    perms = np.ascontiguousarray(perms, dtype=np.int64)
    if USE_NUMBA:
        return cumulative_variances_numba(p, perms)
    return cumulative_variances_numpy(p, perms)
