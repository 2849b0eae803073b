"""Backend selection for the hot kernels.

Numba is used when importable unless ``QCORR_DISABLE_NUMBA`` is set to a
truthy value, in which case every kernel falls back to its pure-numpy path.
"""
import os

_FLAG = os.environ.get("QCORR_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and _FLAG not in ("1", "true", "yes", "on")

if NUMBA_AVAILABLE:
    from numba import njit
else:  # pragma: no cover
    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f
        return wrapper


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
