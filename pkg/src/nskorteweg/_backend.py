"""JIT backend selection.

Numba is used when importable unless ``NSKORTEWEG_JIT=0`` is set in the
environment before import.  With JIT disabled every kernel falls back to its
vectorised numpy twin; results agree to round-off.
"""
import os

_requested = os.environ.get("NSKORTEWEG_JIT", "1").strip().lower() not in ("0", "false", "no", "off")

try:
    if not _requested:
        raise ImportError("disabled by NSKORTEWEG_JIT")
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f

        return wrapper

    prange = range

USE_JIT = HAVE_NUMBA


def set_threads(count):
    """Size the numba thread pool; no-op without numba."""
    if HAVE_NUMBA and count:
        numba.set_num_threads(max(1, min(int(count), numba.config.NUMBA_NUM_THREADS)))
