"""Optional numba acceleration.

Hot kernels are written once in loop style and compiled with ``numba.njit``
when numba is importable and ``MORSELAB_NUMBA`` is not set to ``0``.
Otherwise the very same functions run as plain Python/numpy.
"""
import os

_flag = os.environ.get("MORSELAB_NUMBA", "1").strip().lower()

try:
    if _flag in ("0", "false", "no", "off"):
        raise ImportError("numba disabled by MORSELAB_NUMBA")
    import numba

    NUMBA_ENABLED = True
except ImportError:
    numba = None
    NUMBA_ENABLED = False


def jit(func=None, **kwargs):
    """``numba.njit(cache=True, nogil=True)`` or the identity."""
    if func is None:
        return lambda f: jit(f, **kwargs)
    if not NUMBA_ENABLED:
        return func
    opts = {"cache": True, "nogil": True}
    opts.update(kwargs)
    return numba.njit(**opts)(func)


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"


def thread_count():
    """Worker count for ensemble runs, from ``MORSELAB_THREADS`` (default 1)."""
    try:
        n = int(os.environ.get("MORSELAB_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)
