"""
JIT selection for the numeric kernels.

Kernels are written once in a numba-compatible numpy subset. When numba is
importable and ``STEFAN_DISABLE_NUMBA`` is unset (or ``0``), they are compiled
with ``numba.njit``; otherwise ``njit`` is a no-op decorator and the same code
runs as plain numpy.
"""
import os

_flag = os.environ.get("STEFAN_DISABLE_NUMBA", "").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    from numba import njit as _numba_njit

    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False

JIT_OPTIONS = {"cache": True, "nogil": True}


def njit(*args, **kwargs):
    """``numba.njit`` with project defaults, or identity in fallback mode."""
    if NUMBA_ENABLED:
        opts = {**JIT_OPTIONS, **kwargs}
        if len(args) == 1 and callable(args[0]):
            return _numba_njit(**opts)(args[0])
        return _numba_njit(*args, **opts)

    if len(args) == 1 and callable(args[0]):
        return args[0]

    def decorator(func):
        return func

    return decorator


def backend() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
