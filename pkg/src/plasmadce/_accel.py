"""Numba switch for the hot integration loops.

Set ``PLASMADCE_NO_NUMBA=1`` in the environment to force the pure-numpy
path (useful for debugging and for the benchmark comparison).
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def numba_requested():
    return os.environ.get("PLASMADCE_NO_NUMBA", "").strip().lower() not in ("1", "true", "yes")


USE_NUMBA = numba is not None and numba_requested()


def njit(func):
    """Compile ``func`` with numba when enabled, else return it unchanged."""
    if USE_NUMBA:
        return numba.njit(cache=True)(func)
    return func
