"""Selects between numba-compiled kernels and their pure-numpy fallbacks.

Set ``ERSATZ_DISABLE_NUMBA=1`` in the environment (before import) to force the
numpy path.  The numpy path is also used when numba is not importable.
"""

import os

_FLAG = os.environ.get("ERSATZ_DISABLE_NUMBA", "").strip().lower()

try:
    import numba  # noqa: F401
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba ships in the test env
    HAS_NUMBA = False
    njit = None

USE_NUMBA = HAS_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def backend():
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"


def jit(fn):
    """``njit(cache=True, nogil=True)`` when numba is active, else identity."""
    if njit is None:
        return fn
    return njit(cache=True, nogil=True)(fn)
