"""Numba switch.

Set ``HOLLINGBIF_DISABLE_NUMBA=1`` to run every kernel as plain Python.
The pure path uses the same source, so results agree to rounding.
"""
import os

_FLAG = os.environ.get("HOLLINGBIF_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if DISABLED:
        raise ImportError
    from numba import njit as _njit

    NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag
    NUMBA = False
    _njit = None


def jit(fn):
    if NUMBA:
        return _njit(cache=True, nogil=True)(fn)
    return fn
