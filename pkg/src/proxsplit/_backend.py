"""Kernel backend selection.

Set ``PROXSPLIT_BACKEND=numpy`` to run every hot kernel as plain numpy code.
The default (``numba``) compiles them with ``numba.njit`` when numba is
importable and silently falls back to numpy otherwise.
"""

from __future__ import annotations

import os

_requested = os.environ.get("PROXSPLIT_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(
        f"PROXSPLIT_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

try:
    if _requested != "numba":
        raise ImportError
    import numba as _numba
except ImportError:
    _numba = None

BACKEND = "numba" if _numba is not None else "numpy"


def njit(func):
    """Compile ``func`` in nopython mode when the numba backend is active."""
    if _numba is None:
        return func
    return _numba.njit(cache=True)(func)
