"""Optional numba acceleration.

Kernels are written once as plain loops. When numba is importable and
``SELMASK_DISABLE_NUMBA`` is unset, ``njit`` compiles them; otherwise each
kernel module routes to its numpy implementation.
"""

from __future__ import annotations

import os

_DISABLED = os.environ.get("SELMASK_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError("disabled by SELMASK_DISABLE_NUMBA")
    from numba import njit as _numba_njit

    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False
    _numba_njit = None


def njit(fn):
    """Compile ``fn`` with numba in nopython mode, or return it unchanged."""
    if NUMBA_ENABLED:
        return _numba_njit(cache=True, nogil=True)(fn)
    return fn


def backend() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"


__all__ = ["njit", "NUMBA_ENABLED", "backend"]
