"""Counter-based random numbers keyed by (seed, doc, sequence, stream, unit).

Every draw is a pure function of its key, so masking decisions do not depend on
processing order or on how the corpus is sharded across workers. The mixer is
the SplitMix64 finalizer applied after folding in each key component.
"""

from __future__ import annotations

import numpy as np

from ._accel import NUMBA_ENABLED, njit

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# draw purposes
STREAM_SELECT = 1
STREAM_FATE = 2
STREAM_REPLACE = 3
STREAM_RESERVOIR = 4
STREAM_TEST = 99


def _mix_int(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _M1) & _MASK64
    z = ((z ^ (z >> 27)) * _M2) & _MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, doc: int, seq: int, stream: int) -> int:
    """Fold the four key components into one 64-bit key."""
    h = _mix_int(seed + _GOLDEN)
    for part in (doc, seq, stream):
        h = _mix_int(h ^ ((part * _GOLDEN + 1) & _MASK64))
    return h


_U_GOLDEN = np.uint64(_GOLDEN)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_U_ONE = np.uint64(1)
_S30, _S27, _S31, _S11 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit
def _uniform_loop(key, units):
    out = np.empty(units.shape[0])
    for i in range(units.shape[0]):
        z = key ^ (np.uint64(units[i]) * _U_GOLDEN + _U_ONE)
        z = (z ^ (z >> _S30)) * _U_M1
        z = (z ^ (z >> _S27)) * _U_M2
        z = z ^ (z >> _S31)
        out[i] = np.float64(z >> _S11) * _INV53
    return out


def _uniform_numpy(key, units):
    z = np.uint64(key) ^ (units.astype(np.uint64) * _U_GOLDEN + _U_ONE)
    z = (z ^ (z >> _S30)) * _U_M1
    z = (z ^ (z >> _S27)) * _U_M2
    z = z ^ (z >> _S31)
    return (z >> _S11).astype(np.float64) * _INV53


_uniform_kernel = _uniform_loop if NUMBA_ENABLED else _uniform_numpy


def uniforms(seed: int, doc: int, seq: int, stream: int, units) -> np.ndarray:
    """Uniform doubles in [0, 1), one per unit index."""
    units = np.ascontiguousarray(units, dtype=np.int64)
    key = np.uint64(stream_key(seed & _MASK64, doc, seq, stream))
    return _uniform_kernel(key, units)


def uniform_range(seed: int, doc: int, seq: int, stream: int, n: int) -> np.ndarray:
    return uniforms(seed, doc, seq, stream, np.arange(n, dtype=np.int64))
