"""Score -> masking-probability functions and mask-rate calibration.

Families (``m`` is the extremity of score ``s``; see :func:`extremity`):

* ``step``: 1 when ``s <= alpha or s >= 10 - alpha`` (one-sided: ``m >= 10 - alpha``), else 0
* ``linear``: ``(m - alpha) / beta``
* ``exponential``: ``(exp(alpha * m) - exp(beta)) / gamma``
* ``random_baseline``: the target rate for every word

All values are clamped to [0, 1]. Calibration solves exactly one constant per
family so the token-weighted expected mask rate hits the target.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from ._accel import NUMBA_ENABLED, njit
from .errors import CalibrationError, ConfigError

logger = logging.getLogger(__name__)

FAMILIES = ("step", "linear", "exponential", "random_baseline")
SIDEDNESS = ("two_sided", "one_sided_hi", "one_sided_lo")

DEFAULT_TARGET_RATE = 0.15
DEFAULT_TOLERANCE = 0.002
LINEAR_PIVOT = 5.0
EXP_SHAPE = 0.5
MAX_BISECTION_STEPS = 100


@dataclass(frozen=True)
class MaskFnConfig:
    family: str
    sidedness: str = "two_sided"
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    target_rate: float = DEFAULT_TARGET_RATE

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown masking family {self.family!r}; expected one of {FAMILIES}")
        if self.sidedness not in SIDEDNESS:
            raise ConfigError(f"unknown sidedness {self.sidedness!r}; expected one of {SIDEDNESS}")
        if not 0.0 < self.target_rate < 1.0:
            raise ConfigError(f"target_rate must lie in (0, 1), got {self.target_rate}")
        for name in ("alpha", "beta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if self.family == "step" and not 0.0 <= self.alpha <= 5.0:
            raise ConfigError(f"step alpha must lie in [0, 5], got {self.alpha}")
        if self.family == "linear" and not self.beta > 0:
            raise ConfigError(f"linear beta must be positive, got {self.beta}")
        if self.family == "exponential" and not (self.alpha > 0 and self.gamma > 0):
            raise ConfigError("exponential alpha and gamma must be positive")

    @classmethod
    def default(cls, family: str, sidedness: str = "two_sided",
                target_rate: float = DEFAULT_TARGET_RATE, **shape) -> "MaskFnConfig":
        """A valid, uncalibrated config with the fixed shape constants filled in."""
        if family == "step":
            params = dict(alpha=shape.get("alpha", 0.75))
        elif family == "linear":
            params = dict(alpha=shape.get("alpha", LINEAR_PIVOT), beta=shape.get("beta", 5.0))
        elif family == "exponential":
            a = shape.get("alpha", EXP_SHAPE)
            b = shape.get("beta", 5.0 * a)
            params = dict(alpha=a, beta=b, gamma=shape.get("gamma", math.exp(10 * a) - math.exp(b)))
        else:
            params = {}
        return cls(family, sidedness, target_rate=target_rate, **params)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def codes(self):
        return FAMILIES.index(self.family), SIDEDNESS.index(self.sidedness)


def extremity(s, sidedness: str = "two_sided"):
    """Distance-from-neutral measure: max(s, 10-s), s, or 10-s."""
    if sidedness == "two_sided":
        return np.maximum(s, 10.0 - s) if isinstance(s, np.ndarray) else max(s, 10.0 - s)
    if sidedness == "one_sided_hi":
        return s
    if sidedness == "one_sided_lo":
        return 10.0 - s
    raise ConfigError(f"unknown sidedness {sidedness!r}")


def default_oov_score(sidedness: str) -> float:
    """Score where the masking function is minimal, used for words without embeddings."""
    return {"two_sided": 5.0, "one_sided_hi": 0.0, "one_sided_lo": 10.0}[sidedness]


# -- kernels ---------------------------------------------------------------

def _probabilities_numpy(family, side, a, b, g, rate, s):
    if family == 3:
        return np.full(s.shape, rate)
    if side == 0:
        m = np.maximum(s, 10.0 - s)
    elif side == 1:
        m = s.copy()
    else:
        m = 10.0 - s
    if family == 0:
        if side == 0:
            return ((s <= a) | (s >= 10.0 - a)).astype(np.float64)
        return (m >= 10.0 - a).astype(np.float64)
    if family == 1:
        return np.clip((m - a) / b, 0.0, 1.0)
    return np.clip((np.exp(a * m) - math.exp(b)) / g, 0.0, 1.0)


@njit
def _probabilities_loop(family, side, a, b, g, rate, s):
    out = np.empty(s.shape[0])
    eb = math.exp(b)
    for i in range(s.shape[0]):
        x = s[i]
        if family == 3:
            out[i] = rate
            continue
        if side == 0:
            m = x if x > 10.0 - x else 10.0 - x
        elif side == 1:
            m = x
        else:
            m = 10.0 - x
        if family == 0:
            if side == 0:
                p = 1.0 if (x <= a or x >= 10.0 - a) else 0.0
            else:
                p = 1.0 if m >= 10.0 - a else 0.0
        elif family == 1:
            p = (m - a) / b
        else:
            p = (math.exp(a * m) - eb) / g
        out[i] = min(max(p, 0.0), 1.0)
    return out


@njit
def _weighted_mean_loop(p, w):
    num = 0.0
    den = 0.0
    for i in range(p.shape[0]):
        num += w[i] * p[i]
        den += w[i]
    return num / den


def _weighted_mean_numpy(p, w):
    return float(np.dot(w, p) / np.sum(w))


_probabilities_kernel = _probabilities_loop if NUMBA_ENABLED else _probabilities_numpy
_weighted_mean_kernel = _weighted_mean_loop if NUMBA_ENABLED else _weighted_mean_numpy


def probabilities(cfg: MaskFnConfig, scores) -> np.ndarray:
    """Vectorized masking probability for an array of scores in [0, 10]."""
    s = np.ascontiguousarray(scores, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    if s.size and (s.min() < 0.0 or s.max() > 10.0):
        raise ValueError("scores must lie in [0, 10]")
    fam, side = cfg.codes
    return _probabilities_kernel(fam, side, cfg.alpha, cfg.beta, cfg.gamma, cfg.target_rate, s)


def probability(cfg: MaskFnConfig, s: float) -> float:
    return float(probabilities(cfg, np.array([s], dtype=np.float64))[0])


def expected_mask_rate(cfg: MaskFnConfig, scores, weights=None) -> float:
    """Token-weighted mean masking probability over a score sample."""
    s = np.ascontiguousarray(scores, dtype=np.float64).reshape(-1)
    if s.size == 0:
        raise ValueError("empty score sample")
    w = np.ones_like(s) if weights is None else np.ascontiguousarray(weights, dtype=np.float64).reshape(-1)
    if w.shape != s.shape:
        raise ValueError("scores and weights differ in length")
    if not np.all(w > 0):
        raise ValueError("weights must be positive")
    return float(_weighted_mean_kernel(probabilities(cfg, s), w))


# -- calibration -----------------------------------------------------------

@dataclass(frozen=True)
class CalibrationReport:
    parameter: str
    value: float
    achieved_rate: float
    target_rate: float
    iterations: int
    sample_size: int
    converged: bool

    def lines(self):
        yield f"solved_parameter = {self.parameter}"
        yield f"solved_value = {self.value!r}"
        yield f"achieved_rate = {self.achieved_rate:.6f}"
        yield f"target_rate = {self.target_rate}"
        yield f"iterations = {self.iterations}"
        yield f"sample_size = {self.sample_size}"
        yield f"converged = {str(self.converged).lower()}"


def _compact(scores, weights):
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    if s.size == 0:
        raise ValueError("empty score sample")
    w = np.ones_like(s) if weights is None else np.asarray(weights, dtype=np.float64).reshape(-1)
    uniq, inv = np.unique(s, return_inverse=True)
    return uniq, np.bincount(inv, weights=w)


def calibrate(family: str, sidedness: str, scores, weights=None, target_rate: float = DEFAULT_TARGET_RATE,
              tolerance: float = DEFAULT_TOLERANCE, sample_size: int | None = None, **shape):
    """Solve the family's free constant so the expected mask rate hits ``target_rate``.

    step solves alpha in [0, 5]; linear solves beta with alpha fixed (pivot 5);
    exponential solves gamma with alpha fixed (0.5) and beta = 5 * alpha.
    Raises CalibrationError when the target lies outside the attainable range.
    Returns ``(config, report)``.
    """
    if not 0.0 < target_rate < 1.0:
        raise ConfigError(f"target_rate must lie in (0, 1), got {target_rate}")
    s, w = _compact(scores, weights)
    if sample_size is None:
        sample_size = int(round(w.sum()))
    base = MaskFnConfig.default(family, sidedness, target_rate, **shape)

    if family == "random_baseline":
        rate = expected_mask_rate(base, s, w)
        return base, CalibrationReport("none", 0.0, rate, target_rate, 0, sample_size, True)

    if family == "step":
        name, increasing = "alpha", True
        # alpha = 5 masks every word, including exactly-neutral ones; the supremum is the left limit
        lo, hi = 0.0, float(np.nextafter(5.0, 0.0))
        make = lambda v: MaskFnConfig(family, sidedness, alpha=v, target_rate=target_rate)
    elif family == "linear":
        name, increasing = "beta", False
        make = lambda v: MaskFnConfig(family, sidedness, alpha=base.alpha, beta=v, target_rate=target_rate)
    elif family == "exponential":
        name, increasing = "gamma", False
        make = lambda v: MaskFnConfig(family, sidedness, alpha=base.alpha, beta=base.beta, gamma=v,
                                      target_rate=target_rate)
    else:
        raise ConfigError(f"unknown masking family {family!r}")

    rate = lambda v: expected_mask_rate(make(v), s, w)
    iterations = 0

    if not increasing:
        # rate falls from its supremum (v -> 0+) to 0 (v -> inf); bisect on log(v)
        lo = 1e-12
        sup = rate(lo)
        if sup < target_rate - tolerance:
            raise CalibrationError(f"unreachable target rate {target_rate}: attainable range (0, {sup:.6f}]",
                                   0.0, sup)
        hi = 1.0
        while rate(hi) > target_rate:
            hi *= 2.0
            iterations += 1
            if hi > 1e300:
                raise CalibrationError(f"unreachable target rate {target_rate}", 0.0, sup)
        r_lo, r_hi = sup, rate(hi)
    else:
        r_lo, r_hi = rate(lo), rate(hi)
        if not r_lo - tolerance <= target_rate <= r_hi + tolerance:
            raise CalibrationError(
                f"unreachable target rate {target_rate}: attainable range [{r_lo:.6f}, {r_hi:.6f}]", r_lo, r_hi)

    best_v, best_r = (lo, r_lo) if abs(r_lo - target_rate) <= abs(r_hi - target_rate) else (hi, r_hi)
    for _ in range(MAX_BISECTION_STEPS):
        if abs(best_r - target_rate) <= tolerance:
            break
        iterations += 1
        mid = 0.5 * (lo + hi) if increasing else math.sqrt(lo * hi)
        r = rate(mid)
        if abs(r - target_rate) < abs(best_r - target_rate):
            best_v, best_r = mid, r
        if (r < target_rate) == increasing:
            lo = mid
        else:
            hi = mid

    converged = abs(best_r - target_rate) <= tolerance
    if not converged:
        logger.warning("calibration stopped at rate %.5f (target %.5f, tolerance %.5f): "
                       "the sample's rate curve jumps past the target", best_r, target_rate, tolerance)
    cfg = make(best_v)
    return cfg, CalibrationReport(name, best_v, best_r, target_rate, iterations, sample_size, converged)
