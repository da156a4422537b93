"""Log-domain arithmetic and the doubling heuristics shared by every verdict."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

NEG_INF = -math.inf
LOG2 = math.log(2.0)
ARGMAX_RTOL = 1e-12


@dataclass(frozen=True, order=True)
class LogValue:
    """A nonnegative quantity stored as its natural log.

    ``sign`` is ``"+"`` for positive values and ``"0"`` for zero, in which case
    ``log_magnitude`` is ``-inf``.
    """

    log_magnitude: float
    sign: str = "+"

    def __post_init__(self):
        if self.sign not in ("+", "0"):
            raise ValueError(f"bad sign {self.sign!r}")
        if (self.sign == "0") != (self.log_magnitude == NEG_INF):
            raise ValueError("sign 0 iff log_magnitude is -inf")

    @classmethod
    def of_log(cls, log_magnitude: float) -> "LogValue":
        log_magnitude = float(log_magnitude)
        if math.isnan(log_magnitude):
            raise ValueError("log magnitude is NaN")
        return cls(log_magnitude, "0" if log_magnitude == NEG_INF else "+")

    @classmethod
    def of_float(cls, value: float) -> "LogValue":
        if value < 0:
            raise ValueError("LogValue holds nonnegative quantities only")
        return cls.of_log(math.log(value) if value > 0 else NEG_INF)

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(NEG_INF, "0")

    @property
    def is_zero(self) -> bool:
        return self.sign == "0"

    def __float__(self) -> float:
        return math.exp(self.log_magnitude)

    def __add__(self, other: "LogValue") -> "LogValue":
        return LogValue.of_log(np.logaddexp(self.log_magnitude, other.log_magnitude))


def lse(a, axis=None) -> np.ndarray | float:
    """``log(sum(exp(a)))`` that tolerates all ``-inf`` slices."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return NEG_INF if axis is None else np.full(np.delete(a.shape, axis), NEG_INF)
    m = np.max(a, axis=axis, keepdims=True)
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - safe), axis=axis, keepdims=True)) + safe
    out = np.where(m == NEG_INF, NEG_INF, out)
    out = np.where(m == np.inf, np.inf, out)
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def signed_lse(log_abs, signs, axis=None) -> Tuple[np.ndarray, np.ndarray]:
    """Log-magnitude and sign of ``sum(signs * exp(log_abs))``."""
    log_abs = np.asarray(log_abs, dtype=float)
    signs = np.asarray(signs, dtype=float)
    m = np.max(log_abs, axis=axis, keepdims=True) if log_abs.size else np.array(NEG_INF)
    safe = np.where(np.isfinite(m), m, 0.0)
    total = np.sum(signs * np.exp(log_abs - safe), axis=axis, keepdims=True)
    with np.errstate(divide="ignore"):
        mag = np.log(np.abs(total)) + safe
    mag = np.where(m == NEG_INF, NEG_INF, mag)
    sgn = np.sign(total)
    mag = np.where(sgn == 0, NEG_INF, mag)
    if axis is None:
        return float(mag.reshape(())), float(sgn.reshape(()))
    return np.squeeze(mag, axis=axis), np.squeeze(sgn, axis=axis)


def log1mexp(x: float) -> float:
    """``log(1 - exp(-x))`` for ``x > 0``."""
    if x <= 0:
        raise ValueError("log1mexp needs x > 0")
    if x < LOG2:
        return math.log(-math.expm1(-x))
    return math.log1p(-math.exp(-x))


def log_diff(hi, lo):
    """``hi - lo`` on extended reals with ``-inf - -inf = -inf`` (a zero ratio)."""
    hi = np.asarray(hi, dtype=float)
    lo = np.asarray(lo, dtype=float)
    with np.errstate(invalid="ignore"):
        out = hi - lo
    both = (hi == NEG_INF) & (lo == NEG_INF)
    return np.where(both, NEG_INF, out)


# -- doubling heuristics ------------------------------------------------------

def doubling_ends(length: int, steps: int = 3) -> np.ndarray:
    """Window lengths ``ceil(L / 2**i)`` for i = steps..0 (positions, 1-based)."""
    ends = [max(1, -(-length // 2**i)) for i in range(steps, -1, -1)]
    return np.asarray(ends, dtype=int)


def prefix_sups(log_r: np.ndarray, steps: int = 3) -> np.ndarray:
    """Running maxima of ``log_r`` at each window doubling."""
    pm = np.maximum.accumulate(np.asarray(log_r, dtype=float))
    return pm[doubling_ends(len(pm), steps) - 1]


def doubling_growth(log_r: np.ndarray, steps: int = 3) -> np.ndarray:
    """Log growth of the running sup across the last ``steps`` doublings."""
    ps = prefix_sups(log_r, steps)
    with np.errstate(invalid="ignore"):
        inc = np.diff(ps)
    return np.where(np.isnan(inc), 0.0, inc)


def grows_across_doublings(log_r: np.ndarray, steps: int = 3) -> bool:
    """True when the running sup grew by a factor >= 2 at each of the last doublings."""
    if len(log_r) < 2**steps:
        return False
    return bool(np.all(doubling_growth(log_r, steps) >= LOG2))


@dataclass(frozen=True)
class SupTest:
    """Outcome of the finite-sup test on one log-ratio sequence."""

    accepted: bool
    grows: bool
    position: int  # 0-based position of the (first) maximiser
    log_sup: float


def sup_test(log_r: np.ndarray, steps: int = 3) -> SupTest:
    """Decide whether ``sup log_r`` looks finite at scale.

    Accept when the maximum is attained in the first half of the window and the
    running sup does not show the doubling-growth pattern.
    """
    log_r = np.asarray(log_r, dtype=float)
    if log_r.size == 0:
        raise ValueError("empty ratio window")
    grows = grows_across_doublings(log_r, steps)
    top = float(np.max(log_r))
    if top == NEG_INF:
        return SupTest(True, False, 0, NEG_INF)
    if top == math.inf:
        pos = int(np.argmax(log_r == math.inf))
        return SupTest(False, True, pos, math.inf)
    tol = ARGMAX_RTOL * (1.0 + abs(top))
    pos = int(np.argmax(log_r >= top - tol))
    half = -(-log_r.size // 2)
    accepted = (pos + 1) <= half and not grows
    return SupTest(accepted, grows, pos, top)
