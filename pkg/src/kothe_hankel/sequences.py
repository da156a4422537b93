"""Exponent sequences and the scalar inequalities between them.

Every check runs on a finite index window and reports a verdict suffixed
``AtScale``; none of them decides the statement over all of N.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from ._logmath import grows_across_doublings, sup_test

Window = Tuple[int, int]

EXTENSIONS = (None, "hold", "linear", "geometric")
_SLACK = 1e-12


class SpecParseError(ValueError):
    """A text spec (family, space, symbol) could not be parsed."""


class StabilityVerdict(str, Enum):
    STABLE = "StableAtScale"
    REFUTED = "RefutedAtScale"
    INCONCLUSIVE = "Inconclusive"


class DominationVerdict(str, Enum):
    HOLDS = "HoldsAtScale"
    REFUTED = "RefutedAtScale"
    INCONCLUSIVE = "Inconclusive"


class DominationKind(str, Enum):
    C1 = "C1"  # alpha_n <= A beta_n + B
    C2 = "C2"  # beta_n <= A alpha_n + B
    N_ALPHA_LE_BETA = "NAlphaLeBeta"  # n alpha_n <= beta_n
    S1 = "S1"  # beta_{j+n-1} <= M (beta_n + beta_j)


@dataclass(frozen=True)
class ExponentSequence:
    """Nonnegative nondecreasing sequence ``alpha_n``, n >= 1.

    Build through the classmethods; ``alpha(n)`` evaluates vectorised.
    """

    family: str
    c: float = 1.0
    p: float = 1.0
    table: Tuple[float, ...] = ()
    extension: Optional[str] = None
    func: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    label: str = ""

    @classmethod
    def linear(cls, c: float = 1.0) -> "ExponentSequence":
        if not c > 0:
            raise ValueError("linear family needs c > 0")
        return cls("linear", c=float(c))

    @classmethod
    def power(cls, p: float) -> "ExponentSequence":
        if not p > 0:
            raise ValueError("power family needs p > 0")
        return cls("power", p=float(p))

    @classmethod
    def log(cls) -> "ExponentSequence":
        return cls("log")

    @classmethod
    def from_table(cls, values: Sequence[float], extension: Optional[str] = None,
                   label: str = "") -> "ExponentSequence":
        vals = tuple(float(v) for v in values)
        if not vals:
            raise ValueError("empty table")
        if extension not in EXTENSIONS:
            raise ValueError(f"unknown extension rule {extension!r}")
        arr = np.asarray(vals)
        if np.any(arr < 0) or np.any(np.diff(arr) < 0):
            raise ValueError("table must be nonnegative and nondecreasing")
        if extension == "geometric" and (len(vals) < 2 or vals[-2] <= 0):
            raise ValueError("geometric extension needs two positive trailing entries")
        return cls("table", table=vals, extension=extension, label=label)

    @classmethod
    def custom(cls, func: Callable[[np.ndarray], np.ndarray], label: str) -> "ExponentSequence":
        """Closed form supplied by the caller; ``label`` identifies it in digests."""
        return cls("custom", func=func, label=label)

    def __call__(self, n) -> np.ndarray:
        n_arr = np.asarray(n)
        if np.any(n_arr < 1):
            raise IndexError("exponent sequences are indexed from 1")
        nf = n_arr.astype(float)
        if self.family == "linear":
            out = self.c * nf
        elif self.family == "power":
            out = nf ** self.p
        elif self.family == "log":
            out = np.log1p(nf)
        elif self.family == "table":
            out = self._table_eval(n_arr.astype(np.int64))
        elif self.family == "custom":
            out = np.asarray(self.func(nf), dtype=float)
        else:
            raise ValueError(f"unknown family {self.family!r}")
        return out if np.ndim(n) else float(out)

    def _table_eval(self, n: np.ndarray) -> np.ndarray:
        tab = np.asarray(self.table)
        size = tab.size
        n_flat = np.atleast_1d(n)
        out = np.empty(n_flat.shape, dtype=float)
        inside = n_flat <= size
        out[inside] = tab[n_flat[inside] - 1]
        beyond = ~inside
        if np.any(beyond):
            extra = (n_flat[beyond] - size).astype(float)
            if self.extension is None:
                raise IndexError(f"index {int(n_flat[beyond].max())} beyond table of {size}")
            if self.extension == "hold":
                out[beyond] = tab[-1]
            elif self.extension == "linear":
                step = tab[-1] - tab[-2] if size > 1 else 0.0
                out[beyond] = tab[-1] + step * extra
            else:
                out[beyond] = tab[-1] * (tab[-1] / tab[-2]) ** extra
        return out.reshape(np.shape(n))

    def spec(self) -> str:
        if self.family == "linear":
            return f"linear:c={self.c!r}"
        if self.family == "power":
            return f"power:p={self.p!r}"
        if self.family == "log":
            return "log"
        if self.family == "table":
            tag = self.label or f"{len(self.table)} values"
            ext = f",ext={self.extension}" if self.extension else ""
            return f"table:{tag}{ext}"
        return f"custom:{self.label}"

    def describe(self) -> dict:
        d = {"family": self.family, "spec": self.spec()}
        if self.family == "table":
            d["table"] = list(self.table)
            d["extension"] = self.extension
        return d


def parse_family(text: str, base_dir: Optional[Path] = None) -> ExponentSequence:
    """Parse ``linear:c=1``, ``power:p=0.5``, ``log`` or ``table:@file.csv[,ext=hold]``."""
    text = text.strip()
    name, _, rest = text.partition(":")
    try:
        if name == "log" and not rest:
            return ExponentSequence.log()
        if name == "linear":
            params = _params(rest)
            return ExponentSequence.linear(float(params.pop("c", 1.0)))
        if name == "power":
            params = _params(rest)
            return ExponentSequence.power(float(params["p"]))
        if name == "table":
            path_part, _, opts = rest.partition(",")
            if not path_part.startswith("@"):
                raise SpecParseError("table family expects table:@file.csv")
            path = Path(path_part[1:])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            ext = _params(opts).get("ext") if opts else None
            values = np.loadtxt(path, ndmin=1, delimiter=",", usecols=0)
            return ExponentSequence.from_table(values, extension=ext, label=path.name)
    except SpecParseError:
        raise
    except (KeyError, ValueError, OSError) as exc:
        raise SpecParseError(f"cannot parse family {text!r}: {exc}") from exc
    raise SpecParseError(f"unknown exponent family {text!r}")


def _params(text: str) -> dict:
    out = {}
    for item in filter(None, text.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise SpecParseError(f"expected key=value, got {item!r}")
        out[key.strip()] = val.strip()
    return out


def eval(alpha: ExponentSequence, n: int) -> float:  # noqa: A001 - operation name
    if n < 1:
        raise IndexError("n must be >= 1")
    return float(alpha(n))


# -- stability ---------------------------------------------------------------

@dataclass(frozen=True)
class StabilityReport:
    window_sup: float
    M: float
    verdict: StabilityVerdict
    window: Window
    n_star: int
    kind: str = "stability"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "window_sup": self.window_sup,
            "M": self.M,
            "verdict": self.verdict.value,
            "window": list(self.window),
            "n_star": self.n_star,
        }


def _check_window(window: Window) -> Tuple[int, int]:
    lo, hi = int(window[0]), int(window[1])
    if lo < 1 or hi < lo:
        raise ValueError(f"bad window {window}")
    return lo, hi


def _ratio_report(alpha: ExponentSequence, n: np.ndarray, shifted: np.ndarray,
                  window: Window, kind: str) -> StabilityReport:
    base = alpha(n)
    positive = np.flatnonzero(base > 0)
    if positive.size == 0:
        raise ValueError("window is empty after skipping zero entries")
    start = positive[0]
    n, base = n[start:], base[start:]
    ratio = alpha(shifted[start:]) / base
    log_r = np.log(ratio)
    st = sup_test(log_r)
    sup = float(np.max(ratio))
    if st.grows:
        verdict = StabilityVerdict.REFUTED
    elif st.accepted:
        verdict = StabilityVerdict.STABLE
    else:
        verdict = StabilityVerdict.INCONCLUSIVE
    M = min(2.0 * sup, sup + 1.0)
    return StabilityReport(sup, M, verdict, window, int(n[st.position]), kind)


def check_stability(alpha: ExponentSequence, window: Window = (1, 1024)) -> StabilityReport:
    """Ratio test ``alpha_{2n} / alpha_n`` for n in ``[lo, hi // 2]``."""
    lo, hi = _check_window(window)
    if hi < 2 * lo:
        raise ValueError("window upper bound must be at least twice the lower bound")
    n = np.arange(lo, hi // 2 + 1)
    return _ratio_report(alpha, n, 2 * n, (lo, hi), "stability")


def check_weak_stability(alpha: ExponentSequence, window: Window = (1, 1024)) -> StabilityReport:
    """Ratio test ``alpha_{n+1} / alpha_n`` for n in ``[lo, hi - 1]``."""
    lo, hi = _check_window(window)
    if hi < 2 * lo:
        raise ValueError("window upper bound must be at least twice the lower bound")
    n = np.arange(lo, hi)
    return _ratio_report(alpha, n, n + 1, (lo, hi), "weak_stability")


# -- domination --------------------------------------------------------------

@dataclass(frozen=True)
class DominationCertificate:
    kind: DominationKind
    A: float
    B: float
    window: Window
    verdict: DominationVerdict
    worst_index: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "A": self.A,
            "B": self.B,
            "window": list(self.window),
            "verdict": self.verdict.value,
            "worst_index": self.worst_index,
        }


A_GRID = tuple(2.0**i for i in range(11))


def _holds(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return lhs <= rhs + _SLACK * np.maximum(1.0, np.abs(lhs))


def check_domination(kind, alpha: ExponentSequence, beta: ExponentSequence,
                     A: Optional[float] = None, B: Optional[float] = None,
                     window: Window = (1, 1000)) -> DominationCertificate:
    """Check (C1) ``alpha <= A beta + B``, (C2) ``beta <= A alpha + B`` or ``n alpha <= beta``.

    Without ``A`` the affine constants are searched over a doubling grid with
    ``B`` back-solved; a constant is accepted once the required ``B`` stops
    moving across the second half of the window and the slack is not closing
    there.
    """
    kind = DominationKind(kind)
    lo, hi = _check_window(window)
    n = np.arange(lo, hi + 1)
    a_vals, b_vals = alpha(n), beta(n)
    if kind is DominationKind.N_ALPHA_LE_BETA:
        ok = _holds(n * a_vals, b_vals)
        return _pointwise(kind, 1.0, 0.0, ok, n, (lo, hi))
    lhs, rhs = (a_vals, b_vals) if kind is DominationKind.C1 else (b_vals, a_vals)
    if A is not None:
        A, B = float(A), float(B or 0.0)
        return _pointwise(kind, A, B, _holds(lhs, A * rhs + B), n, (lo, hi))

    all_grow = True
    last = None
    for a in A_GRID:
        raw = lhs - a * rhs
        deficit = np.maximum(raw, 0.0)
        running = np.maximum.accumulate(deficit)
        half = -(-running.size // 2)
        b_req = float(running[-1])
        # the slack a*rhs + B - lhs must not be closing over the second half
        closing = raw[-1] > raw[half - 1] + 1e-12 * (1.0 + abs(raw[half - 1]))
        if b_req == running[half - 1] and not closing:
            return DominationCertificate(kind, a, b_req, (lo, hi), DominationVerdict.HOLDS,
                                         int(n[np.argmax(deficit)]))
        with np.errstate(divide="ignore"):
            all_grow &= grows_across_doublings(np.log(running))
        last = (a, b_req, int(n[np.argmax(deficit)]))
    verdict = DominationVerdict.REFUTED if all_grow else DominationVerdict.INCONCLUSIVE
    return DominationCertificate(kind, last[0], last[1], (lo, hi), verdict, last[2])


def _pointwise(kind, A, B, ok, n, window) -> DominationCertificate:
    if np.all(ok):
        return DominationCertificate(kind, A, B, window, DominationVerdict.HOLDS, int(n[0]))
    bad = int(n[np.argmin(ok)])
    return DominationCertificate(kind, A, B, window, DominationVerdict.REFUTED, bad)


def check_shifted_subadditivity(beta: ExponentSequence, M: float,
                                window: Window = (1, 256)) -> DominationCertificate:
    """Check ``beta_{j+n-1} <= M (beta_n + beta_j)`` on the grid ``window x window``."""
    if M < 1:
        raise ValueError("M must be >= 1")
    lo, hi = _check_window(window)
    idx = np.arange(lo, hi + 1)
    vals = beta(np.arange(1, 2 * hi))
    j, n = np.meshgrid(idx, idx, indexing="ij")
    lhs = vals[j + n - 2]
    rhs = M * (vals[n - 1] + vals[j - 1])
    ok = _holds(lhs, rhs)
    kind = DominationKind.S1
    if np.all(ok):
        return DominationCertificate(kind, M, 0.0, (lo, hi), DominationVerdict.HOLDS, lo)
    flat = int(np.argmin(ok.ravel()))
    return DominationCertificate(kind, M, 0.0, (lo, hi), DominationVerdict.REFUTED,
                                 int(j.ravel()[flat] + n.ravel()[flat] - 1))


__all__ = [
    "DominationCertificate", "DominationKind", "DominationVerdict", "ExponentSequence",
    "SpecParseError", "StabilityReport", "StabilityVerdict", "check_domination",
    "check_shifted_subadditivity", "check_stability", "check_weak_stability", "eval",
    "parse_family",
]
