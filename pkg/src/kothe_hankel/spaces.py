"""Köthe matrices, power series spaces, sequence elements and seminorms.

All weights live in log domain: ``e^{k alpha_n}`` leaves double range near
n = 700 for alpha_n = n.  Coordinates of elements are 1-based; symbols are
0-based and ``SymbolSequence`` is the only place the two meet
(theta_j sits at coordinate j + 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from ._logmath import NEG_INF, LogValue, log_diff, lse, sup_test
from .certificate import Certificate, Status, digest
from .sequences import ExponentSequence, SpecParseError, parse_family

MIN_WINDOW_DECAY = 1.0
DIVERGENCE_TOL = 1e-9
ENVELOPE_SAMPLES = 100
ENVELOPE_SPAN = 10_000

LogFn = Callable[[np.ndarray], np.ndarray]


class TableRangeError(IndexError):
    """A GeneralTable weight was requested outside the loaded table."""


class NotMontelError(ValueError):
    """Compactness was requested into a space not known to be Montel."""


# -- Köthe matrices ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KotheMatrix:
    """Weights ``a_{n,k}`` of a Köthe space, queried as ``log a_{n,k}``.

    ``kind`` is ``"finite"`` (Lambda_1(alpha), weight ``e^{-alpha_n/k}``),
    ``"infinite"`` (Lambda_inf(alpha), weight ``e^{k alpha_n}``) or ``"table"``.
    """

    kind: str
    alpha: Optional[ExponentSequence] = None
    table: Optional[np.ndarray] = field(default=None, repr=False)
    label: str = ""

    @classmethod
    def power_series_finite(cls, alpha: ExponentSequence) -> "KotheMatrix":
        return cls("finite", alpha=alpha)

    @classmethod
    def power_series_infinite(cls, alpha: ExponentSequence) -> "KotheMatrix":
        return cls("infinite", alpha=alpha)

    @classmethod
    def from_table(cls, log_weights, label: str = "") -> "KotheMatrix":
        arr = np.array(log_weights, dtype=float)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("log-weight table must be a nonempty 2-D array (rows n, columns k)")
        arr.setflags(write=False)
        return cls("table", table=arr, label=label)

    @classmethod
    def from_csv(cls, path) -> "KotheMatrix":
        """Rows ``n,k,log_weight`` (1-based); every (n, k) in the grid must be present."""
        path = Path(path)
        data = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
        n = data[:, 0].astype(int)
        k = data[:, 1].astype(int)
        if n.min() < 1 or k.min() < 1:
            raise ValueError("table indices are 1-based")
        grid = np.full((n.max(), k.max()), np.nan)
        grid[n - 1, k - 1] = data[:, 2]
        if np.isnan(grid).any():
            raise ValueError(f"{path}: incomplete (n, k) grid")
        return cls.from_table(grid, label=path.name)

    @property
    def is_montel(self) -> bool:
        return self.kind in ("finite", "infinite")

    def log_weight(self, n, k: int):
        if k < 1:
            raise ValueError("grades start at 1")
        n_arr = np.asarray(n)
        if self.kind == "table":
            rows, cols = self.table.shape
            if np.any(n_arr < 1) or np.any(n_arr > rows) or k > cols:
                raise TableRangeError(f"weight outside {rows}x{cols} table")
            out = self.table[n_arr.astype(int) - 1, k - 1]
        elif self.kind == "finite":
            out = -self.alpha(n_arr) / k
        elif self.kind == "infinite":
            out = k * self.alpha(n_arr)
        else:
            raise ValueError(f"unknown matrix kind {self.kind!r}")
        return np.asarray(out, dtype=float) if np.ndim(n) else float(out)

    def validate(self, n_max: int, k_max: int) -> None:
        """Check the two Köthe matrix conditions on the probed block."""
        n = np.arange(1, n_max + 1)
        w = np.stack([self.log_weight(n, k) for k in range(1, k_max + 1)], axis=1)
        if np.any(np.all(w == NEG_INF, axis=1)):
            raise ValueError("some row has no positive weight in the probed grades")
        if np.any(np.diff(w, axis=1) < 0):
            raise ValueError("weights decrease in k")

    def spec(self) -> str:
        if self.kind == "finite":
            return f"L1:{self.alpha.spec()}"
        if self.kind == "infinite":
            return f"Linf:{self.alpha.spec()}"
        return f"table:{self.label or 'inline'}"

    def describe(self) -> dict:
        d = {"kind": self.kind, "spec": self.spec()}
        if self.alpha is not None:
            d["alpha"] = self.alpha.describe()
        if self.table is not None:
            d["table"] = self.table.tolist()
        return d


def parse_space(text: str, base_dir: Optional[Path] = None) -> KotheMatrix:
    """``L1:<family>``, ``Linf:<family>`` or ``table:@weights.csv``."""
    head, _, rest = text.strip().partition(":")
    if head == "L1":
        return KotheMatrix.power_series_finite(parse_family(rest, base_dir))
    if head == "Linf":
        return KotheMatrix.power_series_infinite(parse_family(rest, base_dir))
    if head == "table" and rest.startswith("@"):
        path = Path(rest[1:])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        try:
            return KotheMatrix.from_csv(path)
        except (OSError, ValueError) as exc:
            raise SpecParseError(f"cannot load table {path}: {exc}") from exc
    raise SpecParseError(f"unknown space spec {text!r}")


def weight(space: KotheMatrix, n: int, k: int) -> LogValue:
    if n < 1:
        raise ValueError("n must be >= 1")
    return LogValue.of_log(space.log_weight(n, k))


# -- elements ----------------------------------------------------------------

class SequenceElement:
    """Coordinates ``x_n``, n >= 1, queried in log-magnitude / sign form."""

    start: int = 1

    def log_abs(self, idx: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def signs(self, idx: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_envelope(self, idx: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def values(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        return self.signs(idx) * np.exp(self.log_abs(idx))

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class FiniteSupport(SequenceElement):
    """Finitely many nonzero coordinates, stored as log|x_n| and sign."""

    indices: np.ndarray
    log_values: np.ndarray
    sign_values: np.ndarray
    linear_values: np.ndarray  # plain floats; exact when built from floats

    def __init__(self, indices=(), values=(), *, log_values=None, signs=None, linear=None):
        idx = np.asarray(indices, dtype=np.int64).ravel()
        if log_values is None:
            vals = np.asarray(values, dtype=float).ravel()
            if vals.shape != idx.shape:
                raise ValueError("indices and values differ in length")
            with np.errstate(divide="ignore"):
                logs = np.log(np.abs(vals))
            sgn = np.sign(vals)
            lin = vals
        else:
            logs = np.asarray(log_values, dtype=float).ravel()
            sgn = np.ones_like(logs) if signs is None else np.asarray(signs, dtype=float).ravel()
            if logs.shape != idx.shape or sgn.shape != idx.shape:
                raise ValueError("indices and values differ in length")
            with np.errstate(over="ignore"):
                lin = sgn * np.exp(logs)
            if linear is not None:
                given = np.asarray(linear, dtype=float).ravel()
                lin = np.where(np.isnan(given), lin, given)
        if np.any(idx < 1):
            raise ValueError("coordinates are 1-based")
        order = np.argsort(idx, kind="stable")
        idx, logs, sgn, lin = idx[order], logs[order], sgn[order], lin[order]
        if np.any(np.diff(idx) == 0):
            raise ValueError("duplicate indices")
        keep = (logs > NEG_INF) & (sgn != 0)
        for name, arr in (("indices", idx[keep]), ("log_values", logs[keep]),
                          ("sign_values", sgn[keep]), ("linear_values", lin[keep])):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[int, float]]) -> "FiniteSupport":
        if not pairs:
            return cls()
        idx, vals = zip(*pairs)
        return cls(idx, vals)

    @classmethod
    def from_dense(cls, values: Sequence[float]) -> "FiniteSupport":
        """``values[0]`` becomes coordinate 1."""
        vals = np.asarray(values, dtype=float)
        return cls(np.arange(1, vals.size + 1), vals)

    @property
    def max_index(self) -> int:
        return int(self.indices[-1]) if self.indices.size else 0

    def __len__(self) -> int:
        return int(self.indices.size)

    def _lookup(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        pos = np.searchsorted(self.indices, idx)
        pos_c = np.minimum(pos, max(self.indices.size - 1, 0))
        hit = (pos < self.indices.size) & (self.indices[pos_c] == idx) if self.indices.size else np.zeros(idx.shape, bool)
        return pos_c, hit

    def log_abs(self, idx):
        pos, hit = self._lookup(idx)
        if not self.indices.size:
            return np.full(np.shape(idx), NEG_INF)
        return np.where(hit, self.log_values[pos], NEG_INF)

    def signs(self, idx):
        pos, hit = self._lookup(idx)
        if not self.indices.size:
            return np.zeros(np.shape(idx))
        return np.where(hit, self.sign_values[pos], 0.0)

    def values(self, idx) -> np.ndarray:
        pos, hit = self._lookup(idx)
        if not self.indices.size:
            return np.zeros(np.shape(idx))
        return np.where(hit, self.linear_values[pos], 0.0)

    log_envelope = log_abs

    def dense(self, length: Optional[int] = None) -> np.ndarray:
        length = self.max_index if length is None else length
        return self.values(np.arange(1, length + 1))

    def describe(self) -> dict:
        return {"type": "finite", "indices": self.indices.tolist(),
                "log_values": self.log_values.tolist(), "signs": self.sign_values.tolist()}


def _default_sign(idx):
    return np.ones(np.shape(idx))


@dataclass(frozen=True, eq=False)
class Enveloped(SequenceElement):
    """Infinite element given by a generator and a log-envelope.

    ``log_abs_fn`` returns log|x_n| for an int array, ``sign_fn`` the signs
    (default all +1) and ``envelope_fn`` a g with |x_n| <= e^{g(n)} for
    n >= ``start``; without one the generator is its own envelope.
    """

    log_abs_fn: LogFn
    envelope_fn: Optional[LogFn] = None
    sign_fn: Optional[LogFn] = None
    start: int = 1
    label: str = ""
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.start < 1:
            raise ValueError("envelope start is 1-based")
        if self.check and self.envelope_fn is not None:
            rng = np.random.default_rng(20240607)
            idx = rng.integers(self.start, self.start + ENVELOPE_SPAN + 1, ENVELOPE_SAMPLES)
            g = self.envelope_fn(idx)
            ok = self.log_abs_fn(idx) <= g + 1e-12 * (1.0 + np.abs(np.where(np.isfinite(g), g, 0)))
            if not np.all(ok):
                bad = int(idx[np.argmin(ok)])
                raise ValueError(f"envelope violated at n={bad}")

    @classmethod
    def from_values(cls, value_fn: LogFn, envelope_fn: Optional[LogFn] = None,
                    start: int = 1, label: str = "") -> "Enveloped":
        """Wrap a plain float generator n -> x_n."""
        def log_abs(idx):
            with np.errstate(divide="ignore"):
                return np.log(np.abs(value_fn(idx)))

        return cls(log_abs, envelope_fn, lambda idx: np.sign(value_fn(idx)), start, label)

    def log_abs(self, idx):
        return np.asarray(self.log_abs_fn(np.asarray(idx, dtype=np.int64)), dtype=float)

    def signs(self, idx):
        fn = self.sign_fn or _default_sign
        return np.asarray(fn(np.asarray(idx, dtype=np.int64)), dtype=float)

    def log_envelope(self, idx):
        fn = self.envelope_fn or self.log_abs_fn
        return np.asarray(fn(np.asarray(idx, dtype=np.int64)), dtype=float)

    def describe(self) -> dict:
        return {"type": "enveloped", "label": self.label, "start": self.start}


def reindex(x: SequenceElement, offset: int, label: str = "") -> SequenceElement:
    """Element ``y_j = x_{j + offset}`` with ``x_i = 0`` for ``i < 1``."""
    if isinstance(x, FiniteSupport):
        idx = x.indices - offset
        keep = idx >= 1
        return FiniteSupport(idx[keep], log_values=x.log_values[keep], signs=x.sign_values[keep],
                             linear=x.linear_values[keep])

    def shifted(fn, fill):
        def inner(j):
            src = np.asarray(j, dtype=np.int64) + offset
            valid = src >= 1
            out = np.full(src.shape, fill)
            if np.any(valid):
                out[valid] = fn(src[valid])
            return out
        return inner

    return Enveloped(shifted(x.log_abs, NEG_INF), shifted(x.log_envelope, NEG_INF),
                     shifted(x.signs, 0.0),
                     start=max(1, x.start - offset),
                     label=label or f"{getattr(x, 'label', '')}>>{offset}", check=False)


def basis_element(n: int) -> FiniteSupport:
    if n < 1:
        raise ValueError("n must be >= 1")
    return FiniteSupport([n], [1.0])


def load_element_csv(path) -> FiniteSupport:
    """Rows ``index,value`` (1-based)."""
    data = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
    return FiniteSupport(data[:, 0].astype(np.int64), data[:, 1])


@dataclass(frozen=True, eq=False)
class SymbolSequence:
    """A 0-based symbol theta; ``coords`` holds it as a 1-based element."""

    coords: SequenceElement
    label: str = ""

    @classmethod
    def from_values(cls, values: Sequence[float], label: str = "") -> "SymbolSequence":
        """``values[j]`` is theta_j."""
        return cls(FiniteSupport.from_dense(values), label)

    @classmethod
    def from_log(cls, log_abs_fn: LogFn, envelope_fn: Optional[LogFn] = None,
                 sign_fn: Optional[LogFn] = None, start: int = 0,
                 label: str = "") -> "SymbolSequence":
        """Build from functions of the 0-based symbol index j."""
        def lift(fn):
            return None if fn is None else (lambda n: fn(np.asarray(n, dtype=np.int64) - 1))

        el = Enveloped(lift(log_abs_fn), lift(envelope_fn), lift(sign_fn), start + 1, label)
        return cls(el, label)

    @classmethod
    def from_element(cls, x: SequenceElement, label: str = "") -> "SymbolSequence":
        return cls(x, label or getattr(x, "label", ""))

    def log_abs(self, j) -> np.ndarray:
        return self.coords.log_abs(np.asarray(j, dtype=np.int64) + 1)

    def values(self, j) -> np.ndarray:
        return self.coords.values(np.asarray(j, dtype=np.int64) + 1)

    @property
    def is_finite(self) -> bool:
        return isinstance(self.coords, FiniteSupport)

    def describe(self) -> dict:
        d = {"label": self.label}
        if self.is_finite or not self.label:
            d["coords"] = self.coords.describe()
        return d


# -- series with certified tails ----------------------------------------------

def summarize_series(head: np.ndarray, env_win: Optional[np.ndarray],
                     act_win: Optional[np.ndarray]):
    """Batch summary of nonnegative series given by log terms.

    ``head`` has shape (B, J) for n = 1..J; the windows have shape (B, J+1)
    for n = J+1..2J+1 (envelope and actual terms).  Returns the partial sums,
    the tail bounds (NaN where uncertified) and the divergence flags.

    A tail is certified when the envelope drops by at least ``c`` per index on
    the window with ``c * J >= MIN_WINDOW_DECAY``; the bound is the geometric
    sum from the first omitted term.
    """
    head = np.atleast_2d(head)
    value = lse(head, axis=1)
    B, J = head.shape
    tail = np.full(B, np.nan)
    diverged = np.zeros(B, dtype=bool)
    if env_win is None:
        return value, tail, diverged

    u = np.atleast_2d(env_win)
    dec = -log_diff(u[:, 1:], u[:, :-1])  # u_n - u_{n+1}
    dec = np.where((u[:, :-1] == NEG_INF) & (u[:, 1:] == NEG_INF), np.inf, dec)
    c = np.min(dec, axis=1)
    all_zero = np.all(u == NEG_INF, axis=1)
    ok = all_zero | ((c > 0) & (c * J >= MIN_WINDOW_DECAY) & np.isfinite(u[:, 0]))
    with np.errstate(divide="ignore", invalid="ignore"):
        geo = u[:, 0] - np.log(-np.expm1(-c))
    tail = np.where(all_zero, NEG_INF, np.where(ok, geo, np.nan))

    a = np.atleast_2d(act_win)
    extended = np.logaddexp(value, lse(a[:, :-1], axis=1))
    growth = log_diff(extended, value)
    seg = np.concatenate([head[:, -1:], a[:, :-1]], axis=1)
    steps = log_diff(seg[:, 1:], seg[:, :-1])
    steps = np.where((seg[:, 1:] == NEG_INF) & (seg[:, :-1] == NEG_INF), 0.0, steps)
    nondecreasing = np.all(steps >= 0, axis=1)
    diverged = ~ok & (growth > DIVERGENCE_TOL) & nondecreasing
    return value, tail, diverged


@dataclass(frozen=True)
class SeminormResult:
    value: LogValue
    truncation_index: int
    tail_bound: Optional[LogValue]  # None means unavailable
    diverged_at_scale: bool = False

    @property
    def finite(self) -> bool:
        return self.tail_bound is not None and not self.diverged_at_scale

    @property
    def upper(self) -> Optional[LogValue]:
        """``value (+) tail_bound`` when the tail is certified."""
        if self.tail_bound is None:
            return None
        return self.value + self.tail_bound

    def to_dict(self) -> dict:
        return {
            "log_value": self.value.log_magnitude,
            "J": self.truncation_index,
            "log_tail_bound": None if self.tail_bound is None else self.tail_bound.log_magnitude,
            "diverged_at_scale": self.diverged_at_scale,
        }


def _terms(space: KotheMatrix, x: SequenceElement, k: int, J: int):
    """Head terms and windows (or None when the weights run out)."""
    n = np.arange(1, J + 1)
    head = x.log_abs(n) + space.log_weight(n, k)
    w = np.arange(J + 1, 2 * J + 2)
    if J + 1 < x.start:
        return head, None, None
    try:
        lw = space.log_weight(w, k)
    except TableRangeError:
        return head, None, None
    return head, x.log_envelope(w) + lw, x.log_abs(w) + lw


def _finite_terms(space: KotheMatrix, x: FiniteSupport, k: int, J: int) -> np.ndarray:
    if J < x.max_index:
        raise ValueError(f"truncation J={J} below support index {x.max_index}")
    if not len(x):
        return np.empty(0)
    return x.log_values + space.log_weight(x.indices, k)


def seminorm(space: KotheMatrix, x: SequenceElement, k: int, J: int) -> SeminormResult:
    """``||x||_k = sum_n |x_n| a_{n,k}`` truncated at J, with tail handling."""
    if k < 1:
        raise ValueError("grades start at 1")
    if isinstance(x, FiniteSupport):
        return SeminormResult(LogValue.of_log(lse(_finite_terms(space, x, k, J))), J,
                              LogValue.zero(), False)
    head, env, act = _terms(space, x, k, J)
    value, tail, diverged = summarize_series(head[None, :], None if env is None else env[None, :],
                                             None if act is None else act[None, :])
    t = None if np.isnan(tail[0]) else LogValue.of_log(tail[0])
    return SeminormResult(LogValue.of_log(value[0]), J, t, bool(diverged[0]))


def seminorm_sup(space: KotheMatrix, x: SequenceElement, k: int, J: int) -> SeminormResult:
    """``sup_n |x_n| a_{n,k}`` truncated at J; the tail bound is the sum tail bound."""
    if k < 1:
        raise ValueError("grades start at 1")
    if isinstance(x, FiniteSupport):
        terms = _finite_terms(space, x, k, J)
        top = float(np.max(terms)) if terms.size else NEG_INF
        return SeminormResult(LogValue.of_log(top), J, LogValue.zero(), False)
    head, env, act = _terms(space, x, k, J)
    top = float(np.max(head))
    if env is None:
        return SeminormResult(LogValue.of_log(top), J, None, False)
    _, tail, _ = summarize_series(head[None, :], env[None, :], act[None, :])
    seg = np.concatenate([head[-1:], act[:-1]])
    steps = log_diff(seg[1:], seg[:-1])
    steps = np.where((seg[1:] == NEG_INF) & (seg[:-1] == NEG_INF), 0.0, steps)
    diverged = bool(np.isnan(tail[0]) and np.all(steps >= 0) and np.max(act) > top)
    t = None if np.isnan(tail[0]) else LogValue.of_log(tail[0])
    return SeminormResult(LogValue.of_log(top), J, t, diverged)


# -- membership, duals, nuclearity ---------------------------------------------

def membership(space: KotheMatrix, x: SequenceElement, K_max: int = 8, J: int = 4096,
               kind: str = "membership") -> Certificate:
    """Is ``||x||_k`` finite for every k <= K_max?  Evidence rows are (k, 0, n*, log upper)."""
    evidence, constants = [], {}
    statuses = []
    for k in range(1, K_max + 1):
        r = seminorm(space, x, k, J)
        n_star = _argmax_term(space, x, k, J)
        if r.diverged_at_scale:
            statuses.append(Status.REFUTED)
            evidence.append((k, 0, n_star, math.inf))
            continue
        if r.finite:
            statuses.append(Status.CERTIFIED)
            constants[k] = r.upper.log_magnitude
        else:
            statuses.append(Status.INCONCLUSIVE)
        evidence.append((k, 0, n_star, r.value.log_magnitude))
    status = _combine(statuses)
    return Certificate(status, kind, {}, constants, None, evidence, (K_max, 0, 0, J),
                       digest({"kind": kind, "space": space.describe(), "x": x.describe(),
                               "K_max": K_max, "J": J}))


def _argmax_term(space, x, k, J) -> int:
    if isinstance(x, FiniteSupport):
        if not len(x):
            return 1
        return int(x.indices[np.argmax(_finite_terms(space, x, k, J))])
    n = np.arange(1, J + 1)
    return int(np.argmax(x.log_abs(n) + space.log_weight(n, k))) + 1


def _combine(statuses) -> Status:
    if any(s is Status.REFUTED for s in statuses):
        return Status.REFUTED
    if all(s is Status.CERTIFIED for s in statuses):
        return Status.CERTIFIED
    return Status.INCONCLUSIVE


def dual_membership(space: KotheMatrix, theta: SymbolSequence, K_max: int = 8,
                    window: Tuple[int, int] = (1, 512)) -> Certificate:
    """Search k <= K_max with ``sup_n |theta_{n-1}| / a_{n,k}`` finite at scale."""
    lo, hi = int(window[0]), int(window[1])
    if lo < 1 or hi < lo:
        raise ValueError(f"bad window {window}")
    n = np.arange(lo, hi + 1)
    log_theta = theta.log_abs(n - 1)
    evidence = []
    all_grow = True
    found = None
    for k in range(1, K_max + 1):
        ratio = log_diff(log_theta, space.log_weight(n, k))
        st = sup_test(ratio)
        evidence.append((1, k, int(n[st.position]), st.log_sup))
        if st.accepted:
            found = (k, st.log_sup)
            break
        all_grow &= st.grows
    dig = digest({"kind": "dual_membership", "space": space.describe(),
                  "theta": theta.describe(), "K_max": K_max, "window": [lo, hi]})
    bounds = (1, K_max, hi, 0)
    if found:
        k, c = found
        return Certificate(Status.CERTIFIED, "dual_membership", {1: k}, {1: c}, k,
                           evidence, bounds, dig)
    status = Status.REFUTED if all_grow else Status.INCONCLUSIVE
    return Certificate(status, "dual_membership", {}, {}, None, evidence, bounds, dig)


def nuclearity(space: KotheMatrix, K_max: int = 8, L_max: int = 16,
               J: int = 4096) -> Certificate:
    """Grothendieck-Pietsch: for each k some l > k with ``sum_n a_{n,k}/a_{n,l}`` finite.

    Evidence rows are (k, l, n*, log partial sum up to J).
    """
    if not L_max > K_max >= 1:
        raise ValueError("need L_max > K_max >= 1")
    n = np.arange(1, J + 1)
    w = np.arange(J + 1, 2 * J + 2)
    witness, constants, evidence, partial = {}, {}, [], {}
    refuted = False
    for k in range(1, K_max + 1):
        ls = list(range(k + 1, L_max + 1))
        head = np.stack([log_diff(space.log_weight(n, k), space.log_weight(n, l)) for l in ls])
        win = np.stack([log_diff(space.log_weight(w, k), space.log_weight(w, l)) for l in ls])
        value, tail, diverged = summarize_series(head, win, win)
        for i, l in enumerate(ls):
            evidence.append((k, l, int(np.argmax(head[i])) + 1, float(value[i])))
            if not np.isnan(tail[i]):
                witness[k] = l
                constants[k] = float(np.logaddexp(value[i], tail[i]))
                partial[k] = {"l": l, "log_partial_sum": float(value[i]),
                              "log_tail_bound": float(tail[i])}
                break
        else:
            refuted |= bool(np.all(diverged))
    if len(witness) == K_max:
        status = Status.CERTIFIED
    else:
        status = Status.REFUTED if refuted else Status.INCONCLUSIVE
    return Certificate(status, "nuclearity", witness, constants, None, evidence,
                       (K_max, L_max, 0, J),
                       digest({"kind": "nuclearity", "space": space.describe(),
                               "K_max": K_max, "L_max": L_max, "J": J}),
                       details={"partial_sums": partial})
