"""Hankel, lower-Toeplitz and shift operators acting on sequence elements.

Matrix entries in 1-based (row i, column n):
    Hankel          theta_{i+n-2}
    lower Toeplitz  theta_{i-n} for i >= n, else 0
    backward shift  B e_n = e_{n-1} (e_0 = 0)
    forward shift   F e_n = e_{n+1}
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
from scipy.signal import fftconvolve

from ._logmath import NEG_INF, LogValue, lse, signed_lse
from .spaces import (Enveloped, FiniteSupport, KotheMatrix, SequenceElement,
                     SymbolSequence, basis_element, reindex, seminorm)

FAST_THRESHOLD = 2 ** 14
ROW_CHUNK_CELLS = 1 << 20
# rows whose magnitude scale sits this far below the largest row are redone exactly
FFT_SCALE_FLOOR = 1e-4
FFT_NOISE_FACTOR = 1e3
# terms with |log| below this are summed as ordinary floats
LINEAR_LOG_RANGE = 700.0


class OpKind(str, Enum):
    HANKEL = "hankel"
    TOEPLITZ = "toeplitz"
    BACKWARD = "backward"
    FORWARD = "forward"


class ShiftKind(str, Enum):
    BACKWARD = "backward"
    FORWARD = "forward"


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    kind: OpKind
    symbol: Optional[SymbolSequence] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", OpKind(self.kind))
        needs = self.kind in (OpKind.HANKEL, OpKind.TOEPLITZ)
        if needs and self.symbol is None:
            raise ValueError(f"{self.kind.value} operator needs a symbol")
        if not needs and self.symbol is not None:
            raise ValueError("shift operators take no symbol")

    @classmethod
    def hankel(cls, theta: SymbolSequence) -> "OperatorSpec":
        return cls(OpKind.HANKEL, theta)

    @classmethod
    def toeplitz(cls, theta: SymbolSequence) -> "OperatorSpec":
        return cls(OpKind.TOEPLITZ, theta)

    @classmethod
    def backward(cls) -> "OperatorSpec":
        return cls(OpKind.BACKWARD)

    @classmethod
    def forward(cls) -> "OperatorSpec":
        return cls(OpKind.FORWARD)

    def describe(self) -> dict:
        d = {"kind": self.kind.value}
        if self.symbol is not None:
            d["symbol"] = self.symbol.describe()
        return d


# -- columns -----------------------------------------------------------------

def hankel_column(theta: SymbolSequence, n: int) -> SequenceElement:
    """``H e_n``: coordinate j is theta_{j+n-2}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return reindex(theta.coords, n - 1, label=f"H[{theta.label}]e_{n}")


def toeplitz_column(theta: SymbolSequence, n: int) -> SequenceElement:
    """``T e_n``: coordinate j is theta_{j-n} for j >= n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return reindex(theta.coords, -(n - 1), label=f"T[{theta.label}]e_{n}")


def column(op: OperatorSpec, n: int) -> SequenceElement:
    if op.kind is OpKind.HANKEL:
        return hankel_column(op.symbol, n)
    if op.kind is OpKind.TOEPLITZ:
        return toeplitz_column(op.symbol, n)
    if op.kind is OpKind.BACKWARD:
        return basis_element(n - 1) if n > 1 else FiniteSupport()
    return basis_element(n + 1)


def shift(kind, x: SequenceElement) -> SequenceElement:
    """Backward drops the first coordinate; forward prepends a zero."""
    kind = ShiftKind(kind)
    return reindex(x, 1 if kind is ShiftKind.BACKWARD else -1)


# -- apply -------------------------------------------------------------------

@dataclass
class ApplyResult:
    coordinates: FiniteSupport
    column_truncation: int
    row_truncation: int
    residual_report: Dict[int, Optional[LogValue]] = field(default_factory=dict)
    exact: bool = True

    def dense(self) -> np.ndarray:
        return self.coordinates.dense(self.row_truncation)

    def to_csv(self) -> str:
        rows = ["index,value"]
        vals = self.dense()
        rows += [f"{i},{v!r}" for i, v in enumerate(vals.tolist(), start=1)]
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        return {
            "J": self.column_truncation,
            "R": self.row_truncation,
            "exact": self.exact,
            "coordinates": self.coordinates.describe(),
            "residual": {str(k): None if v is None else v.log_magnitude
                         for k, v in sorted(self.residual_report.items())},
        }


def _support(x: SequenceElement, J: int):
    """Column indices n <= J carrying nonzero x_n, with logs, signs, floats and finiteness."""
    if isinstance(x, FiniteSupport):
        if J < x.max_index:
            raise ValueError(f"J={J} below support index {x.max_index}")
        return x.indices, x.log_values, x.sign_values, x.linear_values, True
    n = np.arange(1, J + 1)
    la, sg = x.log_abs(n), x.signs(n)
    keep = (la > NEG_INF) & (sg != 0)
    return n[keep], la[keep], sg[keep], x.values(n[keep]), False


def _entry_offsets(kind: OpKind, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Coordinate index (into theta.coords) of each matrix entry; < 1 means zero."""
    if kind is OpKind.HANKEL:
        return rows[:, None] + cols[None, :] - 1
    if kind is OpKind.TOEPLITZ:
        return rows[:, None] - cols[None, :] + 1
    raise ValueError("only symbol operators have matrix entries")


def symbol_rows(op: OperatorSpec, cols: np.ndarray, log_x: np.ndarray, sgn_x: np.ndarray,
                rows: np.ndarray, lin_x: Optional[np.ndarray] = None
                ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Log-magnitude, sign and float value of ``sum_n x_n M[i, n]`` for the requested rows.

    Rows whose terms all sit well inside the float range are summed as plain
    float products (no re-rounding through exp/log); the rest use signed
    log-sum-exp and get NaN as float value.
    """
    rows = np.asarray(rows, dtype=np.int64)
    out_l = np.full(rows.shape, NEG_INF)
    out_s = np.zeros(rows.shape)
    out_v = np.zeros(rows.shape)
    if cols.size == 0 or rows.size == 0:
        return out_l, out_s, out_v
    coords = op.symbol.coords
    span = _entry_offsets(op.kind, np.array([rows.min(), rows.max()]),
                          np.array([cols.min(), cols.max()]))
    lo, hi = max(1, int(span.min())), int(span.max())
    if hi < 1:
        return out_l, out_s, out_v
    idx = np.arange(lo, hi + 1)
    th_l, th_s = coords.log_abs(idx), coords.signs(idx)
    th_in = np.abs(th_l) < LINEAR_LOG_RANGE
    x_in = np.abs(log_x) < LINEAR_LOG_RANGE
    th_v = np.where(th_in, coords.values(idx), 0.0)
    if lin_x is None:
        lin_x = sgn_x * np.exp(np.where(x_in, log_x, 0.0))
    x_v = np.where(x_in, lin_x, 0.0)
    step = max(1, ROW_CHUNK_CELLS // cols.size)
    for a in range(0, rows.size, step):
        r = rows[a:a + step]
        off = _entry_offsets(op.kind, r, cols)
        valid = (off >= lo) & (off <= hi)
        pos = np.clip(off - lo, 0, idx.size - 1)
        ll = np.where(valid, th_l[pos] + log_x[None, :], NEG_INF)
        ss = np.where(valid, th_s[pos] * sgn_x[None, :], 0.0)
        live = valid & (ll > NEG_INF)
        plain = np.all(~live | (th_in[pos] & x_in[None, :] & (np.abs(ll) < LINEAR_LOG_RANGE)), axis=1)
        lg, sg = signed_lse(ll, ss, axis=1)
        tot = np.sum(np.where(live, th_v[pos] * x_v[None, :], 0.0), axis=1)
        with np.errstate(divide="ignore"):
            lg = np.where(plain, np.log(np.abs(tot)), lg)
        sg = np.where(plain, np.sign(tot), sg)
        out_l[a:a + step], out_s[a:a + step] = lg, sg
        out_v[a:a + step] = np.where(plain, tot, np.nan)
    return out_l, out_s, out_v


def _shift_rows(op: OperatorSpec, cols, log_x, sgn_x, lin_x, R: int):
    out_l = np.full(R, NEG_INF)
    out_s = np.zeros(R)
    out_v = np.zeros(R)
    target = cols - 1 if op.kind is OpKind.BACKWARD else cols + 1
    keep = (target >= 1) & (target <= R)
    out_l[target[keep] - 1] = log_x[keep]
    out_s[target[keep] - 1] = sgn_x[keep]
    out_v[target[keep] - 1] = lin_x[keep]
    return out_l, out_s, out_v


def _row_tail_bound(op: OperatorSpec, codomain: KotheMatrix, cols, log_x, R: int,
                    k: int) -> Optional[LogValue]:
    """Upper bound on ``sum_{i>R} |(Op x)_i| b_{i,k}`` by columns, or None."""
    parts = []
    for n, lx in zip(cols.tolist(), log_x.tolist()):
        col = column(op, n)
        tail = reindex(col, R)
        shifted = _ShiftedWeights(codomain, R)
        res = seminorm(shifted, tail, k, max(R, 64))
        if res.upper is None or res.diverged_at_scale:
            return None
        parts.append(lx + res.upper.log_magnitude)
    return LogValue.of_log(lse(np.array(parts))) if parts else LogValue.zero()


class _ShiftedWeights(KotheMatrix):
    """Weights ``b_{i+R,k}``, used to measure rows past the truncation."""

    def __init__(self, base: KotheMatrix, offset: int):
        object.__setattr__(self, "kind", "shifted")
        object.__setattr__(self, "alpha", None)
        object.__setattr__(self, "table", None)
        object.__setattr__(self, "label", "")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "offset", offset)

    def log_weight(self, n, k):
        return self.base.log_weight(np.asarray(n) + self.offset, k)


def apply(op: OperatorSpec, x: SequenceElement, J: int, R: int,
          codomain: Optional[KotheMatrix] = None,
          grades: Iterable[int] = ()) -> ApplyResult:
    """Rows 1..R of ``sum_{n<=J} x_n Op e_n`` computed in log domain.

    With a codomain, ``grades`` asks for row-tail residual bounds; they are
    reported only when every column tail certifies (otherwise None).
    """
    if R < 1 or J < 1:
        raise ValueError("J and R must be positive")
    cols, log_x, sgn_x, lin_x, finite = _support(x, J)
    rows = np.arange(1, R + 1)
    if op.kind in (OpKind.BACKWARD, OpKind.FORWARD):
        ll, ss, lin = _shift_rows(op, cols, log_x, sgn_x, lin_x, R)
    else:
        ll, ss, lin = symbol_rows(op, cols, log_x, sgn_x, rows, lin_x)
    coords = FiniteSupport(rows, log_values=ll, signs=ss, linear=lin)
    residual = {}
    if codomain is not None:
        for k in grades:
            residual[k] = _row_tail_bound(op, codomain, cols, log_x, R, k) if finite else None
    return ApplyResult(coords, J, R, residual, exact=finite)


def fast_apply(op: OperatorSpec, x: FiniteSupport, J: int, R: int) -> ApplyResult:
    """Same contract as ``apply`` using FFT convolution once ``J*R`` is large.

    The convolution runs on values rescaled by their maxima.  Its absolute
    error is tied to the input norms, so rows that are small against the
    largest row, that cancel heavily, or that sit near the roundoff floor are
    recomputed exactly.
    """
    if not isinstance(x, FiniteSupport):
        raise TypeError("fast_apply takes finitely supported elements")
    if J * R <= FAST_THRESHOLD or op.kind not in (OpKind.HANKEL, OpKind.TOEPLITZ):
        return apply(op, x, J, R)
    cols, log_x, sgn_x, lin_x, _ = _support(x, J)
    if cols.size == 0:
        return apply(op, x, J, R)
    hankel = op.kind is OpKind.HANKEL
    t_len = R + J - 1 if hankel else R
    idx = np.arange(1, t_len + 1)
    th_l, th_s = op.symbol.coords.log_abs(idx), op.symbol.coords.signs(idx)
    top_t = float(np.max(th_l))
    if top_t == NEG_INF:
        return apply(op, x, J, R)
    top_x = float(np.max(log_x))
    t = th_s * np.exp(th_l - top_t)
    xv = np.zeros(J)
    xv[cols - 1] = sgn_x * np.exp(log_x - top_x)
    if hankel:
        y = fftconvolve(t, xv[::-1])[J - 1:J - 1 + R]
        scale = fftconvolve(np.abs(t), np.abs(xv)[::-1])[J - 1:J - 1 + R]
    else:
        y = fftconvolve(t, xv)[:R]
        scale = fftconvolve(np.abs(t), np.abs(xv))[:R]
    # roundoff of an FFT product is about eps * sqrt(len) * |t|_2 * |x|_2 on every row
    noise = FFT_NOISE_FACTOR * np.finfo(float).eps * math.sqrt(t.size + J) \
        * np.linalg.norm(t) * np.linalg.norm(xv)
    small = (scale < FFT_SCALE_FLOOR * np.max(scale)) | (np.abs(y) < FFT_SCALE_FLOOR * scale) \
        | (np.abs(y) < noise)
    redo = np.flatnonzero(small) + 1
    with np.errstate(divide="ignore"):
        ll = np.log(np.abs(y)) + top_t + top_x
    ss = np.sign(y)
    lin = np.full(R, np.nan)
    if redo.size:
        rl, rs, rv = symbol_rows(op, cols, log_x, sgn_x, redo, lin_x)
        ll[redo - 1], ss[redo - 1], lin[redo - 1] = rl, rs, rv
    coords = FiniteSupport(np.arange(1, R + 1), log_values=ll, signs=ss, linear=lin)
    return ApplyResult(coords, J, R, {}, exact=True)


def dense_matrix(op: OperatorSpec, R: int, J: int) -> np.ndarray:
    """Explicit R x J matrix of the operator (float; for oracles and small cases)."""
    M = np.zeros((R, J))
    for n in range(1, J + 1):
        M[:, n - 1] = column(op, n).values(np.arange(1, R + 1))
    return M


# -- shift identities and Cesàro means --------------------------------------------

@dataclass(frozen=True)
class ShiftIdentityReport:
    power: int
    probe: int
    forward_discrepancy: float
    backward_discrepancy: float

    @property
    def holds(self) -> bool:
        return self.forward_discrepancy == 0.0 and self.backward_discrepancy == 0.0


def _iterate_shift(kind: ShiftKind, x: SequenceElement, times: int, probe: int) -> np.ndarray:
    """Coordinates 1..probe of ``shift^times x`` by repeated shifting of a buffer."""
    buf = x.values(np.arange(1, probe + times + 1)) if kind is ShiftKind.BACKWARD \
        else x.values(np.arange(1, probe + 1))
    for _ in range(times):
        if kind is ShiftKind.BACKWARD:
            buf = buf[1:]
        else:
            buf = np.concatenate([[0.0], buf[:-1]])
    return buf[:probe]


def iterated_shift_vs_column(theta: SymbolSequence, n: int, probe: int = 100) -> ShiftIdentityReport:
    """Compare ``F^n theta`` with ``T e_{n+1}`` and ``B^n theta`` with ``H e_{n+1}``."""
    if n < 0:
        raise ValueError("power must be >= 0")
    idx = np.arange(1, probe + 1)
    fwd = _iterate_shift(ShiftKind.FORWARD, theta.coords, n, probe)
    bwd = _iterate_shift(ShiftKind.BACKWARD, theta.coords, n, probe)
    f_col = toeplitz_column(theta, n + 1).values(idx)
    b_col = hankel_column(theta, n + 1).values(idx)
    return ShiftIdentityReport(n, probe, float(np.max(np.abs(fwd - f_col))),
                               float(np.max(np.abs(bwd - b_col))))


def cesaro_vector(n: int) -> FiniteSupport:
    """``(1/n) sum_{m=1}^{n} e_{m+1}``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return FiniteSupport(np.arange(2, n + 2), log_values=np.full(n, -np.log(n)))


def _identity_op(kind: ShiftKind, theta: SymbolSequence) -> OperatorSpec:
    return OperatorSpec.hankel(theta) if kind is ShiftKind.BACKWARD else OperatorSpec.toeplitz(theta)


def cesaro_mean(kind, theta: SymbolSequence, n: int, method: str = "identity",
                probe: Optional[int] = None) -> SequenceElement:
    """``(1/n) sum_{m=1}^{n} shift^m theta``.

    ``identity`` applies H (backward) or T (forward) to ``cesaro_vector(n)``;
    finite symbols give an exact finite element, enveloped ones a lazy element.
    ``direct`` iterates the shift on a buffer and returns coordinates 1..probe.
    """
    kind = ShiftKind(kind)
    if n < 1:
        raise ValueError("n must be >= 1")
    if method == "direct":
        if probe is None:
            raise ValueError("direct iteration needs a probe depth")
        acc = np.zeros(probe)
        cur = theta.coords
        buf = cur.values(np.arange(1, probe + n + 1))
        for _ in range(n):
            buf = buf[1:] if kind is ShiftKind.BACKWARD else np.concatenate([[0.0], buf[:-1]])
            acc += buf[:probe]
        return FiniteSupport.from_dense(acc / n)
    if method != "identity":
        raise ValueError(f"unknown method {method!r}")
    op = _identity_op(kind, theta)
    v = cesaro_vector(n)
    if isinstance(theta.coords, FiniteSupport):
        top = theta.coords.max_index
        R = top if kind is ShiftKind.BACKWARD else top + n + 1
        if R < 1:
            return FiniteSupport()
        return apply(op, v, n + 1, max(R, 1)).coordinates
    if probe is not None:
        return apply(op, v, n + 1, probe).coordinates
    return _lazy_mean(op, kind, theta, n)


def _lazy_mean(op: OperatorSpec, kind: ShiftKind, theta: SymbolSequence, n: int) -> Enveloped:
    v = cesaro_vector(n)
    cols, log_x, sgn_x = v.indices, v.log_values, v.sign_values
    env_op = OperatorSpec(op.kind, SymbolSequence(_EnvelopeView(theta.coords), theta.label))
    cache: Dict[bytes, Tuple[np.ndarray, np.ndarray]] = {}

    def rows(idx):
        idx = np.asarray(idx, dtype=np.int64)
        key = idx.tobytes()
        if key not in cache:
            if len(cache) > 8:
                cache.clear()
            cache[key] = symbol_rows(op, cols, log_x, sgn_x, idx.ravel())[:2]
        return cache[key]

    def log_abs(idx):
        return rows(idx)[0].reshape(np.shape(idx))

    def signs(idx):
        return rows(idx)[1].reshape(np.shape(idx))

    def envelope(idx):
        idx = np.asarray(idx, dtype=np.int64)
        return symbol_rows(env_op, cols, log_x, np.ones_like(sgn_x), idx.ravel())[0].reshape(idx.shape)

    start = max(1, theta.coords.start - 1) if kind is ShiftKind.BACKWARD \
        else theta.coords.start + n
    return Enveloped(log_abs, envelope, signs, start=start,
                     label=f"{kind.value}-mean[{n}]({theta.label})", check=False)


class _EnvelopeView(Enveloped):
    """An element whose coordinates are another element's envelope (all positive)."""

    def __init__(self, base: SequenceElement):
        object.__setattr__(self, "log_abs_fn", base.log_envelope)
        object.__setattr__(self, "envelope_fn", None)
        object.__setattr__(self, "sign_fn", None)
        object.__setattr__(self, "start", base.start)
        object.__setattr__(self, "label", "envelope")
        object.__setattr__(self, "check", False)
