"""Bounded quantifier searches over the column criterion.

An operator T between Köthe spaces is continuous iff for every k some m gives
``sup_n ||T e_n||_k / ||e_n||_m < inf``; into a Montel space it is compact iff
one m serves every k.  Both are searched on finite grids with the sup test
from ``_logmath``: accept an (k, m) when the ratio peaks in the first half of
the window and its running sup does not keep doubling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._logmath import NEG_INF, log_diff, sup_test
from .certificate import Bounds, Certificate, Status, digest
from .operators import OperatorSpec, OpKind, column
from .sequences import ExponentSequence
from .spaces import (Enveloped, KotheMatrix, NotMontelError, SeminormResult, TableRangeError,
                     membership, seminorm, summarize_series)

ROW_BLOCK = 64

RatioFn = Callable[[int, int], np.ndarray]


# -- column norms --------------------------------------------------------------

def column_seminorm(codomain: KotheMatrix, op: OperatorSpec, n: int, k: int,
                    J: int) -> SeminormResult:
    """``||op e_n||_k`` in the codomain, with the usual tail handling."""
    return seminorm(codomain, column(op, n), k, J)


@dataclass
class ColumnNorms:
    """``log ||op e_n||_k`` for n = 1..N at one grade."""

    value: np.ndarray
    upper: np.ndarray  # NaN where the tail is not certified
    diverged: np.ndarray

    @property
    def all_certified(self) -> bool:
        return not np.isnan(self.upper).any()

    @property
    def best(self) -> np.ndarray:
        """Certified upper bounds where available, partial sums elsewhere."""
        return np.where(np.isnan(self.upper), self.value, self.upper)


def column_norms(op: OperatorSpec, codomain: KotheMatrix, k: int, N: int, J: int) -> ColumnNorms:
    """Batched column seminorms built from sliding windows over the symbol."""
    n = np.arange(1, N + 1)
    if op.kind in (OpKind.BACKWARD, OpKind.FORWARD):
        target = n - 1 if op.kind is OpKind.BACKWARD else n + 1
        val = np.full(N, NEG_INF)
        ok = target >= 1
        val[ok] = codomain.log_weight(target[ok], k)
        return ColumnNorms(val, val.copy(), np.zeros(N, bool))

    coords = op.symbol.coords
    hankel = op.kind is OpKind.HANKEL
    # coordinate index c of (row j, column n): Hankel c = n + j - 1, Toeplitz c = j - n + 1
    c_lo = 1 if hankel else 2 - N
    c = np.arange(c_lo, N + 2 * J + 1 if hankel else 2 * J + 2)
    pos = c >= 1
    L = np.full(c.shape, NEG_INF)
    G = np.full(c.shape, NEG_INF)
    L[pos] = coords.log_abs(c[pos])
    G[pos] = coords.log_envelope(c[pos])
    bad_env = pos & (c < coords.start)

    lw_head = codomain.log_weight(np.arange(1, J + 1), k)
    try:
        lw_win = codomain.log_weight(np.arange(J + 1, 2 * J + 2), k)
    except TableRangeError:
        lw_win = None

    width = 2 * J + 1
    L_view = sliding_window_view(L, width)
    G_view = sliding_window_view(G, width)
    B_view = sliding_window_view(bad_env, width)
    value = np.empty(N)
    upper = np.empty(N)
    diverged = np.empty(N, bool)
    for a in range(0, N, ROW_BLOCK):
        rows = np.arange(a, min(N, a + ROW_BLOCK))
        start = rows if hankel else (N - 1 - rows)
        Lb, Gb = L_view[start], G_view[start]
        head = Lb[:, :J] + lw_head
        if lw_win is None:
            v, t, d = summarize_series(head, None, None)
        else:
            v, t, d = summarize_series(head, Gb[:, J:] + lw_win, Lb[:, J:] + lw_win)
            t = np.where(B_view[start][:, J:].any(axis=1), np.nan, t)
        value[rows] = v
        with np.errstate(invalid="ignore"):
            upper[rows] = np.where(np.isnan(t), np.nan, np.logaddexp(v, t))
        diverged[rows] = d
    return ColumnNorms(value, upper, diverged)


class _NormCache:
    def __init__(self, op, codomain, N, J, workers: int = 1):
        self.op, self.codomain, self.N, self.J = op, codomain, N, J
        self.workers = max(1, int(workers or 1))
        self._cache: Dict[int, ColumnNorms] = {}

    def prefetch(self, grades: Sequence[int]) -> None:
        todo = [k for k in grades if k not in self._cache]
        if self.workers > 1 and len(todo) > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                for k, res in zip(todo, pool.map(self._compute, todo)):
                    self._cache[k] = res
        for k in todo:
            self.get(k)

    def _compute(self, k: int) -> ColumnNorms:
        return column_norms(self.op, self.codomain, k, self.N, self.J)

    def get(self, k: int) -> ColumnNorms:
        if k not in self._cache:
            self._cache[k] = self._compute(k)
        return self._cache[k]


# -- quantifier patterns ---------------------------------------------------------

@dataclass
class _Search:
    witness: Dict[int, int] = field(default_factory=dict)
    constants: Dict[int, float] = field(default_factory=dict)
    evidence: List[Tuple[int, int, int, float]] = field(default_factory=list)
    compact: Optional[int] = None
    status: Status = Status.INCONCLUSIVE


def forall_exists(ratio: RatioFn, K: int, M: int, n: np.ndarray,
                  certifiable: Callable[[int], bool] = lambda k: True) -> _Search:
    """For each k the first m in 1..M whose log-ratio passes the sup test."""
    out = _Search()
    refuted = False
    for k in range(1, K + 1):
        all_grow = True
        for m in range(1, M + 1):
            st = sup_test(ratio(k, m))
            out.evidence.append((k, m, int(n[st.position]), st.log_sup))
            if st.accepted and certifiable(k):
                out.witness[k], out.constants[k] = m, st.log_sup
                break
            all_grow &= st.grows
        else:
            refuted |= all_grow
    if len(out.witness) == K:
        out.status = Status.CERTIFIED
    elif refuted:
        out.status = Status.REFUTED
    return out


def exists_forall(ratio: RatioFn, K: int, M: int, n: np.ndarray,
                  certifiable: Callable[[int], bool] = lambda k: True,
                  grades_for: Callable[[int], int] = lambda m: 0) -> _Search:
    """The first m in 1..M passing the sup test at every probed grade.

    ``grades_for(m)`` may widen the probed grades beyond K for a candidate m.
    """
    out = _Search()
    all_m_refuted = True
    for m in range(1, M + 1):
        top = max(K, grades_for(m))
        ok, grows, consts = True, False, {}
        for k in range(1, top + 1):
            st = sup_test(ratio(k, m))
            out.evidence.append((k, m, int(n[st.position]), st.log_sup))
            if st.accepted and certifiable(k):
                consts[k] = st.log_sup
            else:
                ok = False
                grows |= st.grows
        if ok:
            out.compact = m
            out.witness = {k: m for k in range(1, K + 1)}
            out.constants = {k: consts[k] for k in range(1, K + 1)}
            out.status = Status.CERTIFIED
            return out
        all_m_refuted &= grows
    out.status = Status.REFUTED if all_m_refuted else Status.INCONCLUSIVE
    return out


# -- continuity and compactness ----------------------------------------------------

def _op_digest(mode: str, op, domain, codomain, bounds: Bounds) -> str:
    return digest({"mode": mode, "op": op.describe(), "domain": domain.describe(),
                   "codomain": codomain.describe(), "bounds": list(bounds.as_tuple())})


def _divergence(cache: _NormCache, grades: Sequence[int]):
    for k in grades:
        d = cache.get(k).diverged
        if d.any():
            return k, int(np.argmax(d)) + 1
    return None


def _column_search(mode: str, op: OperatorSpec, domain: KotheMatrix, codomain: KotheMatrix,
                   bounds: Bounds, workers: int, seed: Optional[int]) -> Certificate:
    K, M, N, J = bounds.as_tuple()
    n = np.arange(1, N + 1)
    cache = _NormCache(op, codomain, N, J, workers)
    den = {}

    def log_den(m):
        if m not in den:
            den[m] = domain.log_weight(n, m)
        return den[m]

    def ratio(k, m):
        return log_diff(cache.get(k).best, log_den(m))

    def certifiable(k):
        return cache.get(k).all_certified

    dig = _op_digest(mode, op, domain, codomain, bounds)
    compact = mode == "compactness"
    grades = range(1, K + 1)
    cache.prefetch(list(grades))
    hit = _divergence(cache, grades)
    if hit is None:
        if compact:
            s = exists_forall(ratio, K, M, n, certifiable, grades_for=lambda m: m + 1)
        else:
            s = forall_exists(ratio, K, M, n, certifiable)
        hit = _divergence(cache, sorted(cache._cache))
        if hit is None:
            return Certificate(s.status, mode, s.witness, s.constants, s.compact, s.evidence,
                               bounds.as_tuple(), dig, seed=seed)
    k, col = hit
    return Certificate(Status.REFUTED, mode, {}, {}, None, [(k, 0, col, float("inf"))],
                       bounds.as_tuple(), dig, details={"divergent_column": col, "grade": k},
                       seed=seed)


def certify_continuity(op: OperatorSpec, domain: KotheMatrix, codomain: KotheMatrix,
                       bounds: Bounds = Bounds(), workers: int = 1,
                       seed: Optional[int] = None) -> Certificate:
    """For each k <= K_max, the first m <= M_max bounding ``||op e_n||_k / ||e_n||_m``."""
    return _column_search("continuity", op, domain, codomain, bounds, workers, seed)


def certify_compactness(op: OperatorSpec, domain: KotheMatrix, codomain: KotheMatrix,
                        bounds: Bounds = Bounds(), workers: int = 1,
                        seed: Optional[int] = None) -> Certificate:
    """One m serving every k.  Candidate m is also probed at grade m + 1 so
    that a witness at or above K_max cannot pass vacuously."""
    if not codomain.is_montel:
        raise NotMontelError("compactness via the column criterion needs a Montel codomain")
    return _column_search("compactness", op, domain, codomain, bounds, workers, seed)


# -- named conditions ----------------------------------------------------------------

CONDITIONS = ("P2_11", "P3_E3", "P4_E4", "P5_E6", "P6_E7", "P7_E8", "P8_E9")


def check_condition(name: str, *, space: Optional[KotheMatrix] = None,
                    alpha: Optional[ExponentSequence] = None,
                    beta: Optional[ExponentSequence] = None,
                    codomain: Optional[KotheMatrix] = None,
                    K_max: int = 8, M_max: int = 32, window: Tuple[int, int] = (1, 512),
                    J: int = 4096) -> Certificate:
    """Check one sufficient condition with its own quantifier pattern.

    P2_11 / P3_E3 / P4_E4 / P5_E6 / P6_E7 take the domain matrix ``space``
    (and ``beta`` except P2_11); P7_E8 / P8_E9 take ``codomain`` and ``alpha``.
    """
    if name not in CONDITIONS:
        raise ValueError(f"unknown condition {name!r}")
    lo, hi = window
    n = np.arange(lo, hi + 1)
    dig = digest({"condition": name,
                  "space": None if space is None else space.describe(),
                  "codomain": None if codomain is None else codomain.describe(),
                  "alpha": None if alpha is None else alpha.describe(),
                  "beta": None if beta is None else beta.describe(),
                  "K_max": K_max, "M_max": M_max, "window": [lo, hi], "J": J})
    bounds = (K_max, M_max, hi, J)

    if name in ("P7_E8", "P8_E9"):
        if codomain is None or alpha is None:
            raise ValueError(f"{name} needs codomain and alpha")
        return _membership_condition(name, codomain, alpha, K_max, J, bounds, dig)

    if space is None:
        raise ValueError(f"{name} needs the domain matrix")
    if name == "P2_11":
        s = exists_forall(lambda k, m: -space.log_weight(n, m), 1, M_max, n)
        consts = {1: -s.constants[1]} if s.status is Status.CERTIFIED else {}
        return Certificate(s.status, name, s.witness, consts, s.compact, s.evidence, bounds, dig,
                           details={"constant": "log of inf_n a_{n,m0}"})
    if beta is None:
        raise ValueError(f"{name} needs beta")
    b = beta(n)
    if name in ("P3_E3", "P4_E4"):
        def ratio(k, m):
            return log_diff(-k * b, space.log_weight(n, m))
    else:
        def ratio(k, m):
            return log_diff(b / k, space.log_weight(n, m))
    if name in ("P3_E3", "P5_E6"):
        s = forall_exists(ratio, K_max, M_max, n)
    else:
        s = exists_forall(ratio, K_max, M_max, n)
    return Certificate(s.status, name, s.witness, s.constants, s.compact, s.evidence, bounds, dig)


def _membership_condition(name, codomain, alpha, K_max, J, bounds, dig) -> Certificate:
    evidence, statuses, consts = [], [], {}
    for m in range(1, K_max + 1):
        if name == "P7_E8":
            fn = (lambda mm: lambda i: mm * alpha(i))(m)
        else:
            fn = (lambda mm: lambda i: -alpha(i) / mm)(m)
        x = Enveloped(fn, label=f"{name}[m={m}]", check=False)
        cert = membership(codomain, x, K_max, J)
        statuses.append(cert.status)
        evidence += [(k, m, ns, r) for k, _, ns, r in cert.evidence]
        if cert.certified:
            consts[m] = max(cert.constants.values())
    if any(s is Status.REFUTED for s in statuses):
        status = Status.REFUTED
    elif all(s is Status.CERTIFIED for s in statuses):
        status = Status.CERTIFIED
    else:
        status = Status.INCONCLUSIVE
    return Certificate(status, name, {}, consts, None, evidence, bounds, dig,
                       details={"constants_key": "m (exponent index), value max_k log ||.||_k"})


# -- tameness ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Gauge:
    name: str
    fn: Callable[[int], int]

    def __call__(self, k: int) -> int:
        return int(self.fn(k))


IDENTITY_GAUGE = Gauge("identity", lambda k: k)
MINUS_ONE_GAUGE = Gauge("max(1,k-1)", lambda k: max(1, k - 1))


class TameVerdict:
    TAME = "STameAtScale"
    NOT_TAME = "NotSTameAtScale"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class TamenessReport:
    gauge: Dict[int, int]
    per_operator: List[dict]
    family_verdict: str

    def to_dict(self) -> dict:
        return {"gauge": [[k, s] for k, s in sorted(self.gauge.items())],
                "per_operator": self.per_operator, "family_verdict": self.family_verdict}


def tameness_scan(family: Sequence[OperatorSpec], domain: KotheMatrix, codomain: KotheMatrix,
                  gauge: Gauge = IDENTITY_GAUGE, bounds: Bounds = Bounds(),
                  labels: Optional[Sequence[str]] = None) -> TamenessReport:
    """Per operator, the least k0 with ``||T e_n||_k <= C ||e_n||_{S(k)}`` for k0 <= k <= K_max."""
    K, _, N, J = bounds.as_tuple()
    S = {k: gauge(k) for k in range(1, K + 1)}
    if any(S[k] < 1 for k in S) or any(S[k + 1] < S[k] for k in range(1, K)):
        raise ValueError("gauge must be positive and nondecreasing on probed grades")
    n = np.arange(1, N + 1)
    rows, verdicts = [], []
    for i, op in enumerate(family):
        label = labels[i] if labels else (op.symbol.label if op.symbol else op.kind.value)
        cache = _NormCache(op, codomain, N, J)
        hit = _divergence(cache, range(1, K + 1))
        if hit is not None:
            rows.append({"operator": label, "k0": None, "constants": [],
                         "failure": f"divergent column {hit[1]} at k={hit[0]}"})
            verdicts.append(TameVerdict.NOT_TAME)
            continue
        ok, grows, consts = {}, {}, {}
        for k in range(1, K + 1):
            cn = cache.get(k)
            st = sup_test(log_diff(cn.best, domain.log_weight(n, S[k])))
            ok[k] = st.accepted and cn.all_certified
            grows[k] = st.grows
            consts[k] = st.log_sup
        k0 = None
        for k in range(K, 0, -1):
            if not ok[k]:
                break
            k0 = k
        if k0 is not None:
            rows.append({"operator": label, "k0": k0,
                         "constants": [[k, consts[k]] for k in range(k0, K + 1)], "failure": None})
            verdicts.append(TameVerdict.TAME)
        else:
            failure = "ratio grows at top grade" if grows[K] else "top grade not certified"
            rows.append({"operator": label, "k0": None, "constants": [], "failure": failure})
            verdicts.append(TameVerdict.NOT_TAME if grows[K] else TameVerdict.INCONCLUSIVE)
    if all(v == TameVerdict.TAME for v in verdicts):
        fam = TameVerdict.TAME
    elif any(v == TameVerdict.NOT_TAME for v in verdicts):
        fam = TameVerdict.NOT_TAME
    else:
        fam = TameVerdict.INCONCLUSIVE
    return TamenessReport(S, rows, fam)
