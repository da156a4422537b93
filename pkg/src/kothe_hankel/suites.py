"""Regression suites: theorem instances, tameness families and shift ergodicity.

Every theorem here is one-directional, so a case whose hypothesis check does
not hold is reported as SKIP; PASS means the hypotheses held and the
compactness search certified, FAIL means they held and it did not.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ._logmath import LOG2, NEG_INF
from .certificate import Bounds, Certificate, Status
from .certify import (IDENTITY_GAUGE, MINUS_ONE_GAUGE, Gauge, TamenessReport, TameVerdict,
                      certify_compactness, check_condition, tameness_scan)
from .operators import OperatorSpec, ShiftKind, cesaro_mean, column, iterated_shift_vs_column
from .presets import parse_symbol
from .sequences import (DominationKind, DominationVerdict, ExponentSequence, StabilityVerdict,
                        check_domination, check_stability, check_weak_stability)
from .spaces import (FiniteSupport, KotheMatrix, SequenceElement, SymbolSequence, basis_element,
                     dual_membership, membership, nuclearity, seminorm)

PASS, SKIP, FAIL = "PASS", "SKIP", "FAIL"


@dataclass
class CaseResult:
    suite: str
    case: str
    status: str
    detail: str = ""
    checks: Dict[str, str] = field(default_factory=dict)
    certificate: Optional[Certificate] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"suite": self.suite, "case": self.case, "status": self.status,
             "detail": self.detail, "checks": self.checks}
        if self.certificate is not None:
            d["certificate"] = self.certificate.to_dict()
        if self.extra:
            d["extra"] = self.extra
        return d


@dataclass
class SuiteReport:
    name: str
    cases: List[CaseResult]

    @property
    def ok(self) -> bool:
        return all(c.status != FAIL for c in self.cases)

    def table(self) -> str:
        w = max([len(c.case) for c in self.cases] + [4])
        lines = [f"{'case':<{w}}  status  detail"]
        lines += [f"{c.case:<{w}}  {c.status:<6}  {c.detail}" for c in self.cases]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"suite": self.name, "ok": self.ok, "cases": [c.to_dict() for c in self.cases]}


# -- theorem suites ---------------------------------------------------------------

THEOREMS = ("T1", "T2", "T3", "T4", "NAlphaBeta")

# (alpha, beta, symbols) shipped for each theorem
DEFAULT_INSTANCES: Dict[str, Tuple[str, str, Tuple[str, ...]]] = {
    "T1": ("linear:c=1", "linear:c=1", ("gauss", "geomgauss:0.1", "superexp:1.5")),
    "T2": ("log", "linear:c=1", ("gauss", "geomgauss:0.1", "superexp:1.5")),
    "T3": ("linear:c=1", "linear:c=1", ("ones", "geom:0.5", "gauss")),
    "T4": ("linear:c=1", "linear:c=1", ("dualdecay:3", "dualdecay:2", "delta")),
    "NAlphaBeta": ("log", "power:p=2", ("ones", "delta", "poly:2")),
}


def theorem_spaces(name: str, alpha: ExponentSequence,
                   beta: ExponentSequence) -> Tuple[KotheMatrix, KotheMatrix]:
    fin, inf = KotheMatrix.power_series_finite, KotheMatrix.power_series_infinite
    return {
        "T1": (inf(alpha), inf(beta)),
        "T2": (fin(alpha), inf(beta)),
        "T3": (inf(alpha), fin(beta)),
        "T4": (fin(alpha), fin(beta)),
        "NAlphaBeta": (inf(alpha), fin(beta)),
    }[name]


def _holds(status) -> bool:
    return status in (Status.CERTIFIED, DominationVerdict.HOLDS, StabilityVerdict.STABLE)


def _hypotheses(name: str, alpha, beta, domain, codomain, theta: SymbolSequence,
                bounds: Bounds, window: Tuple[int, int], A=None, B=None) -> Dict[str, object]:
    K, J = bounds.K_max, bounds.J_max
    checks: Dict[str, object] = {}
    if name in ("T1", "T2"):
        if name == "T2":
            checks["C1"] = check_domination(DominationKind.C1, alpha, beta, A, B, window).verdict
        checks["theta_in_codomain"] = membership(codomain, theta.coords, K, J).status
    elif name == "T3":
        checks["beta_stable"] = check_stability(beta, (1, 2 * window[1])).verdict
        checks["C2"] = check_domination(DominationKind.C2, alpha, beta, A, B, window).verdict
        checks["theta_in_codomain"] = membership(codomain, theta.coords, K, J).status
    elif name == "T4":
        checks["codomain_nuclear"] = nuclearity(codomain, K, 2 * K, J).status
        checks["theta_in_dual"] = dual_membership(domain, theta, 2 * K, (1, bounds.N_max)).status
    elif name == "NAlphaBeta":
        checks["alpha_stable"] = check_stability(alpha, (1, 2 * window[1])).verdict
        checks["codomain_nuclear"] = nuclearity(codomain, K, 2 * K, J).status
        checks["n_alpha_le_beta"] = check_domination(DominationKind.N_ALPHA_LE_BETA, alpha, beta,
                                                     window=window).verdict
        checks["E8"] = check_condition("P7_E8", codomain=codomain, alpha=alpha, K_max=K,
                                       J=J).status
        checks["theta_in_dual"] = dual_membership(domain, theta, 2 * K, (1, bounds.N_max)).status
    return checks


def theorem_case(name: str, alpha: ExponentSequence, beta: ExponentSequence,
                 theta: SymbolSequence, bounds: Bounds = Bounds(),
                 window: Tuple[int, int] = (1, 2 ** 16), A=None, B=None,
                 workers: int = 1, seed: Optional[int] = None) -> CaseResult:
    if name not in THEOREMS:
        raise ValueError(f"unknown theorem suite {name!r}")
    domain, codomain = theorem_spaces(name, alpha, beta)
    label = theta.label or "theta"
    checks = _hypotheses(name, alpha, beta, domain, codomain, theta, bounds, window, A, B)
    shown = {k: getattr(v, "value", str(v)) for k, v in checks.items()}
    failed = [k for k, v in checks.items() if not _holds(v)]
    if failed:
        return CaseResult(name, label, SKIP, f"hypothesis not held: {', '.join(failed)}", shown)
    cert = certify_compactness(OperatorSpec.hankel(theta), domain, codomain, bounds, workers, seed)
    if cert.certified:
        return CaseResult(name, label, PASS, f"compact, m={cert.compact_witness}", shown, cert)
    return CaseResult(name, label, FAIL, f"compactness {cert.status.value}", shown, cert)


def theorem_suite(name: str, alpha: Optional[str] = None, beta: Optional[str] = None,
                  symbols: Optional[Sequence[str]] = None, bounds: Bounds = Bounds(),
                  A=None, B=None, workers: int = 1, seed: Optional[int] = None) -> SuiteReport:
    """Run the shipped (or overridden) instances of one theorem."""
    from .sequences import parse_family

    if name not in THEOREMS:
        raise ValueError(f"unknown theorem suite {name!r}")
    a0, b0, s0 = DEFAULT_INSTANCES[name]
    if name == "T2" and alpha is None and beta is None and A is None:
        A, B = 1.0, 1.0
    al = parse_family(alpha or a0)
    be = parse_family(beta or b0)
    cases = []
    for sym in symbols or s0:
        theta = parse_symbol(sym, alpha=al)
        cases.append(theorem_case(name, al, be, theta, bounds, A=A, B=B,
                                  workers=workers, seed=seed))
    return SuiteReport(name, cases)


# -- tameness -------------------------------------------------------------------------

# family -> (domain, codomain, symbols), following the four compact families
TAME_FAMILIES: Dict[str, Tuple[str, str, Tuple[str, ...]]] = {
    "A": ("Linf:linear:c=1", "Linf:linear:c=1", ("gauss", "geomgauss:0.1", "superexp:1.5")),
    "B": ("L1:log", "Linf:linear:c=1", ("gauss", "geomgauss:0.1", "superexp:1.5")),
    "C": ("Linf:linear:c=1", "L1:linear:c=1", ("ones", "delta", "geom:0.5")),
    "D": ("L1:linear:c=1", "L1:linear:c=1", ("dualdecay:2", "dualdecay:3", "dualdecay:5")),
}


def tame_family(name: str, gauge: Gauge = IDENTITY_GAUGE,
                bounds: Bounds = Bounds()) -> TamenessReport:
    from .spaces import parse_space

    dom_s, cod_s, syms = TAME_FAMILIES[name]
    domain, codomain = parse_space(dom_s), parse_space(cod_s)
    alpha = domain.alpha
    ops = [OperatorSpec.hankel(parse_symbol(s, alpha=alpha)) for s in syms]
    return tameness_scan(ops, domain, codomain, gauge, bounds, labels=list(syms))


def tameness_suite(bounds: Bounds = Bounds()) -> SuiteReport:
    from .spaces import parse_space

    cases = []
    for name in TAME_FAMILIES:
        rep = tame_family(name, IDENTITY_GAUGE, bounds)
        status = PASS if rep.family_verdict == TameVerdict.TAME else FAIL
        k0 = ",".join(str(r["k0"]) for r in rep.per_operator)
        cases.append(CaseResult("tameness", f"family-{name}", status,
                                f"{rep.family_verdict} (S=identity, k0={k0})",
                                extra=rep.to_dict()))
    lin = parse_space("Linf:linear:c=1")
    ident = [OperatorSpec.toeplitz(parse_symbol("delta"))]
    for gauge, want in ((IDENTITY_GAUGE, TameVerdict.TAME), (MINUS_ONE_GAUGE, TameVerdict.NOT_TAME)):
        rep = tameness_scan(ident, lin, lin, gauge, bounds, labels=["delta"])
        status = PASS if rep.family_verdict == want else FAIL
        cases.append(CaseResult("tameness", f"identity-toeplitz S={gauge.name}", status,
                                f"{rep.family_verdict} (expected {want})", extra=rep.to_dict()))
    return SuiteReport("tameness", cases)


# -- ergodicity -----------------------------------------------------------------------

MEAN_ERGODIC_DROP = 1e-3
DEFAULT_PROBES = tuple(2 ** i for i in range(11))  # 1 .. 1024


@dataclass
class ErgodicityReport:
    kind: str
    space: str
    symbol: str
    grade: int
    probes: List[int]
    decay_table: List[Tuple[int, float]]  # (n, log ||T^[n] theta||_k)
    cesaro_bound_table: List[Tuple[int, float]]  # (n, sup_x log ||T^[n]x||_k / ||x||_m)
    single_iterate_table: List[Tuple[int, float]]  # (n, log ||(1/n) T^n theta||_k)
    bound_grade: int
    identity_direct_discrepancy: float
    verdicts: Dict[str, bool]
    warnings: List[str] = field(default_factory=list)

    @property
    def decay_ratio(self) -> float:
        """``||T^[n_max] theta|| / ||T^[1] theta||`` (0 when both vanish)."""
        first, last = self.decay_table[0][1], self.decay_table[-1][1]
        if first == NEG_INF:
            return 0.0
        return math.exp(last - first) if last - first < 700.0 else math.inf

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "space": self.space, "symbol": self.symbol, "grade": self.grade,
            "probes": self.probes, "bound_grade": self.bound_grade,
            "decay_table": [[n, v] for n, v in self.decay_table],
            "cesaro_bound_table": [[n, v] for n, v in self.cesaro_bound_table],
            "single_iterate_table": [[n, v] for n, v in self.single_iterate_table],
            "identity_direct_discrepancy": self.identity_direct_discrepancy,
            "verdicts": self.verdicts, "warnings": self.warnings,
        }


def _log_norm(space: KotheMatrix, x: SequenceElement, k: int, J: int) -> Tuple[float, bool]:
    """Upper bound on log ||x||_k when the tail certifies, else the partial sum."""
    if isinstance(x, FiniteSupport):
        J = max(J, x.max_index)
    r = seminorm(space, x, k, J)
    if r.upper is not None:
        return r.upper.log_magnitude, True
    return r.value.log_magnitude, False


def _drops(table: Sequence[float], factor: float = MEAN_ERGODIC_DROP) -> bool:
    first, last = table[0], table[-1]
    if first == NEG_INF:
        return last == NEG_INF
    return last - first <= math.log(factor) and last - first <= -math.log(10.0)


def _mean_discrepancy(kind: ShiftKind, theta: SymbolSequence, n: int, probe: int) -> float:
    """Max relative gap between the identity path and direct iteration on rows 1..probe."""
    ident = cesaro_mean(kind, theta, n, "identity", probe=probe)
    direct = cesaro_mean(kind, theta, n, "direct", probe=probe)
    idx = np.arange(1, probe + 1)
    a, b = ident.values(idx), direct.values(idx)
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)
    gap = np.abs(a - b) / scale
    gap[(a == 0) & (b == 0)] = 0.0
    return float(np.max(gap))


def ergodicity_check(kind, theta: SymbolSequence, space: KotheMatrix, k: int = 1,
                     n_probes: Sequence[int] = DEFAULT_PROBES,
                     sample_x: Optional[Sequence[SequenceElement]] = None,
                     bound_grade: Optional[int] = None, probe_depth: int = 64) -> ErgodicityReport:
    """Decay of the Cesàro means of ``theta`` plus Cesàro-boundedness evidence.

    ``sample_x`` defaults to the basis vectors e_{p+1} for p in the probes; the
    bound table compares grade k with ``bound_grade`` (default k).
    """
    kind = ShiftKind(kind)
    probes = sorted(set(int(p) for p in n_probes))
    if probes[0] < 1:
        raise ValueError("probes must be positive")
    notes = []
    if space.alpha is not None:
        hi = 2 * max(64, probes[-1])
        if check_stability(space.alpha, (1, hi)).verdict is not StabilityVerdict.STABLE:
            weak = check_weak_stability(space.alpha, (1, hi)).verdict
            msg = ("exponent sequence only weakly stable at scale" if weak is StabilityVerdict.STABLE
                   else "exponent sequence not stable at scale")
            warnings.warn(msg)
            notes.append(msg)
    m = k if bound_grade is None else bound_grade
    samples = list(sample_x) if sample_x is not None else [basis_element(p + 1) for p in probes]

    decay, single, bound = [], [], []
    disc = 0.0
    for n in probes:
        J = 2 * n + 64
        mean = cesaro_mean(kind, theta, n)
        val, ok = _log_norm(space, mean, k, J)
        if not ok:
            notes.append(f"decay entry n={n} is a partial sum (tail not certified)")
        decay.append((n, val))

        op = OperatorSpec.hankel(theta) if kind is ShiftKind.BACKWARD else OperatorSpec.toeplitz(theta)
        it, ok = _log_norm(space, column(op, n + 1), k, J)
        single.append((n, it - math.log(n)))

        worst = NEG_INF
        for x in samples:
            xm = cesaro_mean(kind, SymbolSequence.from_element(x), n)
            num, _ = _log_norm(space, xm, k, J)
            den, _ = _log_norm(space, x, m, J)
            worst = max(worst, num - den if den > NEG_INF else math.inf)
        bound.append((n, worst))
        disc = max(disc, _mean_discrepancy(kind, theta, n, probe_depth))

    b = np.array([v for _, v in bound])
    grows = len(b) >= 4 and bool(np.all(np.diff(b[-4:]) >= LOG2))
    verdicts = {
        "mean_ergodic": _drops([v for _, v in decay]),
        "cesaro_bounded": not grows,
        "single_iterate_vanishes": _drops([v for _, v in single]),
    }
    return ErgodicityReport(kind.value, space.spec(), theta.label, k, probes, decay, bound,
                            single, m, disc, verdicts, notes)


ERGODIC_CASES = tuple((kind, sp, sym) for kind in ("backward", "forward")
                      for sp in ("L1:linear:c=1", "Linf:linear:c=1")
                      for sym in ("delta", "gauss"))


def ergodic_suite(n_probes: Sequence[int] = tuple(2 ** i for i in range(13))) -> SuiteReport:
    """Mean-ergodicity decay and identity checks for both shifts on both space types."""
    from .spaces import parse_space

    cases = []
    for kind, sp, sym in ERGODIC_CASES:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rep = ergodicity_check(kind, parse_symbol(sym), parse_space(sp), 1, n_probes)
        ok = rep.verdicts["mean_ergodic"] and rep.identity_direct_discrepancy <= 1e-12
        detail = (f"decay ratio {rep.decay_ratio:.3e} at n={rep.probes[-1]}, "
                  f"identity/direct gap {rep.identity_direct_discrepancy:.1e}, "
                  f"cesaro_bounded={rep.verdicts['cesaro_bounded']}")
        cases.append(CaseResult("ergodic", f"{kind} {sp} {sym}", PASS if ok else FAIL, detail,
                                extra=rep.to_dict()))
    for n in (0, 1, 5, 17):
        rep = iterated_shift_vs_column(parse_symbol("gauss"), n)
        cases.append(CaseResult("ergodic", f"shift-column identity n={n}",
                                PASS if rep.holds else FAIL,
                                f"forward gap {rep.forward_discrepancy}, "
                                f"backward gap {rep.backward_discrepancy}"))
    return SuiteReport("ergodic", cases)


SUITES = THEOREMS + ("ergodic", "tameness")


def run_suite(name: str, alpha: Optional[str] = None, beta: Optional[str] = None,
              bounds: Bounds = Bounds(), workers: int = 1,
              seed: Optional[int] = None) -> SuiteReport:
    if name in THEOREMS:
        return theorem_suite(name, alpha, beta, bounds=bounds, workers=workers, seed=seed)
    if name == "ergodic":
        return ergodic_suite()
    if name == "tameness":
        return tameness_suite(bounds)
    raise ValueError(f"unknown suite {name!r}")
