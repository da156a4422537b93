"""Command-line front end.

Exit codes: 0 holds / certified / all cases pass, 1 refuted / some case
failed, 2 inconclusive, 64 bad arguments or specs, 65 compactness asked
for a codomain that is not known to be Montel.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence

import numpy as np

from .certificate import Bounds, Status, dumps
from .sequences import (DominationKind, DominationVerdict, SpecParseError, StabilityVerdict,
                        check_domination, check_shifted_subadditivity, check_stability,
                        check_weak_stability, parse_family)

EXIT_OK, EXIT_REFUTED, EXIT_INCONCLUSIVE = 0, 1, 2
EXIT_USAGE, EXIT_NOT_MONTEL = 64, 65

_VERDICT_EXIT = {
    StabilityVerdict.STABLE: EXIT_OK, StabilityVerdict.REFUTED: EXIT_REFUTED,
    StabilityVerdict.INCONCLUSIVE: EXIT_INCONCLUSIVE,
    DominationVerdict.HOLDS: EXIT_OK, DominationVerdict.REFUTED: EXIT_REFUTED,
    DominationVerdict.INCONCLUSIVE: EXIT_INCONCLUSIVE,
    Status.CERTIFIED: EXIT_OK, Status.REFUTED: EXIT_REFUTED,
    Status.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    specs: Dict[str, str] = field(default_factory=dict)
    bounds: Bounds = Bounds()
    output: Optional[Path] = None
    fmt: str = "json"
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.fmt not in ("json", "csv"):
            raise UsageError(f"format must be json or csv, not {self.fmt!r}")
        if self.workers < 1:
            raise UsageError("workers must be positive")

    @classmethod
    def from_args(cls, args, specs: Dict[str, str]) -> "RunConfig":
        try:
            bounds = Bounds(args.K_max, args.M_max, args.N_max, args.J_max)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        return cls(args.command, specs, bounds, args.output, args.format, args.workers, args.seed)

    def to_dict(self) -> dict:
        return {"command": self.command, "specs": dict(sorted(self.specs.items())),
                "bounds": list(self.bounds.as_tuple()), "format": self.fmt, "seed": self.seed}


def _window(text: str):
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like LO:HI, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad window {text!r}")
    return lo, hi


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)


def _add_run_options(p: argparse.ArgumentParser) -> None:
    b = Bounds()
    p.add_argument("--K-max", dest="K_max", type=int, default=b.K_max)
    p.add_argument("--M-max", dest="M_max", type=int, default=b.M_max)
    p.add_argument("--N-max", dest="N_max", type=int, default=b.N_max)
    p.add_argument("--J-max", dest="J_max", type=int, default=b.J_max)
    p.add_argument("--output", type=Path)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kothe-hankel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    seq = sub.add_parser("seq", help="exponent sequence checks")
    seq_sub = seq.add_subparsers(dest="check", required=True, parser_class=_Parser)
    for name in ("stability", "weak-stability"):
        p = seq_sub.add_parser(name)
        p.add_argument("--family", required=True)
        p.add_argument("--window", type=_window, default=(1, 1024))
        p.add_argument("--seed", type=int, default=0)
    p = seq_sub.add_parser("dominate")
    p.add_argument("--kind", required=True, choices=[k.value for k in DominationKind
                                                    if k is not DominationKind.S1])
    p.add_argument("--alpha", required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--A", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--window", type=_window, default=(1, 1000))
    p.add_argument("--seed", type=int, default=0)
    p = seq_sub.add_parser("subadditive")
    p.add_argument("--beta", required=True)
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--window", type=_window, default=(1, 256))
    p.add_argument("--seed", type=int, default=0)

    cert = sub.add_parser("certify", help="continuity / compactness certificate")
    cert.add_argument("--op", required=True, choices=("hankel", "toeplitz", "backward", "forward"))
    cert.add_argument("--symbol")
    cert.add_argument("--domain", required=True)
    cert.add_argument("--codomain", required=True)
    cert.add_argument("--compact", action="store_true")
    _add_run_options(cert)

    suite = sub.add_parser("suite", help="regression suites")
    suite_sub = suite.add_subparsers(dest="action", required=True, parser_class=_Parser)
    run = suite_sub.add_parser("run")
    run.add_argument("name")
    run.add_argument("--alpha")
    run.add_argument("--beta")
    _add_run_options(run)

    bench = sub.add_parser("bench", help="apply vs fast_apply timing table")
    bench.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 4096])
    bench.add_argument("--repeats", type=int, default=3)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--op", choices=("hankel", "toeplitz"), default="hankel")
    return parser


# -- commands -----------------------------------------------------------------------

def cmd_seq(args) -> int:
    if args.check == "stability":
        rep = check_stability(parse_family(args.family), args.window)
    elif args.check == "weak-stability":
        rep = check_weak_stability(parse_family(args.family), args.window)
    elif args.check == "dominate":
        rep = check_domination(DominationKind(args.kind), parse_family(args.alpha),
                               parse_family(args.beta), args.A, args.B, args.window)
    else:
        if args.M < 1:
            raise UsageError("M must be >= 1")
        rep = check_shifted_subadditivity(parse_family(args.beta), args.M, args.window)
    out = rep.to_dict()
    out["seed"] = args.seed
    sys.stdout.write(dumps(out))
    return _VERDICT_EXIT[rep.verdict]


def cmd_certify(args) -> int:
    from .certify import certify_compactness, certify_continuity
    from .operators import OperatorSpec
    from .presets import parse_symbol
    from .spaces import NotMontelError, parse_space

    domain, codomain = parse_space(args.domain), parse_space(args.codomain)
    specs = {"op": args.op, "domain": args.domain, "codomain": args.codomain}
    if args.op in ("hankel", "toeplitz"):
        if not args.symbol:
            raise UsageError(f"--symbol is required for {args.op}")
        specs["symbol"] = args.symbol
        op = OperatorSpec(args.op, parse_symbol(args.symbol, alpha=domain.alpha))
    else:
        if args.symbol:
            raise UsageError("shift operators take no --symbol")
        op = OperatorSpec(args.op)
    cfg = RunConfig.from_args(args, specs)
    fn = certify_compactness if args.compact else certify_continuity
    try:
        cert = fn(op, domain, codomain, cfg.bounds, cfg.workers, cfg.seed)
    except NotMontelError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NOT_MONTEL
    cert.details["run"] = cfg.to_dict()
    _emit(cert.evidence_csv() if cfg.fmt == "csv" else cert.to_json(), cfg.output)
    return _VERDICT_EXIT[cert.status]


def cmd_suite(args) -> int:
    from .suites import SUITES, run_suite

    if args.name not in SUITES:
        raise UsageError(f"unknown suite {args.name!r}; choose from {', '.join(SUITES)}")
    if (args.alpha or args.beta) and args.name not in SUITES[:5]:
        raise UsageError("--alpha/--beta apply to theorem suites only")
    specs = {"suite": args.name}
    if args.alpha:
        specs["alpha"] = args.alpha
    if args.beta:
        specs["beta"] = args.beta
    cfg = RunConfig.from_args(args, specs)
    report = run_suite(args.name, args.alpha, args.beta, cfg.bounds, cfg.workers, cfg.seed)
    sys.stdout.write(report.table())
    if cfg.output is not None:
        if cfg.fmt == "csv":
            rows = ["case,status,detail"]
            rows += [f"{c.case},{c.status},\"{c.detail}\"" for c in report.cases]
            cfg.output.write_text("\n".join(rows) + "\n")
        else:
            payload = report.to_dict()
            payload["run"] = cfg.to_dict()
            cfg.output.write_text(dumps(payload))
    return EXIT_OK if report.ok else EXIT_REFUTED


def cmd_bench(args) -> int:
    from .operators import OperatorSpec, apply, fast_apply
    from .spaces import FiniteSupport, SymbolSequence

    rng = np.random.default_rng(args.seed)
    lines = [f"# seed={args.seed} op={args.op}",
             f"{'size':>6} {'apply_s':>10} {'fast_s':>10} {'speedup':>8} {'max_rel_gap':>12}"]
    for size in args.sizes:
        theta = SymbolSequence.from_values(rng.uniform(-1, 1, 2 * size))
        x = FiniteSupport.from_dense(rng.uniform(-1, 1, size))
        op = OperatorSpec(args.op, theta)
        t_slow, slow = _best_time(lambda: apply(op, x, size, size), args.repeats)
        t_fast, fast = _best_time(lambda: fast_apply(op, x, size, size), args.repeats)
        a, b = slow.dense(), fast.dense()
        gap = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
        lines.append(f"{size:>6} {t_slow:>10.4f} {t_fast:>10.4f} {t_slow / t_fast:>8.1f} {gap:>12.2e}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _best_time(fn, repeats: int):
    best, out = float("inf"), None
    for _ in range(max(1, repeats)):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


COMMANDS = {"seq": cmd_seq, "certify": cmd_certify, "suite": cmd_suite, "bench": cmd_bench}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, SpecParseError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
