"""Named symbol sequences and the element spec grammar.

Symbols are 0-based (theta_j).  An element spec reuses the same names and
places theta_j at coordinate j + 1, so ``gauss`` as an element has
x_n = e^{-n^2}.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional

import numpy as np

from .sequences import ExponentSequence, SpecParseError
from .spaces import (FiniteSupport, SequenceElement, SymbolSequence, basis_element,
                     load_element_csv)

SYMBOL_PRESETS = ("delta", "zero", "ones", "geom:r", "gauss", "geomgauss:r",
                  "superexp:p", "poly:p", "dualdecay:m", "values:v0,v1,...")


def _j(j):
    return np.asarray(j, dtype=float)


def _number(arg: str, name: str) -> float:
    try:
        return float(arg)
    except ValueError:
        raise SpecParseError(f"{name}: expected a number, got {arg!r}") from None


def parse_symbol(text: str, alpha: Optional[ExponentSequence] = None,
                 base_dir: Optional[Path] = None) -> SymbolSequence:
    """Resolve a symbol preset; ``dualdecay:m`` needs the domain exponent ``alpha``."""
    text = text.strip()
    name, _, arg = text.partition(":")
    if name == "delta":
        return SymbolSequence.from_values([1.0], label=text)
    if name == "zero":
        return SymbolSequence(FiniteSupport(), label=text)
    if name == "values":
        try:
            vals = [float(v) for v in arg.split(",") if v.strip()]
        except ValueError:
            raise SpecParseError(f"bad value list {arg!r}") from None
        return SymbolSequence.from_values(vals, label=text)
    if name == "csv" and arg.startswith("@"):
        return SymbolSequence.from_element(_load(arg[1:], base_dir), label=text)
    if name == "ones":
        return SymbolSequence.from_log(lambda j: np.zeros(np.shape(j)), label=text)
    if name == "gauss":
        return SymbolSequence.from_log(lambda j: -(_j(j) + 1.0) ** 2, label=text)
    if name == "geom":
        r = _number(arg, name)
        if r == 0:
            return SymbolSequence.from_values([1.0], label=text)
        lr = math.log(abs(r))
        sign = None if r > 0 else (lambda j: np.where(np.asarray(j) % 2 == 0, 1.0, -1.0))
        return SymbolSequence.from_log(lambda j: lr * _j(j), sign_fn=sign, label=text)
    if name == "geomgauss":
        r = _number(arg, name)
        if r <= 0:
            raise SpecParseError("geomgauss needs r > 0")
        lr = math.log(r)
        return SymbolSequence.from_log(lambda j: lr * _j(j) - (_j(j) + 1.0) ** 2, label=text)
    if name == "superexp":
        p = _number(arg, name)
        if p <= 1:
            raise SpecParseError("superexp needs p > 1")
        return SymbolSequence.from_log(lambda j: -((_j(j) + 1.0) ** p), label=text)
    if name == "poly":
        p = _number(arg, name)
        return SymbolSequence.from_log(lambda j: p * np.log(_j(j) + 1.0), label=text)
    if name == "dualdecay":
        m = _number(arg, name)
        if m <= 0:
            raise SpecParseError("dualdecay needs m > 0")
        if alpha is None:
            raise SpecParseError("dualdecay needs the domain exponent sequence")
        return SymbolSequence.from_log(lambda j: -alpha(np.asarray(j) + 1) / m,
                                       label=f"{text}[{alpha.spec()}]")
    raise SpecParseError(f"unknown symbol preset {text!r}")


def _load(path: str, base_dir: Optional[Path]) -> FiniteSupport:
    p = Path(path)
    if base_dir is not None and not p.is_absolute():
        p = base_dir / p
    try:
        return load_element_csv(p)
    except (OSError, ValueError) as exc:
        raise SpecParseError(f"cannot load element {p}: {exc}") from exc


def parse_element(text: str, alpha: Optional[ExponentSequence] = None,
                  base_dir: Optional[Path] = None) -> SequenceElement:
    """``basis:n``, ``@file.csv`` (rows index,value) or any symbol preset as coordinates."""
    text = text.strip()
    if text.startswith("@"):
        return _load(text[1:], base_dir)
    name, _, arg = text.partition(":")
    if name == "basis":
        try:
            return basis_element(int(arg))
        except ValueError:
            raise SpecParseError(f"bad basis index {arg!r}") from None
    return parse_symbol(text, alpha, base_dir).coords


def is_zero_symbol(theta: SymbolSequence) -> bool:
    return isinstance(theta.coords, FiniteSupport) and len(theta.coords) == 0


__all__ = ["SYMBOL_PRESETS", "parse_symbol", "parse_element", "is_zero_symbol"]
