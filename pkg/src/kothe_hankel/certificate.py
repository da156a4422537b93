"""Certificates produced by the bounded quantifier searches, and their JSON form."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import jsonschema


class Status(str, Enum):
    CERTIFIED = "CertifiedAtScale"
    REFUTED = "RefutedAtScale"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Bounds:
    K_max: int = 8
    M_max: int = 32
    N_max: int = 512
    J_max: int = 4096

    def __post_init__(self):
        for name in ("K_max", "M_max", "N_max", "J_max"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.K_max, self.M_max, self.N_max, self.J_max)


EvidenceRow = Tuple[int, int, int, float]


@dataclass
class Certificate:
    """Outcome of a bounded search for a quantified inequality.

    ``witness`` maps each probed grade k to the grade m that worked for it.
    Searches with a single existential (dual membership, condition (11))
    use k = 1 as the only key and also set ``compact_witness``.
    Constants and evidence ratios are natural logs.
    """

    status: Status
    kind: str
    witness: Dict[int, int] = field(default_factory=dict)
    constants: Dict[int, float] = field(default_factory=dict)
    compact_witness: Optional[int] = None
    evidence: List[EvidenceRow] = field(default_factory=list)
    search_bounds: Tuple[int, int, int, int] = (0, 0, 0, 0)
    inputs_digest: str = ""
    details: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None

    @property
    def certified(self) -> bool:
        return self.status is Status.CERTIFIED

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "kind": self.kind,
            "witness": [[int(k), int(m)] for k, m in sorted(self.witness.items())],
            "constants": [[int(k), encode_float(c)] for k, c in sorted(self.constants.items())],
            "compact_witness": self.compact_witness,
            "evidence": [[int(k), int(m), int(n), encode_float(r)] for k, m, n, r in self.evidence],
            "bounds": dict(zip(("K_max", "M_max", "N_max", "J_max"), self.search_bounds)),
            "inputs_digest": self.inputs_digest,
            "details": _encode(self.details),
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def evidence_csv(self) -> str:
        lines = ["k,m,n_star,log_ratio"]
        lines += [f"{k},{m},{n},{encode_float(r)}" for k, m, n, r in self.evidence]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "Certificate":
        validate(data)
        b = data["bounds"]
        return cls(
            status=Status(data["status"]),
            kind=data["kind"],
            witness={k: m for k, m in data["witness"]},
            constants={k: decode_float(c) for k, c in data["constants"]},
            compact_witness=data["compact_witness"],
            evidence=[(k, m, n, decode_float(r)) for k, m, n, r in data["evidence"]],
            search_bounds=(b["K_max"], b["M_max"], b["N_max"], b["J_max"]),
            inputs_digest=data["inputs_digest"],
            details=data.get("details", {}),
            seed=data.get("seed"),
        )


def encode_float(x: float):
    """JSON has no infinities; they travel as the strings ``"inf"`` / ``"-inf"``."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def decode_float(x) -> float:
    return float(x)


def _encode(obj):
    if isinstance(obj, dict):
        return {str(k): _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, float):
        return encode_float(obj)
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return _encode(obj.item())
    return obj


def dumps(obj) -> str:
    """Canonical JSON used for every emitted report."""
    return json.dumps(_encode(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def digest(obj) -> str:
    payload = json.dumps(_encode(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)
    return "sha256:" + hashlib.sha256(payload.encode()).hexdigest()


_NUM = {"oneOf": [{"type": "number"}, {"enum": ["inf", "-inf"]}]}

CERTIFICATE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["status", "witness", "constants", "compact_witness", "evidence",
                 "bounds", "inputs_digest"],
    "properties": {
        "status": {"enum": [s.value for s in Status]},
        "kind": {"type": "string"},
        "witness": {"type": "array", "items": {
            "type": "array", "prefixItems": [{"type": "integer"}, {"type": "integer"}],
            "minItems": 2, "maxItems": 2}},
        "constants": {"type": "array", "items": {
            "type": "array", "prefixItems": [{"type": "integer"}, _NUM],
            "minItems": 2, "maxItems": 2}},
        "compact_witness": {"type": ["integer", "null"]},
        "evidence": {"type": "array", "items": {
            "type": "array",
            "prefixItems": [{"type": "integer"}, {"type": "integer"}, {"type": "integer"}, _NUM],
            "minItems": 4, "maxItems": 4}},
        "bounds": {"type": "object",
                   "required": ["K_max", "M_max", "N_max", "J_max"],
                   "properties": {k: {"type": "integer", "minimum": 0}
                                  for k in ("K_max", "M_max", "N_max", "J_max")}},
        "inputs_digest": {"type": "string", "pattern": "^(sha256:[0-9a-f]{64})?$"},
        "details": {"type": "object"},
        "seed": {"type": ["integer", "null"]},
    },
}


def validate(data: dict) -> None:
    jsonschema.validate(data, CERTIFICATE_SCHEMA)
