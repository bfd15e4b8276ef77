"""Coefficient tables shared by the oracle, the catalog and the series engine."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

PROVENANCES = ("closed-form", "oracle-full", "oracle-fast", "oracle-measure", "assembled")


@dataclass
class CoeffTable:
    """Local coefficients ``a_{p^0} .. a_{p^m}`` of one Euler factor."""

    p: int
    m: int
    counts: list
    provenance: str = "closed-form"
    family: str | None = None
    params: dict[str, Any] = field(default_factory=dict)
    elapsed_ms: float | None = None

    def __post_init__(self):
        if len(self.counts) != self.m + 1:
            raise ValueError(f"expected {self.m + 1} counts, got {len(self.counts)}")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @property
    def mode(self) -> str:
        return self.provenance.removeprefix("oracle-")

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "params": dict(self.params),
            "p": self.p,
            "m": self.m,
            "mode": self.mode,
            "counts": [str(c) for c in self.counts],
            "elapsed_ms": None if self.elapsed_ms is None else round(self.elapsed_ms, 3),
        }


@dataclass
class GlobalCoeffs:
    """Dirichlet coefficients ``a_1 .. a_N``; ``a[0]`` is ``a_1``."""

    N: int
    a: list[int]
    source: str = ""

    def __post_init__(self):
        if len(self.a) != self.N:
            raise ValueError(f"expected {self.N} coefficients, got {len(self.a)}")

    def __getitem__(self, n: int) -> int:
        """1-based access: ``g[n]`` is ``a_n``."""
        if not 1 <= n <= self.N:
            raise IndexError(n)
        return self.a[n - 1]

    def partial_sums(self) -> list[int]:
        out, acc = [], 0
        for x in self.a:
            acc += x
            out.append(acc)
        return out

    def to_dict(self) -> dict:
        return {"N": self.N, "source": self.source, "a": [str(x) for x in self.a]}
