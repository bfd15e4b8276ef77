"""Dirichlet coefficient engine: Euler assembly, growth and table comparison."""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass
import csv
import io
import json
import math

import numpy as np

from .ratfunc import RationalUX, SeriesError
from .tables import CoeffTable, GlobalCoeffs


class AssemblyError(LookupError):
    pass


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.flatnonzero(sieve).tolist()


def _smallest_prime_factor(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in primes_upto(math.isqrt(n) + 1):
        block = spf[p * p :: p]
        block[block == 0] = p
    idx = np.arange(n + 1)
    spf[(spf == 0) & (idx >= 2)] = idx[(spf == 0) & (idx >= 2)]
    return spf


def depth(p: int, N: int) -> int:
    """Largest ``e`` with ``p^e <= N``."""
    e, q = 0, p
    while q <= N:
        e += 1
        q *= p
    return e


def euler_assemble(local_tables: Mapping[int, CoeffTable], N: int, source: str = "") -> GlobalCoeffs:
    """``a_n = prod_p a_{p^{v_p(n)}}`` from per-prime tables."""
    coeffs = {}
    for p in primes_upto(N):
        tab = local_tables.get(p)
        if tab is None:
            raise AssemblyError(f"no local table for p={p}")
        need = depth(p, N)
        if tab.m < need:
            raise AssemblyError(f"table for p={p} stops at p^{tab.m}, need p^{need}")
        coeffs[p] = tab.counts
    return _assemble(coeffs, N, source)


def euler_assemble_factors(
    factor: Callable[[int], RationalUX], N: int, source: str = ""
) -> GlobalCoeffs:
    """Euler assembly directly from local rational functions."""
    coeffs = {}
    for p in primes_upto(N):
        try:
            coeffs[p] = factor(p).series(p, depth(p, N), label=f"{source} at p={p}")
        except SeriesError as exc:
            raise AssemblyError(str(exc)) from None
    return _assemble(coeffs, N, source)


def _assemble(coeffs: Mapping[int, list], N: int, source: str) -> GlobalCoeffs:
    a = [0] * (N + 1)
    if N >= 1:
        a[1] = 1
    spf = _smallest_prime_factor(N) if N >= 2 else None
    for n in range(2, N + 1):
        p = int(spf[n])
        m, e = n, 0
        while m % p == 0:
            m //= p
            e += 1
        a[n] = a[m] * coeffs[p][e]
    out = []
    for x in a[1:]:
        if getattr(x, "denominator", 1) != 1:
            raise AssemblyError(f"{source}: non-integral coefficient {x}")
        out.append(int(x))
    return GlobalCoeffs(N, out, source=source)


def add_shifted(base: GlobalCoeffs, sub: GlobalCoeffs, index: int, source: str = "") -> GlobalCoeffs:
    """Coefficients of ``base(s) + index^{-s} sub(s)``, truncated at ``base.N``.

    Sums of Euler products are not Euler products, so this is done
    coefficientwise."""
    a = list(base.a)
    for n in range(1, base.N // index + 1):
        a[index * n - 1] += sub[n]
    return GlobalCoeffs(base.N, a, source=source or base.source)


# ------------------------------------------------------------------ growth


@dataclass(frozen=True)
class GrowthEstimate:
    slope: float
    stderr: float
    points: int

    def __str__(self):
        return f"{self.slope:.3f} ± {self.stderr:.3f} (estimate)"


def growth_exponent(g: GlobalCoeffs, lo: int = 1000, points: int = 25) -> GrowthEstimate:
    """Least-squares slope of ``log sum_{n<=x} a_n`` against ``log x`` on a
    log-spaced grid of ``x`` in ``[lo, N]``."""
    if g.N < lo:
        raise ValueError(f"need N >= {lo}, got {g.N}")
    sums = np.cumsum(np.array(g.a, dtype=float))
    xs = np.unique(np.geomspace(lo, g.N, points).astype(int))
    ys = sums[xs - 1]
    if np.any(ys <= 0):
        raise ValueError("partial sums must be positive")
    lx, ly = np.log(xs), np.log(ys)
    (slope, icpt), cov = np.polyfit(lx, ly, 1, cov=True)
    return GrowthEstimate(float(slope), float(math.sqrt(cov[0, 0])), len(xs))


# --------------------------------------------------------------- compare


@dataclass(frozen=True)
class CompareReport:
    equal: bool
    first_diff: int | None = None
    left: object = None
    right: object = None
    length: int = 0

    def __bool__(self):
        return self.equal

    def __str__(self):
        if self.equal:
            return f"equal on {self.length} coefficients"
        return f"first difference at index {self.first_diff}: {self.left} != {self.right}"


def table_compare(x: CoeffTable, y: CoeffTable) -> CompareReport:
    if x.p != y.p:
        raise ValueError(f"tables are for different primes ({x.p}, {y.p})")
    n = min(len(x.counts), len(y.counts))
    for i in range(n):
        if x.counts[i] != y.counts[i]:
            return CompareReport(False, i, x.counts[i], y.counts[i], n)
    if len(x.counts) != len(y.counts):
        return CompareReport(False, n, None, None, n)
    return CompareReport(True, length=n)


def coeffs_compare(x: GlobalCoeffs, y: GlobalCoeffs) -> CompareReport:
    n = min(x.N, y.N)
    for i in range(n):
        if x.a[i] != y.a[i]:
            return CompareReport(False, i + 1, x.a[i], y.a[i], n)
    return CompareReport(True, length=n)


# ----------------------------------------------------------------- export


def to_csv(g: GlobalCoeffs) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "a_n"])
    for n, x in enumerate(g.a, 1):
        w.writerow([n, x])
    return buf.getvalue()


def to_json(g: GlobalCoeffs) -> str:
    return json.dumps(g.to_dict(), indent=1)


def partial_sum_dump(g: GlobalCoeffs) -> str:
    """Two whitespace-separated columns ``N  sum_{n<=N} a_n``."""
    return "".join(f"{n} {s}\n" for n, s in enumerate(g.partial_sums(), 1))


def local_table_csv(t: CoeffTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "a_p^n"])
    for n, c in enumerate(t.counts):
        w.writerow([n, c])
    return buf.getvalue()
