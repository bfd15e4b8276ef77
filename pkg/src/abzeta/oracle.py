"""Brute-force subgroup counting: the ground truth for every closed form.

A subgroup ``A`` of p-power index with ``AN = G`` is recorded by a pair
``(t, v)``: a reduced triangular good basis ``t`` of ``B = A ∩ N`` and one
coset vector ``v_j`` per holonomy generator, each taken in the box
``[0, p^a) x [0, p^b) x [0, p^c)`` (a transversal of ``N / B_t``).  The pair
is counted when every conjugate ``(g_j x^v_j)^-1 x^{t_i} (g_j x^v_j)`` and
every relator of ``Q`` evaluated at the ``g_j x^v_j`` lies in ``B_t``.

Three routes produce counts:

* ``full``: a vectorised enumeration of every ``(t, v)`` in a cell
  ``(a, b, c)``.  The conditions come from running the group arithmetic of
  :mod:`abzeta.groupalg` on sympy exponents once per family; each one is
  split into the three divisibility stages of :func:`abzeta.membership.sift`
  so that partial assignments can be pruned early.
* ``fast``: identical, except that the central coordinates ``t13, t23`` and
  ``v_j3`` enter the last stage affinely and are counted as solutions of a
  linear congruence system instead of being enumerated.
* ``measure``: the integral itself, enumerating unnormalised residues of
  ``t`` and ``v`` modulo ``p^(n+1)`` and summing the weights
  ``|t11|^{s-1-r}|t22|^{s-2-r}|t33|^{s-3-r}`` (``r`` the number of holonomy
  generators).  Only feasible for small exponents.

:func:`witness_stream` is a separate scalar loop over the same witnesses that
uses plain integer arithmetic and :func:`abzeta.membership.sift_rows`.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
import math
import random
import time

import numpy as np
import sympy

from .catalog import get_family
from .groupalg import ABGroup, FamilySpec, Triple, nk_inv_t, nk_mul_t, nk_pow_t
from .membership import GoodBasis, is_good_basis, sift_rows
from .tables import CoeffTable

DEFAULT_WORK_LIMIT = 10**8
CHUNK = 1 << 20
MODES = ("full", "fast", "measure")


class BudgetExceeded(RuntimeError):
    """Raised when an enumeration would exceed the work limit.

    ``reached`` is the largest exponent whose count was completed and
    ``partial`` the counts up to it.
    """

    def __init__(self, message: str, reached: int, partial: list[int]):
        super().__init__(message)
        self.reached = reached
        self.partial = partial


@dataclass(frozen=True)
class SubgroupWitness:
    t: GoodBasis
    v: tuple[Triple, ...]

    def as_row(self) -> list[int]:
        """CSV column order: a, b, c, t12, t13, t23, then v_j1, v_j2, v_j3 per generator."""
        t = self.t
        return [t.a, t.b, t.c, t.t12, t.t13, t.t23, *(x for vj in self.v for x in vj)]


# ------------------------------------------------------------- symbolic side

D1, D2, D3, T12, T13, T23 = sympy.symbols("d1 d2 d3 t12 t13 t23", integer=True)
U1, U2, U3 = sympy.symbols("u1 u2 u3", integer=True)


def v_symbols(j: int) -> tuple[sympy.Symbol, sympy.Symbol, sympy.Symbol]:
    return sympy.symbols(f"v{j}_1 v{j}_2 v{j}_3", integer=True)


@dataclass(frozen=True)
class SymbolicCondition:
    label: str
    h: tuple  # three sympy expressions


def _expand(x):
    return sympy.expand(x) if isinstance(x, sympy.Basic) else sympy.Integer(x)


@lru_cache(maxsize=None)
def _symbolic_conditions(name: str, items: tuple) -> tuple[SymbolicCondition, ...]:
    fam = get_family(name)
    group = fam.build(dict(items), strict=False)
    rows = ((D1, T12, T13), (0, D2, T23), (0, 0, D3))
    vs = [v_symbols(j) for j in range(group.t)]
    out = []
    for j in range(group.t):
        for i, row in enumerate(rows):
            h = group.conjugation_word(j, row, vs[j])
            out.append(SymbolicCondition(f"conj g{j + 1} row{i + 1}", tuple(map(_expand, h))))
    for idx in range(len(group.relators)):
        h = group.relation_word(idx, vs)
        out.append(SymbolicCondition(f"relator {idx + 1}", tuple(map(_expand, h))))
    return tuple(out)


def symbolic_conditions(fam: FamilySpec | str, params: Mapping[str, int] | None = None):
    """The membership conditions of a family with its parameters fixed, as
    polynomials in ``d1, d2, d3`` (the diagonal of ``t``), ``t12, t13, t23``
    and ``v{j}_1..3``."""
    fam = get_family(fam)
    return _symbolic_conditions(fam.name, tuple(sorted((params or {}).items())))


# ----------------------------------------------------------- compiled pieces


class CompiledPoly:
    """An integer-valued polynomial ``P / D`` with ``P`` integral, evaluated
    modulo small moduli on int64 arrays."""

    def __init__(self, expr, names: Sequence[str]):
        expr = sympy.expand(expr)
        syms = [sympy.Symbol(n, integer=True) for n in names]
        poly = sympy.Poly(expr, *syms) if syms else None
        if poly is None:
            terms = [((), sympy.Rational(expr))]
        else:
            terms = poly.terms()
        denom = 1
        for _, c in terms:
            denom = math.lcm(denom, int(sympy.Rational(c).q))
        self.denom = denom
        self.terms = []
        used = set()
        for mon, c in terms:
            c = sympy.Rational(c) * denom
            if c == 0:
                continue
            exps = tuple((names[i], e) for i, e in enumerate(mon) if e)
            used.update(n for n, _ in exps)
            self.terms.append((int(c), exps))
        self.vars = frozenset(used)

    def is_zero(self) -> bool:
        return not self.terms

    def eval_mod(self, env: Mapping[str, np.ndarray], M: int, size: int) -> np.ndarray:
        MM = M * self.denom
        acc = np.zeros(size, dtype=np.int64)
        for c, exps in self.terms:
            term = np.full(size, c % MM, dtype=np.int64)
            for name, e in exps:
                x = env[name] % MM
                for _ in range(e):
                    term = term * x % MM
            acc = (acc + term) % MM
        return acc // self.denom


def _inverse_mod(x: np.ndarray, p: int, mod: int) -> np.ndarray:
    """Inverse of units modulo a power ``mod`` of ``p`` (or of 2)."""
    if mod == 1:
        return np.zeros_like(x)
    q = 2 if mod % 2 == 0 and p == 2 else p
    phi = mod - mod // q
    e, base, out = phi - 1, x % mod, np.ones_like(x)
    while e:
        if e & 1:
            out = out * base % mod
        base = base * base % mod
        e >>= 1
    return out


@dataclass
class Cell:
    p: int
    k: int
    a: int
    b: int
    c: int
    units: bool = False  # diagonal entries are p^e times a unit variable

    @property
    def pa(self):
        return self.p**self.a

    @property
    def pb(self):
        return self.p**self.b

    @property
    def pc(self):
        return self.p**self.c

    @property
    def lam1_mod(self) -> int:
        """Precision needed for ``l1``: ``p^(b+c)``, doubled at ``p = 2``
        because of the ``l1 (l1 - 1) / 2`` term."""
        return self.p ** (self.b + self.c) * (2 if self.p == 2 else 1)


class StagedCondition:
    """One membership condition ``x^h in B_t`` split into its three
    divisibility stages for a fixed cell."""

    def __init__(self, cond: SymbolicCondition, cell: Cell, names: Sequence[str]):
        self.label = cond.label
        self.cell = cell
        subs = {D1: cell.pa, D2: cell.pb, D3: cell.pc}
        if cell.units:
            subs = {D1: cell.pa * U1, D2: cell.pb * U2, D3: cell.pc * U3}
        self.h = [CompiledPoly(sympy.sympify(x).subs(subs), names) for x in cond.h]
        h1, h2, h3 = self.h
        u1 = {"u1"} if cell.units else set()
        u2 = {"u2"} if cell.units else set()
        lam1_deps = (h1.vars | u1) if not h1.is_zero() else frozenset()
        self.lam1_zero = h1.is_zero()
        self.s1_deps = h1.vars
        self.lam2_deps = lam1_deps | h2.vars | ({"t12"} if not self.lam1_zero else set()) | u2
        self.lam2_zero = self.lam1_zero and h2.is_zero()
        binom = set()
        if cell.k and not self.lam1_zero:
            binom = {"t12"} | u1 | lam1_deps
        self.s3_deps = (
            self.lam2_deps
            | h3.vars
            | ({"t13"} if not self.lam1_zero else set())
            | ({"t23"} if not self.lam2_zero else set())
            | binom
        )

        def degree(poly, name):
            return max((e for _, exps in poly.terms for n, e in exps if n == name), default=0)

        # variables in which a stage value is affine, so it can be solved for
        self.affine = {
            "s1": {n for n in names if degree(h1, n) <= 1 and n in h1.vars},
            "s2": {
                n
                for n in names
                if n in h2.vars
                and degree(h2, n) <= 1
                and n not in h1.vars
                and (n != "t12" or self.lam1_zero)
                and not (cell.units and n in ("u1", "u2"))
            },
        }
        self.affine["s1"] -= {"u1", "u2", "u3"}

        # with t11 = t22 = 1 there is no division anywhere, so stage three is
        # a single polynomial and its true dependencies can be read off
        self.exact3 = None
        if cell.a == 0 and cell.b == 0 and cell.c and not cell.units:
            e1, e2, e3 = (sympy.sympify(x).subs(subs) for x in cond.h)
            lam2 = e2 - e1 * T12
            V = e3 - e1 * T13 - lam2 * T23 - cell.k * T12 * e1 * (e1 - 1) / 2
            self.exact3 = CompiledPoly(V, names)
            self.s3_deps = self.exact3.vars
            self.affine["s3"] = {n for n in self.exact3.vars if degree(self.exact3, n) <= 1}

    def stage_value(self, kind, env, size):
        """The quantity whose vanishing modulo ``p^a`` (``s1``) or ``p^b``
        (``s2``) is the stage condition."""
        if kind == "s1":
            return self.h[0].eval_mod(env, self.cell.pa, size), self.cell.pa
        if kind == "s3":
            return self.exact3.eval_mod(env, self.cell.pc, size), self.cell.pc
        return self._r2(env, size, self.cell.pb), self.cell.pb

    # -- stage values
    def s1(self, env, size):
        if self.cell.a == 0:
            return np.ones(size, dtype=bool)
        return self.h[0].eval_mod(env, self.cell.pa, size) == 0

    def lam1(self, env, size, mod):
        if self.lam1_zero:
            return np.zeros(size, dtype=np.int64)
        cell = self.cell
        h1 = self.h[0].eval_mod(env, cell.pa * mod, size)
        lam = h1 // cell.pa
        if cell.units:
            lam = lam * _inverse_mod(env["u1"], cell.p, mod) % mod
        return lam % mod

    def _r2(self, env, size, mod):
        """``h2 - l1 t12`` modulo ``mod``."""
        h2 = self.h[1].eval_mod(env, mod, size)
        if self.lam1_zero:
            return h2
        lam = self.lam1(env, size, mod)
        return (h2 - lam * (env["t12"] % mod)) % mod

    def s2(self, env, size):
        if self.cell.b == 0:
            return np.ones(size, dtype=bool)
        return self._r2(env, size, self.cell.pb) == 0

    def lam2(self, env, size):
        cell = self.cell
        mod = cell.pc
        if self.lam2_zero or mod == 1:
            return np.zeros(size, dtype=np.int64)
        lam = self._r2(env, size, cell.pb * mod) // cell.pb
        if cell.units:
            lam = lam * _inverse_mod(env["u2"], cell.p, mod) % mod
        return lam % mod

    def s3_rest(self, env, size):
        """Everything in stage three except ``h3`` itself, modulo ``p^c``:
        ``- l1 t13 - l2 t23 - k t11 t12 l1 (l1 - 1) / 2``."""
        cell = self.cell
        M = cell.pc
        out = np.zeros(size, dtype=np.int64)
        if self.lam1_zero and self.lam2_zero:
            return out
        lam2 = self.lam2(env, size)
        if not self.lam2_zero:
            out = (out - lam2 * (env["t23"] % M)) % M
        if not self.lam1_zero:
            L = cell.lam1_mod
            lam1 = self.lam1(env, size, L)
            out = (out - lam1 % M * (env["t13"] % M)) % M
            if cell.k:
                if cell.p == 2:
                    binom = (lam1 * (lam1 - 1) % (2 * M)) // 2
                else:
                    binom = lam1 * (lam1 - 1) % M * ((M + 1) // 2) % M
                t11 = cell.pa % M
                if cell.units:
                    t11 = t11 * env["u1"] % M
                coef = cell.k % M * t11 % M * (env["t12"] % M) % M
                out = (out - coef * binom) % M
        return out

    def s3(self, env, size):
        if self.cell.c == 0:
            return np.ones(size, dtype=bool)
        M = self.cell.pc
        if self.exact3 is not None:
            return self.exact3.eval_mod(env, M, size) == 0
        return (self.h[2].eval_mod(env, M, size) + self.s3_rest(env, size)) % M == 0


class Check(NamedTuple):
    """Stage ``kind`` (``s1``, ``s2`` or ``s3``) of one condition; it can be
    evaluated once every variable in ``deps`` is assigned."""

    deps: frozenset
    kind: str
    sc: StagedCondition

    def mask(self, env, size):
        return getattr(self.sc, self.kind)(env, size)

    def affine_in(self, name: str) -> bool:
        return name in self.sc.affine.get(self.kind, ())

    def value(self, env, size):
        return self.sc.stage_value(self.kind, env, size)


# ----------------------------------------------------------- linear counting


def count_linear_solutions(A: np.ndarray, b: np.ndarray, p: int, c: int) -> np.ndarray:
    """Number of ``y`` in ``(Z/p^c)^D`` with ``A y ≡ b`` for each point.

    ``A`` has shape ``(P, R, D)`` and ``b`` shape ``(P, R)``.  At each step
    the entry of least valuation ``e`` is moved to the corner.  Every other
    entry of its row and column is divisible by ``p^e``, so row operations
    clear the column and a unimodular change of variables clears the row.
    The pivot equation then has ``p^e`` solutions when ``p^e`` divides its
    right-hand side and none otherwise.  Once everything left is zero the
    remaining rows need a zero right-hand side and the remaining columns
    are free.
    """
    M = p**c
    P, R, D = A.shape
    A = A % M
    b = b % M
    count = np.ones(P, dtype=object)
    alive = np.ones(P, dtype=bool)
    done = np.zeros(P, dtype=bool)
    pts = np.arange(P)
    while R and D:
        val = _valuation(A, p, c)
        flat = val.reshape(P, -1)
        idx = flat.argmin(axis=1)
        e = flat[pts, idx]
        finished = (e >= c) & ~done
        if finished.any():
            alive[finished] &= np.all(b[finished] == 0, axis=1)
            count[finished] = count[finished] * M**D
            done |= finished
        if done.all():
            return np.where(alive, count, 0)
        r0, d0 = np.divmod(idx, D)
        A = _swap(A, r0, axis=1)
        A = _swap(A, d0, axis=2)
        b = _swap(b[..., None], r0, axis=1)[..., 0]
        act = ~done
        pe = p ** np.minimum(e, c - 1)
        alive &= ~act | (b[:, 0] % pe == 0)
        count[act] = count[act] * pe[act].astype(object)
        unit = np.where(act, A[:, 0, 0] // pe, 1)
        inv = _inverse_mod(unit % M, p, M)
        f = (A[:, 1:, 0] // pe[:, None]) * inv[:, None] % M
        f[done] = 0
        A = (A[:, 1:, 1:] - f[:, :, None] * A[:, 0:1, 1:]) % M
        b = (b[:, 1:] - f * b[:, 0:1]) % M
        R, D = R - 1, D - 1
    act = ~done
    if R:
        alive &= ~act | np.all(b == 0, axis=1)
    if D:
        count[act] = count[act] * M**D
    return np.where(alive, count, 0)


def _valuation(A: np.ndarray, p: int, c: int) -> np.ndarray:
    val = np.zeros(A.shape, dtype=np.int64)
    x = A.copy()
    for _ in range(c):
        div = (x % p == 0) & (val < c)
        val += div
        x = np.where(div, x // p, x)
    return np.where(A == 0, c, val)


def _swap(A: np.ndarray, j: np.ndarray, axis: int) -> np.ndarray:
    """Swap index 0 and index ``j[i]`` along ``axis`` for each point ``i``."""
    n = A.shape[axis]
    perm = np.tile(np.arange(n), (A.shape[0], 1))
    rows = np.arange(A.shape[0])
    perm[rows, 0] = j
    perm[rows, j] = 0
    if axis == 1:
        return np.take_along_axis(A, perm.reshape(perm.shape + (1,) * (A.ndim - 2)), axis=1)
    return np.take_along_axis(A, perm[:, None, :], axis=2)


# -------------------------------------------------------------- enumeration


@dataclass
class _Budget:
    limit: int
    used: int = 0

    def spend(self, n: int):
        self.used += n
        if self.used > self.limit:
            raise _OverBudget


class _OverBudget(Exception):
    pass


@dataclass
class CellPlan:
    cell: Cell
    variables: list[tuple[str, np.ndarray]]
    free_factor: int
    checks: list
    inner: list[str] = field(default_factory=list)
    linear_rows: list = field(default_factory=list)


def _var_names(t: int) -> list[str]:
    names = ["t12", "t13", "t23"]
    for j in range(t):
        names += [f"v{j}_1", f"v{j}_2", f"v{j}_3"]
    return names


def _plan(fam: FamilySpec, params, cell: Cell, mode: str, L: int | None = None) -> CellPlan:
    conds = symbolic_conditions(fam, params)
    t = fam.t
    names = _var_names(t) + (["u1", "u2", "u3"] if cell.units else [])
    p = cell.p
    if mode == "measure":
        ranges = {n: np.arange(p**L, dtype=np.int64) for n in _var_names(t)}
        for i, e in zip((1, 2, 3), (cell.a, cell.b, cell.c)):
            span = np.arange(p ** (L - e), dtype=np.int64)
            ranges[f"u{i}"] = span[span % p != 0]
    else:
        mods = {"t12": cell.pb, "t13": cell.pc, "t23": cell.pc}
        for j in range(t):
            mods.update({f"v{j}_1": cell.pa, f"v{j}_2": cell.pb, f"v{j}_3": cell.pc})
        ranges = {n: np.arange(m, dtype=np.int64) for n, m in mods.items()}
    staged = [StagedCondition(c, cell, names) for c in conds]
    checks = []
    for sc in staged:
        if cell.a:
            checks.append(Check(sc.s1_deps, "s1", sc))
        if cell.b:
            checks.append(Check(sc.lam2_deps, "s2", sc))
        if cell.c:
            checks.append(Check(sc.s3_deps, "s3", sc))
    inner: list[str] = []
    linear_rows = []
    if mode in ("fast", "measure") and cell.c:
        inner, linear_rows, checks = _split_linear(staged, checks, names, t, cell)
    used = set().union(*(ch.deps for ch in checks)) if checks else set()
    for row in linear_rows:
        used |= row["outer_deps"]
    variables, free = [], 1
    for n in names:
        if n in inner:
            continue
        vals = ranges[n]
        if n in used:
            variables.append((n, vals))
        else:
            free *= len(vals)
    if mode == "measure" and inner:
        free *= p ** ((L - cell.c) * len(inner))
    return CellPlan(cell, _order(variables, checks, linear_rows), free, checks, inner, linear_rows)


def _split_linear(staged, checks, names, t, cell):
    """Pick the central variables that only enter stage three, affinely,
    and turn their stage-three conditions into linear rows."""
    cand = ["t13", "t23"] + [f"v{j}_3" for j in range(t)]
    early = set()
    for sc in staged:
        if sc.exact3 is None:
            early |= sc.s1_deps | sc.lam2_deps
    inner = []
    for y in cand:
        if y in early:
            continue
        ok = True
        for sc in staged:
            for term_c, exps in _stage3_terms(sc):
                deg = dict(exps).get(y, 0)
                others = [n for n, _ in exps if n != y]
                if deg > 1 or (deg == 1 and any(o in cand for o in others)):
                    ok = False
        if ok:
            inner.append(y)
    if not inner:
        return [], [], checks
    rows = []
    if not any(set(inner) & ch.deps for ch in checks if ch.kind == "s3"):
        return [], [], checks
    kept = []
    for ch in checks:
        deps, sc = ch.deps, ch.sc
        if ch.kind != "s3" or not (deps & set(inner)):
            kept.append(ch)
            continue
        coef = {y: [] for y in inner}
        const = []
        for c, exps in _stage3_terms(sc):
            d = dict(exps)
            ys = [y for y in inner if y in d]
            if ys:
                y = ys[0]
                coef[y].append((c, tuple((n, e) for n, e in exps if n != y)))
            else:
                const.append((c, exps))
        outer_deps = deps - set(inner)
        rows.append({"sc": sc, "coef": coef, "const": const, "outer_deps": outer_deps})
    return inner, rows, kept


def _stage3_terms(sc: StagedCondition):
    return sc.h[2].terms if sc.exact3 is None else sc.exact3.terms


def _eval_terms(terms, denom, env, M, size):
    MM = M * denom
    acc = np.zeros(size, dtype=np.int64)
    for c, exps in terms:
        term = np.full(size, c % MM, dtype=np.int64)
        for name, e in exps:
            x = env[name] % MM
            for _ in range(e):
                term = term * x % MM
        acc = (acc + term) % MM
    return acc // denom


def _linear_system(plan: CellPlan, env, size):
    cell = plan.cell
    M = cell.pc
    R, D = len(plan.linear_rows), len(plan.inner)
    A = np.zeros((size, R, D), dtype=np.int64)
    b = np.zeros((size, R), dtype=np.int64)
    zero_env = dict(env)
    for y in plan.inner:
        zero_env[y] = np.zeros(size, dtype=np.int64)
    for r, row in enumerate(plan.linear_rows):
        sc = row["sc"]
        denom = sc.h[2].denom if sc.exact3 is None else sc.exact3.denom
        for d, y in enumerate(plan.inner):
            A[:, r, d] = _eval_terms(row["coef"][y], denom, env, M, size) if row["coef"][y] else 0
        if sc.exact3 is not None:
            const = _eval_terms(row["const"], denom, env, M, size) if row["const"] else 0
            b[:, r] = (-const) % M
            continue
        # l1 t13 and l2 t23 are part of the affine form
        if "t13" in plan.inner and not sc.lam1_zero:
            d = plan.inner.index("t13")
            A[:, r, d] = (A[:, r, d] - sc.lam1(env, size, M)) % M
        if "t23" in plan.inner and not sc.lam2_zero:
            d = plan.inner.index("t23")
            A[:, r, d] = (A[:, r, d] - sc.lam2(env, size)) % M
        rest = sc.s3_rest(zero_env, size)
        const = _eval_terms(row["const"], denom, env, M, size) if row["const"] else 0
        b[:, r] = (-(const + rest)) % M
    return A, b


def _order(variables, checks, linear_rows):
    """Greedy ordering: next take the variable that completes the most
    restrictive checks relative to its range."""
    remaining = list(variables)
    chosen: list[tuple[str, np.ndarray]] = []
    have: set[str] = set()
    pending = [ch.deps for ch in checks]
    out = []
    while remaining:
        best, best_score = None, None
        for name, vals in remaining:
            now = have | {name}
            gain = sum(1 for deps in pending if deps <= now and not deps <= have)
            score = (-gain, len(vals))
            if best_score is None or score < best_score:
                best, best_score = (name, vals), score
        remaining.remove(best)
        have.add(best[0])
        out.append(best)
    chosen.extend(out)
    return chosen


def _count_cell(plan: CellPlan, budget: _Budget):
    size0 = 1
    env0: dict[str, np.ndarray] = {}
    levels = [name for name, _ in plan.variables]
    at_level: list[list] = [[] for _ in levels]
    have: set[str] = set()
    assigned = set()
    for i, name in enumerate(levels):
        have.add(name)
        for ch in plan.checks:
            key = id(ch)
            if key not in assigned and ch.deps <= have:
                at_level[i].append(ch)
                assigned.add(key)
    leftover = [ch for ch in plan.checks if id(ch) not in assigned]  # constant checks

    total = 0

    def finish(env, size):
        nonlocal total
        for ch in leftover:
            m = ch.mask(env, size)
            env = {k: v[m] for k, v in env.items()}
            size = int(m.sum())
        if size == 0:
            return
        if plan.linear_rows:
            A, b = _linear_system(plan, env, size)
            budget.spend(size * max(1, A.shape[1] * A.shape[2]))
            total += int(count_linear_solutions(A, b, plan.cell.p, plan.cell.c).sum())
        else:
            total += size

    def rec(level, env, size):
        if level == len(levels):
            finish(env, size)
            return
        name, vals = plan.variables[level]
        checks = at_level[level]
        solver = solvers[level]
        for sub, cur in (_solve(name, vals, solver, env, size, budget, plan.cell.p)
                         if solver else _tile(name, vals, env, size, budget, len(checks))):
            for ch in checks:
                if ch is solver:
                    continue
                m = ch.mask(sub, cur)
                if not m.all():
                    sub = {k: v[m] for k, v in sub.items()}
                    cur = int(m.sum())
                if cur == 0:
                    break
            if cur:
                rec(level + 1, sub, cur)

    solvers = []
    for i, name in enumerate(levels):
        vals = plan.variables[i][1]
        full_range = vals[0] == 0 and vals[-1] == len(vals) - 1
        cands = [ch for ch in at_level[i] if ch.affine_in(name)]
        if full_range and len(vals) > 1 and cands:
            solvers.append(max(cands, key=_solver_rank))
        else:
            solvers.append(None)

    rec(0, env0, size0)
    return total * plan.free_factor


def _solver_rank(ch: Check):
    # stage one and two first, as before stage three became solvable
    cell = ch.sc.cell
    return {"s1": (1, cell.a), "s2": (2, cell.b), "s3": (0, cell.c)}[ch.kind]


def _tile(name, vals, env, size, budget, nchecks):
    R = len(vals)
    step = max(1, CHUNK // R)
    for s in range(0, size, step):
        e = min(size, s + step)
        n = e - s
        sub = {k: np.repeat(v[s:e], R) for k, v in env.items()}
        sub[name] = np.tile(vals, n)
        budget.spend(n * R * max(1, nchecks))
        yield sub, n * R


def _solve(name, vals, check, env, size, budget, p):
    """Assign ``name`` by solving the affine congruence ``alpha y + beta ≡ 0``
    of ``check`` instead of trying every value."""
    R = len(vals)
    for s in range(0, size, CHUNK):
        e = min(size, s + CHUNK)
        n = e - s
        part = {k: v[s:e] for k, v in env.items()}
        part[name] = np.zeros(n, dtype=np.int64)
        beta, M = check.value(part, n)
        part[name] = np.ones(n, dtype=np.int64)
        alpha = (check.value(part, n)[0] - beta) % M
        E = round(math.log(M, p))
        g = _valuation(alpha, p, E)
        pg = p**g
        ok = beta % pg == 0
        step = p ** (E - g)
        unit = alpha // pg
        y0 = np.where(
            g < E,
            (-(beta // pg)) % step * (_inverse_mod(unit % M, p, M) % step) % step,
            0,
        ) if E else np.zeros(n, dtype=np.int64)
        counts = np.where(ok & (y0 < R), (R - 1 - y0) // step + 1, 0)
        budget.spend(n + int(counts.sum()))
        # split so that no batch holds more than CHUNK points
        cum = np.cumsum(counts)
        start = 0
        while start < n:
            base = cum[start - 1] if start else 0
            stop = int(np.searchsorted(cum, base + CHUNK, side="right"))
            stop = max(stop, start + 1)
            c = counts[start:stop]
            tot = int(c.sum())
            if tot:
                idx = np.repeat(np.arange(start, stop), c)
                first = np.repeat(np.cumsum(c) - c, c)
                j = np.arange(tot) - first
                sub = {k: v[idx] for k, v in part.items() if k != name}
                sub[name] = y0[idx] + j * step[idx]
                yield sub, tot
            start = stop


def _cells(p: int, k: int, n: int):
    for a in range(n + 1):
        for b in range(n + 1 - a):
            c = n - a - b
            if k == 0 or (k * p ** (a + b)) % p**c == 0:
                yield a, b, c


def _cell_job(args):
    name, items, p, k, a, b, c, mode, limit = args
    fam = get_family(name)
    params = dict(items)
    if mode == "measure":
        n = a + b + c
        plan = _plan(fam, params, Cell(p, k, a, b, c, units=True), "measure", L=n + 1)
    else:
        plan = _plan(fam, params, Cell(p, k, a, b, c), mode)
    budget = _Budget(limit)
    return _count_cell(plan, budget), budget.used


def oracle_count(
    fam: FamilySpec | str,
    params: Mapping[str, int] | None,
    p: int,
    m: int,
    mode: str = "full",
    *,
    work_limit: int = DEFAULT_WORK_LIMIT,
    jobs: int = 1,
) -> CoeffTable:
    """Counts ``a_{p^0} .. a_{p^m}`` of subgroups ``A`` with ``AN = G``.

    Raises :class:`BudgetExceeded` when the total number of candidate
    evaluations would pass ``work_limit``.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    fam = get_family(fam)
    params = fam.check_params(params or {})
    k = fam.k_value(params)
    items = tuple(sorted(params.items()))
    symbolic_conditions(fam, params)  # warm the cache before any fork
    start = time.perf_counter()
    counts: list = []
    used = 0
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        for n in range(m + 1):
            jobs_n = [
                (fam.name, items, p, k, a, b, c, mode, work_limit - used)
                for a, b, c in _cells(p, k, n)
            ]
            try:
                results = pool.map(_cell_job, jobs_n) if pool else map(_cell_job, jobs_n)
                if mode == "measure":
                    total = Fraction(0)
                    t = fam.t
                    for job, (cnt, w) in zip(jobs_n, results):
                        a, b, c = job[4:7]
                        used += w
                        weight = Fraction(p, p - 1) ** 3 * Fraction(
                            p ** (a * (1 + t) + b * (2 + t) + c * (3 + t)),
                            p ** ((n + 1) * (6 + 3 * t)),
                        )
                        total += cnt * weight
                    counts.append(int(total) if total.denominator == 1 else total)
                else:
                    total = 0
                    for cnt, w in results:
                        total += cnt
                        used += w
                    counts.append(total)
            except _OverBudget:
                raise BudgetExceeded(
                    f"{fam.name}{params} p={p}: work limit {work_limit} reached at p^{n}",
                    n - 1,
                    counts,
                ) from None
            if used > work_limit:
                raise BudgetExceeded(
                    f"{fam.name}{params} p={p}: work limit {work_limit} reached at p^{n}",
                    n,
                    counts,
                )
    finally:
        if pool:
            pool.shutdown()
    elapsed = (time.perf_counter() - start) * 1000
    return CoeffTable(
        p=p, m=m, counts=counts, provenance=f"oracle-{mode}", family=fam.name,
        params=params, elapsed_ms=elapsed,
    )


# ----------------------------------------------------------- scalar route


def conditions_hold(group: ABGroup, rows, vs: Sequence[Triple]) -> bool:
    """Plain-integer check of every condition for an arbitrary (possibly
    unreduced) triangular basis ``rows``."""
    k = group.k
    for j in range(group.t):
        for row in rows:
            if sift_rows(k, rows, group.conjugation_word(j, row, vs[j])) is None:
                return False
    for idx in range(len(group.relators)):
        if sift_rows(k, rows, group.relation_word(idx, vs)) is None:
            return False
    return True


def witness_stream(
    fam: FamilySpec | str,
    params: Mapping[str, int] | None,
    p: int,
    m: int,
    *,
    work_limit: int = DEFAULT_WORK_LIMIT,
) -> Iterator[SubgroupWitness]:
    """Every witness of index at most ``p^m``, in lexicographic order of
    ``(a, b, c, t12, t13, t23, v)``."""
    fam = get_family(fam)
    params = fam.check_params(params or {})
    group = fam.build(params)
    k = group.k
    work = 0
    for a, b, c in sorted(
        (a, b, c) for n in range(m + 1) for a, b, c in _cells(p, k, n)
    ):
        pa, pb, pc = p**a, p**b, p**c
        box = list(iproduct(range(pa), range(pb), range(pc)))
        for t12, t13, t23 in iproduct(range(pb), range(pc), range(pc)):
            t = GoodBasis(p, k, a, b, c, t12, t13, t23)
            rows = t.rows()
            for vs in iproduct(box, repeat=group.t):
                work += 1
                if work > work_limit:
                    raise BudgetExceeded(
                        f"witness stream over the work limit {work_limit}", a + b + c - 1, []
                    )
                if conditions_hold(group, rows, vs):
                    yield SubgroupWitness(t, tuple(vs))


def witness_counts(fam, params, p: int, m: int, **kw) -> list[int]:
    counts = [0] * (m + 1)
    for w in witness_stream(fam, params, p, m, **kw):
        counts[w.t.index_exponent] += 1
    return counts


# ------------------------------------------------------------------ audit


@dataclass
class AuditReport:
    family: str
    p: int
    trials: int
    checked: int
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def _random_B_element(rows, k, rng, spread=3):
    out = (0, 0, 0)
    for _ in range(rng.randint(1, 4)):
        row = rows[rng.randrange(3)]
        out = nk_mul_t(out, nk_pow_t(row, rng.randint(-spread, spread), k), k)
    return out


def _outside_B(t: GoodBasis):
    if t.a:
        return (1, 0, 0)
    if t.b:
        return (0, 1, 0)
    if t.c:
        return (0, 0, 1)
    return None


def invariance_audit(
    fam: FamilySpec | str,
    params: Mapping[str, int] | None,
    p: int,
    trials: int = 1000,
    *,
    seed: int = 0,
    max_exponent: int = 3,
    broken: bool = False,
) -> AuditReport:
    """Re-represent random pairs ``(t, v)`` and check the outcome does not
    change.

    Half of the trials start from genuine witnesses, half from random pairs.
    Each trial multiplies every ``v_j`` on the right by a random element of
    ``B_t`` and replaces the rows of ``t`` by ``row1 row2^l row3^l'``,
    ``row2 row3^l''`` (the same subgroup, no longer reduced).  With
    ``broken=True`` the shift uses an element outside ``B_t`` instead; this
    is a negative control and should report violations.
    """
    fam = get_family(fam)
    params = fam.check_params(params or {})
    group = fam.build(params)
    k = group.k
    rng = random.Random(seed)
    wit_m = 2 if p ** (2 * (1 + group.t)) <= 10**4 else 1
    witnesses = list(witness_stream(fam, params, p, wit_m))
    cells = [c for n in range(max_exponent + 1) for c in _cells(p, k, n)]
    violations: list[str] = []
    checked = 0
    for trial in range(trials):
        if witnesses and trial % 2 == 0:
            w = rng.choice(witnesses)
            t, vs = w.t, list(w.v)
        else:
            a, b, c = rng.choice(cells)
            t = GoodBasis(
                p, k, a, b, c, rng.randrange(p**b), rng.randrange(p**c), rng.randrange(p**c)
            )
            vs = [
                (rng.randrange(p**a), rng.randrange(p**b), rng.randrange(p**c))
                for _ in range(group.t)
            ]
        rows = t.rows()
        before = conditions_hold(group, rows, vs)
        if broken:
            e = _outside_B(t)
            if e is None or group.t == 0:
                continue
            new_vs = [nk_mul_t(v, e, k) for v in vs]
            new_rows = rows
        else:
            new_vs = [nk_mul_t(v, _random_B_element(rows, k, rng), k) for v in vs]
            r1, r2, r3 = rows
            l1, l2, l3 = (rng.randint(-3, 3) for _ in range(3))
            new_rows = (
                nk_mul_t(nk_mul_t(r1, nk_pow_t(r2, l1, k), k), nk_pow_t(r3, l2, k), k),
                nk_mul_t(r2, nk_pow_t(r3, l3, k), k),
                r3,
            )
        after = conditions_hold(group, new_rows, new_vs)
        checked += 1
        if before != after:
            violations.append(f"t={t} v={vs}: {before} -> {after}")
    return AuditReport(fam.name, p, trials, checked, violations)
