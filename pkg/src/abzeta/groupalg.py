"""Arithmetic in N_k and in the almost Bieberbach groups built on it.

``N_k`` has the presentation ``<x1, x2, x3 : [x2, x1] = x3^k, x3 central>``.
An element is stored in normal form ``x1^a1 x2^a2 x3^a3`` and multiplied by

    (a1, a2, a3) * (b1, b2, b3) = (a1 + b1, a2 + b2, a3 + b3 + k a2 b1),

which is what collecting ``x2^a2 x1^b1 = x1^b1 x2^a2 x3^(k a2 b1)`` gives.
The convention is checked against the defining commutator in the tests
rather than assumed.

A group ``G`` with ``G/N = Q`` abelian (cyclic or Klein four) is written
with generators ``g_1, ..., g_t`` of ``Q``.  Each ``g_i`` comes with

* ``theta_i(n) = g_i n g_i^{-1}``, an automorphism of ``N_k`` read off the
  presentation,
* ``g_i^{r_i} = z_i`` in ``N_k``,
* for ``i < j`` a correction ``c_ij`` with ``g_j g_i = g_i g_j c_ij``.

Elements are pairs ``(e, n)`` meaning ``g_1^e1 ... g_t^et * n`` with
``0 <= e_i < r_i``.  The collector below moves letters to the right, which
only ever needs ``psi_i(n) = g_i^{-1} n g_i``.

All exponent arithmetic is ring-generic: entries may be Python ints or sympy
expressions, so the same code derives the symbolic membership conditions
used by the oracle.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product as iproduct
import re
from typing import Any

from .formula import eval_int

Triple = tuple  # (a1, a2, a3); entries are ints or sympy expressions
ZERO: Triple = (0, 0, 0)


def _binom2(n):
    """n (n - 1) / 2, exactly, for ints and for symbolic exponents."""
    if isinstance(n, int):
        return n * (n - 1) // 2
    return n * (n - 1) / 2


def nk_mul_t(a: Triple, b: Triple, k) -> Triple:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + k * a[1] * b[0])


def nk_inv_t(a: Triple, k) -> Triple:
    return (-a[0], -a[1], -a[2] + k * a[0] * a[1])


def nk_pow_t(a: Triple, n, k) -> Triple:
    """``a^n`` for an integer (or symbolic integer) exponent ``n``."""
    return (n * a[0], n * a[1], n * a[2] + k * a[0] * a[1] * _binom2(n))


def nk_prod_t(items: Iterable[Triple], k) -> Triple:
    out = ZERO
    for x in items:
        out = nk_mul_t(out, x, k)
    return out


def nk_commutator_t(a: Triple, b: Triple, k) -> Triple:
    """``[a, b] = a^-1 b^-1 a b``."""
    return nk_prod_t((nk_inv_t(a, k), nk_inv_t(b, k), a, b), k)


@dataclass(frozen=True)
class NkElement:
    """``x1^a1 x2^a2 x3^a3`` in ``N_k``."""

    k: int
    e: Triple = ZERO

    def _check(self, other: NkElement):
        if self.k != other.k:
            raise ValueError(f"mismatched structure constants {self.k} and {other.k}")

    def __mul__(self, other: NkElement) -> NkElement:
        self._check(other)
        return NkElement(self.k, nk_mul_t(self.e, other.e, self.k))

    def inverse(self) -> NkElement:
        return NkElement(self.k, nk_inv_t(self.e, self.k))

    def __pow__(self, n: int) -> NkElement:
        return NkElement(self.k, nk_pow_t(self.e, n, self.k))

    def commutator(self, other: NkElement) -> NkElement:
        self._check(other)
        return NkElement(self.k, nk_commutator_t(self.e, other.e, self.k))

    def is_identity(self) -> bool:
        return all(x == 0 for x in self.e)


def nk_mul(a: NkElement, b: NkElement) -> NkElement:
    return a * b


# ---------------------------------------------------------------- words

_TOKEN = re.compile(r"([A-Za-z][A-Za-z0-9_]*)(?:\^(-?\d+|\(.*\)))?$")


def parse_word(text: str, params: Mapping[str, int] | None = None) -> list[tuple[str, int]]:
    """Parse ``"x1^-1 x3^(2*q) g"`` into ``[(letter, exponent), ...]``.

    Letters are separated by whitespace; ``1`` or an empty string is the
    empty word.
    """
    out = []
    for tok in text.split():
        if tok == "1":
            continue
        m = _TOKEN.match(tok)
        if not m:
            raise ValueError(f"bad word token {tok!r} in {text!r}")
        name, exp = m.group(1), m.group(2)
        if exp is None:
            n = 1
        elif exp.startswith("("):
            n = eval_int(exp[1:-1], params or {})
        else:
            n = int(exp)
        out.append((name, n))
    return out


_X_LETTERS = {"x1": 0, "x2": 1, "x3": 2}


def nk_word(text: str, k: int, params: Mapping[str, int] | None = None) -> Triple:
    """Evaluate a word in ``x1, x2, x3`` to a normal-form triple."""
    out = ZERO
    for name, n in parse_word(text, params):
        if name not in _X_LETTERS:
            raise ValueError(f"{name!r} is not a letter of N_k")
        unit = [0, 0, 0]
        unit[_X_LETTERS[name]] = 1
        out = nk_mul_t(out, nk_pow_t(tuple(unit), n, k), k)
    return out


# ----------------------------------------------------------- automorphisms


@dataclass(frozen=True)
class AutomorphismSpec:
    """Images of ``x1, x2, x3`` under an endomorphism of ``N_k``."""

    images: tuple[Triple, Triple, Triple]

    def apply(self, a: Triple, k) -> Triple:
        out = ZERO
        for img, n in zip(self.images, a):
            out = nk_mul_t(out, nk_pow_t(img, n, k), k)
        return out

    def compose(self, other: AutomorphismSpec, k) -> AutomorphismSpec:
        """``self o other``."""
        return AutomorphismSpec(tuple(self.apply(img, k) for img in other.images))

    def power(self, n: int, k) -> AutomorphismSpec:
        out = IDENTITY_AUT
        for _ in range(n):
            out = self.compose(out, k)
        return out

    def conjugated(self, z: Triple, k) -> AutomorphismSpec:
        """``n -> z^-1 self(n) z``."""
        zi = nk_inv_t(z, k)
        return AutomorphismSpec(
            tuple(nk_prod_t((zi, img, z), k) for img in self.images)
        )

    def respects_commutator(self, k) -> bool:
        x1, x2, x3 = self.images
        lhs = nk_commutator_t(x2, x1, k)
        return lhs == nk_pow_t(x3, k, k) and all(
            nk_commutator_t(x3, y, k) == ZERO for y in (x1, x2)
        )

    def center_sign(self) -> int | None:
        """+1 or -1 when ``x3 -> x3^{+-1}``, else ``None``."""
        img = self.images[2]
        if img[:2] == (0, 0) and img[2] in (1, -1):
            return img[2]
        return None

    def is_invertible(self, k) -> bool:
        """Bijective on ``N_k``.  For ``k = 0`` this is unimodularity of the
        exponent matrix; otherwise the maps induced on ``N/<x3>`` and on
        ``<x3>`` must both be invertible."""
        (a, b, c), (d, e, f), (g, h, i) = self.images
        if k == 0:
            det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
            return abs(det) == 1
        return abs(a * e - b * d) == 1 and g == 0 and h == 0 and abs(i) == 1


IDENTITY_AUT = AutomorphismSpec(((1, 0, 0), (0, 1, 0), (0, 0, 1)))


# ------------------------------------------------------------ the groups


@dataclass(frozen=True)
class GroupElement:
    """``g_1^e1 ... g_t^et * x^n`` with ``0 <= e_i < r_i``."""

    hol: tuple[int, ...]
    n: Triple = ZERO

    def is_identity(self) -> bool:
        return not any(self.hol) and all(x == 0 for x in self.n)


@dataclass(frozen=True)
class HolonomyGenerator:
    name: str
    order: int
    theta: AutomorphismSpec
    power: Triple


class ABGroup:
    """A concrete group ``G`` (all parameters fixed)."""

    def __init__(
        self,
        name: str,
        k: int,
        gens: Sequence[HolonomyGenerator],
        mixing: Mapping[tuple[int, int], Triple] | None = None,
        relations: Sequence[tuple[str, str]] = (),
        params: Mapping[str, int] | None = None,
    ):
        self.name = name
        self.k = k
        self.gens = tuple(gens)
        self.params = dict(params or {})
        self.relations = tuple(relations)
        self.psi = tuple(
            g.theta.power(g.order - 1, k).conjugated(g.power, k) for g in self.gens
        )
        self.mixing = dict(mixing or {})
        for i in range(len(self.gens)):
            for j in range(i + 1, len(self.gens)):
                self.mixing.setdefault((i, j), ZERO)

    @property
    def t(self) -> int:
        return len(self.gens)

    @property
    def r(self) -> int:
        out = 1
        for g in self.gens:
            out *= g.order
        return out

    @property
    def gen_names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.gens)

    def identity(self) -> GroupElement:
        return GroupElement((0,) * self.t, ZERO)

    def gen(self, i: int) -> GroupElement:
        hol = [0] * self.t
        hol[i] = 1
        return GroupElement(tuple(hol), ZERO)

    def x(self, e: Triple) -> GroupElement:
        return GroupElement((0,) * self.t, tuple(e))

    # -- collection
    def _push_gen(self, hol: list, n: Triple, i: int) -> tuple[list, Triple]:
        """Right-multiply the state ``g^hol n`` by ``g_i``."""
        k = self.k
        tail = []
        for j in range(i + 1, self.t):
            for _ in range(hol[j]):
                tail.append(("g", j))
                tail.append(("n", self.mixing[(i, j)]))
            hol[j] = 0
        pending_n = self.psi[i].apply(n, k)
        if hol[i] + 1 == self.gens[i].order:
            hol[i] = 0
            n = self.gens[i].power
        else:
            hol[i] += 1
            n = ZERO
        for kind, val in tail:
            if kind == "g":
                hol, n = self._push_gen(hol, n, val)
            else:
                n = nk_mul_t(n, val, k)
        return hol, nk_mul_t(n, pending_n, k)

    def _collect(self, start: GroupElement, letters: Iterable[tuple[str, Any]]) -> GroupElement:
        hol, n = list(start.hol), start.n
        for kind, val in letters:
            if kind == "g":
                hol, n = self._push_gen(hol, n, val)
            else:
                n = nk_mul_t(n, val, self.k)
        return GroupElement(tuple(hol), n)

    @staticmethod
    def _letters(a: GroupElement):
        for i, e in enumerate(a.hol):
            for _ in range(e):
                yield ("g", i)
        yield ("n", a.n)

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        return self._collect(a, self._letters(b))

    def inv(self, a: GroupElement) -> GroupElement:
        k = self.k
        letters = [("n", nk_inv_t(a.n, k))]
        for i in reversed(range(self.t)):
            g = self.gens[i]
            for _ in range(a.hol[i]):
                # g^-1 = g^(r-1) z^-1
                letters.extend([("g", i)] * (g.order - 1))
                letters.append(("n", nk_inv_t(g.power, k)))
        return self._collect(self.identity(), letters)

    def pow(self, a: GroupElement, n: int) -> GroupElement:
        if n < 0:
            a, n = self.inv(a), -n
        out = self.identity()
        for _ in range(n):
            out = self.mul(out, a)
        return out

    def prod(self, items: Iterable[GroupElement]) -> GroupElement:
        out = self.identity()
        for x in items:
            out = self.mul(out, x)
        return out

    def eval_word(self, text: str) -> GroupElement:
        """Evaluate a word in the generator names and ``x1, x2, x3``."""
        out = self.identity()
        names = {g.name: i for i, g in enumerate(self.gens)}
        for name, e in parse_word(text, self.params):
            if name in _X_LETTERS:
                unit = [0, 0, 0]
                unit[_X_LETTERS[name]] = 1
                elem = self.x(nk_pow_t(tuple(unit), e, self.k))
            elif name in names:
                elem = self.pow(self.gen(names[name]), e)
            else:
                raise ValueError(f"unknown letter {name!r} for {self.name}")
            out = self.mul(out, elem)
        return out

    def relation_failures(self) -> list[str]:
        """Printed relations that do not hold in the constructed arithmetic."""
        bad = []
        for lhs, rhs in self.relations:
            if self.eval_word(lhs) != self.eval_word(rhs):
                bad.append(f"{lhs} = {rhs}")
        return bad

    # -- holonomy quotient
    def holonomy_elements(self) -> list[tuple[int, ...]]:
        return list(iproduct(*(range(g.order) for g in self.gens)))

    def label(self, a: GroupElement) -> int:
        """Index of the holonomy part in :meth:`holonomy_elements` order."""
        idx = 0
        for e, g in zip(a.hol, self.gens):
            idx = idx * g.order + e
        return idx

    @cached_property
    def holonomy_table(self) -> list[list[int]]:
        """Multiplication table of ``Q = G/N`` on element labels."""
        elems = [GroupElement(h, ZERO) for h in self.holonomy_elements()]
        return [[self.label(self.mul(a, b)) for b in elems] for a in elems]

    # -- the words entering the subgroup conditions
    def adjusted_gen(self, j: int, v: Triple) -> GroupElement:
        return self.mul(self.gen(j), self.x(v))

    @cached_property
    def relators(self) -> tuple[tuple[int, ...], ...]:
        """Relators of ``Q`` as generator-index words: ``g^r`` for a cyclic
        group and ``a^2, b^2, (ab)^2`` for the Klein four group."""
        if self.t == 0:
            return ()
        if self.t == 1:
            return ((0,) * self.gens[0].order,)
        if self.t == 2 and all(g.order == 2 for g in self.gens):
            return ((0, 0), (1, 1), (0, 1, 0, 1))
        raise NotImplementedError("only cyclic and Klein four holonomy are supported")

    def conjugation_word(self, j: int, target: Triple, v: Triple) -> Triple:
        """N-part of ``(g_j x^v)^-1 x^target (g_j x^v)``."""
        h = self.adjusted_gen(j, v)
        out = self.prod((self.inv(h), self.x(target), h))
        assert not any(out.hol)
        return out.n

    def relation_word(self, idx: int, vs: Sequence[Triple]) -> Triple:
        """N-part of relator ``idx`` evaluated at the adjusted generators."""
        adj = [self.adjusted_gen(j, v) for j, v in enumerate(vs)]
        out = self.prod(adj[j] for j in self.relators[idx])
        assert not any(out.hol)
        return out.n


# ---------------------------------------------------------- family records


def _mixing_term(group: ABGroup, spec: Mapping[str, str]) -> Triple:
    """Solve the printed two-generator relation for ``c`` in
    ``g2 g1 = g1 g2 c``."""
    k, params = group.k, group.params
    psi1, psi2 = group.psi
    z1, z2 = (g.power for g in group.gens)
    form = spec["form"]
    if form == "square":  # (g1 g2)^2 = w, both generators of order 2
        w = nk_word(spec["w"], k, params)
        return nk_mul_t(psi2.apply(nk_mul_t(nk_inv_t(z1, k), w, k), k), nk_inv_t(z2, k), k)
    if form == "commutator":  # g2 g1 g2^-1 g1^-1 = w
        w = nk_word(spec["w"], k, params)
        return psi2.apply(psi1.apply(w, k), k)
    if form == "braid":  # g1 g2 = n0 g2 g1 m0
        n0 = nk_word(spec["n0"], k, params)
        m0 = nk_word(spec["m0"], k, params)
        return nk_mul_t(psi2.apply(psi1.apply(nk_inv_t(n0, k), k), k), nk_inv_t(m0, k), k)
    raise ValueError(f"unknown mixing form {form!r}")


@dataclass
class FamilySpec:
    """One catalog record: presentation data plus the closed-form metadata
    the catalog module interprets."""

    name: str
    title: str
    holonomy: str
    k: str
    params: dict[str, list[int]]
    generators: list[dict]
    relations: list[tuple[str, str]] = field(default_factory=list)
    mixing: dict[str, str] | None = None
    valuation_of: str | None = None
    local: list[dict] = field(default_factory=list)
    global_formula: list[dict] = field(default_factory=list)
    funceq: dict | None = None
    abscissa: str | None = None
    errata: list[dict] = field(default_factory=list)
    switches: dict[str, int] = field(default_factory=dict)
    admissible: str = "True"
    notes: str = ""

    @property
    def t(self) -> int:
        return len(self.generators)

    @property
    def r(self) -> int:
        out = 1
        for g in self.generators:
            out *= int(g["order"])
        return out

    def param_grid(self, limit: Mapping[str, Sequence[int]] | None = None) -> list[dict[str, int]]:
        """The default parameter grid, optionally restricted."""
        names = sorted(self.params)
        ranges = []
        for n in names:
            vals = list(self.params[n])
            if limit and n in limit:
                vals = [x for x in vals if x in set(limit[n])]
            ranges.append(vals)
        return [dict(zip(names, combo)) for combo in iproduct(*ranges)]

    def check_params(self, params: Mapping[str, int]) -> dict[str, int]:
        params = dict(params)
        if set(params) != set(self.params):
            raise ValueError(
                f"{self.name} takes parameters {sorted(self.params)}, got {sorted(params)}"
            )
        if not all(isinstance(v, int) for v in params.values()) or not eval_int(
            self.admissible, params
        ):
            raise ValueError(f"{self.name}: {params} violates {self.admissible}")
        return params

    def k_value(self, params: Mapping[str, int]) -> int:
        return eval_int(self.k, params)

    def build(self, params: Mapping[str, int] | None = None, *, strict: bool = True) -> ABGroup:
        params = self.check_params(params or {}) if strict else dict(params or {})
        k = self.k_value(params)
        gens = []
        for g in self.generators:
            images = tuple(nk_word(w, k, params) for w in g["images"])
            gens.append(
                HolonomyGenerator(
                    name=g["name"],
                    order=int(g["order"]),
                    theta=AutomorphismSpec(images),
                    power=nk_word(g["power"], k, params),
                )
            )
        group = ABGroup(
            self.name, k, gens, relations=[tuple(r) for r in self.relations], params=params
        )
        if self.mixing is not None:
            group.mixing[(0, 1)] = _mixing_term(group, self.mixing)
        return group

    def validation_problems(self, params: Mapping[str, int]) -> list[str]:
        """Transcription checks: relations, automorphism laws, orders."""
        group = self.build(params)
        k = group.k
        out = []
        for g in group.gens:
            th = g.theta
            if not th.respects_commutator(k):
                out.append(f"{g.name}: image does not respect [x2,x1]=x3^{k}")
            if not th.is_invertible(k):
                out.append(f"{g.name}: image is not invertible")
            if k != 0 and th.center_sign() is None:
                out.append(f"{g.name}: x3 is not sent to x3^(+-1)")
            if th.apply(g.power, k) != g.power:
                out.append(f"{g.name}: theta does not fix {g.name}^{g.order}")
            if th.power(g.order, k).conjugated(g.power, k) != IDENTITY_AUT:
                out.append(f"{g.name}: theta^{g.order} is not conjugation by {g.name}^{g.order}")
        out.extend(f"relation fails: {r}" for r in group.relation_failures())
        if len(group.holonomy_elements()) != self.r:
            out.append("holonomy order mismatch")
        return out
