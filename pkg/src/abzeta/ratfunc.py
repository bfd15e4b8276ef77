"""Exact rational functions in two formal variables.

Local zeta factors are rational functions of ``p`` and ``p^{-s}``.  We keep
``p`` formal as ``u`` and write ``X`` for ``p^{-s}``, so a monomial
``p^{a - b s}`` becomes ``u^a X^b``.  Every factor used by the catalog then
lives in polynomials with nonnegative exponents, and a closed form can be
specialised to a concrete prime only when a coefficient table is needed.

Coefficients are :class:`fractions.Fraction` throughout.  Equality of
rational functions is decided by cross-multiplication; the cancellation
performed by :meth:`RationalUX.canonical` is cosmetic.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from fractions import Fraction
from functools import reduce
import operator

from .tables import CoeffTable

Monomial = tuple[int, int]


class SeriesError(ArithmeticError):
    """Raised when a rational function cannot be expanded in ``X``."""


def _frac(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


class PolyUX:
    """Polynomial in ``u`` and ``X`` with rational coefficients.

    Stored as a sparse map ``(deg_u, deg_X) -> coefficient`` without zero
    entries.  Instances are immutable and hashable.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        clean: dict[Monomial, Fraction] = {}
        for (i, j), c in (terms or {}).items():
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent in monomial u^{i} X^{j}")
            c = _frac(c)
            if c:
                clean[(int(i), int(j))] = clean.get((int(i), int(j)), 0) + c
        self._terms = {m: c for m, c in clean.items() if c}
        self._hash = None

    # construction helpers
    @classmethod
    def const(cls, c) -> PolyUX:
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, deg_u: int, deg_x: int, c=1) -> PolyUX:
        return cls({(deg_u, deg_x): c})

    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self):
        """Terms in sorted order, ``deg_u`` major and ``deg_X`` minor."""
        return sorted(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def degree_x(self) -> int:
        return max((j for _, j in self._terms), default=-1)

    def degree_u(self) -> int:
        return max((i for i, _ in self._terms), default=-1)

    def min_degrees(self) -> Monomial:
        if not self._terms:
            return (0, 0)
        return (min(i for i, _ in self._terms), min(j for _, j in self._terms))

    def coefficient(self, deg_u: int, deg_x: int) -> Fraction:
        return self._terms.get((deg_u, deg_x), Fraction(0))

    # ring operations
    def __add__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return PolyUX(out)

    __radd__ = __add__

    def __neg__(self):
        return PolyUX({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return other
        out: dict[Monomial, Fraction] = {}
        for (i1, j1), c1 in self._terms.items():
            for (i2, j2), c2 in other._terms.items():
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + c1 * c2
        return PolyUX(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("PolyUX only supports nonnegative powers")
        result = PolyUX.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def shift(self, deg_u: int, deg_x: int) -> PolyUX:
        """Multiply by ``u^deg_u X^deg_x`` (exponents may be negative if the
        result stays a polynomial)."""
        return PolyUX({(i + deg_u, j + deg_x): c for (i, j), c in self._terms.items()})

    def swap_inverse(self, deg_u: int, deg_x: int) -> PolyUX:
        """Return ``u^deg_u X^deg_x * self(1/u, 1/X)``."""
        return PolyUX({(deg_u - i, deg_x - j): c for (i, j), c in self._terms.items()})

    def at_u(self, u) -> dict[int, Fraction]:
        """Specialise ``u`` and return the X-coefficients as ``{deg: coeff}``."""
        out: dict[int, Fraction] = {}
        for (i, j), c in self._terms.items():
            out[j] = out.get(j, 0) + c * _frac(u) ** i
        return {j: c for j, c in out.items() if c}

    def x_part(self, deg_x: int) -> dict[int, Fraction]:
        """Coefficient of ``X^deg_x`` as a polynomial in ``u``."""
        return {i: c for (i, j), c in self._terms.items() if j == deg_x}

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for (i, j), c in self.items():
            mono = "*".join(
                s for s in (
                    "" if i == 0 else ("u" if i == 1 else f"u^{i}"),
                    "" if j == 0 else ("X" if j == 1 else f"X^{j}"),
                ) if s
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_list(self) -> list[list]:
        return [[i, j, str(c)] for (i, j), c in self.items()]

    @classmethod
    def from_list(cls, rows: Iterable) -> PolyUX:
        return cls({(int(i), int(j)): Fraction(c) for i, j, c in rows})


def _as_poly(x):
    if isinstance(x, PolyUX):
        return x
    if isinstance(x, (int, Fraction)):
        return PolyUX.const(x)
    return NotImplemented


def poly_arith(lhs: PolyUX, rhs: PolyUX, op: str) -> PolyUX:
    """Dispatch ``add``, ``sub`` or ``mul`` on two polynomials."""
    try:
        fn = {"add": operator.add, "sub": operator.sub, "mul": operator.mul}[op]
    except KeyError:
        raise ValueError(f"unknown polynomial operation {op!r}") from None
    return fn(lhs, rhs)


def exact_divide(f: PolyUX, d: PolyUX) -> PolyUX | None:
    """Return ``f / d`` if ``d`` divides ``f`` exactly, else ``None``.

    Division is X-adic: the X^0 part of ``d`` must be a nonzero constant,
    which is the case for every member of the standard factor basis.
    """
    c0 = d.x_part(0)
    if set(c0) != {0}:
        return None
    inv = 1 / c0[0]
    rem = dict(f.terms)
    dx = d.degree_x()
    quotient: dict[Monomial, Fraction] = {}
    top = f.degree_x()
    for j in range(0, top - dx + 1):
        row = {i: c for (i, jj), c in rem.items() if jj == j}
        for i, c in row.items():
            q = c * inv
            quotient[(i, j)] = q
            for (di, dj), dc in d.terms.items():
                key = (i + di, j + dj)
                if key[0] < 0:
                    return None
                rem[key] = rem.get(key, 0) - q * dc
        rem = {m: c for m, c in rem.items() if c}
    if rem:
        return None
    return PolyUX(quotient)


def _factor_basis() -> list[PolyUX]:
    basis = []
    for a in range(1, 5):
        for j in range(0, 7):
            basis.append(PolyUX({(0, 0): 1, (j, a): -1}))
            basis.append(PolyUX({(0, 0): 1, (j, a): 1}))
    return basis


_FACTOR_BASIS = _factor_basis()


class RationalUX:
    """Quotient of two :class:`PolyUX` values."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        num, den = _as_poly(num), _as_poly(den)
        if num is NotImplemented or den is NotImplemented:
            raise TypeError("RationalUX needs polynomial or rational operands")
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.num = num
        self.den = den

    @classmethod
    def one(cls) -> RationalUX:
        return cls(1)

    def __add__(self, other):
        other = _as_rat(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RationalUX(self.num + other.num, self.den)
        return RationalUX(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalUX(-self.num, self.den)

    def __sub__(self, other):
        other = _as_rat(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_rat(other)
        if other is NotImplemented:
            return other
        return RationalUX(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_rat(other)
        if other is NotImplemented:
            return other
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalUX(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return _as_rat(other) / self

    def __pow__(self, n: int):
        if n >= 0:
            return RationalUX(self.num ** n, self.den ** n)
        if self.num.is_zero():
            raise ZeroDivisionError("negative power of zero")
        return RationalUX(self.den ** (-n), self.num ** (-n))

    def __eq__(self, other):
        other = _as_rat(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        raise TypeError("RationalUX is compared by cross-multiplication and is unhashable")

    def canonical(self) -> RationalUX:
        """Cancel common factors from the standard factor basis and common
        monomials; also make the denominator's constant term 1 when there is
        one."""
        num, den = self.num, self.den
        if num.is_zero():
            return RationalUX(0)
        mu = tuple(min(a, b) for a, b in zip(num.min_degrees(), den.min_degrees()))
        if mu != (0, 0):
            num, den = num.shift(-mu[0], -mu[1]), den.shift(-mu[0], -mu[1])
        changed = True
        while changed:
            changed = False
            for d in _FACTOR_BASIS:
                if d.degree_x() > min(num.degree_x(), den.degree_x()):
                    continue
                qn = exact_divide(num, d)
                if qn is None:
                    continue
                qd = exact_divide(den, d)
                if qd is None:
                    continue
                num, den, changed = qn, qd, True
        c = den.coefficient(0, 0)
        if c and c != 1:
            num, den = num * (1 / c), den * (1 / c)
        return RationalUX(num, den)

    def series(self, u, m: int, label: str | None = None) -> list[Fraction]:
        """X-expansion of ``self`` with ``u`` specialised, to order ``m``."""
        num, den = self.num.at_u(u), self.den.at_u(u)
        d0 = den.get(0, 0)
        if not d0:
            raise SeriesError(
                f"denominator of {label or self!r} has zero constant term at u={u}"
            )
        out: list[Fraction] = []
        for n in range(m + 1):
            acc = num.get(n, Fraction(0))
            for j, c in den.items():
                if 0 < j <= n:
                    acc -= c * out[n - j]
            out.append(acc / d0)
        return out

    def __repr__(self):
        if self.den == PolyUX.const(1):
            return f"({self.num!r})"
        return f"({self.num!r}) / ({self.den!r})"

    def to_dict(self) -> dict:
        """JSON layout: two term lists ``[deg_u, deg_X, "coefficient"]``."""
        return {"numerator": self.num.to_list(), "denominator": self.den.to_list()}

    @classmethod
    def from_dict(cls, data: Mapping) -> RationalUX:
        return cls(PolyUX.from_list(data["numerator"]), PolyUX.from_list(data["denominator"]))


def _as_rat(x):
    if isinstance(x, RationalUX):
        return x
    p = _as_poly(x)
    if p is NotImplemented:
        return p
    return RationalUX(p)


def zeta_factor(a: int, b: int) -> RationalUX:
    """``zeta_p(a s + b) = 1 / (1 - u^{-b} X^a)`` for ``b <= 0``."""
    if a <= 0:
        raise ValueError("zeta_factor needs a positive X-exponent")
    if b > 0:
        raise ValueError(f"zeta_p({a}s+{b}) would need a negative power of u")
    return RationalUX(1, PolyUX({(0, 0): 1, (-b, a): -1}))


def l_factor(a: int, b: int, chi_value: int) -> RationalUX:
    """``L(a s + b, chi, p) = 1 / (1 - chi(p) u^{-b} X^a)``."""
    if a <= 0:
        raise ValueError("l_factor needs a positive X-exponent")
    if b > 0:
        raise ValueError(f"L({a}s+{b}) would need a negative power of u")
    if chi_value not in (-1, 0, 1):
        raise ValueError("character values are -1, 0 or 1")
    if chi_value == 0:
        return RationalUX.one()
    return RationalUX(1, PolyUX({(0, 0): 1, (-b, a): -chi_value}))


def monomial(deg_u: int, deg_x: int, c=1) -> RationalUX:
    return RationalUX(PolyUX.monomial(deg_u, deg_x, c))


def substitute_inverse(f: RationalUX) -> RationalUX:
    """Apply ``u -> 1/u, X -> 1/X`` and clear the introduced denominators.

    Numerator and denominator are each multiplied by the monomial that makes
    them polynomial again; the quotient of the two monomials is kept.
    """
    nu, nx = f.num.degree_u(), f.num.degree_x()
    du, dx = f.den.degree_u(), f.den.degree_x()
    if f.num.is_zero():
        return RationalUX(0)
    num = f.num.swap_inverse(nu, nx)
    den = f.den.swap_inverse(du, dx)
    # f(1/u,1/X) = u^{-nu} X^{-nx} num / (u^{-du} X^{-dx} den)
    eu, ex = du - nu, dx - nx
    if eu >= 0 and ex >= 0:
        num = num.shift(eu, ex)
    elif eu <= 0 and ex <= 0:
        den = den.shift(-eu, -ex)
    else:
        num = num.shift(max(eu, 0), max(ex, 0))
        den = den.shift(max(-eu, 0), max(-ex, 0))
    return RationalUX(num, den)


def product(factors: Iterable[RationalUX]) -> RationalUX:
    return reduce(operator.mul, factors, RationalUX.one())


def series_expand(f: RationalUX, p: int, m: int, label: str | None = None) -> CoeffTable:
    """Expand ``f`` at ``u = p`` to ``X^m`` and return the coefficient table.

    Coefficients that are integers are stored as ``int``; a non-integral
    coefficient is kept as a ``Fraction`` so callers can notice it.
    """
    coeffs = f.series(p, m, label)
    counts = [int(c) if c.denominator == 1 else c for c in coeffs]
    return CoeffTable(p=p, m=m, counts=counts, provenance="closed-form")
