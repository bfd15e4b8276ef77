"""Membership in the subgroup ``B_t`` spanned by a triangular good basis.

The rows of ``t`` are the elements ``x^{t_1}, x^{t_2}, x^{t_3}`` of ``N_k``
with ``t_1 = (t11, t12, t13)``, ``t_2 = (0, t22, t23)``, ``t_3 = (0, 0, t33)``.
An element ``e`` lies in ``B_t`` exactly when it can be sifted as

    e = (x^{t_1})^l1 (x^{t_2})^l2 (x^{t_3})^l3

which, in the normal form of :mod:`abzeta.groupalg`, means

1. ``t11 | e1`` and ``l1 = e1 / t11``;
2. ``t22 | e2 - l1 t12`` and ``l2 = (e2 - l1 t12) / t22``;
3. ``t33 | e3 - l1 t13 - l2 t23 - k t11 t12 l1 (l1 - 1) / 2``.

The last term comes from ``(x^{t_1})^l1`` picking up ``k t11 t12 C(l1, 2)``
when collected.  The checks are done in order so that each quotient is an
exact integer.  :func:`closure_members` is a slow independent check that
generates the subgroup inside a finite quotient of ``N_k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .groupalg import NkElement, Triple, nk_inv_t, nk_mul_t


@dataclass(frozen=True)
class GoodBasis:
    p: int
    k: int
    a: int
    b: int
    c: int
    t12: int = 0
    t13: int = 0
    t23: int = 0

    @property
    def diag(self) -> tuple[int, int, int]:
        return (self.p ** self.a, self.p ** self.b, self.p ** self.c)

    @property
    def index_exponent(self) -> int:
        return self.a + self.b + self.c

    def rows(self) -> tuple[Triple, Triple, Triple]:
        t11, t22, t33 = self.diag
        return ((t11, self.t12, self.t13), (0, t22, self.t23), (0, 0, t33))

    def is_reduced(self) -> bool:
        _, t22, t33 = self.diag
        return 0 <= self.t12 < t22 and 0 <= self.t13 < t33 and 0 <= self.t23 < t33


def is_good_basis(t: GoodBasis) -> bool:
    """``t33 | k t11 t22``, the condition for the rows to span a subgroup."""
    t11, t22, t33 = t.diag
    return (t.k * t11 * t22) % t33 == 0


def sift(t: GoodBasis, e: Triple) -> tuple[int, int, int] | None:
    """Exponents ``(l1, l2, l3)`` expressing ``e`` in the rows, or ``None``."""
    return sift_rows(t.k, t.rows(), e)


def sift_rows(k: int, rows, e: Triple) -> tuple[int, int, int] | None:
    """Sifting against an arbitrary (not necessarily reduced) triangular
    basis with positive diagonal."""
    (t11, t12, t13), (_, t22, t23), (_, _, t33) = rows
    a1, a2, a3 = e
    if a1 % t11:
        return None
    l1 = a1 // t11
    r2 = a2 - l1 * t12
    if r2 % t22:
        return None
    l2 = r2 // t22
    r3 = a3 - l1 * t13 - l2 * t23 - k * t11 * t12 * (l1 * (l1 - 1) // 2)
    if r3 % t33:
        return None
    return (l1, l2, r3 // t33)


def in_Bt(t: GoodBasis, e: NkElement | Triple) -> bool:
    """Whether ``x^e`` lies in ``B_t``."""
    if isinstance(e, NkElement):
        if e.k != t.k:
            raise ValueError("element and basis have different k")
        e = e.e
    return sift(t, e) is not None


# ------------------------------------------------------------- slow check


def closure_modulus(t: GoodBasis) -> int:
    """A modulus ``M = p^L`` such that the kernel ``K`` of reduction of all
    three coordinates mod ``M`` is normal in ``N_k`` and contained in
    ``B_t``."""
    return t.p ** (t.a + t.b + t.c + 2)


@lru_cache(maxsize=256)
def closure_members(t: GoodBasis) -> frozenset[Triple]:
    """All residues mod ``closure_modulus(t)`` of elements of ``B_t``.

    Breadth-first closure of the three rows under multiplication in the
    finite quotient ``N_k / K``.  Independent of :func:`sift`.
    """
    M = closure_modulus(t)
    k = t.k

    def red(x):
        return (x[0] % M, x[1] % M, x[2] % M)

    gens = [red(r) for r in t.rows()] + [red(nk_inv_t(r, k)) for r in t.rows()]
    seen = {(0, 0, 0)}
    frontier = [(0, 0, 0)]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = red(nk_mul_t(x, g, k))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(seen)


def in_Bt_by_closure(t: GoodBasis, e: Triple) -> bool:
    M = closure_modulus(t)
    return (e[0] % M, e[1] % M, e[2] % M) in closure_members(t)
