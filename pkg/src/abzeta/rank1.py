"""The rank-one analogue: the infinite dihedral group ``D = Z ⋊ C2``.

``D`` has Fitting subgroup ``Z = <x>`` and holonomy generated by a
reflection ``g`` with ``g x g^-1 = x^-1`` and ``g^2 = 1``.  Its zeta function
is assembled exactly as for the prime-holonomy families,

    zeta_D(s) = zeta_{D,Z}(s) + 2^{-s} zeta_Z(s),

and compared with two counts that know nothing about that assembly: a brute
force over pairs of involutions in ``S_n`` and Hall's recursion for
transitive permutation representations.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import permutations
import math

from .ratfunc import RationalUX, series_expand, zeta_factor
from .series import add_shifted, euler_assemble_factors
from .tables import CoeffTable, GlobalCoeffs


def _mul(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    """Product in ``Z ⋊ C2`` with elements written ``x^n g^e``."""
    (n1, e1), (n2, e2) = a, b
    return (n1 + (-n2 if e1 else n2), (e1 + e2) % 2)


def _inv(a: tuple[int, int]) -> tuple[int, int]:
    n, e = a
    return (n if e else -n, e)


def relative_counts(p: int, m: int) -> CoeffTable:
    """``a_{p^n}`` of ``zeta_{D,Z,p}``: pairs ``(t, v)`` with ``t = p^n`` and
    ``v mod p^n`` such that conjugation by ``g x^v`` preserves ``<x^t>`` and
    ``(g x^v)^2 in <x^t>``."""
    counts = []
    for n in range(m + 1):
        t = p**n
        c = 0
        for v in range(t):
            h = (v, 1)  # x^v g
            conj = _mul(_mul(_inv(h), (t, 0)), h)
            sq = _mul(h, h)
            if conj[1] == 0 and conj[0] % t == 0 and sq[1] == 0 and sq[0] % t == 0:
                c += 1
        counts.append(c)
    return CoeffTable(p=p, m=m, counts=counts, provenance="oracle-full", family="D_inf")


def relative_factor(p: int) -> RationalUX:
    """Every ``v`` works, so the relative factor is ``zeta_p(s-1)``."""
    return zeta_factor(1, -1)


def assembled_coeffs(N: int) -> GlobalCoeffs:
    """``a_1..a_N`` of ``zeta_{D,Z} + 2^{-s} zeta_Z``."""
    rel = euler_assemble_factors(relative_factor, N, source="D_inf relative")
    fitting = euler_assemble_factors(lambda p: zeta_factor(1, 0), N // 2 or 1, source="Z")
    return add_shifted(rel, fitting, 2, source="D_inf assembled")


def printed_coeffs(N: int) -> GlobalCoeffs:
    """Coefficients of ``zeta(s) + 2^{-s} zeta(s-1)``, the swapped reading."""
    ones = GlobalCoeffs(N, [1] * N, source="zeta(s)")
    ident = GlobalCoeffs(N // 2 or 1, list(range(1, (N // 2 or 1) + 1)), source="zeta(s-1)")
    return add_shifted(ones, ident, 2, source="zeta(s) + 2^-s zeta(s-1)")


# ------------------------------------------------------- standalone counts


def _involutions(n: int) -> list[tuple[int, ...]]:
    return [s for s in permutations(range(n)) if all(s[s[i]] == i for i in range(n))]


def _transitive(n: int, a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    seen, stack = {0}, [0]
    while stack:
        i = stack.pop()
        for j in (a[i], b[i]):
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == n


def brute_force_count(n: int) -> int:
    """Index-``n`` subgroups of ``<a, b | a^2, b^2>`` as transitive actions on
    ``{0..n-1}`` divided by ``(n-1)!``.  Exponential; meant for ``n <= 7``."""
    inv = _involutions(n)
    t = sum(1 for a in inv for b in inv if _transitive(n, a, b))
    q, r = divmod(t, math.factorial(n - 1))
    assert r == 0
    return q


@lru_cache(maxsize=None)
def _involution_count(n: int) -> int:
    if n < 2:
        return 1
    return _involution_count(n - 1) + (n - 1) * _involution_count(n - 2)


def hall_counts(N: int) -> list[int]:
    """``a_1..a_N`` from Hall's recursion: with ``h_n`` the number of
    homomorphisms to ``S_n`` and ``t_n`` the transitive ones,
    ``h_n = sum_k C(n-1, k-1) t_k h_{n-k}`` and ``a_n = t_n / (n-1)!``."""
    h = [1] + [_involution_count(n) ** 2 for n in range(1, N + 1)]
    t = [0] * (N + 1)
    for n in range(1, N + 1):
        t[n] = h[n] - sum(math.comb(n - 1, k - 1) * t[k] * h[n - k] for k in range(1, n))
    return [t[n] // math.factorial(n - 1) for n in range(1, N + 1)]


def local_relative_table(p: int, m: int) -> CoeffTable:
    return series_expand(relative_factor(p), p, m, label="D_inf relative")
