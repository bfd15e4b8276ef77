"""Index-n subgroup counts from permutation representations.

A subgroup of index ``n`` is the stabiliser of a point in a transitive
action on ``n`` points, so ``a_n = t_n / (n-1)!`` with ``t_n`` the number of
transitive homomorphisms ``G -> S_n``.  Homomorphisms are found by brute
force from the presentation in the catalog and ``t_n`` by Hall's
recursion.  Nothing here touches the oracle or the closed forms.
"""

import math
from itertools import permutations

import pytest

from abzeta.catalog import full_zeta_prime_holonomy, get_family
from abzeta.groupalg import parse_word


def compose(a, b):
    """``a`` after ``b``."""
    return tuple(a[i] for i in b)


def inverse(a):
    out = [0] * len(a)
    for i, j in enumerate(a):
        out[j] = i
    return tuple(out)


def evaluate(word, images, n):
    out = tuple(range(n))
    for name, e in word:
        base = images[name] if e > 0 else inverse(images[name])
        for _ in range(abs(e)):
            out = compose(out, base)
    return out


def hom_count(fam, n):
    """Homomorphisms to ``S_n`` of a one-generator family with ``k = 0``;
    ``x1`` is the power of the generator."""
    (gen,) = fam.generators
    g = gen["name"]
    rels = [(parse_word(lhs), parse_word(rhs)) for lhs, rhs in fam.relations]
    perms = list(permutations(range(n)))
    count = 0
    for x2 in perms:
        for x3 in perms:
            if compose(x2, x3) != compose(x3, x2):
                continue
            for gp in perms:
                images = {g: gp, "x2": x2, "x3": x3}
                images["x1"] = evaluate(parse_word(f"{g}^{gen['order']}"), images, n)
                if all(evaluate(l, images, n) == evaluate(r, images, n) for l, r in rels):
                    count += 1
    return count


def low_index_counts(fam, N):
    h = [1] + [hom_count(fam, n) for n in range(1, N + 1)]
    t = [0] * (N + 1)
    for n in range(1, N + 1):
        t[n] = h[n] - sum(math.comb(n - 1, k - 1) * t[k] * h[n - k] for k in range(1, n))
    return [t[n] // math.factorial(n - 1) for n in range(1, N + 1)]


@pytest.mark.parametrize("name", ["G2", "G3", "B1", "B2"])
def test_full_zeta_low_index(name):
    fam = get_family(name)
    assert low_index_counts(fam, 5) == full_zeta_prime_holonomy(fam, {}, 5).a
