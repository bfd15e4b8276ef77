import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abzeta.catalog import get_family, local_table
from abzeta.ratfunc import RationalUX, series_expand, zeta_factor
from abzeta.series import (
    AssemblyError,
    add_shifted,
    coeffs_compare,
    depth,
    euler_assemble,
    euler_assemble_factors,
    growth_exponent,
    partial_sum_dump,
    primes_upto,
    table_compare,
    to_csv,
    to_json,
)
from abzeta.tables import CoeffTable, GlobalCoeffs


def lattice(p):
    return zeta_factor(1, 0) * zeta_factor(1, -1) * zeta_factor(1, -2)


def test_primes_and_depth():
    assert primes_upto(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert depth(2, 1000) == 9
    assert depth(7, 6) == 0


def test_lattice_counts():
    g = euler_assemble_factors(lattice, 10)
    assert g.a[:4] == [1, 7, 13, 35]
    assert g[2] == 7 and g[3] == 13
    assert g[6] == 91


def test_trivial_tables():
    tables = {p: CoeffTable(p, depth(p, 30), [1] + [0] * depth(p, 30)) for p in primes_upto(30)}
    assert euler_assemble(tables, 30).a == [1] + [0] * 29


def test_missing_or_short_table():
    with pytest.raises(AssemblyError):
        euler_assemble({2: CoeffTable(2, 3, [1, 1, 1, 1])}, 10)
    short = {p: CoeffTable(p, 1, [1, 1]) for p in primes_upto(10)}
    with pytest.raises(AssemblyError):
        euler_assemble(short, 10)


def test_g6_vanishes_at_even_indices():
    g = euler_assemble_factors(lambda p: local_table_factor("G6", p), 60)
    assert all(g[n] == 0 for n in range(2, 61, 2))
    assert g[3] == 9


def local_table_factor(name, p):
    from abzeta.catalog import local_factor

    return local_factor(get_family(name), {}, p)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 400), st.integers(2, 400))
def test_multiplicative(m, n):
    if math.gcd(m, n) != 1 or m * n > 2000:
        return
    g = euler_assemble_factors(lattice, 2000)
    assert g[m * n] == g[m] * g[n]


def test_add_shifted():
    base = GlobalCoeffs(6, [1] * 6)
    sub = GlobalCoeffs(3, [1, 2, 3])
    assert add_shifted(base, sub, 2).a == [1, 2, 1, 3, 1, 4]


def test_growth_of_zeta():
    g = GlobalCoeffs(10**5, [1] * 10**5)
    est = growth_exponent(g)
    assert abs(est.slope - 1.0) < 0.05
    with pytest.raises(ValueError):
        growth_exponent(GlobalCoeffs(10, [1] * 10))


def test_compare_reports_first_difference():
    x = CoeffTable(2, 3, [1, 2, 3, 4])
    y = CoeffTable(2, 3, [1, 2, 5, 4])
    rep = table_compare(x, y)
    assert not rep and rep.first_diff == 2
    assert table_compare(x, x)
    with pytest.raises(ValueError):
        table_compare(x, CoeffTable(3, 3, [1, 2, 3, 4]))
    rep = coeffs_compare(GlobalCoeffs(3, [1, 2, 3]), GlobalCoeffs(3, [1, 2, 4]))
    assert rep.first_diff == 3


def test_g4_local_against_assembly():
    tab = local_table(get_family("G4"), {}, 5, 4)
    g = euler_assemble_factors(lambda p: local_table_factor("G4", p), 625)
    assert [g[5**i] for i in range(5)] == tab.counts


def test_exports():
    g = GlobalCoeffs(3, [1, 7, 13], source="x")
    assert to_csv(g) == "n,a_n\n1,1\n2,7\n3,13\n"
    assert '"a"' in to_json(g)
    assert partial_sum_dump(g) == "1 1\n2 8\n3 21\n"


def test_tables_validate():
    with pytest.raises(ValueError):
        CoeffTable(2, 2, [1, 2])
    with pytest.raises(ValueError):
        CoeffTable(2, 0, [1], provenance="guess")
    assert series_expand(RationalUX.one(), 2, 0).to_dict()["counts"] == ["1"]
