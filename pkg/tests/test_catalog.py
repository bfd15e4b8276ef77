import pytest

from abzeta.catalog import (
    CatalogError,
    abscissa,
    errata_report,
    family_names,
    fe_prime_is_valid,
    full_zeta_from_intermediates,
    full_zeta_prime_holonomy,
    functional_equation_check,
    get_family,
    global_coeffs,
    global_erratum,
    local_factor,
    local_table,
    printed_global_coeffs,
)
from abzeta.formula import FormulaError, chi3, chi4, eval_int, valuation
from abzeta.ratfunc import l_factor, monomial, zeta_factor
from abzeta.series import coeffs_compare


def test_family_lookup():
    assert len(family_names()) == 22
    assert get_family("𝔊₂").name == "G2"
    assert get_family("Q=p6 H").k == "6*q+2"
    with pytest.raises(CatalogError):
        get_family("G7")


def test_local_factor_shapes():
    assert local_factor("G2", {}, 2) == zeta_factor(1, -1) * zeta_factor(1, -2)
    assert local_factor("G3", {}, 7) == zeta_factor(1, 0) * zeta_factor(1, -1) * l_factor(1, -1, 1)
    assert local_factor("G3", {}, 5) == zeta_factor(1, 0) * zeta_factor(1, -1) * l_factor(1, -1, -1)
    n4 = zeta_factor(1, -2) * (
        zeta_factor(1, 0) * zeta_factor(1, -1)
        - monomial(6, 3) * zeta_factor(2, -2) * zeta_factor(2, -3)
    )
    assert local_factor("N", {"k": 4}, 2) == n4
    assert local_table("G6", {}, 2, 7).counts == [1] + [0] * 7


def test_local_factor_rejects_bad_input():
    with pytest.raises(CatalogError):
        local_factor("G2", {}, 4)
    with pytest.raises(ValueError):
        local_factor("p2", {"q": 0}, 3)


def test_helpers():
    assert [chi3(p) for p in (2, 3, 5, 7)] == [-1, 0, -1, 1]
    assert [chi4(p) for p in (2, 3, 5, 7)] == [0, -1, 1, -1]
    assert valuation(48, 2) == 4
    with pytest.raises(ValueError):
        valuation(0, 5)
    assert eval_int("r >= 1 and r % 3 != 0", {"r": 4})
    with pytest.raises(FormulaError):
        eval_int("__import__('os')")


def test_functional_equation_examples():
    assert functional_equation_check("G2", {}, 5)
    assert functional_equation_check("G4", {}, 13)
    assert not functional_equation_check("G2", {}, 5, c=2)
    assert fe_prime_is_valid("N", {"k": 0}, 5)
    assert not fe_prime_is_valid("N", {"k": 10}, 5)
    assert not fe_prime_is_valid("G2", {}, 3)


def test_p3_character():
    # the local factor only sees chi3; chi4 fails where the two differ
    assert functional_equation_check("p3E", {"q": 1}, 5, character="chi3")
    assert not functional_equation_check("p3E", {"q": 1}, 5)
    assert functional_equation_check("p3E", {"q": 1}, 13)


def test_abscissae():
    assert abscissa("N", {"k": 0}) == 3
    assert abscissa("N", {"k": 2}) == 2
    assert abscissa("p2", {"q": 1}) == 3
    assert abscissa("pg", {"q": 1}) == 2


@pytest.mark.parametrize("name", ["G2", "G3", "G4", "G5", "B1", "B3"])
def test_unflagged_global_display(name):
    fam = get_family(name)
    params = {n: v[0] for n, v in fam.params.items()}
    assert global_erratum(fam) is None
    assert coeffs_compare(printed_global_coeffs(fam, params, 300), global_coeffs(fam, params, 300))


def test_flagged_global_display_really_differs():
    params = {"q": 1}
    rep = coeffs_compare(printed_global_coeffs("pg", params, 300), global_coeffs("pg", params, 300))
    assert not rep and rep.first_diff == 2
    assert "2-part" in global_erratum("pg")


def test_errata_rows_name_a_display():
    rows = errata_report()
    assert rows
    for r in rows:
        assert r["display"] and r["reason"]
    keys = [(r["family"], r["display"], r["reason"]) for r in rows]
    assert len(keys) == len(set(keys))


def test_full_zeta_g2():
    g = full_zeta_prime_holonomy("G2", {}, 12)
    assert g[1] == 1 and g[2] == 7


def test_full_zeta_needs_intermediates_for_composite_order():
    with pytest.raises(CatalogError):
        full_zeta_prime_holonomy("G4", {}, 10)
    g = full_zeta_from_intermediates("G4", {}, [(2, "G2", {}), (4, "N", {"k": 0})], 8)
    assert g[1] == 1
