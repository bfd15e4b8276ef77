from abzeta.rank1 import (
    assembled_coeffs,
    brute_force_count,
    hall_counts,
    local_relative_table,
    printed_coeffs,
    relative_counts,
)


def test_relative_factor_against_enumeration():
    for p in (2, 3, 5):
        assert relative_counts(p, 4).counts == local_relative_table(p, 4).counts


def test_brute_force_and_hall_agree():
    brute = [brute_force_count(n) for n in range(1, 7)]
    assert brute == hall_counts(6)
    assert brute == [1, 3, 3, 5, 5, 7]


def test_assembly_matches_hall():
    assert assembled_coeffs(100).a == hall_counts(100)


def test_swapped_reading_differs():
    assert printed_coeffs(6).a == [1, 2, 1, 3, 1, 4]
