from itertools import product

import pytest

from flopcalc.cli import fixture_model
from flopcalc.defect import (defect_check, degree_compatible_triples, p1_corollary,
                             pairing_check, triple_defect_direct, triple_defect_formula)


def test_sf1_hhh():
    m = fixture_model("SF1")
    assert triple_defect_direct(m, m.h, m.h, m.h)[0] == -1
    assert triple_defect_formula(m, m.h, m.h, m.h) == -1


def test_unit_insertion_has_no_defect():
    m = fixture_model("SF2")
    one = m.HX.one()
    for a, b in product(m.HX.basis_elements(), repeat=2):
        assert triple_defect_direct(m, one, a, b)[0] == 0
        assert triple_defect_formula(m, one, a, b) == 0


def test_xi_and_base_classes_have_no_defect():
    m = fixture_model("SP1-pos")
    p = m.pullback(m.base.divisor([1]))
    for a in (m.xi, m.xi ** 2, p * m.xi):
        for b, c in product((m.xi, p, m.xi ** 2), repeat=2):
            assert triple_defect_direct(m, a, b, c)[0] == 0


@pytest.mark.parametrize("name", ["SF1", "SF2"])
def test_direct_defect_by_hand(name):
    # independent evaluation: int_X' F(a)F(b)F(c) - int_X abc
    m = fixture_model(name)
    for t in degree_compatible_triples(m, ordered=True):
        a, b, c = (m.HX.basis(e) for e in t)
        want = (m.transform_class(a) * m.transform_class(b) * m.transform_class(c)).integral() \
            - (a * b * c).integral()
        assert triple_defect_direct(m, a, b, c)[0] == want


def test_ordered_triple_counts():
    # ordered triples of basis elements with degrees summing to dim X
    for name in ("SF1", "SF2"):
        m = fixture_model(name)
        B = range(m.rank)
        want = sum(1 for i, j, k in product(B, B, B)
                   if m.HX.degrees[i] + m.HX.degrees[j] + m.HX.degrees[k] == m.dim)
        assert len(degree_compatible_triples(m, ordered=True)) == want


@pytest.mark.parametrize("name", ["SF1", "SF2", "SP1-pos", "SP1-neg", "SP2", "SQ2"])
def test_defect_formula_everywhere(name):
    assert defect_check(fixture_model(name), ordered=True)["pass"]


@pytest.mark.parametrize("name", ["SF1", "SF2", "SP1-pos", "SP1-neg", "SP2", "SQ2"])
def test_pairing_preserved(name):
    assert pairing_check(fixture_model(name))["pass"]


def test_p1_corollary_matches_formula():
    m = fixture_model("SP1-neg")
    for t in degree_compatible_triples(m, ordered=True):
        a, b, c = (m.HX.basis(e) for e in t)
        assert p1_corollary(m, a, b, c) == triple_defect_formula(m, a, b, c)
