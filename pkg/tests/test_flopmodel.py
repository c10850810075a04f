import pytest

from flopcalc.cli import fixture_model, make_model
from flopcalc.flopmodel import CurveClass


@pytest.mark.parametrize("name", ["SF1", "SF2", "SP1-pos", "SP2", "SQ2"])
def test_H_classes_on_Z_map_with_sign(name):
    m = fixture_model(name)
    P = m.primed
    for k in range(1, m.r + 1):
        lhs = m.transform_class(m.H_class(k) * m.zero_section())
        assert lhs == P.H_class(k) * P.zero_section() * (-1) ** (m.r - k)


def test_sf1_transform_of_top_class():
    m = fixture_model("SF1")
    P = m.primed
    assert m.transform_class(m.h * m.xi ** 2) == P.h * P.xi ** 2
    assert m.transform_class(m.HX.one()) == P.HX.one()


def _pure_powers(m):
    P = m.primed
    return all(m.transform_class(m.h ** k * m.zero_section())
               == P.h ** k * P.zero_section() * (-1) ** (m.r - k) for k in range(m.r + 1))


def test_pure_powers_exactly_when_dual():
    # F(h^k [Z]) = (-1)^{r-k} h'^k [Z'] with no lower terms iff F' = F^*
    assert _pure_powers(make_model(("projspace", 1), 1, [[1], [-1]], [[-1], [1]]))
    assert not _pure_powers(make_model(("projspace", 1), 1, [[1], [0]], [[2], [0]]))


def test_curve_transform():
    m = fixture_model("SF1")
    assert m.transform_curve(m.ell()) == -m.primed.ell()
    assert m.transform_curve(m.gamma()) == m.primed.gamma() + m.primed.ell()
    assert m.transform_curve(m.zero_curve()) == m.zero_curve()


def test_sf1_dual_of_h():
    m = fixture_model("SF1")
    h, xi = m.h, m.xi
    dual = xi ** 2 - h * xi * 2
    assert (h * dual).integral() == 1
    assert (xi * dual).integral() == 0
    assert m.dual_class(h) == dual


@pytest.mark.parametrize("name", ["SF2", "SP1-neg", "SP2"])
def test_dual_formula_matches_pairing_inverse(name):
    m = fixture_model(name)
    for T in m.HX.basis_elements():
        assert m.dual_class_formula(T) == m.dual_class(T)


def test_i_minimal_lifts():
    neg = fixture_model("SP1-neg")
    assert neg.mu_I((1,)) == (-1, 0, 0)
    assert neg.i_minimal_lift((1,)) == CurveClass((1,), 1, 0)
    pos = fixture_model("SP1-pos")
    assert pos.mu_I((1,)) == (1, 1, 2)
    assert pos.i_minimal_lift((1,)) == CurveClass((1,), -1, -2)
    assert pos.i_minimal_lift((0,)) == pos.zero_curve()


@pytest.mark.parametrize("name", ["SP1-pos", "SP1-neg", "SP2"])
def test_minimal_lift_is_admissible_and_sharp(name):
    m = fixture_model(name)
    for b in (1, 2):
        eff = m.effectivity(m.i_minimal_lift((b,)))
        assert min(eff.n) >= 0 and 0 in eff.n


def test_point_base_effectivity():
    m = fixture_model("SF1")
    for d in range(-2, 3):
        for d2 in range(-2, 3):
            assert m.is_I_effective(CurveClass((), d, d2)) == (d >= 0 and d2 >= 0)
    eff = m.effectivity(m.ell())
    assert eff.I_effective and not eff.FI_effective
