import pytest

from flopcalc.cli import fixture_model
from flopcalc.ifunc import IFunction, TruncationWindow
from flopcalc.pfops import (DiffOp, check_annihilation, generators, ideal_identities,
                            picard_fuchs_ops, transform_operator)

ALL = ["SF1", "SF2", "SF3", "SP1-pos", "SP1-neg", "SP2", "SQ2"]


def _sf1():
    m = fixture_model("SF1")
    g = generators(m)
    d1, d2 = DiffOp.generator(g, 1), DiffOp.generator(g, 2)
    return m, g, d1, d2


def test_sf1_boxes_by_hand():
    m, g, d1, d2 = _sf1()
    box_l, box_g, _, _ = picard_fuchs_ops(m)
    assert box_l == d1 * d1 - DiffOp.q_monomial(g, m.ell()) * (d2 - d1) * (d2 - d1)
    assert box_g == d2 * (d2 - d1) * (d2 - d1) - DiffOp.q_monomial(g, m.gamma())


def test_primed_boxes_mirror():
    m = fixture_model("SF1")
    _, _, box_lp, box_gp = picard_fuchs_ops(m)
    assert (box_lp, box_gp) == picard_fuchs_ops(m.primed)[:2]


def test_identity_and_derivative_action():
    m, g, d1, d2 = _sf1()
    I = IFunction(m)
    beta = m.ell() * 2 + m.gamma()
    F = I.term(beta)
    assert DiffOp.identity(g).apply_at(I, beta)[0] == F
    # z d_t2 acts on the beta-term as multiplication by xi + z d2
    from flopcalc.laurent import Laurent
    assert d2.apply_at(I, beta)[0] == F * Laurent.linear(m.xi, beta.d2)


def test_q_shift():
    m, g, d1, d2 = _sf1()
    I = IFunction(m)
    beta = m.ell() * 2
    op = DiffOp.q_monomial(g, m.ell())
    assert op.apply_at(I, beta)[0] == I.term(m.ell())


@pytest.mark.parametrize("name", ["SF1", "SF2", "SP1-pos", "SP1-neg", "SP2"])
def test_annihilation(name):
    m = fixture_model(name)
    W = TruncationWindow(2, 3, 3)
    box_l, box_g, box_lp, box_gp = picard_fuchs_ops(m)
    for op, src in ((box_l, IFunction(m)), (box_g, IFunction(m)),
                    (box_lp, IFunction(m.primed)), (box_gp, IFunction(m.primed))):
        rep = check_annihilation(op, src, W)
        assert rep["pass"] and rep["interior_classes"]


def test_box_on_trivial_window_is_boundary_only():
    m = fixture_model("SF1")
    box_l = picard_fuchs_ops(m)[0]
    rep = check_annihilation(box_l, IFunction(m), TruncationWindow(0, 0, 0))
    assert rep["pass"]


def test_transform_identity():
    m = fixture_model("SF1")
    g = generators(m)
    assert transform_operator(DiffOp.identity(g)) == DiffOp.identity(generators(m.primed))


@pytest.mark.parametrize("name", ALL)
def test_ideal_identities(name):
    rep = ideal_identities(fixture_model(name))
    assert rep["box_l"] and rep["box_gamma"]
