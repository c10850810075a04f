import pytest

from flopcalc.birkhoff import (basis_word, birkhoff_factorize, check_factorization,
                               naive_quantize, quantum_mult_matrix, tau_violations,
                               three_point_extract)
from flopcalc.cli import fixture_model
from flopcalc.ifunc import IFunction, TruncationWindow
from flopcalc.laurent import Laurent
from flopcalc.pfops import DiffOp, generators
from flopcalc.qlh import ConnectionMatrix, build_connection, gauge_reduce


def test_naive_quantization_words():
    m = fixture_model("SF1")
    g = generators(m)
    assert naive_quantize(m, m.HX.one()) == DiffOp.identity(g)
    m = fixture_model("SF2")
    T = m.h ** 2 * m.xi
    assert basis_word(m, next(iter(T.coeffs))) == (0, 2, 1)
    s = fixture_model("SP1-pos")
    pT = s.pullback(s.base.divisor([1])) * s.h
    assert basis_word(s, next(iter(pT.coeffs))) == (0, 1, 0, 1)


def test_naive_quantization_needs_divisor_base():
    m = fixture_model("SQ2")
    with pytest.raises(NotImplementedError):
        birkhoff_factorize(m, TruncationWindow(1, 1, 1))


def test_trivial_window():
    m = fixture_model("SF1")
    res = birkhoff_factorize(m, TruncationWindow(0, 0, 0))
    assert res.P == DiffOp.identity(generators(m))
    assert not res.tau
    assert res.J[m.zero_curve()] == Laurent.one(m.HX)


@pytest.mark.parametrize("name", ["SF1", "SF2", "SP1-neg"])
def test_no_correction_needed(name):
    m = fixture_model(name)
    W = TruncationWindow(2, 3, 3)
    res = birkhoff_factorize(m, W)
    assert res.P == DiffOp.identity(generators(m))
    assert not res.tau
    # then J = I on the window
    I = IFunction(m)
    for b in W.classes(m):
        assert res.J[b] == I.term(b)


@pytest.mark.parametrize("name", ["SP1-pos", "SP2"])
def test_nontrivial_factorization(name):
    m = fixture_model(name)
    W = TruncationWindow(2, 3, 3)
    res = birkhoff_factorize(m, W)
    assert res.P != DiffOp.identity(generators(m))
    assert not check_factorization(m, res, W)
    assert not tau_violations(m, res)
    for seed in (7, 11):
        assert birkhoff_factorize(m, W, order_seed=seed).P == res.P


def _Ct(m, W):
    C, _ = build_connection(m, W)
    return gauge_reduce(m, C, W).Ct


def test_quantum_multiplication_basics():
    m = fixture_model("SF1")
    W = TruncationWindow(0, 4, 2)
    Ct = _Ct(m, W)
    ident = ConnectionMatrix.identity(m, W)
    assert quantum_mult_matrix(m, m.HX.one(), Ct, W) == ident
    Mh = quantum_mult_matrix(m, m.h, Ct, W)
    Mx = quantum_mult_matrix(m, m.xi, Ct, W)
    assert Mh == Ct[1] and Mx == Ct[2]
    assert Mh * Mx == Mx * Mh


def test_unit_insertion_vanishes_off_zero():
    m = fixture_model("SF1")
    W = TruncationWindow(0, 4, 2)
    Ct = _Ct(m, W)
    for a in m.HX.basis_elements():
        for c in m.HX.basis_elements():
            assert three_point_extract(m, m.HX.one(), a, c, Ct, W, d2=1) == {}


@pytest.mark.parametrize("name,table", [
    ("SF1", {0: {1: 1}, 1: {0: 1, 1: -1}}),
    ("SF2", {0: {1: 1}, 1: {1: -1}, 2: {0: 1, 1: 1}}),
])
def test_extremal_three_point_values(name, table):
    m = fixture_model(name)
    W = TruncationWindow(0, 4, 2)
    Ct = _Ct(m, W)
    r, h, xi = m.r, m.h, m.xi
    for j, want in table.items():
        alpha = h ** (r - j) * (xi - h) ** (r + 1)
        assert three_point_extract(m, alpha, xi ** (j + 1), xi * h ** r, Ct, W, d2=1) == want


def test_h_h_product_matches_extremal_series():
    # <h, h, T> along d2 = 0 on SF1: the l-line contributes f(q^l) times [Z]-pairings
    from flopcalc.extremal import FPoly, expand_f_series
    m = fixture_model("SF1")
    W = TruncationWindow(0, 6, 1)
    Ct = _Ct(m, W)
    got = three_point_extract(m, m.h, m.h, m.h, Ct, W, d2=0)
    # (h.l)^3 N_{dl} = d^3 * 1/d^3 for r = 1: coefficient 1 at every d >= 1
    assert got == {d: 1 for d in range(1, 7)}
    assert [got[d] for d in range(1, 7)] == expand_f_series(FPoly.f(1), 6)
