from fractions import Fraction

import pytest
import sympy

from flopcalc.birkhoff import birkhoff_factorize
from flopcalc.cli import fixture_model
from flopcalc.ifunc import TruncationWindow
from flopcalc.qlh import (ConnectionMatrix, LaurentF, birkhoff_column_check, build_connection,
                          check_gauge, commutators, connection_from_I, fit_fiber, flatness_check,
                          gauge_reduce, invariance_check, lift_equivalence_check, transpose,
                          weight_degree_audit, z_constant_mod_gamma)

W = TruncationWindow(1, 3, 2)
QLH = ["SF1", "SF2", "SP1-pos", "SP1-neg"]


@pytest.fixture(scope="module")
def built():
    out = {}
    for name in QLH + ["SP2"]:
        m = fixture_model(name)
        C, info = build_connection(m, W)
        out[name] = (m, C, info)
    return out


@pytest.mark.parametrize("name", QLH + ["SP2"])
def test_rewriting_matches_fundamental_solution(built, name):
    m, C, info = built[name]
    oracle, _ = connection_from_I(m, W)
    assert not info["non_effective"]
    for a in C:
        assert C[a] == oracle[a]


@pytest.mark.parametrize("name", QLH)
def test_unit_direction_is_identity(built, name):
    m, C, _ = built[name]
    assert C[0] == ConnectionMatrix.identity(m, W)


def test_classical_part_is_cup_product(built):
    m, C, _ = built["SF2"]
    cl = C[1].at(m.zero_curve())[0]
    # z d_t1 on the column of h^i xi^j gives the column of h^{i+1} xi^j
    for i in range(m.r):
        for j in range(m.r + 1):
            src = m.basis_index(0, i, j)
            dst = m.basis_index(0, i + 1, j)
            assert cl.get(dst, {}).get(src) == 1


@pytest.mark.parametrize("name", ["SP1-pos", "SP1-neg", "SP2"])
def test_lifts_agree(name):
    assert lift_equivalence_check(fixture_model(name), W)["pass"]


@pytest.mark.parametrize("name", QLH + ["SP2"])
def test_flatness(built, name):
    m, C, _ = built[name]
    assert flatness_check(m, C, W)["pass"]
    assert flatness_check(m, {a: transpose(M) for a, M in C.items()}, W, "left")["pass"]


def test_flatness_detects_a_perturbation(built):
    m, C, _ = built["SF1"]
    bad = dict(C)
    bad[1] = C[1] + ConnectionMatrix(m, W, {m.ell(): {0: {0: {1: Fraction(1)}}}})
    assert not flatness_check(m, bad, W)["pass"]


@pytest.mark.parametrize("name", ["SF1", "SF2"])
def test_simple_flop_z_constant_mod_gamma(built, name):
    m, C, _ = built[name]
    for a in C:
        assert not z_constant_mod_gamma(m, C[a])
        # q^{d2 gamma} only with d2 <= 1
        assert all(b.d2 <= 1 for b in C[a].terms)


@pytest.mark.parametrize("name", QLH + ["SP2"])
def test_gauge(built, name):
    m, C, _ = built[name]
    G = gauge_reduce(m, C, W)
    ident = ConnectionMatrix.identity(m, W)
    assert not G.residual
    assert not check_gauge(m, C, G)
    assert all(M.is_z_free() for M in G.Ct.values())
    assert G.Ct[0] == ident
    assert all(commutators(m, G.Ct).values())
    assert G.B.at(m.zero_curve()) == ident.at(m.zero_curve())
    assert weight_degree_audit(m, G)["bound_ok"]
    Psi = connection_from_I(m, W)[1]
    assert not birkhoff_column_check(m, Psi, G, birkhoff_factorize(m, W))


def test_gauge_on_sf1_is_not_identity(built):
    # C_t1 has a z-term at (d, d2) = (1, 1), so B cannot be the identity
    m, C, _ = built["SF1"]
    assert 1 in C[1].at(m.ell() + m.gamma())
    assert gauge_reduce(m, C, W).B != ConnectionMatrix.identity(m, W)


def _expr(F, y):
    f = y / (1 - F.s * y)
    return sum(sympy.Rational(c.numerator, c.denominator) * y ** a for a, c in F.laurent.items()) \
        + sum(sympy.Rational(c.numerator, c.denominator) * f ** b for b, c in F.fpart.items())


@pytest.mark.parametrize("r", [1, 2, 3])
def test_continuation_is_y_inversion(r):
    y = sympy.symbols("y")
    F = LaurentF({-2: Fraction(3), 1: Fraction(-1), 4: Fraction(1, 2)},
                 {1: Fraction(2), 3: Fraction(-5)}, r)
    assert sympy.simplify(_expr(F, y).subs(y, 1 / y) - _expr(F.continued(), y)) == 0


@pytest.mark.parametrize("r", [1, 2])
def test_fit_recovers_rational_function(r):
    y = sympy.symbols("y")
    s = (-1) ** (r + 1)
    g = y ** -1 + 3 * (y / (1 - s * y)) ** 2 - 2 * y ** 2
    ser = sympy.series(g, y, 0, 12).removeO()
    data = {d: Fraction(str(ser.coeff(y, d))) for d in range(-1, 12)}
    F = fit_fiber(data, -1, 11, r)
    assert F is not None
    assert sympy.simplify(_expr(F, y) - g) == 0


def test_fit_refuses_short_data():
    assert fit_fiber({0: Fraction(1), 1: Fraction(2), 2: Fraction(5)}, 0, 2, 1) is None


def test_invariance_sf1():
    rep = invariance_check(fixture_model("SF1"), TruncationWindow(0, 8, 2))
    assert rep["pass"] and rep["matched"] > 0
