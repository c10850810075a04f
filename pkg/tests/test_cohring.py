from fractions import Fraction
from itertools import product

import pytest
import sympy

from flopcalc.cli import fixture_model
from flopcalc.cohring import build_base
from flopcalc.laurent import Laurent


def test_point_ring():
    S = build_base("point")
    assert S.rank == 1
    assert S.one().integral() == 1


def test_projective_line_ring():
    S = build_base("projspace", n=1)
    p = S.divisor([1])
    assert S.rank == 2
    assert p.integral() == 1
    assert (p * p).is_zero()


def test_base_J_line():
    S = build_base("projspace", n=1)
    p = S.divisor([1])
    # 1/(p+z)^2 with p^2 = 0
    assert S.J_coefficient((1,)) == Laurent({-2: S.one(), -3: p * -2}, S)


def test_sf1_relations_and_integrals():
    m = fixture_model("SF1")
    h, xi = m.h, m.xi
    assert (h * h).is_zero()
    assert (xi * (xi - h) ** 2).is_zero()
    assert xi ** 3 == h * xi ** 2 * 2
    assert (h * xi ** 2).integral() == 1
    assert (xi ** 3).integral() == 2
    assert m.HX.one().integral() == 0
    assert m.rank == 6


def test_sp1_neg_rank():
    assert fixture_model("SP1-neg").rank == 12


def test_segre_virtual_degree_one():
    m = fixture_model("SP2")
    st = m.stilde()
    assert st[0] == m.base.one()
    assert st[1] == m.chern_Fp()[1] - m.chern_F()[1]


def _sympy_integrals(m, degs):
    """Integrals of p^a h^b xi^c by Groebner normal form of the presentation."""
    p, h, xi = sympy.symbols("p h xi")
    n = m.base.top_degree
    L = [m.base.divisor_degrees(x)[0] if m.base.n_mori else 0 for x in m.L]
    Lp = [m.base.divisor_degrees(x)[0] if m.base.n_mori else 0 for x in m.Lp]
    rels = [sympy.expand(sympy.prod([h + a * p for a in L])),
            sympy.expand(xi * sympy.prod([xi - h + a * p for a in Lp])),
            p ** (n + 1)]
    G = sympy.groebner(rels, xi, h, p, order="lex")
    out = {}
    for a, b, c in degs:
        _, rem = G.reduce(p ** a * h ** b * xi ** c)
        poly = sympy.Poly(rem, xi, h, p)
        out[(a, b, c)] = Fraction(str(poly.coeff_monomial(xi ** (m.r + 1) * h ** m.r * p ** n)))
    return out


@pytest.mark.parametrize("name", ["SF1", "SF2", "SP1-pos", "SP1-neg", "SP2"])
def test_integrals_against_groebner(name):
    m = fixture_model(name)
    n = m.base.top_degree
    degs = [(a, b, c) for a, b, c in product(range(n + 1), range(m.dim + 1), range(m.dim + 1))
            if a + b + c == m.dim]
    want = _sympy_integrals(m, degs)
    p = m.pullback(m.base.divisor([1])) if n else m.HX.one()
    for (a, b, c), v in want.items():
        got = (p ** a * m.h ** b * m.xi ** c).integral()
        assert got == v, (a, b, c)


@pytest.mark.parametrize("name", ["SF2", "SP2"])
def test_pairing_is_perfect(name):
    m = fixture_model(name)
    M = sympy.Matrix(m.HX.pairing_matrix())
    assert M.det() != 0
