"""Acceptance criteria, one test each.  Every test prints a PASS/FAIL line
with the sub-checks that failed, then asserts exactly."""

from fractions import Fraction

import pytest

from flopcalc.birkhoff import (birkhoff_factorize, check_factorization, three_point_extract,
                               tau_violations)
from flopcalc.cli import fixture_model
from flopcalc.defect import (defect_check, p1_corollary_check, pairing_check,
                             triple_defect_direct, triple_defect_formula)
from flopcalc.extremal import (FPoly, W_recursive, continue_f, delta_series, expand_f_series,
                               functional_equation_check, mu1_coefficients, two_point_series)
from flopcalc.ifunc import IFunction, TruncationWindow
from flopcalc.pfops import (DiffOp, check_annihilation, generators, ideal_identities,
                            picard_fuchs_ops)
from flopcalc.qlh import (ConnectionMatrix, build_connection, commutators, fit_matrix,
                          flatness_check, gauge_reduce, invariance_check, transpose,
                          weight_degree_audit, z_constant_mod_gamma)

ALL = ["SF1", "SF2", "SF3", "SP1-pos", "SP1-neg", "SP2", "SQ2"]


def verdict(n, failures):
    print("\nCRITERION %d: %s%s" % (n, "PASS" if not failures else "FAIL",
                                    "" if not failures else " " + "; ".join(failures)))
    return not failures


@pytest.fixture(scope="module")
def models():
    return {name: fixture_model(name) for name in ALL}


def test_criterion_01_pairing(models):
    bad = []
    for name in ["SF1", "SF2", "SP1-pos", "SP1-neg", "SP2"]:
        rep = pairing_check(models[name])
        if not rep["pass"] or rep["pairs"] == 0:
            bad.append("%s pairing deviation %s" % (name, rep["max_deviation"]))
    assert verdict(1, bad)


def test_criterion_02_defect(models):
    bad = []
    for name in ["SF1", "SF2", "SP1-pos", "SP2"]:
        rep = defect_check(models[name], ordered=True)
        if not rep["pass"] or rep["count"] == 0:
            bad.append("%s defect formula" % name)
    for name in ["SP1-pos", "SP1-neg"]:
        if not p1_corollary_check(models[name])["pass"]:
            bad.append("%s P1 corollary" % name)
    m = models["SF1"]
    h = m.h
    direct, _ = triple_defect_direct(m, h, h, h)
    if direct != -1 or triple_defect_formula(m, h, h, h) != -1:
        bad.append("SF1 (h,h,h) != -1")
    assert verdict(2, bad)


def test_criterion_03_extremal(models):
    bad = []
    for name in ["SF2", "SP2", "SF3"]:
        m = models[name]
        for nu in range(m.r):
            if not functional_equation_check(m, nu)["pass"]:
                bad.append("%s nu=%d functional equation" % (name, nu))
        if expand_f_series(W_recursive(m, 1), 10) != mu1_coefficients(m, 10):
            bad.append("%s W1 series" % name)
    for r in (1, 2, 3):
        f = FPoly.f(r)
        if f + continue_f(f) != FPoly.constant(Fraction((-1) ** r), r):
            bad.append("f continuation r=%d" % r)
    assert verdict(3, bad)


def test_criterion_04_two_point():
    bad = []
    for r in (1, 2, 3):
        if delta_series(two_point_series(r, 10)) != expand_f_series(FPoly.f(r), 10):
            bad.append("r=%d" % r)
    assert verdict(4, bad)


def test_criterion_05_pf_annihilation(models):
    W = TruncationWindow(2, 3, 3)
    bad = []
    for name in ["SF1", "SF2", "SP1-pos", "SP1-neg"]:
        m = models[name]
        box_l, box_g, box_lp, box_gp = picard_fuchs_ops(m)
        I, Ip = IFunction(m), IFunction(m.primed)
        for tag, op, src in (("box_l", box_l, I), ("box_gamma", box_g, I),
                             ("box_l'", box_lp, Ip), ("box_gamma'", box_gp, Ip)):
            rep = check_annihilation(op, src, W)
            if not rep["pass"] or not rep["interior_classes"]:
                bad.append("%s %s" % (name, tag))
    assert verdict(5, bad)


def test_criterion_06_pf_ideal(models):
    bad = [name for name in ALL if not ideal_identities(models[name])["pass"]]
    assert verdict(6, bad)


def test_criterion_07_birkhoff(models):
    W = TruncationWindow(2, 3, 3)
    bad = []
    for name in ["SF1", "SF2"]:
        m = models[name]
        res = birkhoff_factorize(m, W)
        if res.P != DiffOp.identity(generators(m)):
            bad.append("%s P != 1" % name)
        if res.tau:
            bad.append("%s tau != t" % name)
    m = models["SP1-pos"]
    res = birkhoff_factorize(m, W)
    if res.P == DiffOp.identity(generators(m)):
        bad.append("SP1-pos P == 1")
    if check_factorization(m, res, W):
        bad.append("SP1-pos P I has nonnegative z-powers")
    if tau_violations(m, res):
        bad.append("SP1-pos tau not t mod q^NE(S)")
    for seed in (1, 2, 3):
        other = birkhoff_factorize(m, W, order_seed=seed)
        if other.P != res.P or other.tau != res.tau:
            bad.append("SP1-pos order dependence (seed %d)" % seed)
    assert verdict(7, bad)


def test_criterion_08_qlh(models):
    W = TruncationWindow(2, 6, 3)
    bad = []
    for name in ["SF1", "SF2", "SP1-pos", "SP1-neg"]:
        m = models[name]
        C, info = build_connection(m, W)
        # the criterion's sign [C_b, C_a] is the left-action form, i.e. the
        # identity for the transposed system; the right-action form is checked too
        if not flatness_check(m, {a: transpose(M) for a, M in C.items()}, W, "left")["pass"]:
            bad.append("%s flatness (criterion form)" % name)
        if not flatness_check(m, C, W, "right")["pass"]:
            bad.append("%s flatness (right action)" % name)
        zdep = sorted({tuple(b) for a in C for b in z_constant_mod_gamma(m, C[a])})
        if zdep:
            bad.append("%s C_a mod q^gamma z-dependent at %d classes, e.g. %s"
                       % (name, len(zdep), list(zdep[0])))
        ks = sorted({k for M in C.values() for d in M.terms.values() for k in d})
        fails = sum(len(fit_matrix(m, M, W, k=k)[1]) for M in C.values() for k in ks)
        if fails:
            bad.append("%s %d guarded fits failed" % (name, fails))
    assert verdict(8, bad)


def test_criterion_09_gauge(models):
    W = TruncationWindow(2, 3, 3)
    bad = []
    for name in ["SF1", "SF2", "SP1-pos", "SP1-neg"]:
        m = models[name]
        C, _ = build_connection(m, W)
        G = gauge_reduce(m, C, W)
        ident = ConnectionMatrix.identity(m, W)
        if G.residual:
            bad.append("%s recursion residual" % name)
        audit = weight_degree_audit(m, G)
        if not audit["bound_ok"]:
            bad.append("%s n(w) exceeds max(n(w')+m(w-w'))-1" % name)
        if not audit["equal"]:
            bad.append("%s n(w) < max(n(w')+m(w-w'))-1 at some weight" % name)
        if not all(M.is_z_free() for M in G.Ct.values()):
            bad.append("%s Ct not z-free" % name)
        if G.Ct[0] != ident:
            bad.append("%s Ct_t0 != Id" % name)
        if not all(commutators(m, G.Ct).values()):
            bad.append("%s Ct do not commute" % name)
        if name in ("SF1", "SF2") and G.B != ident:
            bad.append("%s B != Id" % name)
    assert verdict(9, bad)


def test_criterion_10_invariance(models):
    bad = []
    for name, w in (("SF1", (0, 8, 2)), ("SF2", (0, 8, 2)),
                    ("SP1-neg", (2, 6, 4)), ("SP2", (2, 6, 4))):
        rep = invariance_check(models[name], TruncationWindow(*w), betaS_max=2, d2_max=2)
        if not rep["pass"] or rep["matched"] == 0:
            bad.append("%s: %d mismatches, %d fit failures"
                       % (name, len(rep["mismatched"]), rep["fit_failures"]))
    assert verdict(10, bad)


def _three_point(m, j, W):
    C, _ = build_connection(m, W)
    Ct = gauge_reduce(m, C, W).Ct
    r, h, xi = m.r, m.h, m.xi
    alpha = h ** (r - j) * (xi - h) ** (r + 1)
    return three_point_extract(m, alpha, xi ** (j + 1), xi * h ** r, Ct, W, d2=1)


def test_criterion_11_three_point(models):
    W = TruncationWindow(0, 4, 2)
    expected = {
        "SF1": {0: {1: 1}, 1: {0: 1, 1: -1}},
        "SF2": {0: {1: 1}, 1: {1: -1}, 2: {0: 1, 1: 1}},
    }
    bad = []
    for name, table in expected.items():
        for j, want in table.items():
            got = _three_point(models[name], j, W)
            if got != want:
                bad.append("%s j=%d: %s != %s" % (name, j, got, want))
    assert verdict(11, bad)
