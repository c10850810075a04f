"""
Cup-product defect of the flop correspondence.

The correspondence preserves the Poincare pairing but not the cup product.
For a_p of degree k_p with k_1 + k_2 + k_3 = dim X the triple-product defect

    int_{X'} Fa_1 Fa_2 Fa_3 - int_X a_1 a_2 a_3

is computed directly in both rings, and by the closed formula

    (-1)^r sum prod_p (a_p . Tcheck_{i_p} H_{r-j_p}) int_S s_{J-2r-1}(F + F'^*) T_{i_1} T_{i_2} T_{i_3}

over 1 <= j_p <= min(r, k_p), J = j_1 + j_2 + j_3 >= 2r + 1, deg T_{i_p} = k_p - j_p.
Classes of H(Z) are pushed into X by multiplying with [Z] = Theta_{r+1}.
"""

from fractions import Fraction
from itertools import product as iproduct


def _homogeneous_degree(a):
    d = a.degree()
    if d is None and not a.is_zero():
        raise ValueError("defect formulas expect homogeneous classes")
    return d


def triple_defect_direct(model, a1, a2, a3):
    """Returns (value, degree_ok)."""
    degs = [_homogeneous_degree(a) for a in (a1, a2, a3)]
    if any(d is None for d in degs):
        return Fraction(0), True
    if sum(degs) != model.dim:
        return Fraction(0), False
    F = model.transform_class
    lhs = (F(a1) * F(a2) * F(a3)).integral()
    rhs = (a1 * a2 * a3).integral()
    return lhs - rhs, True


class _DefectData:
    def __init__(self, model):
        self.model = model
        base = model.base
        self.Z = model.zero_section()
        self.duals = model.base_duals()
        self.H = [model.H_class(k) for k in range(model.r + 1)]
        self.stilde = model.stilde()
        self.by_degree = {}
        for i in range(base.rank):
            self.by_degree.setdefault(base.degrees[i], []).append(i)
        self._zclass = {}

    def zclass(self, i, j):
        """Tcheck_i H_{r-j} pushed into X."""
        key = (i, j)
        if key not in self._zclass:
            m = self.model
            self._zclass[key] = m.pullback(self.duals[i]) * self.H[m.r - j] * self.Z
        return self._zclass[key]


def _data(model):
    if not hasattr(model, "_defect_data"):
        model._defect_data = _DefectData(model)
    return model._defect_data


def triple_defect_formula(model, a1, a2, a3):
    r = model.r
    base = model.base
    D = _data(model)
    classes = (a1, a2, a3)
    degs = [_homogeneous_degree(a) for a in classes]
    if any(d is None for d in degs) or sum(degs) != model.dim:
        return Fraction(0)
    # per-slot candidate (j, i, pairing value)
    slots = []
    for a, k in zip(classes, degs):
        opts = []
        for j in range(1, min(r, k) + 1):
            for i in D.by_degree.get(k - j, []):
                v = (a * D.zclass(i, j)).integral()
                if v:
                    opts.append((j, i, v))
        slots.append(opts)
    total = Fraction(0)
    for (j1, i1, v1), (j2, i2, v2), (j3, i3, v3) in iproduct(*slots):
        J = j1 + j2 + j3
        if J < 2 * r + 1:
            continue
        k = J - 2 * r - 1
        if k >= len(D.stilde):
            continue
        T = D.stilde[k] * base.basis(i1) * base.basis(i2) * base.basis(i3)
        s = T.integral()
        if s:
            total += v1 * v2 * v3 * s
    return (-1) ** r * total


def p1_corollary(model, a1, a2, a3):
    """r = 1 specialization: -sum (a_1.Tcheck_1)(a_2.Tcheck_2)(a_3.Tcheck_3) int T_1 T_2 T_3.

    Here a . Tcheck means the integral of a against Tcheck_i [Z] in X.
    """
    if model.r != 1:
        raise ValueError("the P^1 corollary needs r = 1")
    base = model.base
    D = _data(model)
    Z = D.Z
    vals = []
    for a in (a1, a2, a3):
        vals.append({i: (a * model.pullback(D.duals[i]) * Z).integral()
                     for i in range(base.rank)})
    total = Fraction(0)
    for i1, v1 in vals[0].items():
        if not v1:
            continue
        for i2, v2 in vals[1].items():
            if not v2:
                continue
            for i3, v3 in vals[2].items():
                if not v3:
                    continue
                s = (base.basis(i1) * base.basis(i2) * base.basis(i3)).integral()
                total += v1 * v2 * v3 * s
    return -total


def degree_compatible_triples(model, ordered=False):
    """Basis triples with total degree dim X; unordered (e1 <= e2 <= e3) by default."""
    HX = model.HX
    deg = HX.degrees
    n = HX.rank
    out = []
    for e1 in range(n):
        for e2 in range(0 if ordered else e1, n):
            for e3 in range(0 if ordered else e2, n):
                if deg[e1] + deg[e2] + deg[e3] == model.dim:
                    out.append((e1, e2, e3))
    return out


def defect_check(model, ordered=False):
    """Compare direct and formula values over all degree-compatible triples."""
    HX = model.HX
    rows = []
    ok = True
    for (e1, e2, e3) in degree_compatible_triples(model, ordered):
        a = [HX.basis(e) for e in (e1, e2, e3)]
        direct, _ = triple_defect_direct(model, *a)
        formula = triple_defect_formula(model, *a)
        good = direct == formula
        ok = ok and good
        rows.append({"triple": [HX.labels[e] for e in (e1, e2, e3)],
                     "direct": str(direct), "formula": str(formula), "pass": good})
    return {"pass": ok, "count": len(rows), "triples": rows}


def p1_corollary_check(model):
    """r = 1: the direct defect against the P^1-flop corollary on all triples."""
    HX = model.HX
    rows = []
    ok = True
    for (e1, e2, e3) in degree_compatible_triples(model):
        a = [HX.basis(e) for e in (e1, e2, e3)]
        direct, _ = triple_defect_direct(model, *a)
        cor = p1_corollary(model, *a)
        good = direct == cor
        ok = ok and good
        rows.append({"triple": [HX.labels[e] for e in (e1, e2, e3)],
                     "direct": str(direct), "corollary": str(cor), "pass": good})
    return {"pass": ok, "count": len(rows), "triples": rows}


def pairing_check(model):
    """Exact comparison of the pairing matrices of X and X' under the correspondence."""
    HX = model.HX
    B = HX.basis_elements()
    img = [model.transform_class(b) for b in B]
    worst = Fraction(0)
    checked = 0
    for i in range(len(B)):
        for j in range(len(B)):
            if HX.degrees[i] + HX.degrees[j] != model.dim:
                continue
            checked += 1
            dev = abs((img[i] * img[j]).integral() - (B[i] * B[j]).integral())
            worst = max(worst, dev)
    return {"pass": worst == 0, "pairs": checked, "max_deviation": str(worst)}
