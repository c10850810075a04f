"""
Birkhoff factorization and the generalized mirror transform.

Given I = e^{t/z} sum Q^beta F_beta, find the differential operator
P = 1 + sum_{beta != 0} Q^beta P_beta(z) with P I = 1 + O(1/z).  Classes are
processed in increasing cone grade.  At a class beta the part of (P I)_beta
with nonnegative z-powers, sum_k z^k c_k, is removed by subtracting the
naive quantization Q^beta z^k c_k^ (T_e -> z d_tbar (z d_t1)^l (z d_t2)^m),
which acts on the leading term 1 of I by exactly c_k.  The mirror map is
read from the 1/z coefficient: tau = t + sum Q^beta [z^{-1}] (P I)_beta.
"""

import random
from dataclasses import dataclass, field

from .ifunc import IFunction, IVector, grade
from .laurent import Laurent
from .pfops import DiffOp, generators


def supports_naive_quantization(model):
    """Every base basis element must be 1 or a divisor (S = pt or P^1)."""
    return all(d <= 1 for d in model.base.degrees)


def naive_quantize(model, T):
    """Naive quantization of a class: linear in the canonical basis."""
    if not supports_naive_quantization(model):
        raise NotImplementedError("naive quantization needs H(S) = H^0 + H^2")
    gens = generators(model)
    out = DiffOp(gens)
    for t, c in T.coeffs.items():
        out = out + DiffOp.monomial(gens, word=basis_word(model, t), coeff=c)
    return out


def basis_word(model, t):
    """Derivative word of the canonical basis element with index t."""
    gens = generators(model)
    i, l, m = model.exponents[t]
    w = [0] * gens.n
    w[1] = l
    w[2] = m
    if model.base.degrees[i] == 1:
        w[3 + model.base.divisor_basis.index(i)] = 1
    elif model.base.degrees[i] > 1:
        raise NotImplementedError("base insertions beyond divisors")
    return tuple(w)


@dataclass
class GMTResult:
    P: DiffOp
    J: IVector
    tau: dict
    steps: int
    order: list = field(default_factory=list)


def birkhoff_factorize(model, window, source=None, order_seed=None, max_steps=None):
    """Run the BF/GMT induction on the window.

    `order_seed` shuffles classes within each grade (the result must not
    depend on it).
    """
    if not supports_naive_quantization(model):
        raise NotImplementedError("naive quantization needs H(S) = H^0 + H^2")
    source = source or IFunction(model)
    gens = generators(model)
    classes = window.classes(model)
    if order_seed is not None:
        rng = random.Random(order_seed)
        groups = {}
        for beta in classes:
            groups.setdefault(grade(model, beta), []).append(beta)
        classes = []
        for g in sorted(groups):
            grp = groups[g]
            rng.shuffle(grp)
            classes.extend(grp)
    parts = {}
    J = {}
    tau = {}
    steps = 0
    max_steps = max_steps if max_steps is not None else 10 * len(classes) + 10
    zero = model.zero_curve()
    for beta in classes:
        R = source.term(beta)
        for b1, op in parts.items():
            src = beta - b1
            if not model.is_I_effective(src):
                continue
            val, _ = op.apply_at(source, beta)
            R = R + val
        if beta != zero:
            top = R.nonnegative_part()
            if not top.is_zero():
                steps += 1
                if steps > max_steps:
                    raise RuntimeError("BF induction did not terminate")
                op = DiffOp(gens)
                for k, c in top.terms.items():
                    q = naive_quantize(model, c)
                    for (b, kk, w), v in q.terms.items():
                        op = op + DiffOp.monomial(gens, beta=beta, k=kk + k, word=w, coeff=-v)
                parts[beta] = op
                R = R - top
            t = R.coefficient(-1)
            if not t.is_zero():
                tau[beta] = t
        if not R.is_zero():
            J[beta] = R
    P = DiffOp.identity(gens)
    for op in parts.values():
        P = P + op
    return GMTResult(P, IVector(model, J, window), tau, steps, classes)


def check_factorization(model, result, window, source=None):
    """P I on the window: returns classes where a nonnegative z-power survives."""
    source = source or IFunction(model)
    zero = model.zero_curve()
    bad = []
    for beta in window.classes(model):
        val, _ = result.P.apply_at(source, beta)
        if beta == zero:
            val = val - Laurent.one(model.HX)
        if not val.nonnegative_part().is_zero():
            bad.append(beta.key())
    return bad


def tau_violations(model, result):
    """Classes with betaS = 0 and d2 = 0 carrying a mirror-map correction."""
    return [b.key() for b in result.tau if not any(b.betaS) and b.d2 == 0]


# quantum multiplication from z-free structure constants


def quantum_mult_matrix(model, alpha, Ct, window):
    """Matrix of quantum multiplication by the cup-product class alpha.

    `Ct` maps a generator index (1 = t1, 2 = t2, 3.. = base divisors) to the
    z-free `MatSeries` of quantum multiplication by the corresponding divisor
    (valid at the point where the mirror map is trivial).
    """
    from .qlh import ConnectionMatrix as MatSeries
    rank = model.rank
    ident = MatSeries.identity(model, window)
    # quantum monomial vectors V[:, e] = M(Tbar_i) M(h)^l M(xi)^m e_unit
    unit = model.HX.unit_index()
    cols = []
    mats = []
    for t in range(rank):
        w = basis_word(model, t)
        M = ident
        for a, e in enumerate(w):
            for _ in range(e):
                M = M * Ct[a]
        mats.append(M)
        cols.append(M.column(unit))
    V = MatSeries.from_columns(model, window, cols)
    Vinv = V.inverse()
    # alpha = sum_e c_e (quantum monomial e) with c = V^{-1} a
    a = {i: c for i, c in alpha.coeffs.items()}
    c_series = Vinv.apply_vector(a)
    out = MatSeries.zero(model, window)
    for e, ser in c_series.items():
        out = out + mats[e].scale_series(ser)
    return out


def three_point_extract(model, alpha, beta, gamma_class, Ct, window, betaS=None, d2=1):
    """<alpha, beta, gamma_class> restricted to the fiber (betaS, d2), as {d: coeff}."""
    M = quantum_mult_matrix(model, alpha, Ct, window)
    prod = M.apply_vector({i: c for i, c in beta.coeffs.items()})
    betaS = tuple(betaS) if betaS is not None else model.zero_curve().betaS
    pair = {t: (model.HX.basis(t) * gamma_class).integral() for t in range(model.rank)}
    out = {}
    for e, ser in prod.items():
        pe = pair[e]
        if not pe:
            continue
        for (b, k), v in ser.items():
            if k != 0:
                raise AssertionError("z-dependence in a z-free product")
            if b.betaS == betaS and b.d2 == d2:
                out[b.d] = out.get(b.d, 0) + v * pe
    return {d: v for d, v in sorted(out.items()) if v}
