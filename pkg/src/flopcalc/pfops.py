"""
Normal-ordered differential operators acting on I-functions.

Generators are z d_a for the coordinates t^a dual to the classes

    T_0 = 1,  T_1 = h,  T_2 = xi,  T_{2+j} = p_j  (base divisors),

and monomials Q^beta = q^beta e^{(D + tbar).beta}.  A monomial of a `DiffOp`
is Q^beta z^k prod (z d_a)^{w_a}, derivatives acting first.  The
commutation rule is

    z d_a Q^beta = Q^beta (z d_a + z (T_a . beta)).
"""

from fractions import Fraction
from math import comb

from .laurent import Laurent


class Generators:
    """The coordinate directions of a model: classes and pairings with curves."""

    def __init__(self, model):
        self.model = model
        base = model.base
        self.classes = [model.HX.one(), model.h, model.xi] + \
            [model.pullback(base.basis(i)) for i in base.divisor_basis]
        self.names = ["t0", "t1", "t2"] + ["tb%d" % (j + 1) for j in range(base.n_mori)]
        self.n = len(self.classes)
        self.factor_cache = {}

    def pairing(self, a, beta):
        if a == 0:
            return 0
        if a == 1:
            return beta.d
        if a == 2:
            return beta.d2
        return beta.betaS[a - 3]

    def coords_of_divisor(self, v):
        """Coefficients of a class in span(1, h, xi, p_j) on the generators."""
        model = self.model
        out = [Fraction(0)] * self.n
        for t, c in v.coeffs.items():
            i, l, m = model.exponents[t]
            if l == 0 and m == 0 and model.base.degrees[i] == 0:
                out[0] += c
            elif l == 1 and m == 0 and model.base.degrees[i] == 0:
                out[1] += c
            elif l == 0 and m == 1 and model.base.degrees[i] == 0:
                out[2] += c
            elif l == 0 and m == 0 and model.base.degrees[i] == 1:
                out[3 + model.base.divisor_basis.index(i)] += c
            else:
                raise ValueError("not a combination of 1 and divisors")
        return out


def _word_add(w1, w2):
    return tuple(a + b for a, b in zip(w1, w2))


class DiffOp:
    """sum coeff * Q^beta z^k d^w, keyed by (beta, k, w)."""

    def __init__(self, gens, terms=None):
        self.gens = gens
        self.terms = {}
        for key, c in (terms or {}).items():
            if c:
                self.terms[key] = Fraction(c)

    @property
    def model(self):
        return self.gens.model

    # constructors

    @classmethod
    def identity(cls, gens):
        return cls.monomial(gens)

    @classmethod
    def monomial(cls, gens, beta=None, k=0, word=None, coeff=1):
        beta = beta if beta is not None else gens.model.zero_curve()
        word = tuple(word) if word is not None else (0,) * gens.n
        return cls(gens, {(beta, k, word): coeff})

    @classmethod
    def generator(cls, gens, a):
        w = [0] * gens.n
        w[a] = 1
        return cls.monomial(gens, word=w)

    @classmethod
    def directional(cls, gens, v):
        """z d_v for v a combination of 1 and divisor classes."""
        out = cls(gens)
        for a, c in enumerate(gens.coords_of_divisor(v)):
            if c:
                out = out + cls.generator(gens, a) * c
        return out

    @classmethod
    def q_monomial(cls, gens, beta):
        return cls.monomial(gens, beta=beta)

    @classmethod
    def z_power(cls, gens, k):
        return cls.monomial(gens, k=k)

    # algebra

    def _new(self, terms):
        return DiffOp(self.gens, terms)

    def __add__(self, other):
        out = dict(self.terms)
        for key, c in other.terms.items():
            v = out.get(key, 0) + c
            if v:
                out[key] = v
            else:
                out.pop(key, None)
        return self._new(out)

    def __neg__(self):
        return self._new({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return isinstance(other, DiffOp) and self.terms == other.terms

    def is_zero(self):
        return not self.terms

    def __mul__(self, other):
        if not isinstance(other, DiffOp):
            other = Fraction(other)
            return self._new({k: c * other for k, c in self.terms.items()})
        gens = self.gens
        out = {}
        for (b1, k1, w1), c1 in self.terms.items():
            for (b2, k2, w2), c2 in other.terms.items():
                shifts = [gens.pairing(a, b2) for a in range(gens.n)]
                for (dk, w), c in _expand_shifted(w1, shifts).items():
                    key = (b1 + b2, k1 + k2 + dk, _word_add(w, w2))
                    v = out.get(key, 0) + c * c1 * c2
                    if v:
                        out[key] = v
                    else:
                        out.pop(key, None)
        return self._new(out)

    def __rmul__(self, other):
        return self * other

    def __pow__(self, n):
        out = DiffOp.identity(self.gens)
        for _ in range(n):
            out = out * self
        return out

    def max_shift(self):
        return [key[0] for key in self.terms]

    # action on I

    def apply_at(self, I, beta):
        """Coefficient of Q^beta e^{...} in (self I); I an IFunction or IVector-like source.

        Returns (Laurent, boundary) where boundary is True when some source
        class lies outside the window of a truncated source.
        """
        model = self.model
        total = Laurent.zero(model.HX)
        boundary = False
        for (b, k, w), c in self.terms.items():
            src = beta - b
            F, missing = _source_term(I, src)
            boundary = boundary or missing
            if F.is_zero():
                continue
            total = total + (word_factor(self.gens, w, src) * F).shift(k) * c
        return total, boundary

    def pretty(self):
        """Deterministic text form."""
        if not self.terms:
            return "0"
        gens = self.gens
        parts = []
        for (b, k, w) in sorted(self.terms, key=lambda t: (t[0].key(), t[1], t[2])):
            c = self.terms[(b, k, w)]
            mono = []
            if not b.is_zero():
                mono.append("Q%s" % (b,))
            if k:
                mono.append("z^%d" % k)
            for a, e in enumerate(w):
                if e:
                    mono.append("D%s^%d" % (gens.names[a], e) if e > 1 else "D%s" % gens.names[a])
            parts.append("%s*%s" % (c, "*".join(mono) if mono else "1"))
        return " + ".join(parts)

    __repr__ = pretty


def _expand_shifted(word, shifts):
    """prod_a (d_a + z s_a)^{w_a} as {(z-power, word): coeff}."""
    out = {(0, tuple(0 for _ in word)): 1}
    for a, (e, s) in enumerate(zip(word, shifts)):
        if e == 0:
            continue
        new = {}
        for (k, w), c in out.items():
            for j in range(e + 1):
                # choose j derivatives, e - j shifts
                if s == 0 and j != e:
                    continue
                coef = comb(e, j) * s ** (e - j)
                w2 = list(w)
                w2[a] += j
                key = (k + e - j, tuple(w2))
                new[key] = new.get(key, 0) + c * coef
        out = {k: v for k, v in new.items() if v}
    return out


def word_factor(gens, w, beta):
    """prod_a (T_a + z T_a.beta)^{w_a} as a Laurent polynomial."""
    key = (w, beta)
    hit = gens.factor_cache.get(key)
    if hit is not None:
        return hit
    HX = gens.model.HX
    out = Laurent.one(HX)
    for a, e in enumerate(w):
        if e == 0 or a == 0:
            continue
        lin = Laurent.linear(gens.classes[a], gens.pairing(a, beta))
        for _ in range(e):
            out = out * lin
    gens.factor_cache[key] = out
    return out


def _source_term(I, beta):
    """Term of I at beta and whether it is missing from a truncation."""
    from .ifunc import IFunction, IVector
    if isinstance(I, IFunction):
        return I.term(beta), False
    if isinstance(I, IVector):
        if beta in I.terms:
            return I.terms[beta], False
        model = I.model
        if not model.is_I_effective(beta) or I.window.contains(model, beta):
            return Laurent.zero(model.HX), False
        return Laurent.zero(model.HX), True
    raise TypeError("unsupported source")


def apply_operator(op, I, window):
    """op applied to I on the window; returns (IVector, boundary classes)."""
    from .ifunc import IVector
    model = op.model
    terms = {}
    boundary = []
    for beta in window.classes(model):
        val, bnd = op.apply_at(I, beta)
        if bnd:
            boundary.append(beta)
        if not val.is_zero():
            terms[beta] = val
    return IVector(model, terms, window), boundary


def picard_fuchs_ops(model):
    """(box_l, box_gamma) on X and (box_l', box_gamma') on X', each in its own coordinates."""
    return _box_ops(model) + _box_ops(model.primed)


def _box_ops(model):
    gens = generators(model)
    A = DiffOp.identity(gens)
    for v in model.a_roots:
        A = A * DiffOp.directional(gens, v)
    B = DiffOp.identity(gens)
    for v in model.b_roots:
        B = B * DiffOp.directional(gens, v)
    box_l = A - DiffOp.q_monomial(gens, model.ell()) * B
    box_g = DiffOp.directional(gens, model.xi) * B - DiffOp.q_monomial(gens, model.gamma())
    return box_l, box_g


def generators(model):
    if not hasattr(model, "_gens"):
        model._gens = Generators(model)
    return model._gens


def check_annihilation(op, I, window):
    """Exact vanishing of op I on interior classes of the window."""
    result, boundary = apply_operator(op, I, window)
    bset = set(boundary)
    bad = [beta.key() for beta in result.terms if beta not in bset]
    flagged = [beta.key() for beta in result.terms if beta in bset]
    interior = len(window.classes(op.model)) - len(bset)
    return {"pass": not bad, "nonzero_interior": bad, "boundary_residue": flagged,
            "interior_classes": interior, "boundary_classes": len(bset)}


def transform_operator(op):
    """The correspondence on operators, landing in the primed model's algebra.

    z d_{t1} -> z d_{t2'} - z d_{t1'}, z d_{t2} -> z d_{t2'}, base and unit
    directions fixed, Q^beta -> Q'^{F beta}.
    """
    model = op.model
    gp = generators(model.primed)
    images = []
    for a in range(op.gens.n):
        if a == 1:
            images.append(DiffOp.generator(gp, 2) - DiffOp.generator(gp, 1))
        else:
            images.append(DiffOp.generator(gp, a))
    out = DiffOp(gp)
    cache = {}
    for (b, k, w), c in op.terms.items():
        if w not in cache:
            t = DiffOp.identity(gp)
            for a, e in enumerate(w):
                for _ in range(e):
                    t = t * images[a]
            cache[w] = t
        head = DiffOp.monomial(gp, beta=model.transform_curve(b), k=k, coeff=c)
        out = out + head * cache[w]
    return out


def ideal_identities(model):
    """Check F box_l = -Q'^{-l'} box_l' and F box_g = z d_xi' box_l' + Q'^{l'} box_g'."""
    box_l, box_g, box_lp, box_gp = picard_fuchs_ops(model)
    gp = generators(model.primed)
    P = model.primed
    lhs1 = transform_operator(box_l)
    rhs1 = -(DiffOp.q_monomial(gp, -P.ell()) * box_lp)
    lhs2 = transform_operator(box_g)
    rhs2 = DiffOp.directional(gp, P.xi) * box_lp + DiffOp.q_monomial(gp, P.ell()) * box_gp
    return {"box_l": lhs1 == rhs1, "box_gamma": lhs2 == rhs2,
            "pass": lhs1 == rhs1 and lhs2 == rhs2}
