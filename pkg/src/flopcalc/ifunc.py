"""
Truncated I-functions of the local model.

    I = sum_beta q^beta e^{D/z + D.beta} I^{X/S}_beta J^S_{betaS},   D = t^1 h + t^2 xi,

where the relative factor is a product over the roots v in {a_i, b_i, xi}
of 1/prod_{m=1}^{beta.v} (v + m z), read as the numerator
prod_{m=beta.v+1}^{0} (v + m z) when beta.v < 0.

The exponential prefactor is kept implicit: a term is stored as its Laurent
coefficient `F_beta` and the monomial Q^beta = q^beta e^{(D + tbar).beta}.
A divisor derivative z d_v acts on the beta-term as multiplication by
v + z (v . beta).
"""

from dataclasses import dataclass
from itertools import product as iproduct

from .flopmodel import CurveClass
from .laurent import Laurent


@dataclass(frozen=True)
class TruncationWindow:
    """Curve classes beta with betaS <= betaS_bound (componentwise) and
    d + mu^I <= d_max, d2 + nu^I <= d2_max.

    The fiber bounds are measured from the I-minimal lift of betaS, which
    keeps the window down-closed for the cone NE^I(X).
    """

    betaS_bound: int
    d_max: int
    d2_max: int

    def __post_init__(self):
        if min(self.betaS_bound, self.d_max, self.d2_max) < 0:
            raise ValueError("window bounds must be >= 0")

    def as_list(self):
        return [self.betaS_bound, self.d_max, self.d2_max]

    def contains(self, model, beta):
        if not model.base.is_effective(beta.betaS):
            return False
        if any(b > self.betaS_bound for b in beta.betaS):
            return False
        a, b = cone_offsets(model, beta)
        return 0 <= a <= self.d_max and 0 <= b <= self.d2_max

    def classes(self, model):
        """All I-effective classes in the window, in a deterministic order."""
        out = []
        n = model.base.n_mori
        for betaS in iproduct(range(self.betaS_bound + 1), repeat=n):
            muI, _, nuI = model.mu_I(betaS)
            for a in range(self.d_max + 1):
                for b in range(self.d2_max + 1):
                    out.append(CurveClass(betaS, a - muI, b - nuI))
        out.sort(key=lambda beta: (grade(model, beta), beta.key()))
        return out


def cone_offsets(model, beta):
    """(d + mu^I, d2 + nu^I): the position of beta above its I-minimal lift."""
    muI, _, nuI = model.mu_I(beta.betaS)
    return beta.d + muI, beta.d2 + nuI


def grade(model, beta):
    """Total degree in the cone coordinates (betaS, d + mu^I, d2 + nu^I)."""
    a, b = cone_offsets(model, beta)
    return sum(beta.betaS) + a + b


def relative_factor(model, beta):
    """I^{X/S}_beta as a Laurent polynomial in z over H(X)."""
    HX = model.HX
    out = Laurent.one(HX)
    roots = list(model.a_roots) + list(model.b_roots) + [model.xi]
    for v in roots:
        s = int(model.pair_divisor(v, beta))
        if s > 0:
            for m in range(1, s + 1):
                out = out * Laurent.inverse_linear(v, m)
        elif s < 0:
            for m in range(s + 1, 1):
                out = out * Laurent.linear(v, m)
        if out.is_zero():
            break
    return out


def base_J_coefficient(model, betaS):
    """J^S_{betaS} pulled back to H(X), without the e^{tbar/z + tbar.betaS} prefactor."""
    return model.base.J_coefficient(betaS).lift(model.HX)


class IFunction:
    """Lazily evaluated I-function: `term(beta)` is F_beta for any class."""

    def __init__(self, model):
        self.model = model
        self._cache = {}

    def term(self, beta):
        F = self._cache.get(beta)
        if F is None:
            model = self.model
            if not model.base.is_effective(beta.betaS):
                F = Laurent.zero(model.HX)
            else:
                F = relative_factor(model, beta)
                if not F.is_zero() and any(beta.betaS):
                    F = F * base_J_coefficient(model, beta.betaS)
            self._cache[beta] = F
        return F

    def is_known_zero(self, beta):
        """True when the term vanishes for structural reasons (not I-effective)."""
        return not self.model.is_I_effective(beta)


class IVector:
    """A finite truncation of I: CurveClass -> Laurent, with its window."""

    def __init__(self, model, terms, window):
        self.model = model
        self.terms = terms
        self.window = window

    def __getitem__(self, beta):
        return self.terms.get(beta, Laurent.zero(self.model.HX))

    def dump(self):
        """JSON-friendly rows, deterministic order."""
        out = []
        for beta in sorted(self.terms, key=lambda b: b.key()):
            out.append({"beta": beta.key(), "rows": [[k, v] for k, v in self.terms[beta].rows()]})
        return out


def assemble_I(model, window, source=None):
    source = source or IFunction(model)
    terms = {}
    for beta in window.classes(model):
        F = source.term(beta)
        if not F.is_zero():
            terms[beta] = F
    return IVector(model, terms, window)


def homogeneity_defects(model, I):
    """Terms violating c_1(X).beta + (z-power) + (class degree) = 0."""
    bad = []
    deg = model.HX.degrees
    for beta, F in I.terms.items():
        w = model.c1_pairing(beta)
        for k, c in F.terms.items():
            for i in c.coeffs:
                if w + k + deg[i] != 0:
                    bad.append((beta.key(), k, model.HX.labels[i]))
    return bad


def vanishing_defects(model, window, margin=2):
    """Classes just outside the I-effective bounds whose term is nonzero."""
    bad = []
    source = IFunction(model)
    n = model.base.n_mori
    for betaS in iproduct(range(window.betaS_bound + 1), repeat=n):
        muI, _, nuI = model.mu_I(betaS)
        for d in range(-muI - margin, -muI + window.d_max + 1):
            for d2 in range(-nuI - margin, -nuI + window.d2_max + 1):
                beta = CurveClass(betaS, d, d2)
                if not model.is_I_effective(beta) and not source.term(beta).is_zero():
                    bad.append(beta.key())
    return bad


def transform_laurent(model, F):
    """Apply the cohomology correspondence coefficientwise."""
    HXp = model.primed.HX
    return Laurent({k: model.transform_class(c) for k, c in F.terms.items()}, HXp)
