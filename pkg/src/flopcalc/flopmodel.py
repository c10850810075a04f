"""
Local models of split ordinary P^r flops.

The data (S, F, F') with F = sum O(L_i), F' = sum O(L'_i) of rank r+1 give

    Z = P(F) -> S,   N = F' (x) O_Z(-1),   X = P(N + O) -> Z,

and the flopped model X' obtained by swapping F and F'.  Cohomology:

    H(Z) = H(S)[h] / prod(h + L_i),
    H(X) = H(Z)[xi] / xi * prod(xi - h + L'_i).

Curve classes are stored as (betaS, d, d2) with respect to the splitting
N_1(X) = N_1(S) + Z.l + Z.gamma, where l is a line in a fiber of Z -> S and
gamma a line in a fiber of X -> Z.
"""

from dataclasses import dataclass
from fractions import Fraction

from .cohring import (ExtensionRing, chern_classes, monic_from_roots,
                      segre_classes, segre_of_virtual)


@dataclass(frozen=True, order=True)
class CurveClass:
    """beta = betaS + d*l + d2*gamma; betaS in the Mori-generator basis of S."""

    betaS: tuple
    d: int
    d2: int

    def __post_init__(self):
        object.__setattr__(self, "betaS", tuple(int(b) for b in self.betaS))

    def __add__(self, other):
        return CurveClass(tuple(a + b for a, b in zip(self.betaS, other.betaS)),
                          self.d + other.d, self.d2 + other.d2)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return CurveClass(tuple(-a for a in self.betaS), -self.d, -self.d2)

    def __mul__(self, k):
        return CurveClass(tuple(k * a for a in self.betaS), k * self.d, k * self.d2)

    __rmul__ = __mul__

    def is_zero(self):
        return self.d == 0 and self.d2 == 0 and not any(self.betaS)

    def key(self):
        return list(self.betaS) + [self.d, self.d2]

    def __str__(self):
        return "(%s; %d, %d)" % (",".join(map(str, self.betaS)), self.d, self.d2)


@dataclass(frozen=True)
class Effectivity:
    I_effective: bool
    FI_effective: bool
    admissible: bool
    n: tuple
    n_prime: tuple
    n_prime_last: int


class FlopModel:
    """Cohomology and curve data of one side of the local model.

    `primed` is the model with (L, Lp) swapped; `transform_class` maps this
    model's H(X) to `primed.HX`.
    """

    def __init__(self, base, r, L, Lp, _primed=None):
        if r < 1:
            raise ValueError("r must be >= 1")
        if len(L) != r + 1 or len(Lp) != r + 1:
            raise ValueError("need r+1 = %d splitting classes for F and F'" % (r + 1))
        for c in list(L) + list(Lp):
            if c.ring is not base:
                raise ValueError("splitting classes must live in the base ring")
            if c.coeffs and c.degree() != 1:
                raise ValueError("splitting classes must be divisors on S")
        self.base = base
        self.r = r
        self.L = list(L)
        self.Lp = list(Lp)
        # H(Z) = H(S)[h]/prod(h + L_i)
        self.HZ = ExtensionRing(base, "h", monic_from_roots(base, self.L),
                                name="H(Z)")
        hZ = self.HZ.gen()
        Nroots = [self.HZ.from_sub(Lpi) - hZ for Lpi in self.Lp]
        self.HX = ExtensionRing(self.HZ, "xi",
                                monic_from_roots(self.HZ, Nroots + [self.HZ.zero()]),
                                name="H(X)")
        self.h = self.HX.from_sub(hZ)
        self.xi = self.HX.gen()
        self.a_roots = [self.h + self.HX.from_sub(x) for x in self.L]
        self.b_roots = [self.xi - self.h + self.HX.from_sub(x) for x in self.Lp]
        self.rank = self.HX.rank
        self.dim = base.top_degree + 2 * r + 1
        # canonical basis Lambda+: (base index i, l, m)
        self.exponents = []
        for t in range(self.HX.rank):
            (zi, m) = self.HX.pairs[t]
            (i, l) = self.HZ.pairs[zi]
            self.exponents.append((i, l, m))
        self._exp_index = {e: t for t, e in enumerate(self.exponents)}
        if _primed is None:
            self.primed = FlopModel(base, r, Lp, L, _primed=self)
        else:
            self.primed = _primed
        self._transform_cols = None

    def __repr__(self):
        return "FlopModel(r=%d, S=%s)" % (self.r, self.base.name)

    # classes

    def pullback(self, c):
        """Pull back a class of H(S) or H(Z) to H(X)."""
        return self.HX.from_sub(c)

    def basis_index(self, i, l, m):
        return self._exp_index[(i, l, m)]

    def basis_class(self, i, l, m):
        return self.HX.basis(self._exp_index[(i, l, m)])

    def chern_F(self):
        return chern_classes(self.base, self.L)

    def chern_Fp(self):
        return chern_classes(self.base, self.Lp)

    def segre_F(self):
        return segre_classes(self.base, self.L, max(self.base.top_degree, 2 * self.r + 2))

    def stilde(self):
        """s(F + F'^*) on S, indices 0..dim S."""
        top = max(self.base.top_degree, 2 * self.r + 2)
        return segre_of_virtual(self.L, [-x for x in self.Lp], top)

    def H_class(self, k):
        """H_k = h^k + c_1 h^{k-1} + ... + c_k in H(X), c = c(F)."""
        c = self.chern_F()
        out = self.HX.zero()
        for i in range(k + 1):
            ci = c[i] if i < len(c) else self.base.zero()
            out = out + self.pullback(ci) * self.h ** (k - i)
        return out

    def chern_N(self):
        """c(N) in H(X) for N = F' (x) O(-1)."""
        return chern_classes(self.HX, [self.pullback(x) - self.h for x in self.Lp])

    def Theta(self, j):
        """Theta_j = c_j(Q_N) = xi^j + c_1(N) xi^{j-1} + ... + c_j(N)."""
        cN = self.chern_N()
        out = self.HX.zero()
        for i in range(j + 1):
            ci = cN[i] if i < len(cN) else self.HX.zero()
            out = out + ci * self.xi ** (j - i)
        return out

    def zero_section(self):
        """[Z] in H(X), equal to Theta_{r+1}."""
        return self.Theta(self.r + 1)

    def base_duals(self):
        """Dual basis Tcheck_i of H(S) with int T_i Tcheck_j = delta_ij."""
        return self.base.dual_basis()

    def dual_class(self, T):
        """Poincare dual basis element in H(X) of a canonical basis element."""
        if len(T.coeffs) != 1 or list(T.coeffs.values())[0] != 1:
            raise ValueError("dual_class expects a canonical basis element")
        e = next(iter(T.coeffs))
        return self._duals()[e]

    def _duals(self):
        if not hasattr(self, "_dual_cache"):
            self._dual_cache = self.HX.dual_basis()
        return self._dual_cache

    def dual_class_formula(self, T):
        """Dual of a basis element via the Theta and H formulas.

        H(X) has basis z_i xi^{r+1-j} with z_i running over T_k h^l; the dual
        of z_i xi^{r+1-j} is zcheck_i Theta_j, and in H(Z) the dual of T_k h^l
        is Tcheck_k H_{r-l}.
        """
        (i, l, m) = self.exponents[next(iter(T.coeffs))]
        j = self.r + 1 - m
        Tc = self.base_duals()[i]
        return self.pullback(Tc) * self.H_class(self.r - l) * self.Theta(j)

    def pair_divisor(self, D, beta):
        """Intersection number D . beta for D in H^2(X)."""
        out = Fraction(0)
        for t, c in D.coeffs.items():
            i, l, m = self.exponents[t]
            deg = self.base.degrees[i] + l + m
            if deg != 1:
                raise ValueError("not a divisor class")
            if l == 1:
                out += c * beta.d
            elif m == 1:
                out += c * beta.d2
            else:
                out += c * self.base.pair_divisor(self.base.basis(i), beta.betaS)
        return out

    def mu_values(self, betaS):
        mu = [self.base.pair_divisor(x, betaS) for x in self.L]
        mup = [self.base.pair_divisor(x, betaS) for x in self.Lp]
        return mu, mup

    def lam(self, beta):
        """lambda_beta = (c1(F) + c1(F')) . betaS + (r+2) d2."""
        c1 = sum(self.L, self.base.zero()) + sum(self.Lp, self.base.zero())
        return self.base.pair_divisor(c1, beta.betaS) + (self.r + 2) * beta.d2

    def c1_pairing(self, beta):
        """c_1(X) . beta."""
        return self.base.pair_divisor(self.base.c1(), beta.betaS) + self.lam(beta)

    # curve classes

    def zero_curve(self):
        return CurveClass(tuple(0 for _ in range(self.base.n_mori)), 0, 0)

    def ell(self):
        return CurveClass(self.zero_curve().betaS, 1, 0)

    def gamma(self):
        return CurveClass(self.zero_curve().betaS, 0, 1)

    def canonical_lift(self, betaS):
        return CurveClass(tuple(betaS), 0, 0)

    def mu_I(self, betaS):
        mu, mup = self.mu_values(betaS)
        muI = max(mu)
        mupI = max(mup)
        return int(muI), int(mupI), int(max(muI + mupI, 0))

    def i_minimal_lift(self, betaS, decomposition=None):
        """I-minimal lift betaS - mu^I l - nu^I gamma.

        With a decomposition [(n_j, generator_j), ...] of betaS into
        primitive classes, also returns the geometric minimal lift built from
        per-generator maxima; otherwise the second value is None.
        """
        betaS = tuple(betaS)
        if not self.base.is_effective(betaS):
            raise ValueError("betaS is not effective")
        muI, mupI, nuI = self.mu_I(betaS)
        lift = CurveClass(betaS, -muI, -nuI)
        if decomposition is None:
            return lift
        mu = 0
        nu = 0
        total = [0] * len(betaS)
        for nj, gen in decomposition:
            m1, m2, _ = self.mu_I(gen)
            mu += nj * m1
            nu += nj * max(m1 + m2, 0)
            total = [a + nj * b for a, b in zip(total, gen)]
        if tuple(total) != betaS:
            raise ValueError("decomposition does not sum to betaS")
        return lift, CurveClass(betaS, -mu, -nu)

    def mori_decomposition(self, betaS):
        return [(b, g) for b, g in zip(betaS, self.base.mori_generators) if b]

    def is_I_effective(self, beta):
        if not self.base.is_effective(beta.betaS):
            return False
        muI, _, nuI = self.mu_I(beta.betaS)
        return beta.d >= -muI and beta.d2 >= -nuI

    def effectivity(self, beta):
        if self.base.is_effective(beta.betaS):
            muI, mupI, nuI = self.mu_I(beta.betaS)
            I_eff = beta.d >= -muI and beta.d2 >= -nuI
            FI_eff = beta.d + muI >= 0 and beta.d2 - beta.d + mupI >= 0
        else:
            I_eff = FI_eff = False
        n = tuple(int(-self.pair_divisor(a, beta)) for a in self.a_roots)
        npr = tuple(int(-self.pair_divisor(b, beta)) for b in self.b_roots)
        nlast = -beta.d2
        adm = min(n) >= 0 and min(npr) >= 0 and nlast >= 0
        return Effectivity(I_eff, FI_eff, adm, n, npr, nlast)

    # the correspondence

    def transform_curve(self, beta):
        return CurveClass(beta.betaS, beta.d2 - beta.d, beta.d2)

    def _transform_columns(self):
        if self._transform_cols is None:
            P = self.primed
            u = P.xi - P.h
            cols = []
            for (i, l, m) in self.exponents:
                img = P.pullback(P.base.basis(i)) * u ** l * P.xi ** m
                cols.append(img)
            self._transform_cols = cols
        return self._transform_cols

    def transform_class(self, a):
        """T_i h^l xi^m -> T_i (xi' - h')^l xi'^m, extended linearly."""
        if a.ring is not self.HX:
            raise ValueError("class is not in this model's H(X)")
        cols = self._transform_columns()
        out = self.primed.HX.zero()
        for t, c in a.coeffs.items():
            out = out + cols[t] * c
        return out

    def transform_matrix(self):
        """Columns: images of the canonical basis, as coefficient vectors."""
        return [col.vector() for col in self._transform_columns()]

    def transform_divisor_coords(self):
        """Images of (h, xi) under the correspondence: (xi' - h', xi')."""
        P = self.primed
        return P.xi - P.h, P.xi
