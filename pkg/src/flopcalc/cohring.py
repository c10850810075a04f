"""
Finite-rank graded commutative Q-algebras with monomial bases.

Two kinds of rings are built here:

* base rings H(S) for S a point, a projective space or a finite product of
  projective spaces, with small quantum cohomology and J-function data;
* monic extensions R[x]/(x^n + a_1 x^{n-1} + ... + a_n), used twice to build
  the cohomology of a double projective bundle.

Elements are `CohClass` objects, always stored in reduced canonical form.
All coefficients are `fractions.Fraction`.
"""

from fractions import Fraction
from itertools import product as iproduct

from .laurent import Laurent


def _frac(x):
    return x if isinstance(x, Fraction) else Fraction(x)


class GradedRing:
    """A graded Q-algebra given by a monomial basis and structure constants.

    `degrees[i]` is the Chow degree of basis element i and `integrals[i]` is
    its integral.  `table[(i, j)]` is a sparse dict k -> coefficient.
    """

    def __init__(self, labels, degrees, table, integrals, top_degree, name="R"):
        self.labels = list(labels)
        self.degrees = list(degrees)
        self.table = table
        self.integrals = [_frac(x) for x in integrals]
        self.top_degree = top_degree
        self.name = name
        self.rank = len(self.labels)
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        self._mulmats = {}

    def __repr__(self):
        return "%s(%s, rank=%d)" % (type(self).__name__, self.name, self.rank)

    # elements

    def element(self, coeffs):
        return CohClass(self, coeffs)

    def zero(self):
        return CohClass(self, {})

    def one(self):
        return CohClass(self, {self.unit_index(): Fraction(1)})

    def unit_index(self):
        return 0

    def basis(self, i):
        return CohClass(self, {i: Fraction(1)})

    def basis_elements(self):
        return [self.basis(i) for i in range(self.rank)]

    def index_of(self, label):
        return self._index[label]

    def scalar(self, c):
        return self.one() * c

    # arithmetic on raw dicts

    def _mul(self, a, b):
        out = {}
        table = self.table
        for i, x in a.items():
            for j, y in b.items():
                xy = x * y
                for k, c in table.get((i, j), {}).items():
                    v = out.get(k, 0) + xy * c
                    if v:
                        out[k] = v
                    else:
                        out.pop(k, None)
        return out

    def mul(self, a, b):
        if a.ring is not self or b.ring is not self:
            raise ValueError("mismatched parent rings")
        return CohClass(self, self._mul(a.coeffs, b.coeffs))

    def integrate(self, a):
        return sum((c * self.integrals[i] for i, c in a.coeffs.items()),
                   Fraction(0))

    def pairing_matrix(self):
        n = self.rank
        B = self.basis_elements()
        return [[self.integrate(B[i] * B[j]) for j in range(n)] for i in range(n)]

    def dual_basis(self):
        """Classes T^e with integral(T_f * T^e) = delta_{ef}."""
        from .linalg import mat_inverse
        G = self.pairing_matrix()
        Ginv = mat_inverse(G)
        n = self.rank
        # sum_k G[f][k] X[k][e] = delta  => X = G^{-1}
        return [CohClass(self, {k: Ginv[k][e] for k in range(n) if Ginv[k][e]})
                for e in range(n)]

    def mul_matrix(self, a):
        """Matrix (dict of dicts, column-major: col j -> {row: coeff}) of x -> a*x."""
        cols = {}
        for j in range(self.rank):
            v = self._mul(a.coeffs, {j: Fraction(1)})
            if v:
                cols[j] = v
        return cols


class CohClass:
    """An element of a `GradedRing`, stored as index -> Fraction."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring, coeffs):
        self.ring = ring
        self.coeffs = {i: _frac(c) for i, c in coeffs.items() if c}

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for i in sorted(self.coeffs):
            c = self.coeffs[i]
            lab = self.ring.labels[i]
            parts.append("%s*%s" % (c, lab) if lab != "1" else str(c))
        return " + ".join(parts)

    def _check(self, other):
        if not isinstance(other, CohClass):
            return self.ring.scalar(other)
        if other.ring is not self.ring:
            raise ValueError("mismatched parent rings")
        return other

    def __add__(self, other):
        other = self._check(other)
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out.get(i, 0) + c
        return CohClass(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return CohClass(self.ring, {i: -c for i, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if isinstance(other, CohClass):
            return self.ring.mul(self, other)
        other = _frac(other)
        return CohClass(self.ring, {i: c * other for i, c in self.coeffs.items()})

    def __rmul__(self, other):
        return self * other

    def __pow__(self, n):
        out = self.ring.one()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, CohClass):
            return self.ring is other.ring and self.coeffs == other.coeffs
        if other == 0:
            return not self.coeffs
        return self == self.ring.scalar(other)

    def __hash__(self):
        return hash((id(self.ring), frozenset(self.coeffs.items())))

    def is_zero(self):
        return not self.coeffs

    def component(self, k):
        """Degree-k homogeneous part."""
        deg = self.ring.degrees
        return CohClass(self.ring, {i: c for i, c in self.coeffs.items() if deg[i] == k})

    def components(self):
        deg = self.ring.degrees
        out = {}
        for i, c in self.coeffs.items():
            out.setdefault(deg[i], {})[i] = c
        return {k: CohClass(self.ring, v) for k, v in sorted(out.items())}

    def degree(self):
        """Degree of a homogeneous nonzero class, else None."""
        ds = {self.ring.degrees[i] for i in self.coeffs}
        return ds.pop() if len(ds) == 1 else None

    def integral(self):
        return self.ring.integrate(self)

    def vector(self):
        return [self.coeffs.get(i, Fraction(0)) for i in range(self.ring.rank)]


# base rings


class BaseRing(GradedRing):
    """H(S) for S a product of projective spaces P^{n_1} x ... x P^{n_k}.

    Basis elements are exponent tuples (e_1, ..., e_k) with 0 <= e_j <= n_j,
    i.e. the monomials p_1^{e_1} ... p_k^{e_k}.  A point is the empty product.
    Mori generators are the lines line_j, with p_i . line_j = delta_ij.
    """

    def __init__(self, dims):
        self.dims = tuple(dims)
        exps = sorted(iproduct(*[range(n + 1) for n in self.dims]),
                      key=lambda e: (sum(e), tuple(-x for x in e)))
        index = {e: i for i, e in enumerate(exps)}
        table = {}
        for i, a in enumerate(exps):
            for j, b in enumerate(exps):
                c = tuple(x + y for x, y in zip(a, b))
                if all(x <= n for x, n in zip(c, self.dims)):
                    table[(i, j)] = {index[c]: Fraction(1)}
        top = tuple(self.dims)
        integrals = [1 if e == top else 0 for e in exps]
        labels = [self._label(e) for e in exps]
        if not self.dims:
            name = "pt"
        else:
            name = " x ".join("P%d" % n for n in self.dims)
        super().__init__(labels, [sum(e) for e in exps], table, integrals,
                         sum(self.dims), name=name)
        self.exponents = exps
        self._exp_index = index
        self.divisor_basis = [index[tuple(int(i == j) for i in range(len(self.dims)))]
                              for j in range(len(self.dims))]
        # p_i . line_j
        self.mori_generators = [tuple(int(i == j) for i in range(len(self.dims)))
                                for j in range(len(self.dims))]
        self._validate_J()

    def _label(self, e):
        if not any(e):
            return "1"
        if len(e) == 1:
            return "p" if e[0] == 1 else "p^%d" % e[0]
        parts = []
        for j, x in enumerate(e):
            if x:
                parts.append("p%d" % (j + 1) if x == 1 else "p%d^%d" % (j + 1, x))
        return "*".join(parts)

    @property
    def n_mori(self):
        return len(self.dims)

    def divisor(self, degrees):
        """The divisor class sum_j degrees[j] p_j (line bundle O(degrees))."""
        degrees = list(degrees)
        if len(degrees) != self.n_mori:
            raise ValueError("expected %d degrees, got %d" % (self.n_mori, len(degrees)))
        return CohClass(self, {self.divisor_basis[j]: k for j, k in enumerate(degrees)})

    def divisor_degrees(self, D):
        """Inverse of `divisor`: coefficients of a degree-1 class on the p_j."""
        for i in D.coeffs:
            if self.degrees[i] != 1:
                raise ValueError("not a divisor class: %r" % (D,))
        return tuple(D.coeffs.get(i, Fraction(0)) for i in self.divisor_basis)

    def pair_divisor(self, D, betaS):
        """Intersection number D . betaS, betaS given in the Mori-generator basis."""
        return sum((c * b for c, b in zip(self.divisor_degrees(D), betaS)), Fraction(0))

    def is_effective(self, betaS):
        return all(b >= 0 for b in betaS)

    def exponent_of(self, i):
        return self.exponents[i]

    def index_of_exponent(self, e):
        return self._exp_index.get(tuple(e))

    def c1(self):
        """First Chern class of S."""
        return self.divisor([n + 1 for n in self.dims])

    # quantum data

    def qde_data(self):
        """Small quantum products p_j * T_i along divisor directions.

        Returns a dict (j, i, betaS) -> {k: coeff}: p_j * T_i has the term
        q^betaS coeff T_k.  On P^n, p * p^n = q; on products the factors are
        independent.
        """
        out = {}
        zero = tuple(0 for _ in self.dims)
        for j in range(self.n_mori):
            for i, e in enumerate(self.exponents):
                e2 = list(e)
                e2[j] += 1
                if e2[j] <= self.dims[j]:
                    out[(j, i, zero)] = {self._exp_index[tuple(e2)]: Fraction(1)}
                else:
                    e2[j] = 0
                    beta = tuple(int(k == j) for k in range(self.n_mori))
                    out[(j, i, beta)] = {self._exp_index[tuple(e2)]: Fraction(1)}
        return out

    def J_coefficient(self, betaS):
        """J^S_{betaS} without its exponential prefactor, as a Laurent series in z.

        For P^n this is 1/prod_{m=1}^d (p+mz)^{n+1}; products multiply.
        Returns None-equivalent zero Laurent when betaS is not effective.
        """
        betaS = tuple(betaS)
        if len(betaS) != self.n_mori:
            raise ValueError("betaS has wrong length")
        if not self.is_effective(betaS):
            return Laurent.zero(self)
        out = Laurent.one(self)
        for j, d in enumerate(betaS):
            p = self.basis(self.divisor_basis[j])
            for m in range(1, d + 1):
                inv = Laurent.inverse_linear(p, m)
                for _ in range(self.dims[j] + 1):
                    out = out * inv
        return out

    def _validate_J(self):
        # (p_j + z d_j)^{n_j+1} J_d = J_{d - line_j} on a few degrees
        for j in range(self.n_mori):
            p = self.basis(self.divisor_basis[j])
            for d in range(1, 3):
                beta = tuple(d if k == j else 0 for k in range(self.n_mori))
                lower = tuple(d - 1 if k == j else 0 for k in range(self.n_mori))
                lhs = self.J_coefficient(beta)
                factor = Laurent({0: p, 1: self.one() * d}, self)
                for _ in range(self.dims[j] + 1):
                    lhs = lhs * factor
                if lhs != self.J_coefficient(lower):
                    raise AssertionError("base J data fails its PF equation")


def build_base(kind, n=None, factors=None):
    """Build a base ring: kind in {"point", "projspace", "product"}."""
    if kind == "point":
        return BaseRing(())
    if kind == "projspace":
        if n is None or n < 1:
            raise ValueError("projspace needs n >= 1")
        return BaseRing((n,))
    if kind == "product":
        dims = []
        for f in factors or []:
            if isinstance(f, BaseRing):
                dims.extend(f.dims)
            else:
                if f < 1:
                    raise ValueError("projective factors need n >= 1")
                dims.append(f)
        return BaseRing(tuple(dims))
    raise ValueError("unsupported base kind %r" % (kind,))


# monic extensions


class ExtensionRing(GradedRing):
    """R[x]/(x^n + a_1 x^{n-1} + ... + a_n) with deg x = 1, deg a_k = k.

    Basis: (i, k) for i a basis index of R and 0 <= k < n, meaning T_i x^k.
    Integration: the fiber integral of T_i x^k is delta_{k, n-1} int_R T_i,
    which is the projective-bundle pushforward for x = c_1(O(1)).
    """

    def __init__(self, sub, var, relation, name=None):
        self.sub = sub
        self.var = var
        self.n = len(relation)
        self.relation = [a if isinstance(a, CohClass) else sub.scalar(a) for a in relation]
        for k, a in enumerate(self.relation, start=1):
            if a.coeffs and a.degree() != k:
                raise ValueError("relation coefficient a_%d has wrong degree" % k)
        n = self.n
        pairs = [(i, k) for i in range(sub.rank) for k in range(n)]
        idx = {p: t for t, p in enumerate(pairs)}
        # reduced powers x^m, m < 2n-1, as lists of n sub-ring dicts
        powers = []
        for m in range(2 * n - 1):
            if m < n:
                powers.append([{sub.unit_index(): Fraction(1)} if k == m else {}
                               for k in range(n)])
            else:
                prev = powers[m - 1]
                # x * prev: shift, then x^n = -sum a_k x^{n-k}
                top = prev[n - 1]
                cur = [{}] + [dict(prev[k]) for k in range(n - 1)]
                if top:
                    for k in range(1, n + 1):
                        t = sub._mul(top, self.relation[k - 1].coeffs)
                        tgt = cur[n - k]
                        for key, c in t.items():
                            v = tgt.get(key, 0) - c
                            if v:
                                tgt[key] = v
                            else:
                                tgt.pop(key, None)
                powers.append(cur)
        self._powers = powers
        table = {}
        for (i, k) in pairs:
            for (j, l) in pairs:
                base = sub.table.get((i, j))
                if not base:
                    continue
                out = {}
                for e, poly in enumerate(powers[k + l]):
                    if not poly:
                        continue
                    t = sub._mul(base, poly)
                    for key, c in t.items():
                        out[idx[(key, e)]] = out.get(idx[(key, e)], 0) + c
                out = {a: b for a, b in out.items() if b}
                if out:
                    table[(idx[(i, k)], idx[(j, l)])] = out
        labels = [self._label(sub.labels[i], k) for (i, k) in pairs]
        degrees = [sub.degrees[i] + k for (i, k) in pairs]
        integrals = [sub.integrals[i] if k == n - 1 else 0 for (i, k) in pairs]
        super().__init__(labels, degrees, table, integrals, sub.top_degree + n - 1,
                         name=name or "%s[%s]" % (sub.name, var))
        self.pairs = pairs
        self._pair_index = idx

    def _label(self, lab, k):
        if k == 0:
            return lab
        xs = self.var if k == 1 else "%s^%d" % (self.var, k)
        return xs if lab == "1" else "%s*%s" % (lab, xs)

    def unit_index(self):
        return self._pair_index[(self.sub.unit_index(), 0)]

    def gen(self):
        return CohClass(self, {self._pair_index[(self.sub.unit_index(), 1)]: 1}) \
            if self.n > 1 else self.from_sub(-self.relation[0])

    def from_sub(self, a):
        """Pull back a class of the sub-ring (recursively from any ancestor)."""
        if a.ring is self:
            return a
        if a.ring is not self.sub:
            a = self.sub.from_sub(a)
        return CohClass(self, {self._pair_index[(i, 0)]: c for i, c in a.coeffs.items()})

    def split(self, a):
        """Write a as sum_k c_k x^k with c_k in the sub-ring."""
        out = [dict() for _ in range(self.n)]
        for t, c in a.coeffs.items():
            i, k = self.pairs[t]
            out[k][i] = c
        return [CohClass(self.sub, d) for d in out]

    def pushforward(self, a):
        """Fiber integral: coefficient of x^{n-1}."""
        return self.split(a)[self.n - 1]


def _from_sub_base(self, a):
    if a.ring is self:
        return a
    raise ValueError("class does not belong to an ancestor ring")


GradedRing.from_sub = _from_sub_base


def monic_from_roots(ring, roots):
    """Coefficients a_1..a_n of prod (x + root) = x^n + a_1 x^{n-1} + ... ."""
    coeffs = [ring.one()]
    for v in roots:
        new = [ring.zero() for _ in range(len(coeffs) + 1)]
        for k, c in enumerate(coeffs):
            new[k] = new[k] + c
            new[k + 1] = new[k + 1] + c * v
        coeffs = new
    return coeffs[1:]


def chern_classes(ring, roots):
    """[c_0, c_1, ..., c_n] of the split bundle with the given Chern roots."""
    return [ring.one()] + monic_from_roots(ring, roots)


def invert_series(ring, c, top):
    """Inverse of the total class sum c_k (c_0 = 1) up to degree `top`."""
    s = [ring.one()]
    for k in range(1, top + 1):
        acc = ring.zero()
        for i in range(1, min(k, len(c) - 1) + 1):
            acc = acc + c[i] * s[k - i]
        s.append(-acc)
    return s


def series_product(ring, a, b, top):
    out = []
    for k in range(top + 1):
        acc = ring.zero()
        for i in range(k + 1):
            if i < len(a) and k - i < len(b):
                acc = acc + a[i] * b[k - i]
        out.append(acc)
    return out


def segre_classes(ring, roots, top=None):
    """Segre classes s = 1/c of a split bundle, s_0..s_top."""
    top = ring.top_degree if top is None else top
    return invert_series(ring, chern_classes(ring, roots), top)


def segre_of_virtual(F_classes, Fdual_classes, top=None):
    """s_i(F + G) for split F, G given by Chern roots, i = 0..top.

    For the virtual bundle F + F'^* pass the roots of F'^* (that is, -L'_i)
    as `Fdual_classes`.
    """
    roots = list(F_classes) + list(Fdual_classes)
    ring = roots[0].ring
    top = ring.top_degree if top is None else top
    c = series_product(ring, chern_classes(ring, F_classes),
                       chern_classes(ring, Fdual_classes), top)
    return invert_series(ring, c, top)
