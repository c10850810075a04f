"""Laurent polynomials in z with coefficients in a graded ring."""

from fractions import Fraction


class Laurent:
    """Finite sum of z^k * c_k, c_k a CohClass of a fixed ring."""

    __slots__ = ("terms", "ring")

    def __init__(self, terms, ring):
        self.ring = ring
        self.terms = {k: c for k, c in terms.items() if not c.is_zero()}

    @classmethod
    def zero(cls, ring):
        return cls({}, ring)

    @classmethod
    def one(cls, ring):
        return cls({0: ring.one()}, ring)

    @classmethod
    def constant(cls, c):
        return cls({0: c}, c.ring)

    @classmethod
    def inverse_linear(cls, v, m):
        """1/(v + m z) for a nilpotent class v and integer m != 0."""
        if m == 0:
            raise ZeroDivisionError("m must be nonzero")
        ring = v.ring
        terms = {}
        power = ring.one()
        k = 0
        while not power.is_zero():
            terms[-k - 1] = power * Fraction((-1) ** k, m ** (k + 1))
            power = power * v
            k += 1
        return cls(terms, ring)

    @classmethod
    def linear(cls, v, m):
        """v + m z."""
        ring = v.ring
        return cls({0: v, 1: ring.one() * m}, ring)

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join("(%r)*z^%d" % (self.terms[k], k) for k in sorted(self.terms, reverse=True))

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, Laurent):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return Laurent(out, self.ring)

    def __neg__(self):
        return Laurent({k: -c for k, c in self.terms.items()}, self.ring)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Laurent):
            out = {}
            for i, a in self.terms.items():
                for j, b in other.terms.items():
                    ab = a * b
                    if ab.is_zero():
                        continue
                    out[i + j] = out[i + j] + ab if i + j in out else ab
            return Laurent(out, self.ring)
        # class or scalar
        return Laurent({k: c * other for k, c in self.terms.items()}, self.ring)

    def __rmul__(self, other):
        return self * other

    def shift(self, k):
        """Multiply by z^k."""
        return Laurent({i + k: c for i, c in self.terms.items()}, self.ring)

    def max_power(self):
        return max(self.terms) if self.terms else None

    def min_power(self):
        return min(self.terms) if self.terms else None

    def coefficient(self, k):
        return self.terms.get(k, self.ring.zero())

    def nonnegative_part(self):
        return Laurent({k: c for k, c in self.terms.items() if k >= 0}, self.ring)

    def lift(self, ring):
        """Pull the coefficients back into an extension ring."""
        return Laurent({k: ring.from_sub(c) for k, c in self.terms.items()}, ring)

    def rows(self):
        """Deterministic (z-power, {label: coeff}) rows, highest power first."""
        out = []
        for k in sorted(self.terms, reverse=True):
            c = self.terms[k]
            out.append((k, {self.ring.labels[i]: str(v) for i, v in sorted(c.coeffs.items())}))
        return out
