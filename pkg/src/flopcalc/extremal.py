"""
Extremal-ray generating series as polynomials in the symbol f.

f(q) = q / (1 - (-1)^{r+1} q) = sum_{d>=1} (-1)^{(d-1)(r+1)} q^d, with
delta = q d/dq acting by delta f = f + (-1)^{r+1} f^2.  Analytic continuation
q -> 1/q acts by f -> (-1)^r - f.

Coefficients of an `FPoly` are either Fractions or classes of a base ring;
they only need +, -, scalar multiplication and (for products) ring
multiplication.
"""

from fractions import Fraction


def _is_zero(c):
    return c == 0


class FPoly:
    """sum_k coeffs[k] f^k, with parity context r."""

    def __init__(self, coeffs, r, zero=Fraction(0)):
        self.r = r
        self.zero = zero
        self.coeffs = {k: c for k, c in coeffs.items() if not _is_zero(c)}

    @classmethod
    def f(cls, r, one=Fraction(1), zero=Fraction(0)):
        return cls({1: one}, r, zero)

    @classmethod
    def constant(cls, c, r, zero=Fraction(0)):
        return cls({0: c}, r, zero)

    def _new(self, coeffs):
        return FPoly(coeffs, self.r, self.zero)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        return " + ".join("(%r)f^%d" % (self.coeffs[k], k) for k in sorted(self.coeffs))

    def degree(self):
        return max(self.coeffs) if self.coeffs else -1

    def coefficient(self, k):
        return self.coeffs.get(k, self.zero)

    def __eq__(self, other):
        if isinstance(other, FPoly):
            keys = set(self.coeffs) | set(other.coeffs)
            return all(self.coefficient(k) == other.coefficient(k) for k in keys)
        return NotImplemented

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return self._new(out)

    def __neg__(self):
        return self._new({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, FPoly):
            out = {}
            for i, a in self.coeffs.items():
                for j, b in other.coeffs.items():
                    ab = a * b
                    out[i + j] = out[i + j] + ab if i + j in out else ab
            return self._new(out)
        return self._new({k: c * other for k, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __pow__(self, n):
        out = self._new({0: _one_like(self)})
        for _ in range(n):
            out = out * self
        return out


def _one_like(p):
    for c in p.coeffs.values():
        return c * 0 + 1 if isinstance(c, Fraction) else c.ring.one()
    if isinstance(p.zero, Fraction):
        return Fraction(1)
    return p.zero.ring.one()


def _sign(r):
    return (-1) ** (r + 1)


def delta_act(p):
    """delta f^k = k f^k + k (-1)^{r+1} f^{k+1}; constants are killed."""
    s = _sign(p.r)
    out = {}
    for k, c in p.coeffs.items():
        if k == 0:
            continue
        for kk, cc in ((k, c * k), (k + 1, c * (k * s))):
            out[kk] = out[kk] + cc if kk in out else cc
    return FPoly(out, p.r, p.zero)


def continue_f(p):
    """Substitute f -> (-1)^r - f."""
    sub = FPoly({0: Fraction((-1) ** p.r), 1: Fraction(-1)}, p.r)
    out = FPoly({}, p.r, p.zero)
    power = FPoly({0: Fraction(1)}, p.r)
    powers = [power]
    for _ in range(p.degree()):
        powers.append(powers[-1] * sub)
    for k, c in p.coeffs.items():
        out = out + FPoly({i: c * x for i, x in powers[k].coeffs.items()}, p.r, p.zero)
    return out


def f_power_series(r, k, d_max):
    """Coefficients of q^0..q^d_max in f^k (exact integers)."""
    s = _sign(r)
    f = [0] + [s ** (d - 1) for d in range(1, d_max + 1)]
    out = [1] + [0] * d_max
    for _ in range(k):
        new = [0] * (d_max + 1)
        for i, a in enumerate(out):
            if a:
                for j in range(1, d_max + 1 - i):
                    new[i + j] += a * f[j]
        out = new
    return out


def expand_f_series(p, d_max):
    """Coefficients of q^1..q^d_max of p (the constant term is not listed)."""
    out = [p.zero] * d_max
    for k, c in p.coeffs.items():
        ser = f_power_series(p.r, k, d_max)
        for d in range(1, d_max + 1):
            if ser[d]:
                out[d - 1] = out[d - 1] + c * ser[d]
    return out


def fit_f_polynomial(series, deg_bound, r, constant=None, guard=2, zero=Fraction(0)):
    """The f-polynomial of degree <= deg_bound with the given q^1.. coefficients.

    `series[d-1]` is the coefficient of q^d.  At least deg_bound + guard
    coefficients are required; every supplied coefficient must be matched,
    otherwise ValueError is raised.
    """
    if len(series) < deg_bound + guard:
        raise ValueError("series too short for degree %d with guard %d" % (deg_bound, guard))
    cols = [f_power_series(r, k, len(series)) for k in range(1, deg_bound + 1)]
    coeffs = {}
    remaining = list(series)
    # triangular: f^k starts at q^k with coefficient 1
    for k in range(1, deg_bound + 1):
        c = remaining[k - 1]
        if not _is_zero(c):
            coeffs[k] = c
            for d in range(1, len(series) + 1):
                if cols[k - 1][d]:
                    remaining[d - 1] = remaining[d - 1] - c * cols[k - 1][d]
    if any(not _is_zero(c) for c in remaining):
        raise ValueError("series is not an f-polynomial of degree <= %d" % deg_bound)
    if constant is not None and not _is_zero(constant):
        coeffs[0] = constant
    return FPoly(coeffs, r, zero)


def delta_powers_of_f(r, m):
    """delta^0 f, ..., delta^m f as FPolys."""
    out = [FPoly.f(r)]
    for _ in range(m):
        out.append(delta_act(out[-1]))
    return out


def to_delta_form(p):
    """Write p (no constant term) as sum_i w_i delta^i f; returns [w_0, ...]."""
    if not _is_zero(p.coefficient(0)):
        raise ValueError("delta-form needs a vanishing constant term")
    top = p.degree() - 1
    if top < 0:
        return []
    basis = delta_powers_of_f(p.r, top)
    rest = FPoly(dict(p.coeffs), p.r, p.zero)
    w = [p.zero] * (top + 1)
    for i in range(top, -1, -1):
        lead = basis[i].coefficient(i + 1)
        c = rest.coefficient(i + 1) * (Fraction(1) / lead)
        w[i] = c
        rest = rest - FPoly({k: c * x for k, x in basis[i].coeffs.items()}, p.r, p.zero)
    if rest.coeffs:
        raise AssertionError("delta-form conversion left a remainder")
    return w


def from_delta_form(w, r, zero=Fraction(0)):
    basis = delta_powers_of_f(r, max(len(w) - 1, 0))
    out = FPoly({}, r, zero)
    for i, c in enumerate(w):
        out = out + FPoly({k: c * x for k, x in basis[i].coeffs.items()}, r, zero)
    return out


def W_recursive(model, nu):
    """W_nu = s_nu f + sum_{j=1}^nu W_{nu-j}((-1)^r c_j f - (-1)^{r+j} c'_j f - c_j)."""
    r = model.r
    if not 0 <= nu <= r - 1:
        raise ValueError("nu must satisfy 0 <= nu <= r-1")
    base = model.base
    zero = base.zero()
    c = model.chern_F()
    cp = model.chern_Fp()
    s = model.segre_F()

    def cl(seq, j):
        return seq[j] if j < len(seq) else zero

    W = [FPoly({1: base.one()}, r, zero)]
    for n in range(1, nu + 1):
        acc = FPoly({1: cl(s, n)}, r, zero)
        for j in range(1, n + 1):
            factor = FPoly({1: cl(c, j) * (-1) ** r - cl(cp, j) * (-1) ** (r + j),
                            0: -cl(c, j)}, r, zero)
            acc = acc + W[n - j] * factor
        W.append(acc)
    return W[nu]


def functional_equation_check(model, nu):
    """W_nu - (-1)^{nu+1} continue(W'_nu) == (-1)^r stilde_nu."""
    r = model.r
    W = W_recursive(model, nu)
    Wp = continue_f(W_recursive(model.primed, nu))
    lhs = W - Wp * ((-1) ** (nu + 1))
    st = model.stilde()
    target = st[nu] * ((-1) ** r) if nu < len(st) else model.base.zero()
    rhs = FPoly({0: target}, r, model.base.zero())
    return {"pass": lhs == rhs, "nu": nu, "lhs": repr(lhs), "rhs": repr(rhs)}


def mu1_coefficients(model, d_max):
    """Coefficient of q^d in W_1 predicted by the degree-one formula:
    (-1)^{(d-1)(r+1)} (stilde_1 - d c_1(F + F'))."""
    r = model.r
    st1 = model.stilde()[1]
    c1 = model.chern_F()[1] + model.chern_Fp()[1]
    return [(st1 - c1 * d) * (-1) ** ((d - 1) * (r + 1)) for d in range(1, d_max + 1)]


def two_point_series(r, d_max):
    """Coefficients of q^1..q^d_max of sum (-1)^{(d-1)(r+1)} q^d / d."""
    return [Fraction((-1) ** ((d - 1) * (r + 1)), d) for d in range(1, d_max + 1)]


def delta_series(series):
    """q d/dq on a coefficient list starting at q^1."""
    return [c * d for d, c in enumerate(series, start=1)]
