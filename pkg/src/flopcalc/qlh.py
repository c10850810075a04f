"""
Quantum Leray-Hirsch: the first-order system on H(X) from Picard-Fuchs data.

For the naive quantizations d^{ze} of the canonical basis,

    z d_a (d^{ze} I) = sum_e' (d^{ze'} I) (C_a)_{e'e},

with C_a a series in Q^beta whose coefficients are polynomials in z.  C_a is
obtained by rewriting z d_a d^{ze} modulo the left ideal generated by
box_l, box_gamma and the lifted base QDE until only canonical words remain.
The gauge transform B (= the Birkhoff matrix, B_0 = Id) removes z:

    z d_a B = B C_a - Ct_a B,   Ct_a z-free.

Series are truncated to a `TruncationWindow`; for S = pt or P^1 the cone
offsets are additive, so a product of window classes lands in the window
only when both factors do.
"""

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count

from .birkhoff import basis_word, supports_naive_quantization
from .ifunc import IFunction, grade
from .linalg import mat_inverse
from .pfops import DiffOp, _expand_shifted, _word_add, generators, word_factor

ZERO = Fraction(0)


# matrices over truncated Novikov series with Laurent coefficients in z


def _madd(A, B, c=1):
    """A + c B for sparse matrices {i: {j: x}} (A is modified)."""
    for i, row in B.items():
        Ar = A.setdefault(i, {})
        for j, x in row.items():
            v = Ar.get(j, ZERO) + c * x
            if v:
                Ar[j] = v
            else:
                Ar.pop(j, None)
        if not Ar:
            A.pop(i)
    return A


def _mmul(A, B):
    out = {}
    for i, row in A.items():
        acc = {}
        for k, x in row.items():
            Bk = B.get(k)
            if not Bk:
                continue
            for j, y in Bk.items():
                acc[j] = acc.get(j, ZERO) + x * y
        acc = {j: v for j, v in acc.items() if v}
        if acc:
            out[i] = acc
    return out


def _mscale(A, c):
    return {i: {j: x * c for j, x in row.items()} for i, row in A.items()} if c else {}


def _dense(A, n):
    return [[A.get(i, {}).get(j, ZERO) for j in range(n)] for i in range(n)]


def _sparse(M):
    out = {}
    for i, row in enumerate(M):
        r = {j: Fraction(x) for j, x in enumerate(row) if x}
        if r:
            out[i] = r
    return out


class ConnectionMatrix:
    """sum_beta Q^beta sum_k z^k M_{beta,k}, truncated to a window.

    `terms` maps a CurveClass to {k: sparse matrix {i: {j: Fraction}}}.
    """

    def __init__(self, model, window, terms=None, classes=None):
        self.model = model
        self.window = window
        self.rank = model.rank
        self._classes = classes if classes is not None else frozenset(window.classes(model))
        self.terms = {}
        for beta, by_k in (terms or {}).items():
            if beta not in self._classes:
                continue
            kept = {k: M for k, M in by_k.items() if M}
            if kept:
                self.terms[beta] = kept

    def _new(self, terms):
        return ConnectionMatrix(self.model, self.window, terms, self._classes)

    @classmethod
    def zero(cls, model, window):
        return cls(model, window)

    @classmethod
    def identity(cls, model, window):
        return cls.constant(model, window, {i: {i: Fraction(1)} for i in range(model.rank)})

    @classmethod
    def constant(cls, model, window, M):
        return cls(model, window, {model.zero_curve(): {0: M}})

    @classmethod
    def from_columns(cls, model, window, cols):
        """cols[e] = {row: {(beta, k): value}}."""
        terms = {}
        for e, col in enumerate(cols):
            for i, ser in col.items():
                for (beta, k), v in ser.items():
                    if v:
                        row = terms.setdefault(beta, {}).setdefault(k, {}).setdefault(i, {})
                        row[e] = row.get(e, ZERO) + v
        return cls(model, window, terms)

    # algebra

    def __add__(self, other):
        out = {b: {k: _madd({}, M) for k, M in d.items()} for b, d in self.terms.items()}
        for b, d in other.terms.items():
            ob = out.setdefault(b, {})
            for k, M in d.items():
                _madd(ob.setdefault(k, {}), M)
        return self._new(out)

    def __neg__(self):
        return self._new({b: {k: _mscale(M, -1) for k, M in d.items()} for b, d in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return self._new({b: {k: _mscale(M, c) for k, M in d.items()} for b, d in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, ConnectionMatrix):
            return self.scale(Fraction(other))
        out = {}
        classes = self._classes
        for b1, d1 in self.terms.items():
            for b2, d2 in other.terms.items():
                b = b1 + b2
                if b not in classes:
                    continue
                ob = out.setdefault(b, {})
                for k1, M1 in d1.items():
                    for k2, M2 in d2.items():
                        _madd(ob.setdefault(k1 + k2, {}), _mmul(M1, M2))
        return self._new(out)

    def __eq__(self, other):
        return isinstance(other, ConnectionMatrix) and (self - other).is_zero()

    def is_zero(self):
        return not self.terms

    def at(self, beta):
        return self.terms.get(beta, {})

    def entry(self, i, j):
        """{(beta, k): value} for the (i, j) entry."""
        out = {}
        for b, d in self.terms.items():
            for k, M in d.items():
                v = M.get(i, {}).get(j)
                if v:
                    out[(b, k)] = v
        return out

    def column(self, j):
        out = {}
        for b, d in self.terms.items():
            for k, M in d.items():
                for i, row in M.items():
                    v = row.get(j)
                    if v:
                        out.setdefault(i, {})[(b, k)] = v
        return out

    def z_degrees(self):
        """beta -> (min z-power, max z-power)."""
        return {b: (min(d), max(d)) for b, d in self.terms.items()}

    def is_z_free(self):
        return all(set(d) == {0} for d in self.terms.values())

    def derivative(self, gens, a):
        """z d_a acting on the Novikov monomials: Q^beta -> z (T_a . beta) Q^beta."""
        out = {}
        for b, d in self.terms.items():
            s = gens.pairing(a, b)
            if s:
                out[b] = {k + 1: _mscale(M, s) for k, M in d.items()}
        return self._new(out)

    def inverse(self):
        """Inverse by the Neumann series; the beta = 0 part must be z-free and invertible."""
        zero = self.model.zero_curve()
        base = self.at(zero)
        if set(base) - {0}:
            raise ValueError("constant term depends on z")
        A0inv = _sparse(mat_inverse(_dense(base.get(0, {}), self.rank)))
        A0 = self._new({zero: {0: A0inv}})
        N = self._new({b: d for b, d in self.terms.items() if b != zero})
        step = -(N * A0)
        out = self.identity(self.model, self.window)
        power = out
        while True:
            power = power * step
            if power.is_zero():
                break
            out = out + power
        return A0 * out

    def apply_vector(self, a):
        """Matrix times a constant vector {j: c}: {i: {(beta, k): value}}."""
        out = {}
        for b, d in self.terms.items():
            for k, M in d.items():
                for i, row in M.items():
                    v = sum((row.get(j, ZERO) * c for j, c in a.items()), ZERO)
                    if v:
                        ser = out.setdefault(i, {})
                        ser[(b, k)] = ser.get((b, k), ZERO) + v
        return out

    def scale_series(self, ser):
        """Multiply by a scalar series {(beta, k): value}."""
        S = self._new({})
        for (b, k), v in ser.items():
            S = S + self._new({b: {k: {i: {i: v} for i in range(self.rank)}}})
        return S * self if S.terms else S

    def conjugate(self, P, Pinv):
        """P M Pinv for constant dense matrices P, Pinv."""
        Ps, Pis = _sparse(P), _sparse(Pinv)
        return self._new({b: {k: _mmul(_mmul(Ps, M), Pis) for k, M in d.items()}
                          for b, d in self.terms.items()})

    def dump(self):
        """Deterministic JSON-friendly listing."""
        rows = []
        for b in sorted(self.terms, key=lambda x: x.key()):
            for k in sorted(self.terms[b]):
                M = self.terms[b][k]
                for i in sorted(M):
                    for j in sorted(M[i]):
                        rows.append([b.key(), k, i, j, str(M[i][j])])
        return rows


# admissible lifts and the lifted base QDE


def admissible_lift_op(model, beta):
    """D_beta(z) = D^A D^B D^C for an admissible class beta."""
    eff = model.effectivity(beta)
    if not eff.admissible:
        raise ValueError("class %s is not admissible" % (beta,))
    gens = generators(model)
    op = DiffOp.identity(gens)
    roots = list(zip(model.a_roots, eff.n)) + list(zip(model.b_roots, eff.n_prime)) + \
        [(model.xi, eff.n_prime_last)]
    for v, n in roots:
        dv = DiffOp.directional(gens, v)
        for m in range(n):
            op = op * (dv - DiffOp.z_power(gens, 1) * m)
    return op


def lift_class(model, betaS, lift="minimal"):
    """The lift of betaS used in the QDE: I-minimal, or twisted by -delta l."""
    beta = model.i_minimal_lift(betaS)
    if lift == "twisted":
        mu, mup, _ = model.mu_I(betaS)
        if mu + mup < 0:
            beta = beta - model.ell() * (-(mu + mup))
    elif lift != "minimal":
        raise ValueError("unknown lift choice %r" % lift)
    return beta


def default_lift(model):
    """Twisted when some Mori generator has mu + mu' < 0."""
    for g in model.base.mori_generators:
        mu, mup, _ = model.mu_I(g)
        if mu + mup < 0:
            return "twisted"
    return "minimal"


def lift_qde_term(model, j, i, betaS, lift="minimal"):
    """Q^{beta*} sum_k Cbar_{ji,betaS}^k z d_k D_{beta*}(z) for p_j * Tbar_i."""
    gens = generators(model)
    base = model.base
    data = base.qde_data().get((j, i, tuple(betaS)))
    out = DiffOp(gens)
    if not data:
        return out
    beta = lift_class(model, betaS, lift) if any(betaS) else model.zero_curve()
    D = admissible_lift_op(model, beta)
    for k, c in data.items():
        if base.degrees[k] == 0:
            dk = DiffOp.identity(gens)
        elif base.degrees[k] == 1:
            dk = DiffOp.generator(gens, 3 + base.divisor_basis.index(k))
        else:
            raise NotImplementedError("base insertions beyond divisors")
        out = out + DiffOp.q_monomial(gens, beta) * dk * D * c
    return out


def base_product_op(model, j, i, lift="minimal"):
    """Replacement for z d_{p_j} z d_{Tbar_i} (Tbar_i a divisor) from the lifted QDE."""
    out = DiffOp(generators(model))
    for (jj, ii, betaS) in model.base.qde_data():
        if jj == j and ii == i:
            out = out + lift_qde_term(model, j, i, betaS, lift)
    return out


def lift_equivalence_check(model, window):
    """Both lifts of the base QDE annihilate I on the window interior:
    (z d_{p_j} z d_{p_i} - lifted sum) I = 0 for the minimal and twisted lifts."""
    from .ifunc import IFunction
    from .pfops import check_annihilation
    gens = generators(model)
    base = model.base
    I = IFunction(model)
    out = {"pass": True, "relations": []}
    for j in range(base.n_mori):
        for jj in range(base.n_mori):
            i = base.divisor_basis[jj]
            lhs = DiffOp.generator(gens, 3 + j) * DiffOp.generator(gens, 3 + jj)
            for lift in ("minimal", "twisted"):
                rep = check_annihilation(lhs - base_product_op(model, j, i, lift), I, window)
                out["relations"].append({"j": j, "i": jj, "lift": lift, "pass": rep["pass"]})
                out["pass"] = out["pass"] and rep["pass"]
    return out


# Picard-Fuchs normal form


class PFReducer:
    """Rewrites Q^beta z^k d^w into canonical words modulo the PF ideal."""

    def __init__(self, model, window, lift=None, max_steps=2_000_000):
        if not supports_naive_quantization(model):
            raise NotImplementedError("naive quantization needs H(S) = H^0 + H^2")
        self.model = model
        self.window = window
        self.lift = lift or default_lift(model)
        self.gens = gens = generators(model)
        self.max_steps = max_steps
        self.r = model.r
        nb = gens.n - 3
        self.basis_words = {basis_word(model, t): t for t in range(model.rank)}
        box_l, box_g = _box(model)
        self.rule_l = DiffOp.monomial(gens, word=_unit(gens.n, 1, self.r + 1)) - box_l
        self.rule_g = DiffOp.monomial(gens, word=_unit(gens.n, 2, self.r + 2)) - box_g
        self.rule_base = {}
        base = model.base
        for j in range(nb):
            for jj in range(nb):
                i = base.divisor_basis[jj]
                self.rule_base[(j, jj)] = base_product_op(model, j, i, self.lift)
        self._step_cache = {}
        self.steps = 0
        # a twisted lift can lower the fiber offset; leave room for it
        self.delta = 0
        if self.lift == "twisted":
            for g in base.mori_generators:
                mu, mup, _ = model.mu_I(g)
                self.delta = max(self.delta, -(mu + mup))

    def keep(self, beta):
        model, w = self.model, self.window
        if not model.base.is_effective(beta.betaS):
            return False
        if any(b > w.betaS_bound for b in beta.betaS):
            return False
        muI, _, nuI = model.mu_I(beta.betaS)
        room = self.delta * (w.betaS_bound * len(beta.betaS) - sum(beta.betaS))
        return beta.d + muI <= w.d_max + room and beta.d2 + nuI <= w.d2_max

    def is_reduced(self, w):
        return w in self.basis_words

    def _one_step(self, w):
        """d^w rewritten once: list of (beta, dk, word, coeff)."""
        hit = self._step_cache.get(w)
        if hit is not None:
            return hit
        gens = self.gens
        if w[0]:
            rest = list(w)
            rest[0] = 0
            out = [(self.model.zero_curve(), 0, tuple(rest), Fraction(1))]
        else:
            rule, rest = self._pick(w)
            out = []
            for (b, k, ww), c in rule.terms.items():
                shifts = [gens.pairing(a, b) for a in range(gens.n)]
                for (dk, w2), cc in _expand_shifted(rest, shifts).items():
                    out.append((b, k + dk, _word_add(w2, ww), c * cc))
        self._step_cache[w] = out
        return out

    def _pick(self, w):
        r = self.r
        nb = self.gens.n - 3
        base = list(w[3:])
        if sum(base) >= 2:
            j = next(a for a in range(nb) if base[a])
            base[j] -= 1
            jj = next(a for a in range(nb) if base[a])
            base[jj] -= 1
            rest = tuple(w[:3]) + tuple(base)
            return self.rule_base[(j, jj)], rest
        if w[1] >= r + 1:
            rest = list(w)
            rest[1] -= r + 1
            return self.rule_l, tuple(rest)
        if w[2] >= r + 2:
            rest = list(w)
            rest[2] -= r + 2
            return self.rule_g, tuple(rest)
        raise AssertionError("word %r is already reduced" % (w,))

    def order_key(self, key):
        """Strictly increases along every rewrite step, so each key is expanded once."""
        b, k, w = key
        return (sum(b.betaS), grade(self.model, b), -w[2], -w[1], -w[0])

    def normal_form(self, starts):
        """Reduce several start operators at once.

        `starts` maps a label to {(beta, k, word): coeff}; returns
        label -> {(beta, k, basis index): coeff}.
        """
        acc = {}
        heap = []
        tie = count()

        def push(key, vec):
            cur = acc.get(key)
            if cur is None:
                if not self.is_reduced(key[2]):
                    heapq.heappush(heap, (self.order_key(key), next(tie), key))
                acc[key] = dict(vec)
                return
            for lab, c in vec.items():
                v = cur.get(lab, ZERO) + c
                if v:
                    cur[lab] = v
                else:
                    cur.pop(lab, None)

        for lab, op in starts.items():
            for key, c in op.items():
                if c and self.keep(key[0]):
                    push(key, {lab: Fraction(c)})
        while heap:
            _, _, key = heapq.heappop(heap)
            vec = acc.pop(key)
            if not vec:
                continue
            self.steps += 1
            if self.steps > self.max_steps:
                raise RuntimeError("PF reduction did not terminate within the step budget")
            beta, k, w = key
            for b, dk, w2, cc in self._one_step(w):
                nb = beta + b
                if self.keep(nb):
                    push((nb, k + dk, w2), {lab: c * cc for lab, c in vec.items()})
        out = {lab: {} for lab in starts}
        for (b, k, w), vec in acc.items():
            e = self.basis_words[w]
            for lab, c in vec.items():
                if c:
                    out[lab][(b, k, e)] = c
        return out


def _unit(n, a, e):
    w = [0] * n
    w[a] = e
    return tuple(w)


def _box(model):
    from .pfops import _box_ops
    return _box_ops(model)


def build_connection(model, window, lift=None):
    """{a: C_a} for a in generator indices (0 = unit, 1 = t1, 2 = t2, 3.. = base).

    Also returns an info dict; `non_effective` lists window-range classes
    outside the I-effective cone with a surviving coefficient (must be empty).
    """
    red = PFReducer(model, window, lift)
    gens = red.gens
    zero = model.zero_curve()
    classes = frozenset(window.classes(model))
    starts = {}
    for a in range(1, gens.n):
        for e in range(model.rank):
            w = list(basis_word(model, e))
            w[a] += 1
            starts[(a, e)] = {(zero, 0, tuple(w)): Fraction(1)}
    nf = red.normal_form(starts)
    terms = {a: {} for a in range(1, gens.n)}
    stray = set()
    for (a, e), res in nf.items():
        for (b, k, e2), c in res.items():
            if b not in classes:
                if not model.is_I_effective(b) and window.betaS_bound >= max(b.betaS, default=0):
                    muI, _, nuI = model.mu_I(b.betaS)
                    if b.d + muI <= window.d_max and b.d2 + nuI <= window.d2_max:
                        stray.add(tuple(b.key()))
                continue
            row = terms[a].setdefault(b, {}).setdefault(k, {}).setdefault(e2, {})
            row[e] = row.get(e, ZERO) + c
    out = {0: ConnectionMatrix.identity(model, window)}
    for a in terms:
        out[a] = ConnectionMatrix(model, window, terms[a], classes)
    info = {"lift": red.lift, "steps": red.steps, "non_effective": sorted(stray)}
    return out, info


# the same matrices from the I-function directly


def fundamental_matrix(model, window, word_shift=None):
    """Psi with columns d^{ze} I (optionally with an extra derivative word)."""
    source = IFunction(model)
    gens = generators(model)
    terms = {}
    for beta in window.classes(model):
        F = source.term(beta)
        if F.is_zero():
            continue
        by_k = {}
        for e in range(model.rank):
            w = basis_word(model, e)
            if word_shift is not None:
                w = _word_add(w, word_shift)
            col = word_factor(gens, w, beta) * F
            for k, cls in col.terms.items():
                M = by_k.setdefault(k, {})
                for i, v in cls.coeffs.items():
                    if v:
                        M.setdefault(i, {})[e] = v
        terms[beta] = by_k
    return ConnectionMatrix(model, window, terms)


def connection_from_I(model, window):
    """C_a = Psi^{-1} z d_a Psi, computed on the window."""
    gens = generators(model)
    Psi = fundamental_matrix(model, window)
    Pinv = Psi.inverse()
    out = {0: ConnectionMatrix.identity(model, window)}
    for a in range(1, gens.n):
        out[a] = Pinv * fundamental_matrix(model, window, _unit(gens.n, a, 1))
    return out, Psi


def flatness_check(model, C, window, convention="right"):
    """Integrability of the first-order system, exactly on the window.

    For the right action z d_a Psi = Psi C_a the identity is
    z d_a C_b - z d_b C_a + [C_a, C_b] = 0; for the left action
    z d_a Psi = C_a Psi (the transposed system) it reads
    z d_a C_b - z d_b C_a + [C_b, C_a] = 0.
    """
    gens = generators(model)
    keys = sorted(C)
    pairs = {}
    ok = True
    for x in keys:
        for y in keys:
            if y <= x:
                continue
            comm = C[x] * C[y] - C[y] * C[x]
            if convention == "left":
                comm = -comm
            F = C[y].derivative(gens, x) - C[x].derivative(gens, y) + comm
            good = F.is_zero()
            ok = ok and good
            pairs["%s,%s" % (gens.names[x], gens.names[y])] = good
    return {"pass": ok, "pairs": pairs}


def transpose(M):
    out = {}
    for b, d in M.terms.items():
        out[b] = {}
        for k, A in d.items():
            T = {}
            for i, row in A.items():
                for j, v in row.items():
                    T.setdefault(j, {})[i] = v
            out[b][k] = T
    return M._new(out)


def z_constant_mod_gamma(model, C):
    """Classes with d2 <= 0 (no q^gamma factor beyond the lift) carrying z-dependence."""
    bad = []
    for b, d in C.terms.items():
        if b.d2 <= -model.mu_I(b.betaS)[2] and set(d) != {0}:
            bad.append(b.key())
    return bad


# gauge reduction


@dataclass
class GaugeResult:
    B: ConnectionMatrix
    Ct: dict
    z_degree_B: dict
    z_degree_C: dict
    bound_ok: bool
    bound_equal: bool
    residual: list = field(default_factory=list)


def gauge_reduce(model, C, window):
    """Solve z d_a B = B C_a - Ct_a B with B_0 = Id and Ct_a z-free."""
    gens = generators(model)
    zero = model.zero_curve()
    classes = window.classes(model)
    cset = frozenset(classes)
    dirs = [a for a in sorted(C) if a != 0]
    Ccl = {a: C[a].at(zero).get(0, {}) for a in dirs}
    for a in dirs:
        if set(C[a].at(zero)) - {0}:
            raise ValueError("classical part of C_%d depends on z" % a)
    B = {zero: {0: {i: {i: Fraction(1)} for i in range(model.rank)}}}
    Ct = {a: {zero: Ccl[a]} for a in dirs}
    nB = {zero: 0}
    mC = {}
    for beta in set().union(*[C[a].terms for a in dirs]):
        mC[beta] = max(max(C[a].at(beta), default=0) for a in dirs)
    residual = []
    bound_ok = True
    bound_equal = True
    for beta in classes:
        if beta == zero:
            continue
        splits = [(b1, beta - b1) for b1 in classes if (beta - b1) in cset]
        K = {}
        for a in dirs:
            Ka = {}
            for b1, b2 in splits:
                if b1 == beta:
                    continue
                for k1, M1 in B.get(b1, {}).items():
                    for k2, M2 in C[a].at(b2).items():
                        _madd(Ka.setdefault(k1 + k2, {}), _mmul(M1, M2))
                if b1 != zero:
                    Cb = Ct[a].get(b1)
                    if Cb:
                        for k2, M2 in B.get(b2, {}).items():
                            _madd(Ka.setdefault(k2, {}), _mmul(Cb, M2), -1)
            K[a] = {k: M for k, M in Ka.items() if M}
        a0 = next(a for a in dirs if gens.pairing(a, beta) != 0)
        t = Fraction(gens.pairing(a0, beta))
        top = max(K[a0], default=0)
        Bb = {}
        nxt = {}
        for j in range(top, 0, -1):
            M = _madd(_madd(_mmul(nxt, Ccl[a0]), _mmul(Ccl[a0], nxt), -1), K[a0].get(j, {}))
            cur = _mscale(M, 1 / t)
            if cur:
                Bb[j - 1] = cur
            nxt = cur
        for a in dirs:
            s = gens.pairing(a, beta)
            for j in range(max(max(K[a], default=0), max(Bb, default=-1) + 1), 0, -1):
                Bj = Bb.get(j, {})
                R = _madd(_madd(_mmul(Bj, Ccl[a]), _mmul(Ccl[a], Bj), -1), K[a].get(j, {}))
                _madd(R, Bb.get(j - 1, {}), -s)
                if R:
                    residual.append((gens.names[a], beta.key(), j))
            B0 = Bb.get(0, {})
            Ct0 = _madd(_madd(_mmul(B0, Ccl[a]), _mmul(Ccl[a], B0), -1), K[a].get(0, {}))
            if Ct0:
                Ct[a][beta] = Ct0
        if Bb:
            B[beta] = Bb
        n = max(Bb) if Bb else None
        # degree bound n(beta) <= max_{beta' < beta} (n(beta') + m(beta - beta')) - 1
        cands = [nB[b1] + mC[b2] for b1, b2 in splits
                 if b1 != beta and b1 in nB and b2 in mC and b2 != zero]
        bound = max(cands) - 1 if cands else None
        if n is not None:
            nB[beta] = n
            if bound is None or n > bound:
                bound_ok = False
            if bound is not None and n != bound:
                bound_equal = False
    Bm = ConnectionMatrix(model, window, B)
    Ctm = {a: ConnectionMatrix(model, window, {b: {0: M} for b, M in Ct[a].items()}) for a in dirs}
    Ctm[0] = ConnectionMatrix.identity(model, window)
    return GaugeResult(Bm, Ctm, nB, mC, bound_ok, bound_equal, residual)


def weight_degree_audit(model, G):
    """z-degree bound n(w) <= max_{w' < w} (n(w') + m(w - w')) - 1 on weights w = (betaS, d2).

    n(w), m(w) are the maximal z-degrees of B and C over the whole q^l fiber
    of w.  Returns {"bound_ok", "equal", "rows"}.
    """
    def by_weight(d):
        out = {}
        for b, n in d.items():
            w = (b.betaS, b.d2)
            out[w] = max(out.get(w, n), n)
        return out

    nW = by_weight(G.z_degree_B)
    mW = by_weight(G.z_degree_C)
    zero = model.zero_curve()
    w0 = (zero.betaS, zero.d2)
    rows = []
    ok = True
    equal = True
    for w in sorted(nW):
        if w == w0:
            continue
        cands = []
        for w1, n1 in nW.items():
            w2 = (tuple(a - b for a, b in zip(w[0], w1[0])), w[1] - w1[1])
            if w1 != w and w2 in mW and w2 != w0:
                cands.append(n1 + mW[w2])
        bound = max(cands) - 1 if cands else None
        good = bound is not None and nW[w] <= bound
        ok = ok and good
        equal = equal and bound == nW[w]
        rows.append([list(w[0]), w[1], nW[w], bound])
    return {"bound_ok": ok, "equal": equal, "rows": rows}


def check_gauge(model, C, G):
    """Direct check of z d_a B - B C_a + Ct_a B = 0 on the window."""
    gens = generators(model)
    bad = []
    for a in C:
        if a == 0:
            continue
        R = G.B.derivative(gens, a) - G.B * C[a] + G.Ct[a] * G.B
        if not R.is_zero():
            bad.append(gens.names[a])
    return bad


def commutators(model, Ct):
    gens = generators(model)
    out = {}
    keys = sorted(Ct)
    for x in keys:
        for y in keys:
            if x < y:
                out["%s,%s" % (gens.names[x], gens.names[y])] = (Ct[x] * Ct[y] - Ct[y] * Ct[x]).is_zero()
    return out


def birkhoff_column_check(model, Psi, G, gmt):
    """First column of Psi B^{-1} against the truncated J of the BF/GMT algorithm."""
    M = Psi * G.B.inverse()
    unit = model.HX.unit_index()
    col = M.column(unit)
    got = {}
    for i, ser in col.items():
        for (b, k), v in ser.items():
            got[(b, k, i)] = v
    want = {}
    for b, F in gmt.J.terms.items():
        for k, cls in F.terms.items():
            for i, v in cls.coeffs.items():
                if v:
                    want[(b, k, i)] = v
    zero = model.zero_curve()
    if (zero, 0, unit) not in want:
        want[(zero, 0, unit)] = Fraction(1)
    diff = sorted({(b.key(), k, i) for (b, k, i) in set(got) | set(want)
                   if got.get((b, k, i), ZERO) != want.get((b, k, i), ZERO)})
    return diff


# fitting fiber series in y1 = q^l e^{t1}: Laurent polynomial + f-polynomial


class LaurentF:
    """sum_a c_a y^a + sum_{b>=1} e_b f(y)^b, f = y / (1 - s y), s = (-1)^{r+1}."""

    def __init__(self, laurent, fpart, r):
        self.r = r
        self.laurent = {a: Fraction(c) for a, c in laurent.items() if c}
        self.fpart = {b: Fraction(c) for b, c in fpart.items() if c}

    @property
    def s(self):
        return (-1) ** (self.r + 1)

    @classmethod
    def from_mixed(cls, terms, r):
        """Reduce a dict (a, b) -> c of y^a f^b to canonical form."""
        s = (-1) ** (r + 1)
        work = dict(terms)
        lau, fp = {}, {}
        while work:
            (a, b), c = work.popitem()
            if not c:
                continue
            if b == 0:
                lau[a] = lau.get(a, ZERO) + c
            elif a == 0:
                fp[b] = fp.get(b, ZERO) + c
            elif a > 0:
                # y f = (f - y) / s
                for key, v in (((a - 1, b), c / s), ((a, b - 1), -c / s)):
                    work[key] = work.get(key, ZERO) + v
            else:
                # y^{-1} f = 1 + s f
                for key, v in (((a + 1, b - 1), c), ((a + 1, b), c * s)):
                    work[key] = work.get(key, ZERO) + v
        return cls(lau, fp, r)

    def mixed(self):
        out = {(a, 0): c for a, c in self.laurent.items()}
        for b, c in self.fpart.items():
            out[(0, b)] = out.get((0, b), ZERO) + c
        return out

    def __add__(self, other):
        t = self.mixed()
        for key, c in other.mixed().items():
            t[key] = t.get(key, ZERO) + c
        return LaurentF.from_mixed(t, self.r)

    def scale(self, c):
        return LaurentF({a: v * c for a, v in self.laurent.items()},
                        {b: v * c for b, v in self.fpart.items()}, self.r)

    def shift(self, m):
        """Multiply by y^m."""
        return LaurentF.from_mixed({(a + m, b): c for (a, b), c in self.mixed().items()}, self.r)

    def continued(self):
        """y -> 1/y, f -> (-1)^r - f."""
        from math import comb
        sign = (-1) ** self.r
        out = {(-a, 0): c for a, c in self.laurent.items()}
        for b, c in self.fpart.items():
            for i in range(b + 1):
                v = c * comb(b, i) * (-1) ** i * sign ** (b - i)
                out[(0, i)] = out.get((0, i), ZERO) + v
        return LaurentF.from_mixed(out, self.r)

    def series(self, lo, hi):
        """Coefficients of y^lo..y^hi."""
        from .extremal import f_power_series
        out = {d: self.laurent.get(d, ZERO) for d in range(lo, hi + 1)}
        for b, c in self.fpart.items():
            ser = f_power_series(self.r, b, max(hi, 0))
            for d in range(max(lo, 0), hi + 1):
                if ser[d]:
                    out[d] += c * ser[d]
        return {d: v for d, v in out.items() if v}

    def __eq__(self, other):
        return isinstance(other, LaurentF) and self.laurent == other.laurent and \
            self.fpart == other.fpart

    def is_zero(self):
        return not self.laurent and not self.fpart

    def __repr__(self):
        parts = ["%s*y^%d" % (c, a) for a, c in sorted(self.laurent.items())]
        parts += ["%s*f^%d" % (c, b) for b, c in sorted(self.fpart.items())]
        return " + ".join(parts) if parts else "0"


def fit_fiber(series, lo, hi, r, guard=2, max_f_degree=None):
    """Canonical LaurentF matching coefficients y^lo..y^hi (zero below lo is exact).

    Finds the least K with (1 - s y)^K S a Laurent polynomial whose last
    nonzero coefficient is followed by at least `guard` known zeros.
    Returns None when no such K exists on the available range.
    """
    s = (-1) ** (r + 1)
    S = [series.get(d, ZERO) for d in range(lo, hi + 1)]
    n = len(S)
    if not any(S):
        return LaurentF({}, {}, r)
    kmax = n if max_f_degree is None else max_f_degree
    T = list(S)
    for K in range(kmax + 1):
        if K:
            T = [T[i] - s * T[i - 1] if i else T[i] for i in range(n)]
        last = max(i for i in range(n) if T[i]) if any(T) else -1
        if n - 1 - last >= guard:
            poly = {lo + i: T[i] for i in range(n) if T[i]}
            mixed = {}
            # T (1 + s f)^K
            from math import comb
            for a, c in poly.items():
                for b in range(K + 1):
                    mixed[(a, b)] = mixed.get((a, b), ZERO) + c * comb(K, b) * s ** b
            out = LaurentF.from_mixed(mixed, r)
            if out.series(lo, hi) != {d: v for d, v in series.items() if lo <= d <= hi and v}:
                raise AssertionError("fit does not reproduce its data")
            return out
    return None


def fibers(model, M, i, j):
    """Entry (i, j) of a z-free matrix split by (betaS, d2): {(betaS, d2): {d: value}}."""
    out = {}
    for (b, k), v in M.entry(i, j).items():
        if k != 0:
            raise ValueError("entry depends on z")
        out.setdefault((b.betaS, b.d2), {})[b.d] = v
    return out


def fiber_range(model, window, betaS, d2):
    """Known d-range of a fiber inside the window, or None when d2 is outside."""
    muI, _, nuI = model.mu_I(betaS)
    if not 0 <= d2 + nuI <= window.d2_max:
        return None
    return -muI, window.d_max - muI


def fit_matrix(model, M, window, guard=2, k=0):
    """Fit every entry of the z^k coefficient on every fiber.

    Returns ({(i, j, betaS, d2): LaurentF}, failures).
    """
    fits = {}
    failures = []
    n = model.base.n_mori
    from itertools import product as iproduct
    for betaS in iproduct(range(window.betaS_bound + 1), repeat=n):
        muI, _, nuI = model.mu_I(betaS)
        for d2 in range(-nuI, window.d2_max - nuI + 1):
            lo, hi = fiber_range(model, window, betaS, d2)
            for i in range(model.rank):
                for j in range(model.rank):
                    ser = {}
                    for d in range(lo, hi + 1):
                        v = M.terms.get(_cc(betaS, d, d2), {}).get(k, {}).get(i, {}).get(j)
                        if v:
                            ser[d] = v
                    F = fit_fiber(ser, lo, hi, model.r, guard)
                    if F is None:
                        failures.append((i, j, list(betaS), d2))
                    else:
                        fits[(i, j, betaS, d2)] = F
    return fits, failures


def _cc(betaS, d, d2):
    from .flopmodel import CurveClass
    return CurveClass(tuple(betaS), d, d2)


def continue_fits(model, fits):
    """Continue X-side fiber functions to the X' side: G(y1) y2^{d2} -> G~(y1') (y1' y2')^{d2}."""
    out = {}
    for (i, j, betaS, d2), F in fits.items():
        out[(i, j, betaS, d2)] = F.continued().shift(d2)
    return out


def conjugate_fits(model, fits, betaS_list, d2_list):
    """Entrywise Phi M Phi^{-1} on fitted data (Phi = the correspondence on cohomology)."""
    cols = model.transform_matrix()
    n = model.rank
    P = [[cols[k][i] for k in range(n)] for i in range(n)]
    Pinv = mat_inverse(P)
    out = {}
    for betaS in betaS_list:
        for d2 in d2_list:
            for i in range(n):
                for j in range(n):
                    acc = LaurentF({}, {}, model.r)
                    complete = True
                    for k in range(n):
                        if not P[i][k]:
                            continue
                        for l in range(n):
                            if not Pinv[l][j]:
                                continue
                            F = fits.get((k, l, betaS, d2))
                            if F is None:
                                complete = False
                                continue
                            acc = acc + F.scale(P[i][k] * Pinv[l][j])
                    if complete:
                        out[(i, j, betaS, d2)] = acc
    return out


def chain_rule_targets(Ctp):
    """Primed combinations matching the X directions: t1 -> -t1' + t2', others fixed."""
    out = {}
    for a, M in Ctp.items():
        if a == 1:
            out[1] = Ctp[2] - Ctp[1]
        else:
            out[a] = M
    return out


def invariance_check(model, window, primed_window=None, betaS_max=2, d2_max=2, guard=2,
                     lift=None):
    """Compare continued, F-conjugated Ct_a on X with the chain-rule combination on X'."""
    P = model.primed
    pw = primed_window or window
    sides = {}
    for tag, mdl, win in (("X", model, window), ("Xp", P, pw)):
        C, info = build_connection(mdl, win, lift)
        G = gauge_reduce(mdl, C, win)
        sides[tag] = (C, G, info)
    Ct = sides["X"][1].Ct
    targets = chain_rule_targets(sides["Xp"][1].Ct)
    n = model.base.n_mori
    from itertools import product as iproduct
    betaS_list = [b for b in iproduct(range(min(betaS_max, window.betaS_bound) + 1), repeat=n)]
    report = {"directions": {}, "fit_failures": 0, "matched": 0, "mismatched": []}
    ok = True
    gens = generators(model)
    for a in sorted(Ct):
        fitsX, failX = fit_matrix(model, Ct[a], window, guard)
        fitsP, failP = fit_matrix(P, targets[a], pw, guard)
        report["fit_failures"] += len(failX) + len(failP)
        d2s = sorted({k[3] for k in fitsX} | {k[3] for k in fitsP})
        cont = continue_fits(model, fitsX)
        conj = conjugate_fits(model, cont, betaS_list, [d for d in d2s if d <= d2_max])
        matched = 0
        nontrivial = {}
        bad = []
        for key, F in sorted(conj.items(), key=lambda kv: (kv[0][2], kv[0][3], kv[0][0], kv[0][1])):
            G = fitsP.get(key)
            if G is None:
                continue
            matched += 1
            if not G.is_zero():
                nontrivial[str(list(key[2]))] = nontrivial.get(str(list(key[2])), 0) + 1
            if F != G:
                bad.append({"entry": [key[0], key[1]], "betaS": list(key[2]), "d2": key[3],
                            "X": repr(F), "Xp": repr(G)})
        ok = ok and not bad and matched > 0 and not failX and not failP
        report["directions"][gens.names[a]] = {"matched": matched, "mismatched": len(bad),
                                               "nonzero_matched_by_betaS": nontrivial,
                                               "fit_failures_X": len(failX),
                                               "fit_failures_Xp": len(failP)}
        report["matched"] += matched
        report["mismatched"].extend(bad[:5])
    report["pass"] = ok
    return report
