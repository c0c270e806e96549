"""Normally ordered operator words in x-hat, y-hat and their action on WKB objects.

A term is  M(z) * xhat^k * exp(beta xhat) * P(yhat, t) * exp(Q(yhat, t))  with
t = hbar^(1/2), M a Func multiplier (constant or a function placed leftmost),
and P, Q polynomials in (yhat, t) with exact scalar coefficients.  Products are
normal ordered with  f(yhat) xhat = xhat f(yhat) + hbar f'(yhat)  and
exp(Q(yhat)) exp(beta xhat) = exp(beta xhat) exp(Q(yhat + beta hbar)).
"""

from __future__ import annotations

from math import comb, factorial

from gmpy2 import mpq

from .curve import ChartError
from .functions import ExpSum, Func, as_func
from .scalars import sort_key
from .series import HbarSeries

ONE = mpq(1)


# -- bivariate polynomials {(j, d): c} in (yhat, t) ---------------------------

def _clean(p):
    return {k: v for k, v in p.items() if v != 0}


def padd(a, b, s=1):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + s * v
    return _clean(out)


def pmul(a, b):
    out = {}
    for (j1, d1), c1 in a.items():
        for (j2, d2), c2 in b.items():
            k = (j1 + j2, d1 + d2)
            out[k] = out.get(k, 0) + c1 * c2
    return _clean(out)


def pscale(a, c):
    return _clean({k: v * c for k, v in a.items()})


def pderiv(a):
    return _clean({(j - 1, d): v * j for (j, d), v in a.items() if j > 0})


def ppow(a, n):
    out = {(0, 0): ONE}
    for _ in range(n):
        out = pmul(out, a)
    return out


def pshift(a, beta):
    """a(y + beta t^2, t)."""
    if beta == 0 or not a:
        return dict(a)
    out = {}
    for (j, d), c in a.items():
        for i in range(j + 1):
            k = (j - i, d + 2 * i)
            out[k] = out.get(k, 0) + c * comb(j, i) * beta ** i
    return _clean(out)


def pkey(a):
    return tuple(sorted(((k, v) for k, v in a.items()), key=lambda kv: (kv[0], sort_key(kv[1]))))


def ydeg(a):
    return max((j for j, _ in a), default=0)


def is_const_in_y(a):
    return all(j == 0 for j, _ in a)


# -- operators -------------------------------------------------------------

class QuantumOperator:
    """Finite sum of normally ordered terms.

    ``terms`` maps (M, k, beta, key(Q)) to (Q, P) where M is a Func.
    """

    normal_ordered = True

    def __init__(self, terms=None, label: str = ""):
        self.terms = {}
        self.label = label
        for key, (Q, P) in (terms or {}).items():
            self._add_term(key[0], key[1], key[2], Q, P)

    def _add_term(self, M, k, beta, Q, P):
        P = _clean(P)
        if not P or M.is_zero():
            return
        key = (M, k, beta, pkey(Q))
        if key in self.terms:
            P = padd(self.terms[key][1], P)
            if not P:
                del self.terms[key]
                return
        self.terms[key] = (dict(Q), P)

    # constructors
    @classmethod
    def const(cls, c=ONE, t_power: int = 0):
        """c * t^t_power (t = hbar^(1/2))."""
        return cls._single(Func.const(ONE), 0, 0, {}, {(0, t_power): mpq(c) if not hasattr(c, "norm") else c})

    @classmethod
    def hbar(cls, c=ONE):
        return cls.const(c, 2)

    @classmethod
    def _single(cls, M, k, beta, Q, P):
        op = cls()
        op._add_term(M, k, beta, Q, P)
        return op

    @classmethod
    def xhat(cls, k: int = 1):
        return cls._single(Func.const(ONE), k, 0, {}, {(0, 0): ONE})

    @classmethod
    def yhat(cls, k: int = 1):
        return cls._single(Func.const(ONE), 0, 0, {}, {(k, 0): ONE})

    @classmethod
    def shift(cls, alpha):
        """exp(alpha yhat)."""
        return cls._single(Func.const(ONE), 0, 0, {(1, 0): alpha}, {(0, 0): ONE})

    @classmethod
    def exp_y(cls, Q):
        """exp(Q(yhat, t)) for a bivariate polynomial Q."""
        return cls._single(Func.const(ONE), 0, 0, dict(Q), {(0, 0): ONE})

    @classmethod
    def y_poly(cls, P):
        return cls._single(Func.const(ONE), 0, 0, {}, dict(P))

    @classmethod
    def exp_x(cls, beta=ONE):
        """exp(beta xhat)."""
        return cls._single(Func.const(ONE), 0, beta, {}, {(0, 0): ONE})

    @classmethod
    def mul_by(cls, f):
        return cls._single(as_func(f), 0, 0, {}, {(0, 0): ONE})

    # algebra
    def __add__(self, o):
        if not isinstance(o, QuantumOperator):
            o = QuantumOperator.const(o)
        out = QuantumOperator(label=self.label)
        out.terms = dict(self.terms)
        for (M, k, beta, _), (Q, P) in o.terms.items():
            out._add_term(M, k, beta, Q, P)
        return out

    __radd__ = __add__

    def __neg__(self):
        out = QuantumOperator(label=self.label)
        for (M, k, beta, _), (Q, P) in self.terms.items():
            out._add_term(M, k, beta, Q, pscale(P, -1))
        return out

    def __sub__(self, o):
        if not isinstance(o, QuantumOperator):
            o = QuantumOperator.const(o)
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if not isinstance(o, QuantumOperator):
            out = QuantumOperator(label=self.label)
            for (M, k, beta, _), (Q, P) in self.terms.items():
                out._add_term(M, k, beta, Q, pscale(P, o))
            return out
        out = QuantumOperator()
        for (M1, k1, b1, _), (Q1, P1) in self.terms.items():
            for (M2, k2, b2, _), (Q2, P2) in o.terms.items():
                y_trivial = is_const_in_y(P1) and is_const_in_y(Q1)
                if not M2.is_const() and not y_trivial:
                    raise ChartError("a function multiplier cannot be moved left of y-hat")
                # move P1 e^{Q1} (y) past xhat^k2 e^{b2 xhat}
                Qs = pshift(Q1, b2)
                dQ = pderiv(Qs)
                G = pshift(P1, b2)
                for i in range(k2 + 1):
                    if i > 0:
                        G = padd(pderiv(G), pmul(G, dQ))
                    if not G:
                        break
                    coef = pscale(pmul(G, P2), comb(k2, i))
                    coef = {(j, d + 2 * i): v for (j, d), v in coef.items()}
                    out._add_term(M1 * M2, k1 + k2 - i, b1 + b2, padd(Qs, Q2), coef)
        return out

    def __rmul__(self, o):
        return self.__mul__(o)

    def __pow__(self, n: int):
        out = QuantumOperator.const(ONE)
        for _ in range(n):
            out = out * self
        return out

    def is_zero(self):
        return not self.terms

    # descriptions
    def classical_limit(self):
        """sympy expression in x, y obtained at hbar = 0 with commuting variables."""
        import sympy as sp
        x, y, z = sp.symbols("x y z")
        out = sp.Integer(0)
        for (M, k, beta, _), (Q, P) in self.terms.items():
            Pc = sum((sp.Rational(int(v.numerator), int(v.denominator)) if not hasattr(v, "norm") else sp.nsimplify(str(v)))
                     * y ** j for (j, d), v in P.items() if d == 0)
            Qc = sum(_sym(v) * y ** j for (j, d), v in Q.items() if d == 0)
            Mc = M.to_sympy(_field_of(M), z)
            out += Mc * x ** k * sp.exp(_sym(beta) * x) * Pc * sp.exp(Qc)
        return out

    def describe(self):
        """Deterministic list of term descriptions."""
        rows = []
        for (M, k, beta, _), (Q, P) in self.terms.items():
            rows.append({
                "multiplier": _func_str(M),
                "xhat_power": k,
                "exp_xhat": str(beta),
                "exp_yhat_poly": _bipoly_str(Q),
                "yhat_poly": _bipoly_str(P),
            })
        rows.sort(key=lambda r: (r["multiplier"], r["xhat_power"], r["exp_xhat"], r["exp_yhat_poly"], r["yhat_poly"]))
        return rows

    def __repr__(self):
        return f"QuantumOperator({self.label or len(self.terms)} terms)"


def _sym(v):
    import sympy as sp
    if isinstance(v, int):
        return sp.Integer(v)
    if hasattr(v, "numerator"):
        return sp.Rational(int(v.numerator), int(v.denominator))
    return sp.sympify(str(v))


def _field_of(M):
    from .scalars import ExactField
    return ExactField()


def _func_str(M):
    import sympy as sp
    return sp.sstr(M.to_sympy(_field_of(M), sp.Symbol("z")))


def _bipoly_str(P):
    parts = []
    for (j, d), v in sorted(P.items()):
        parts.append(f"({v})*y^{j}*h^{mpq(d, 2)}")
    return " + ".join(parts) or "0"


# -- action on WKB objects ------------------------------------------------

class _Context:
    """Expansion data of a WKB object for the ratio [g(yhat) Psi] / e^W."""

    def __init__(self, wkb, T: int, F=None):
        self.w = wkb
        self.T = T
        self.one = Func.const(ONE)
        w = wkb
        # delta = sum_m t^(2m+2) d S_m
        dl = {}
        for m in range(0, (T - 1) // 2 + 1):
            if 2 * m + 2 < T and m in w.S:
                dl[2 * m + 2] = w.d(m, 1)
        self.delta = HbarSeries(dl, T, check=False)
        # R(s) = sum_{j>=2} s^j r_j(t)
        r = {}
        for j in range(2, T + 1):
            c = {}
            if j - 2 < T:
                c[j - 2] = w.d(-1, j) * mpq(1, factorial(j))
            for m in range(0, T):
                if 2 * m + j < T and m in w.S:
                    c[2 * m + j] = w.d(m, j) * mpq(1, factorial(j))
            r[j] = HbarSeries(c, T, check=False)
        E = [HbarSeries({0: self.one}, T, check=False)]
        for n in range(1, T):
            acc = HbarSeries({}, T, check=False)
            for j in range(2, n + 1):
                acc = acc + r[j] * E[n - j] * j
            E.append(acc * mpq(1, n))
        if F is not None:
            Fi = [F]
            for i in range(1, T):
                Fi.append(Fi[-1].map(w.dx))
            E2 = []
            for n in range(T):
                acc = HbarSeries({}, T, check=False)
                for i in range(n + 1):
                    acc = acc + E[n - i] * Fi[i].shift(i).truncate(T) * mpq(1, factorial(i))
                E2.append(acc)
            E = E2
        self.E = E
        self._ypow = [self.one]
        self._dpow = [HbarSeries({0: self.one}, T, check=False)]

    def ypow(self, j):
        while len(self._ypow) <= j:
            self._ypow.append(self._ypow[-1] * self.w.Y)
        return self._ypow[j]

    def dpow(self, i):
        while len(self._dpow) <= i:
            self._dpow.append(self._dpow[-1] * self.delta)
        return self._dpow[i]

    def eval_at_Y(self, P, drop_classical=False):
        """P(Y, t) as a t-series of Funcs."""
        c = {}
        for (j, d), v in P.items():
            if d >= self.T or (drop_classical and d == 0):
                continue
            term = self.ypow(j) * v
            c[d] = c[d] + term if d in c else term
        return HbarSeries(c, self.T, check=False)

    def eval_shifted(self, P, drop_classical=False):
        """P(Y + delta, t), optionally minus its t^0 part at delta = 0."""
        out = self.eval_at_Y(P, drop_classical)
        D = P
        i = 1
        while True:
            D = pderiv(D)
            if not D or 2 * i >= self.T:
                break
            out = out + self.eval_at_Y(D) * self.dpow(i) * mpq(1, factorial(i))
            i += 1
        return out

    def ratio(self, P, Q) -> HbarSeries:
        """[P(yhat) exp(Q(yhat)) Psi] / Psi as a t-series of ExpSums."""
        T = self.T
        dQ = pderiv(Q)
        total = HbarSeries({}, T, check=False)
        G = dict(P)
        for k in range(T):
            if k > 0:
                G = padd(pderiv(G), pmul(G, dQ))
            if not G:
                break
            total = total + (self.eval_shifted(G) * self.E[k]).shift(k).truncate(T)
        if Q:
            Qcl = {kk: v for kk, v in Q.items() if kk[1] == 0}
            dq = self.eval_shifted(Q, drop_classical=True)
            total = total * dq.exp(T, one=self.one)
            pref = ExpSum.exp(self.eval_at_Y(Qcl).coefficient(0, Func()))
            total = total.map(lambda c: pref * c)
        else:
            total = total.map(ExpSum.lift)
        return total


def _bracket_exp(ctx, beta):
    if beta == 0:
        return None
    return ExpSum.exp(ctx.w.x * beta)


def apply_operator(A: QuantumOperator, wkb, N: int) -> HbarSeries:
    """The ratio (A Psi)/Psi through hbar^N, coefficients ExpSum; keys are doubled exponents."""
    T = 2 * N + 1
    if wkb.order is not None:
        T = min(T, 2 * wkb.order + 4)
    ctx = _Context(wkb, T, wkb.prefactor)
    return _apply(A, ctx)


def _apply(A, ctx):
    T = ctx.T
    total = HbarSeries({}, T, check=False)
    cache = {}
    for (M, k, beta, qk), (Q, P) in A.terms.items():
        key = (qk, pkey(P))
        if key not in cache:
            cache[key] = ctx.ratio(P, Q)
        r = cache[key]
        left = M * (ctx.w.x ** k)
        if beta != 0:
            left = ExpSum.exp(ctx.w.x * beta, left)
        total = total + r.map(lambda c, left=left: c * left)
    return total


def apply_sequential(word, wkb, N: int) -> HbarSeries:
    """Apply a list of operators right to left, carrying a prefactor; returns the final ratio.

    Each factor is applied to exp(W) * F through the same calculus, so this
    gives an independent route for commutator checks.
    """
    T = 2 * N + 1
    if wkb.order is not None:
        T = min(T, 2 * wkb.order + 4)
    F = wkb.prefactor if wkb.prefactor is not None else HbarSeries({0: Func.const(ONE)}, T, check=False)
    for op in reversed(word):
        ctx = _Context(wkb, T, F)
        F = _apply(op, ctx)
        F = F.map(_to_func_if_plain)
    return F


def _to_func_if_plain(c):
    if isinstance(c, ExpSum) and c.is_plain():
        return c.plain()
    return c


def ratio_is_zero(r: HbarSeries) -> bool:
    return all(c.is_zero() for c in r.coeffs.values())


def first_nonzero(r: HbarSeries):
    ks = sorted(k for k, c in r.coeffs.items() if not c.is_zero())
    return (ks[0], r.coeffs[ks[0]]) if ks else None
