"""Exact function layer on the affine chart of P^1.

``RationalFunction``  numerator polynomial over a product of monic irreducible
                      denominator factors, kept reduced.
``Func``              polynomial in logarithm atoms with rational coefficients.
``ExpSum``            finite sum of coefficient * exp(exponent) with canonical
                      exponents (integer multiples of logs are absorbed).
"""

from __future__ import annotations

import math
from functools import lru_cache

from gmpy2 import mpq

from . import poly
from .scalars import MPQ, QuadraticNumber, sort_key
from .series import LocalSeries

ONE = mpq(1)


def _is_scalar(o):
    return isinstance(o, (int, MPQ, QuadraticNumber))


@lru_cache(maxsize=4096)
def _factor_power(f, e):
    return poly.power(f, e)


class RationalFunction:
    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=(), normalize=True):
        self.num = poly.trim(num)
        den = tuple(sorted(((tuple(f), e) for f, e in den if e > 0), key=_fkey))
        if not self.num:
            den = ()
        self.den = den
        self._hash = None
        if normalize and den:
            self._reduce()

    def _reduce(self):
        num, newden = self.num, []
        for f, e in self.den:
            while e > 0:
                if len(f) == 2:
                    if poly.evaluate(num, -f[0]) != 0:
                        break
                    num = poly.exact_divide(num, f)
                else:
                    q, r = poly.divmod_poly(num, f)
                    if r:
                        break
                    num = q
                e -= 1
            if e:
                newden.append((f, e))
        self.num = num
        self.den = tuple(newden)

    # constructors
    @classmethod
    def const(cls, c):
        return cls((c,) if c != 0 else ())

    @classmethod
    def z(cls):
        return cls((mpq(0), ONE))

    @classmethod
    def poly(cls, p):
        return cls(tuple(p))

    @classmethod
    def pole(cls, p, k: int, c=ONE):
        """c / (z - p)^k."""
        return cls((c,), ((poly.linear(p), k),), normalize=False)

    @classmethod
    def from_num_den(cls, field, num, den):
        lead, facs = poly.factor_irreducible(field, den)
        if lead == 0:
            raise ZeroDivisionError("zero denominator")
        return cls(poly.scale(num, ONE / lead), facs)

    # basic queries
    def is_zero(self):
        return not self.num

    def is_const(self):
        return not self.den and len(self.num) <= 1

    def const_value(self):
        if not self.is_const():
            raise ValueError("not a constant")
        return self.num[0] if self.num else mpq(0)

    def key(self):
        return (self.num, self.den)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __eq__(self, o):
        if _is_scalar(o):
            o = RationalFunction.const(o)
        if not isinstance(o, RationalFunction):
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def den_poly(self):
        out = (ONE,)
        for f, e in self.den:
            out = poly.mul(out, _factor_power(f, e))
        return out

    def poles(self):
        """Finite poles as {point: order} (linear factors only)."""
        return {-f[0]: e for f, e in self.den if len(f) == 2}

    # arithmetic
    def __add__(self, o):
        if _is_scalar(o):
            if o == 0:
                return self
            o = RationalFunction.const(o)
        if not isinstance(o, RationalFunction):
            return NotImplemented
        if not o.num:
            return self
        if not self.num:
            return o
        if self.den == o.den:
            return RationalFunction(poly.add(self.num, o.num), self.den)
        da, db = dict(self.den), dict(o.den)
        na, nb = self.num, o.num
        allf = set(da) | set(db)
        den = []
        for f in allf:
            ea, eb = da.get(f, 0), db.get(f, 0)
            e = max(ea, eb)
            if e > ea:
                na = poly.mul(na, _factor_power(f, e - ea))
            if e > eb:
                nb = poly.mul(nb, _factor_power(f, e - eb))
            den.append((f, e))
        return RationalFunction(poly.add(na, nb), den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(poly.neg(self.num), self.den, normalize=False)

    def __sub__(self, o):
        if _is_scalar(o):
            return self + (-o)
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if _is_scalar(o):
            if o == 0:
                return RationalFunction(())
            return RationalFunction(poly.scale(self.num, o), self.den, normalize=False)
        if not isinstance(o, RationalFunction):
            return NotImplemented
        if not self.num or not o.num:
            return RationalFunction(())
        d = dict(self.den)
        for f, e in o.den:
            d[f] = d.get(f, 0) + e
        norm = bool(self.den and o.num and len(o.num) > 1) or bool(o.den and len(self.num) > 1)
        return RationalFunction(poly.mul(self.num, o.num), d.items(), normalize=norm)

    def __rmul__(self, o):
        return self.__mul__(o)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("use inverse() for negative powers")
        out = RationalFunction((ONE,))
        for _ in range(n):
            out = out * self
        return out

    def scalar_div(self, c):
        return RationalFunction(poly.scale(self.num, ONE / c), self.den, normalize=False)

    def inverse(self, field):
        if not self.num:
            raise ZeroDivisionError("inverse of zero rational function")
        lead, facs = poly.factor_irreducible(field, self.num)
        return RationalFunction(poly.scale(self.den_poly(), ONE / lead), facs)

    def pole_power_div(self, p, k):
        """self / (z - p)^k."""
        d = dict(self.den)
        f = poly.linear(p)
        d[f] = d.get(f, 0) + k
        return RationalFunction(self.num, d.items())

    def derivative(self):
        if not self.den:
            return RationalFunction(poly.deriv(self.num))
        # d(N / prod f^e) = (N' prod f - N sum e f' prod_{j != i} f_j) / prod f^(e+1)
        fs = [f for f, _ in self.den]
        prod = (ONE,)
        for f in fs:
            prod = poly.mul(prod, f)
        top = poly.mul(poly.deriv(self.num), prod)
        for f, e in self.den:
            others = poly.exact_divide(prod, f)
            top = poly.sub(top, poly.scale(poly.mul(poly.mul(self.num, poly.deriv(f)), others), e))
        return RationalFunction(top, [(f, e + 1) for f, e in self.den])

    def evaluate(self, x):
        d = ONE
        for f, e in self.den:
            d = d * poly.evaluate(f, x) ** e
        if d == 0:
            raise ZeroDivisionError(f"pole at {x}")
        return poly.evaluate(self.num, x) / d

    def valuation_at(self, p):
        """Order of vanishing at finite p (negative for poles)."""
        f = poly.linear(p)
        e = dict(self.den).get(f, 0)
        if e:
            return -e
        if not self.num:
            return math.inf
        v, n = 0, self.num
        while poly.evaluate(n, p) == 0:
            n = poly.exact_divide(n, f)
            v += 1
        return v

    def degree_at_infinity(self):
        """deg num - deg den (order of pole at infinity)."""
        if not self.num:
            return -math.inf
        return len(self.num) - 1 - sum((len(f) - 1) * e for f, e in self.den)

    def expand(self, p, prec: int):
        """Laurent expansion at finite p in t = z - p, known for exponents < prec."""
        num = poly.taylor_shift(self.num, p)
        den = poly.taylor_shift(self.den_poly(), p)
        n = LocalSeries(0, num, None, p)
        d = LocalSeries(0, den, None, p)
        if not n.c:
            return LocalSeries(prec, [], prec, p)
        dinv = d.inverse(prec=prec - n.val)
        return (n * dinv).truncate(prec)

    def expand_infinity(self, prec: int):
        """Expansion at infinity in w = 1/z."""
        num, den = self.num, self.den_poly()
        if not num:
            return LocalSeries(prec, [], prec, "inf")
        dn, dd = len(num) - 1, len(den) - 1
        n = LocalSeries(-dn, list(reversed(num)), None, "inf")
        d = LocalSeries(-dd, list(reversed(den)), None, "inf")
        val = dd - dn
        dinv = d.inverse(prec=prec - n.val)
        return (n * dinv).truncate(prec)

    def compose_mobius(self, a, b, c, d):
        """self((a w + b)/(c w + d)) as a rational function of w."""
        num, den = self.num, self.den_poly()
        deg = max(len(num), len(den)) - 1
        lin_n, lin_d = poly.trim((b, a)), poly.trim((d, c))

        def hom(p):
            out = ()
            for i, ci in enumerate(p):
                term = poly.mul(poly.power(lin_n, i), poly.power(lin_d, deg - i))
                out = poly.add(out, poly.scale(term, ci))
            return out
        return hom(num), hom(den)

    def to_sympy(self, field, z):
        import sympy as sp
        n = sum(field.to_sympy(c) * z**i for i, c in enumerate(self.num))
        d = sp.Integer(1)
        for f, e in self.den:
            d = d * sum(field.to_sympy(c) * z**i for i, c in enumerate(f)) ** e
        return n / d

    def __repr__(self):
        return f"RF({self.num!r} / {self.den!r})"


def _fkey(fe):
    f = fe[0]
    return (len(f), [sort_key(c) for c in f])


# ---------------------------------------------------------------------------
# log atoms

PI2I = ("2pii",)


def log_atom(f):
    """Atom for log(f(z)), f monic irreducible (linear: z - p)."""
    return ("log", tuple(f))


def logp_atom(p: int):
    return ("logp", int(p))


def logq_atom(v):
    return ("logq", v)


def _atom_key(a):
    if a[0] == "log":
        return (0, len(a[1]), [sort_key(c) for c in a[1]])
    if a[0] == "2pii":
        return (1,)
    if a[0] == "logp":
        return (2, a[1])
    return (3, sort_key(a[1]))


def _mono_key(m):
    return [(_atom_key(a), k) for a, k in m]


def _mono_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for a, k in m2:
        d[a] = d.get(a, 0) + k
    return tuple(sorted(d.items(), key=lambda ak: _atom_key(ak[0])))


def _factorint(n: int):
    import sympy as sp
    return sp.factorint(n)


def const_log_atoms(c):
    """log(c) for a nonzero scalar as {atom: coefficient}.

    Positive rationals split into prime logs; log(-1) = (1/2)(2 pi i).
    """
    out = {}
    if isinstance(c, QuadraticNumber):
        return {logq_atom(c): ONE}
    c = mpq(c)
    if c == 0:
        raise ValueError("log(0)")
    if c < 0:
        out[PI2I] = mpq(1, 2)
        c = -c
    for p, e in _factorint(int(c.numerator)).items():
        out[logp_atom(p)] = out.get(logp_atom(p), 0) + e
    for p, e in _factorint(int(c.denominator)).items():
        out[logp_atom(p)] = out.get(logp_atom(p), 0) - e
    return {a: mpq(v) for a, v in out.items() if v != 0}


class Func:
    """sum over log monomials of RationalFunction coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        t = {}
        for m, c in (terms or {}).items():
            if isinstance(c, RationalFunction):
                if c.num:
                    t[m] = c
            elif c != 0:
                t[m] = RationalFunction.const(c)
        self.terms = t
        self._hash = None

    @classmethod
    def rf(cls, r):
        return cls({(): r})

    @classmethod
    def const(cls, c):
        return cls({(): RationalFunction.const(c)})

    @classmethod
    def atom(cls, a, c=ONE):
        return cls({((a, 1),): RationalFunction.const(c)})

    @classmethod
    def log_linear(cls, p, c=ONE):
        """c * log(z - p)."""
        return cls.atom(log_atom(poly.linear(p)), c)

    @classmethod
    def log_const(cls, v, c=ONE):
        return cls({((a, 1),): RationalFunction.const(c * k) for a, k in const_log_atoms(v).items()})

    def is_zero(self):
        return not self.terms

    def rational(self):
        """Coefficient of the empty monomial."""
        return self.terms.get((), RationalFunction(()))

    def is_rational(self):
        return all(m == () for m in self.terms)

    def is_const(self):
        for m, c in self.terms.items():
            if not c.is_const():
                return False
            if any(a[0] == "log" for a, _ in m):
                return False
        return True

    def key(self):
        return tuple(sorted(((m, c.key()) for m, c in self.terms.items()),
                            key=lambda mc: _mono_key(mc[0])))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __eq__(self, o):
        if _is_scalar(o):
            o = Func.const(o)
        elif isinstance(o, RationalFunction):
            o = Func.rf(o)
        if not isinstance(o, Func):
            return NotImplemented
        return self.terms == o.terms

    def _coerce(self, o):
        if isinstance(o, Func):
            return o
        if isinstance(o, RationalFunction):
            return Func({(): o})
        if _is_scalar(o):
            return Func.const(o)
        return None

    def __add__(self, o):
        o = self._coerce(o)
        if o is None:
            return NotImplemented
        if not o.terms:
            return self
        t = dict(self.terms)
        for m, c in o.terms.items():
            if m in t:
                s = t[m] + c
                if s.num:
                    t[m] = s
                else:
                    del t[m]
            else:
                t[m] = c
        return Func(t)

    __radd__ = __add__

    def __neg__(self):
        return Func({m: -c for m, c in self.terms.items()})

    def __sub__(self, o):
        o = self._coerce(o)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if _is_scalar(o):
            if o == 0:
                return Func()
            return Func({m: c * o for m, c in self.terms.items()})
        if isinstance(o, RationalFunction):
            return Func({m: c * o for m, c in self.terms.items()})
        if not isinstance(o, Func):
            return NotImplemented
        t = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                m = _mono_mul(m1, m2)
                c = c1 * c2
                t[m] = t[m] + c if m in t else c
        return Func(t)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Func.const(ONE)
        for _ in range(n):
            out = out * self
        return out

    def map_coeffs(self, f):
        return Func({m: f(c) for m, c in self.terms.items()})

    def derivative(self):
        out = {}

        def acc(m, c):
            if not c.num:
                return
            out[m] = out[m] + c if m in out else c
        for m, c in self.terms.items():
            acc(m, c.derivative())
            for i, (a, k) in enumerate(m):
                if a[0] != "log":
                    continue
                f = a[1]
                da = RationalFunction(poly.deriv(f), ((f, 1),))
                rest = list(m)
                if k == 1:
                    del rest[i]
                else:
                    rest[i] = (a, k - 1)
                acc(tuple(rest), c * da * k)
        return Func(out)

    def log_linear_part(self):
        """Split into (rational part, {atom: const coefficient}); raise if not log-linear."""
        lin = {}
        for m, c in self.terms.items():
            if m == ():
                continue
            if len(m) != 1 or m[0][1] != 1 or not c.is_const():
                raise ValueError("not log-linear with constant coefficients")
            lin[m[0][0]] = c.const_value()
        return self.rational(), lin

    def expand(self, p, prec: int):
        """LocalSeries at finite p; log(z - p) goes to the log marker (log-linear only)."""
        rat, lin = self.log_linear_part()
        s = rat.expand(p, prec)
        marker = None
        for a, g in lin.items():
            if a[0] != "log":
                raise ValueError("constant log atoms have no numeric expansion")
            f = a[1]
            if len(f) == 2 and -f[0] == p:
                marker = g
                continue
            # log f(p + t) = log f(p) + log(1 + (f(p+t) - f(p))/f(p))
            fp = poly.evaluate(f, p)
            if fp == 0:
                raise ValueError("log of a higher-degree factor vanishing at p")
            u = LocalSeries(1, [c / fp for c in poly.taylor_shift(f, p)[1:]], None, p)
            lg = _log1p_series(u, prec)
            s = s + lg.scale(g)
            # constant log f(p) is dropped: callers only use derivatives of logs
        if marker is not None:
            s.log = LocalSeries(0, [marker], None, p)
        return s

    def to_sympy(self, field, z):
        import sympy as sp
        out = sp.Integer(0)
        for m, c in self.terms.items():
            term = c.to_sympy(field, z)
            for a, k in m:
                if a[0] == "log":
                    f = sum(field.to_sympy(ci) * z**i for i, ci in enumerate(a[1]))
                    term *= sp.log(f) ** k
                elif a[0] == "2pii":
                    term *= (2 * sp.pi * sp.I) ** k
                elif a[0] == "logp":
                    term *= sp.log(a[1]) ** k
                else:
                    term *= sp.log(field.to_sympy(a[1])) ** k
            out += term
        return out

    def __repr__(self):
        if not self.terms:
            return "Func(0)"
        return "Func(" + " + ".join(f"{c!r}*{m}" for m, c in self.terms.items()) + ")"


def _log1p_series(u: LocalSeries, prec: int) -> LocalSeries:
    out = LocalSeries(prec, [], prec)
    term = LocalSeries(0, [ONE], None)
    k = 1
    while k * u.val < prec:
        term = (term * u).truncate(prec)
        out = out + term.scale(mpq((-1) ** (k + 1), k))
        k += 1
    return out.truncate(prec)


def as_func(o) -> Func:
    if isinstance(o, Func):
        return o
    if isinstance(o, RationalFunction):
        return Func.rf(o)
    return Func.const(o)


# ---------------------------------------------------------------------------
# exponentials


def _floor(c):
    return mpq(int(math.floor(c)))


def split_exponent(E: Func):
    """Split exp(E) = R * exp(K) with R rational and K canonical."""
    factor = RationalFunction((ONE,))
    key = {}
    for m, c in E.terms.items():
        if len(m) == 1 and m[0][1] == 1 and c.is_const():
            a = m[0][0]
            v = c.const_value()
            if isinstance(v, QuadraticNumber):
                key[m] = c
                continue
            if a[0] == "2pii":
                n2 = _floor(2 * v)
                rest = v - n2 / 2
                if n2 % 2:
                    factor = -factor
                if rest != 0:
                    key[m] = RationalFunction.const(rest)
                continue
            n = _floor(v)
            rest = v - n
            if n != 0:
                if a[0] == "log":
                    f = a[1]
                    if n > 0:
                        factor = factor * RationalFunction(_factor_power(f, int(n)))
                    else:
                        factor = factor * RationalFunction((ONE,), ((f, int(-n)),), normalize=False)
                elif a[0] == "logp":
                    factor = factor * (mpq(a[1]) ** int(n))
                else:
                    factor = factor * (a[1] ** int(n))
            if rest != 0:
                key[m] = RationalFunction.const(rest)
        else:
            key[m] = c
    return factor, Func(key)


class ExpSum:
    """sum_E c_E exp(E) with canonical exponent keys."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        t = {}
        for E, c in (terms or {}).items():
            c = as_func(c)
            if not c.is_zero():
                t[E] = t[E] + c if E in t else c
                if t[E].is_zero():
                    del t[E]
        self.terms = t

    @classmethod
    def exp(cls, E, coeff=None):
        E = as_func(E)
        r, K = split_exponent(E)
        c = Func.rf(r) if coeff is None else as_func(coeff) * r
        return cls({K: c})

    @classmethod
    def lift(cls, f):
        return cls({Func(): as_func(f)})

    def is_zero(self):
        return not self.terms

    def is_plain(self):
        return all(E.is_zero() for E in self.terms)

    def plain(self) -> Func:
        if not self.terms:
            return Func()
        if not self.is_plain():
            raise ValueError("ExpSum has transcendental exponentials")
        return self.terms[Func()]

    def _coerce(self, o):
        if isinstance(o, ExpSum):
            return o
        if isinstance(o, (Func, RationalFunction)) or _is_scalar(o):
            return ExpSum.lift(o)
        return None

    def __add__(self, o):
        o = self._coerce(o)
        if o is None:
            return NotImplemented
        t = dict(self.terms)
        for E, c in o.terms.items():
            if E in t:
                s = t[E] + c
                if s.is_zero():
                    del t[E]
                else:
                    t[E] = s
            else:
                t[E] = c
        r = ExpSum()
        r.terms = t
        return r

    __radd__ = __add__

    def __neg__(self):
        r = ExpSum()
        r.terms = {E: -c for E, c in self.terms.items()}
        return r

    def __sub__(self, o):
        o = self._coerce(o)
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if _is_scalar(o) or isinstance(o, (Func, RationalFunction)):
            if _is_scalar(o) and o == 0:
                return ExpSum()
            r = ExpSum()
            r.terms = {E: c * o for E, c in self.terms.items()}
            r.terms = {E: c for E, c in r.terms.items() if not c.is_zero()}
            return r
        if not isinstance(o, ExpSum):
            return NotImplemented
        out = ExpSum()
        t = {}
        for E1, c1 in self.terms.items():
            for E2, c2 in o.terms.items():
                if E1.is_zero():
                    E, f = E2, None
                elif E2.is_zero():
                    E, f = E1, None
                else:
                    f, E = split_exponent(E1 + E2)
                c = c1 * c2
                if f is not None:
                    c = c * f
                if E in t:
                    t[E] = t[E] + c
                else:
                    t[E] = c
        out.terms = {E: c for E, c in t.items() if not c.is_zero()}
        return out

    __rmul__ = __mul__

    def map_coeffs(self, f):
        return ExpSum({E: f(c) for E, c in self.terms.items()})

    def derivative(self):
        """d/dz of sum c exp(E) = sum (c' + c E') exp(E)."""
        out = ExpSum()
        t = {}
        for E, c in self.terms.items():
            d = c.derivative() + c * E.derivative() if not E.is_zero() else c.derivative()
            if not d.is_zero():
                t[E] = d
        out.terms = t
        return out

    def __eq__(self, o):
        o = self._coerce(o)
        if o is None:
            return NotImplemented
        return (self - o).is_zero()

    def __hash__(self):
        return hash(tuple(sorted(hash(E) ^ hash(c) for E, c in self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "ExpSum(0)"
        return "ExpSum(" + " + ".join(f"{c!r}*exp({E!r})" for E, c in self.terms.items()) + ")"
