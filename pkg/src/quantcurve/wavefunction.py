"""WKB wavefunctions exp(sum_m hbar^m S_m(z)) built from correlators."""

from __future__ import annotations

from math import factorial

from gmpy2 import mpq

from . import poly
from .curve import INF, CurveError, SpectralCurve
from .functions import ExpSum, Func, RationalFunction, as_func
from .recursion import Correlator, CorrelatorStore
from .series import HbarSeries

ONE = mpq(1)


class BasepointError(CurveError):
    pass


def log_rf(field, r: RationalFunction) -> Func:
    """log r(z) as a Func: logs of the irreducible factors plus log of the leading constant."""
    if r.is_zero():
        raise ValueError("log of zero")
    lead, facs = poly.factor_irreducible(field, r.num)
    out = Func.log_const(lead)
    terms = dict(out.terms)
    for f, e in facs:
        m = ((("log", tuple(f)), 1),)
        terms[m] = terms.get(m, RationalFunction(())) + RationalFunction.const(mpq(e))
    for f, e in r.den:
        m = ((("log", tuple(f)), 1),)
        terms[m] = terms.get(m, RationalFunction(())) - RationalFunction.const(mpq(e))
    return Func({m: c for m, c in terms.items() if not c.is_zero()})


def integrate_rf(field, r: RationalFunction):
    """A primitive of r as a Func, or None if a non-linear denominator factor remains."""
    if any(len(f) > 2 for f, _ in r.den):
        return None
    den = r.den_poly()
    q, rem = poly.divmod_poly(r.num, den) if r.den else (r.num, ())
    out = Func.rf(RationalFunction(tuple([mpq(0)] + [c / (i + 1) for i, c in enumerate(q)])))
    if not rem:
        return out
    for f, e in r.den:
        p = -f[0]
        loc = r.expand(p, 0)
        for k in range(1, e + 1):
            c = loc.coefficient(-k)
            if c == 0:
                continue
            if k == 1:
                out = out + Func.log_linear(p, c)
            else:
                out = out + Func.rf(RationalFunction.pole(p, k - 1, -c / (k - 1)))
    return out


def finite_part(F: Func, b):
    """Constant term of F at z = b, dropping divergent powers and log(z - b) (log(1/z) at infinity)."""
    rat, lin = F.log_linear_part()
    if b == INF:
        val = rat.expand_infinity(1).coefficient(0)
    else:
        val = rat.expand(b, 1).coefficient(0)
    out = Func.const(val)
    for a, g in lin.items():
        if a[0] != "log":
            out = out + Func.atom(a, g)
            continue
        f = a[1]
        if b == INF:
            # log f(z) = deg f * log z + log(lead) + O(1/z); lead is 1 (monic)
            continue
        fb = poly.evaluate(f, b)
        if fb != 0:
            out = out + Func.log_const(fb, g)
    return out


class WKBFunction:
    """Formal object exp(S_{-1}/hbar + sum_{m>=0} hbar^m S_m(z)) * prefactor.

    ``x`` is the chart function (x-hat multiplies by x, y-hat is hbar d/dx) and
    ``Y`` = dS_{-1}/dx.  S_{-1} itself is kept in closed form only when it is
    elementary.  ``prefactor`` is an optional HbarSeries (doubled exponents)
    with Func coefficients, used for objects that are not pure exponentials.
    """

    def __init__(self, x, Y, S, order: int, field, prefactor=None, basepoint=INF,
                 S_minus1=None, marker=None, curve=None):
        self.x = as_func(x)
        self.Y = as_func(Y)
        self.S = {m: as_func(v) for m, v in S.items()}
        self.order = order
        self.field = field
        self.prefactor = prefactor
        self.basepoint = basepoint
        self.S_minus1 = S_minus1
        self.marker = dict(marker or {"constant": "defined up to exp(A/hbar + B)"})
        self.curve = curve
        xp = self.x.derivative()
        if not xp.is_rational():
            raise CurveError("dx must be rational")
        self.xp = xp.rational()
        self.inv_xp = self.xp.inverse(field)
        self._cache = {}

    def replace(self, **kw):
        args = dict(x=self.x, Y=self.Y, S=self.S, order=self.order, field=self.field,
                    prefactor=self.prefactor, basepoint=self.basepoint, S_minus1=self.S_minus1,
                    marker=self.marker, curve=self.curve)
        args.update(kw)
        return WKBFunction(**args)

    def dx(self, f):
        """d/dx of a Func or ExpSum."""
        return f.derivative() * self.inv_xp

    def d(self, m: int, j: int):
        """j-th x-derivative of S_m; for m = -1 this is d^(j-1) Y."""
        key = (m, j)
        if key not in self._cache:
            if m == -1:
                if j < 1:
                    raise ValueError("S_{-1} itself is not stored")
                val = self.Y if j == 1 else self.dx(self.d(-1, j - 1))
            elif j == 0:
                val = self.S.get(m, Func())
            else:
                val = self.dx(self.d(m, j - 1))
            self._cache[key] = val
        return self._cache[key]

    def phase_derivative(self) -> Func:
        """dS_{-1}/dz."""
        return self.Y * self.xp

    def exponent_series(self) -> HbarSeries:
        return HbarSeries({2 * m: s for m, s in self.S.items()}, 2 * self.order + 2, check=False)


def _diag_poly_mul(a, b):
    out = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = tuple(sorted(_merge(ka, kb), key=lambda pe: _pkey(pe[0])))
            out[k] = out.get(k, 0) + ca * cb
    return {k: v for k, v in out.items() if v != 0}


def _merge(ka, kb):
    d = dict(ka)
    for p, e in kb:
        d[p] = d.get(p, 0) + e
    return [(p, e) for p, e in d.items() if e]


def primitive_of_correlator(omega: Correlator, b, field) -> Func:
    """Diagonal value of the n-fold primitive from b of a stable correlator."""
    pts = omega.poles()
    if b != INF and b in pts:
        raise BasepointError(f"basepoint {b} is a pole of omega_{omega.g},{omega.n}; it must be a regular point")
    # slot integral: int_b^z dt/(t - p)^k = -(1/(k-1)) [w^(k-1) - (b - p)^(1-k)], w = 1/(z - p)
    slot_cache = {}

    def slot(p, k):
        key = (p, k)
        if key not in slot_cache:
            c = mpq(-1, k - 1)
            d = {((p, k - 1),): c}
            if b != INF:
                d[()] = -c / (b - p) ** (k - 1)
            slot_cache[key] = {tuple(sorted(kk, key=lambda pe: _pkey(pe[0]))): v for kk, v in d.items()}
        return slot_cache[key]

    total = {}
    for key, c in omega.terms.items():
        acc = {(): c}
        for p, k in key:
            acc = _diag_poly_mul(acc, slot(p, k))
        for m, v in acc.items():
            total[m] = total.get(m, 0) + v
    total = {m: v for m, v in total.items() if v != 0}
    if not total:
        return Func()
    # common denominator prod (z - p)^E_p
    E = {}
    for m in total:
        for p, e in m:
            E[p] = max(E.get(p, 0), e)
    num = ()
    for m, v in total.items():
        dm = dict(m)
        term = (v,)
        for p, e in E.items():
            if e - dm.get(p, 0):
                term = poly.mul(term, poly.power(poly.linear(p), e - dm.get(p, 0)))
        num = poly.add(num, term)
    return Func.rf(RationalFunction(num, [(poly.linear(p), e) for p, e in E.items()]))


def _pkey(p):
    from .scalars import sort_key
    return sort_key(p)


def primitive_01(curve: SpectralCurve, b) -> Func | None:
    """Closed-form S_{-1} = int_b^z y dx (finite part at b), when elementary."""
    ylog, xlog = curve.y.logs, curve.x.logs
    field = curve.field
    if not ylog:
        F = integrate_rf(field, curve.y.rational * curve.dx)
        if F is None:
            return None
    elif not xlog:
        # y x - int x dy
        G = integrate_rf(field, curve.x.rational * curve.dy)
        if G is None:
            return None
        F = curve.y.to_func() * curve.x.to_func() - G
    else:
        return None
    try:
        return F - finite_part(F, b)
    except ValueError:
        return None


def wkb_S0(curve: SpectralCurve) -> Func:
    """S_0 = -(1/2) log x'(z)."""
    return log_rf(curve.field, curve.dx) * mpq(-1, 2)


def build_wavefunction(store: CorrelatorStore, b=None, N: int = 4) -> WKBFunction:
    """psi(z) with S_m for m <= N."""
    curve = store.curve
    b = curve.basepoint if b is None else b
    S = {0: wkb_S0(curve)}
    for m in range(1, N + 1):
        acc = Func()
        for g in range(0, m // 2 + 2):
            n = m + 2 - 2 * g
            if n < 1:
                continue
            F = primitive_of_correlator(store.get(g, n), b, curve.field)
            # the store follows omega_{0,1} = -y dx; (-1)^n flips to omega_{0,1} = y dx
            acc = acc + F * mpq((-1) ** n, factorial(n))
        S[m] = acc
    marker = {"constant": "defined up to exp(A/hbar + B)",
              "S0": "-(1/2) log x'", "basepoint": str(b)}
    return WKBFunction(curve.x.to_func(), curve.y.to_func(), S, N, curve.field, basepoint=b,
                       S_minus1=primitive_01(curve, b), marker=marker, curve=curve)
