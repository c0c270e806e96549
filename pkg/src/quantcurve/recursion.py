"""Genus-zero (Log)topological recursion on pole-part tensors.

A correlator omega_{g,n} is stored as a sparse map from n-tuples of slots
(p, k) to coefficients, meaning  c * prod_i dz_i / (z_i - p_i)^k_i  with k >= 2.
"""

from __future__ import annotations

from collections import defaultdict
from itertools import combinations
import math
import threading

from gmpy2 import mpq

from .curve import INF, ChartError, SpectralCurve
from .scalars import sort_key
from .series import LocalSeries, SeriesError


class RecursionError_(RuntimeError):
    pass


def _slot_key(s):
    p, k = s
    return (p == INF, sort_key(p) if p != INF else (0, 0), k)


class Correlator:
    """omega_{g,n} as {((p1,k1),...,(pn,kn)): coefficient}."""

    __slots__ = ("g", "n", "terms")

    def __init__(self, g: int, n: int, terms=None):
        self.g, self.n = g, n
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0}

    def is_zero(self):
        return not self.terms

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: [_slot_key(s) for s in kv[0]])

    def permuted(self, perm):
        return Correlator(self.g, self.n, {tuple(key[i] for i in perm): c for key, c in self.terms.items()})

    def is_symmetric(self):
        from itertools import permutations
        for perm in permutations(range(self.n)):
            if self.permuted(perm).terms != self.terms:
                return False
        return True

    def poles(self):
        return {p for key in self.terms for p, _ in key}

    def min_pole_order(self):
        return min((k for key in self.terms for _, k in key), default=None)

    def residues_vanish(self):
        """Sum of residues in each variable over all its poles is zero (structural: k >= 2)."""
        return all(k >= 2 for key in self.terms for _, k in key)

    def scaled(self, c):
        return Correlator(self.g, self.n, {k: v * c for k, v in self.terms.items()})

    def __eq__(self, o):
        return isinstance(o, Correlator) and (self.g, self.n) == (o.g, o.n) and self.terms == o.terms

    def evaluate(self, points):
        """Coefficient of dz_1...dz_n at concrete points."""
        total = 0
        for key, c in self.terms.items():
            term = c
            for (p, k), zval in zip(key, points):
                term = term / (zval - p) ** k
            total += term
        return total

    def __repr__(self):
        return f"Correlator({self.g},{self.n}, {len(self.terms)} terms)"


# csch(v) = sum_k c_{2k-1} v^{2k-1}, c_{2k-1} = -2 (2^{2k-1} - 1) B_{2k} / (2k)!
def csch_coefficient(j: int):
    """Coefficient of v^j in csch(v) for odd j >= 1."""
    import sympy as sp
    k = (j + 1) // 2
    b = sp.bernoulli(2 * k)
    val = -2 * (2 ** (2 * k - 1) - 1) * b / sp.factorial(2 * k)
    return mpq(int(val.p), int(val.q))


class CorrelatorStore:
    """Lazily computed, memoized correlators of a spectral curve."""

    def __init__(self, curve: SpectralCurve, logtr: bool = True):
        self.curve = curve
        self.logtr = logtr
        self._store = {}
        self._lock = threading.RLock()
        self.max_chi = 0
        self.R = curve.ramification_points()
        self.L = curve.log_points() if logtr else {}

    def get(self, g: int, n: int) -> Correlator:
        if (g, n) == (0, 2) or (g, n) == (0, 1) or 2 * g + n - 2 <= 0:
            raise ValueError(f"({g},{n}) is unstable")
        with self._lock:
            if (g, n) not in self._store:
                # dependencies first, in order of Euler characteristic
                chi = 2 * g + n - 2
                for c in range(1, chi):
                    for gg in range(0, c // 2 + 2):
                        nn = c + 2 - 2 * gg
                        if nn >= 1 and (gg, nn) not in self._store:
                            self._store[(gg, nn)] = self._compute(gg, nn)
                self._store[(g, n)] = self._compute(g, n)
                self.max_chi = max(self.max_chi, chi)
            return self._store[(g, n)]

    def all_up_to(self, chi_max: int):
        out = {}
        for chi in range(1, chi_max + 1):
            for g in range(0, chi // 2 + 2):
                n = chi + 2 - 2 * g
                if n >= 1:
                    out[(g, n)] = self.get(g, n)
        return out

    # -- the recursion ---------------------------------------------------
    def _compute(self, g, n, extra=0):
        m = n - 1
        pmax = 6 * g + 2 * n + 6 + extra
        result = defaultdict(int)
        try:
            for a in self.R:
                loc = self.curve.local(a, pmax)
                acc = self._integrand(loc, g, m)
                for J, ser in acc.items():
                    G = ser.mul(loc.D, -1)
                    self._extract(G, a, J, result, mpq(1))
        except _NeedMore:
            if extra > 40:
                raise RecursionError_(f"residue orders did not stabilize for ({g},{n})")
            return self._compute(g, n, extra + 8)
        if m == 0 and g >= 1 and self.L:
            for key, c in self.logtr_g1_term(g).terms.items():
                result[key] += c
        return Correlator(g, n, {k: v for k, v in result.items() if v != 0})

    def _extract(self, G: LocalSeries, a, J, result, factor):
        if G.prec is not None and G.prec < -1:
            raise _NeedMore()
        for k, c in G.items():
            if k >= -1:
                break
            # Res t^k * sum_{j>=1} t^j/(z0 - a)^{j+1}: j = -1 - k
            result[((a, -k),) + J] += c * factor

    def _integrand(self, loc, g, m):
        """{J: series} with J the slot tuple for z_1..z_m."""
        acc = {}
        # only coefficients below t^cut survive multiplication by D and extraction
        cut = -1 - loc.D.val

        def add(J, ser):
            if J in acc:
                acc[J] = acc[J] + ser
            else:
                acc[J] = ser

        if g >= 1:
            if (g - 1, m + 2) == (0, 2):
                add((), loc.self_pair)
            else:
                W = self.get(g - 1, m + 2)
                for key, c in W.terms.items():
                    (p0, k0), (p1, k1), J = key[0], key[1], key[2:]
                    add(J, loc.ez(p0, k0).mul(loc.es(p1, k1), cut).scale(c))
        idx = list(range(m))
        vD = loc.D.val
        for g1 in range(g + 1):
            g2 = g - g1
            for r in range(m + 1):
                for Z1 in combinations(idx, r):
                    Z2 = tuple(i for i in idx if i not in Z1)
                    if (g1, len(Z1)) == (0, 0) or (g2, len(Z2)) == (0, 0):
                        continue
                    F2 = self._factor(loc, g2, len(Z2), sigma=True, budget=None)
                    v2 = min((s.val for s in F2.values()), default=0)
                    F1 = self._factor(loc, g1, len(Z1), sigma=False, budget=-2 - vD - v2)
                    v1 = min((s.val for s in F1.values()), default=0)
                    if (g2, len(Z2)) == (0, 1):
                        F2 = self._factor(loc, g2, len(Z2), sigma=True, budget=-2 - vD - v1)
                    for J1, s1 in F1.items():
                        for J2, s2 in F2.items():
                            J = [None] * m
                            for i, sl in zip(Z1, J1):
                                J[i] = sl
                            for i, sl in zip(Z2, J2):
                                J[i] = sl
                            add(tuple(J), s1.mul(s2, cut))
        return acc

    def _factor(self, loc, g, k, sigma, budget):
        """omega_{g,k+1}(z or sigma(z), Z) grouped by the Z slots: {J: series in t}."""
        a = loc.a
        if (g, k) == (0, 1):
            out = {}
            top = budget if budget is not None else loc.prec
            for mm in range(0, max(top, 0) + 1):
                if sigma:
                    ser = loc.bs(mm).scale(mm + 1)
                else:
                    ser = LocalSeries(mm, [mm + 1], None, a)
                out[((a, mm + 2),)] = ser
            return out
        W = self.get(g, k + 1)
        out = {}
        for key, c in W.terms.items():
            p, kk = key[0]
            ser = (loc.es(p, kk) if sigma else loc.ez(p, kk)).scale(c)
            J = key[1:]
            out[J] = out[J] + ser if J in out else ser
        return out

    # -- LogTR -----------------------------------------------------------
    def logtr_g1_term(self, g: int) -> Correlator:
        if g == 0:
            return Correlator(0, 1)
        result = defaultdict(int)
        c = csch_coefficient(2 * g - 1)
        for a, alpha in self.L.items():
            if self.curve.is_pole_of_dx(a):
                continue  # both dx and dy have poles: the residue vanishes
            if a == INF:
                raise ChartError("log point at infinity with regular dx; reparametrize with mobius()")
            P = 4 * g + 6
            xp = self.curve.dx.expand(a, P)
            inv = xp.inverse()
            f = LocalSeries(-1, [1], None, a) * inv  # d_x log(z - a)
            for _ in range(2 * g - 2):
                f = f.derivative() * inv
            T = f.derivative().scale(c / (2 * alpha) ** (2 * g - 1))
            self._extract(T, a, (), result, mpq(1, 2))
        return Correlator(g, 1, {k: v for k, v in result.items() if v != 0})


class _NeedMore(Exception):
    pass


def tr_correlator(store: CorrelatorStore, g: int, n: int) -> Correlator:
    return store.get(g, n)


def logtr_g1_term(curve: SpectralCurve, g: int) -> Correlator:
    return CorrelatorStore(curve).logtr_g1_term(g)


# -- expansions ------------------------------------------------------------

def _chart_param(curve: SpectralCurve, P, prec):
    """Local parameter s at P (1/z at infinity, z - P otherwise) as a series in u = 1/x."""
    from .series import series_reversion
    inv_x = curve.x.rational.inverse(curve.field) if curve.x.is_rational() else None
    if inv_x is None:
        raise ChartError("the x -> infinity chart needs a rational x")
    u = inv_x.expand_infinity(prec) if P == INF else inv_x.expand(P, prec)
    if u.val != 1:
        raise ChartError(f"x must have a simple pole at {P} for the 1/x chart")
    return series_reversion(u)


def _in_u(r, P, s_of_u, prec):
    ser = r.expand_infinity(prec) if P == INF else r.expand(P, prec)
    return ser.compose(s_of_u, prec)


def correlator_expansion(omega: Correlator, curve: SpectralCurve, chart=("x-inf", INF),
                         order: int = 4, sign: int = -1) -> dict:
    """Coefficients of omega_{g,n} in a local chart.

    chart ("x-inf", P): coefficients C[a] of prod_i x(z_i)^(-a_i-2) dx(z_i) as z_i -> P,
    a simple pole of x.  chart ("point", p): coefficients of prod_i (z_i - p)^a_i dz_i.
    ``sign`` multiplies by sign^n; -1 gives the convention omega_{0,1} = y dx.
    """
    from .functions import RationalFunction
    kind, P = chart
    prec = order + 3
    slot = {}
    if kind == "x-inf":
        s_of_u = _chart_param(curve, P, prec + 2)
        inv_dx = curve.dx.inverse(curve.field)
        for key in omega.terms:
            for p, k in key:
                if (p, k) not in slot:
                    h = _in_u(RationalFunction.pole(p, k) * inv_dx, P, s_of_u, prec)
                    slot[(p, k)] = [h.coefficient(a + 2) for a in range(order + 1)]
    elif kind == "point":
        for key in omega.terms:
            for p, k in key:
                if (p, k) not in slot:
                    h = RationalFunction.pole(p, k).expand(P, order + 1)
                    slot[(p, k)] = [h.coefficient(a) for a in range(order + 1)]
    else:
        raise ChartError(f"unknown chart {kind!r}")
    from itertools import product
    out = {}
    f = sign ** omega.n
    for key, c in omega.terms.items():
        for idx in product(range(order + 1), repeat=omega.n):
            v = c * f
            for (p, k), a in zip(key, idx):
                v = v * slot[(p, k)][a]
                if v == 0:
                    break
            if v != 0:
                out[idx] = out.get(idx, 0) + v
    return {k: v for k, v in sorted(out.items()) if v != 0}


def omega01_expansion(curve: SpectralCurve, P=INF, order: int = 4) -> dict:
    """Coefficients G_a of log x dx - y dx = sum_a G_a x^(-a-2) dx as z -> P."""
    s_of_u = _chart_param(curve, P, order + 5)
    x = curve.x.rational
    # dG/du with G = log x - y and u = 1/x: -x + y' x^2 / x'
    r = curve.dy * x * x * curve.dx.inverse(curve.field) - x
    g = _in_u(r, P, s_of_u, order + 4).integrate()
    if g.log is not None and not g.log.is_zero():
        raise ChartError("log x - y is not analytic in 1/x at this point")
    return {a: g.coefficient(a + 2) for a in range(order + 1) if g.coefficient(a + 2) != 0}


def gw_invariants(table: dict, n: int) -> dict:
    """<prod tau_{a_i}> from expansion coefficients: C = (-1)^n prod (a_i + 1)! <...>."""
    out = {}
    for idx, c in table.items():
        f = (-1) ** n
        for a in idx:
            f *= math.factorial(a + 1)
        out[idx] = c / f
    return out
