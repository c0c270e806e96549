"""Genus-zero spectral curves: admissibility, ramification and log-pole data."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
import math

from gmpy2 import mpq

from . import poly
from .functions import Func, RationalFunction, as_func, const_log_atoms, PI2I
from .scalars import ExactField, sort_key
from .series import LocalSeries, SeriesError, series_reversion

INF = "inf"


class CurveError(ValueError):
    pass


class AdmissibilityError(CurveError):
    pass


class ChartError(CurveError):
    pass


class LogRationalFunction:
    """R(z) + sum_i gamma_i log(z - a_i) + constant (logs of constants, 2 pi i multiples)."""

    def __init__(self, rational: RationalFunction, logs=None, const: Func | None = None):
        self.rational = rational
        self.logs = {a: g for a, g in (logs or {}).items() if g != 0}
        self.const = const if const is not None else Func()
        if not self.const.is_const():
            raise CurveError("constant part must be z-independent")

    @classmethod
    def from_rational(cls, r):
        return cls(r)

    def to_func(self) -> Func:
        f = Func.rf(self.rational) + self.const
        for a, g in self.logs.items():
            f = f + Func.log_linear(a, g)
        return f

    def derivative(self) -> RationalFunction:
        d = self.rational.derivative()
        for a, g in self.logs.items():
            d = d + RationalFunction.pole(a, 1, g)
        return d

    def scale(self, c):
        return LogRationalFunction(self.rational * c, {a: g * c for a, g in self.logs.items()},
                                   self.const * c)

    def __neg__(self):
        return self.scale(mpq(-1))

    def expand(self, p, prec):
        """Local expansion at finite p (constants of logs dropped)."""
        s = self.rational.expand(p, prec)
        for a, g in self.logs.items():
            if a == p:
                mk = LocalSeries(0, [g], None, p)
                s.log = mk if s.log is None else s.log + mk
            else:
                # g log(p - a + t) = const + g sum (-1)^(k+1) t^k / (k (p - a)^k)
                c = p - a
                terms = {k: g * mpq((-1) ** (k + 1), k) / c ** k for k in range(1, prec)}
                s = s + LocalSeries.from_dict(terms, prec, p)
        return s

    def expand_infinity(self, prec):
        """Expansion in w = 1/z; log(z - a) = -log w + log(1 - a w)."""
        s = self.rational.expand_infinity(prec)
        total = 0
        for a, g in self.logs.items():
            total += g
            if a != 0:
                terms = {k: -g * a ** k / k for k in range(1, prec)}
                s = s + LocalSeries.from_dict(terms, prec, INF)
        if total != 0:
            mk = LocalSeries(0, [-total], None, INF)
            s.log = mk
        return s

    def is_rational(self):
        return not self.logs and self.const.is_zero()

    def __repr__(self):
        return f"LRF({self.rational!r}, logs={self.logs!r}, const={self.const!r})"


def _deg_inf(r: RationalFunction):
    return r.degree_at_infinity()


@dataclass
class LocalData:
    """Expansions at a ramification point a in t = z - a, known below ``prec``."""

    a: object
    prec: int
    s: LocalSeries        # sigma(a + t) - a
    ds: LocalSeries       # sigma'(t)
    D: LocalSeries        # 1 / ((y(sigma) - y) x')
    self_pair: LocalSeries  # omega02(z, sigma(z)) / (dz)^2 = sigma' / (t - s)^2
    cache: dict = dc_field(default_factory=dict)

    def ez(self, p, k):
        """1/(a + t - p)^k."""
        key = ("z", p, k)
        if key not in self.cache:
            if p == self.a:
                self.cache[key] = LocalSeries(-k, [1], None, self.a)
            else:
                c = self.a - p
                # (c + t)^-k = c^-k sum binom(-k, j) (t/c)^j
                terms, b = {}, mpq(1)
                ck = 1 / c ** k
                for j in range(self.prec):
                    terms[j] = ck * b / c ** j
                    b = b * (-k - j) / (j + 1)
                self.cache[key] = LocalSeries.from_dict(terms, self.prec, self.a)
        return self.cache[key]

    def es(self, p, k):
        """sigma'(t) / (a + s(t) - p)^k."""
        key = ("s", p, k)
        if key not in self.cache:
            if p == self.a:
                val = (self.s ** k).inverse() * self.ds
            else:
                c = self.a - p
                terms, b = {}, mpq(1)
                ck = 1 / c ** k
                for j in range(self.prec):
                    terms[j] = ck * b / c ** j
                    b = b * (-k - j) / (j + 1)
                f = LocalSeries.from_dict(terms, self.prec)
                val = f.compose(self.s) * self.ds
            self.cache[key] = val
        return self.cache[key]

    def bs(self, m):
        """sigma'(t) s(t)^m: coefficient of (m+1)/(z_i - a)^(m+2) in omega02(sigma(z), z_i)."""
        key = ("bs", m)
        if key not in self.cache:
            if m == 0:
                self.cache[key] = self.ds
            else:
                self.cache[key] = self.bs(m - 1) * self.s
        return self.cache[key]


class SpectralCurve:
    """(P^1, x, y, omega02 = dz1 dz2/(z1 - z2)^2) with a basepoint."""

    def __init__(self, x: LogRationalFunction, y: LogRationalFunction, basepoint=INF,
                 field=None, name: str = "custom"):
        self.x = x
        self.y = y
        self.basepoint = basepoint
        self.field = field if field is not None else ExactField()
        self.name = name
        self.dx = x.derivative()
        self.dy = y.derivative()
        self._ram = None
        self._L = None
        self._local = {}

    def __repr__(self):
        return f"SpectralCurve({self.name})"

    # -- zeros and poles -------------------------------------------------
    def _dx_zeros(self):
        return self.field.roots(self.dx.num)

    def dx_order_at_infinity(self):
        """Order of dx at infinity in w = 1/z (dz = -dw/w^2)."""
        return -_deg_inf(self.dx) - 2

    def dy_order_at_infinity(self):
        return -_deg_inf(self.dy) - 2

    def ramification_points(self):
        if self._ram is None:
            pts = []
            for a, m in self._dx_zeros():
                if m != 1:
                    raise AdmissibilityError(f"zero of dx at {a} has multiplicity {m}")
                pts.append(a)
            if self.dx_order_at_infinity() > 0:
                raise ChartError("infinity is a ramification point; reparametrize with mobius()")
            self._ram = pts
        return self._ram

    def log_points(self):
        """Simple poles of dy as {point: residue} (point may be INF)."""
        if self._L is None:
            out = {}
            for f, e in self.dy.den:
                if len(f) == 2 and e == 1:
                    a = -f[0]
                    out[a] = _residue(self.dy, a)
            if self.dy_order_at_infinity() == -1:
                w = self.dy.expand_infinity(2)
                # dy = -y'(1/w) dw / w^2
                out[INF] = -w.coefficient(1)
            self._L = dict(sorted(out.items(), key=lambda kv: (kv[0] == INF, sort_key(kv[0]) if kv[0] != INF else 0)))
        return self._L

    def is_pole_of_dx(self, a):
        if a == INF:
            return self.dx_order_at_infinity() < 0
        return any(len(f) == 2 and -f[0] == a for f, _ in self.dx.den)

    # -- admissibility ---------------------------------------------------
    def admissibility(self):
        violations, zeros = [], []
        try:
            roots = self._dx_zeros()
        except Exception as e:  # field extension problems surface here
            return {"admissible": False, "zeros": [], "violations": [str(e)]}
        for a, m in roots:
            info = {"point": a, "multiplicity": m}
            if m != 1:
                violations.append(f"zero of dx at {a} has multiplicity {m}")
            if any(len(f) == 2 and -f[0] == a for f, _ in self.dy.den):
                violations.append(f"dy has a pole at the ramification point {a}")
                info["dy_regular"] = False
            else:
                info["dy_regular"] = True
                v = self.dy.evaluate(a)
                info["dy_nonzero"] = v != 0
                if v == 0:
                    violations.append(f"dy vanishes at the ramification point {a}")
            zeros.append(info)
        oi = self.dx_order_at_infinity()
        if oi > 0:
            violations.append(f"dx has a zero of order {oi} at infinity")
        return {"admissible": not violations, "zeros": zeros, "violations": violations}

    def dual(self):
        return SpectralCurve(self.y, -self.x, self.basepoint, self.field, name=self.name + "^dual")

    def rescaled(self, a, b):
        return SpectralCurve(self.x.scale(a), self.y.scale(b), self.basepoint, self.field,
                             name=f"{self.name}*({a},{b})")

    # -- local data ------------------------------------------------------
    def local(self, a, prec: int) -> LocalData:
        key = a
        cur = self._local.get(key)
        if cur is not None and cur.prec >= prec:
            return cur
        ld = self._build_local(a, prec)
        self._local[key] = ld
        return ld

    def _build_local(self, a, P):
        # x(a + t) - x(a) = t^2 h(t), u = t sqrt(h / h0), sigma = u^-1(-u)
        X = self.x.expand(a, P + 2)
        if X.log is not None:
            raise AdmissibilityError(f"x has a logarithmic singularity at ramification point {a}")
        h = LocalSeries(0, [X.coefficient(k) for k in range(2, P + 2)], P)
        h0 = h.coefficient(0)
        if h0 == 0:
            raise AdmissibilityError(f"dx has a higher order zero at {a}")
        r = _sqrt1(h.scale(1 / h0), P)
        u = LocalSeries(1, r.c, P + 1)
        ui = series_reversion(u)
        s = ui.compose(-u)
        ds = s.derivative()
        Y = self.y.expand(a, P + 2)
        if Y.log is not None:
            raise AdmissibilityError(f"dy has a pole at ramification point {a}")
        Y0 = LocalSeries(Y.val, Y.c, Y.prec)
        diff = Y0.compose(s, prec=P + 1) - Y0
        xp = X.derivative()
        den = diff * xp
        if not den.c or den.val != 2:
            raise AdmissibilityError(f"(y(sigma) - y) dx does not have a double zero at {a}")
        D = den.inverse()
        ts = LocalSeries(1, [1], None) - s
        self_pair = ds * (ts * ts).inverse()
        return LocalData(a, P, s, ds, D, self_pair)

    # -- reparametrization -------------------------------------------------
    def mobius(self, a, b, c, d, name=None):
        """Pull back along z = (a w + b)/(c w + d); only rational curves."""
        if not (self.x.is_rational() and self.y.is_rational()):
            raise CurveError("mobius reparametrization is only provided for rational x, y")
        if a * d - b * c == 0:
            raise CurveError("degenerate mobius transformation")
        out = []
        for f in (self.x.rational, self.y.rational):
            n, dd = f.compose_mobius(a, b, c, d)
            out.append(LogRationalFunction(RationalFunction.from_num_den(self.field, n, dd)))
        return SpectralCurve(out[0], out[1], INF, self.field, name or self.name + "^mobius")


def _residue(r: RationalFunction, a):
    s = r.expand(a, 0)
    return s.coefficient(-1)


def _sqrt1(v: LocalSeries, prec):
    """sqrt of a series with constant term 1, binomial expansion."""
    u = v - 1
    out = LocalSeries(0, [mpq(1)], prec)
    term = LocalSeries(0, [mpq(1)], None)
    b = mpq(1)
    k = 1
    while u.c and k * u.val < prec:
        b = b * (mpq(1, 2) - (k - 1)) / k
        term = (term * u).truncate(prec)
        out = out + term.scale(b)
        k += 1
    return out.truncate(prec)


def lrf(rational=None, logs=None, const=None, field=None):
    """Convenience constructor."""
    r = rational if rational is not None else RationalFunction(())
    return LogRationalFunction(r, logs, const)


def laurent_expand(f, p, order: int) -> LocalSeries:
    """Expansion of a LogRationalFunction (or RationalFunction) at p, coefficients below t^(order+1).

    Log constants such as log(p - a) are kept as a Func in the t^0 coefficient;
    a log(z - p) term (log(1/z) at infinity) becomes the series' log marker.
    """
    if isinstance(f, RationalFunction):
        f = LogRationalFunction(f)
    s = f.expand_infinity(order + 1) if p == INF else f.expand(p, order + 1)
    const = f.const
    if p != INF:
        for a, g in f.logs.items():
            if a != p:
                const = const + Func.log_const(p - a, g)
    if const.is_zero():
        return s
    c0 = s.coefficient(0)
    head = LocalSeries(0, [const + c0], order + 1, s.point)
    rest = LocalSeries.from_dict({k: v for k, v in s.items() if k != 0}, order + 1, s.point)
    out = head + rest
    out.log = s.log
    return out


def check_admissibility(c: SpectralCurve, dual: bool = False) -> dict:
    rep = c.admissibility()
    if dual:
        d = dualize(c).admissibility()
        rep = {"admissible": rep["admissible"] and d["admissible"], "curve": rep, "dual": d,
               "violations": rep["violations"] + ["dual: " + v for v in d["violations"]]}
    return rep


def dualize(c: SpectralCurve) -> SpectralCurve:
    """(x, y) -> (y, -x)."""
    return c.dual()


@dataclass
class RamificationData:
    R: list
    sigma: dict          # a -> LocalSeries of sigma(a + t) - a
    L: dict              # a -> residue of dy
    prec: int


def ramification_data(c: SpectralCurve, prec: int = 8) -> RamificationData:
    R = c.ramification_points()
    return RamificationData(list(R), {a: c.local(a, prec).s for a in R}, dict(c.log_points()), prec)


def recursion_kernel(c: SpectralCurve, a, prec: int = 8) -> LocalSeries:
    """1 / ((y(sigma(z)) - y(z)) x'(z)) at z = a + t; the z0 dependence is the
    pole-part factor 1/(z0 - z) - 1/(z0 - a) applied by the recursion."""
    if a not in c.ramification_points():
        raise CurveError(f"{a} is not a ramification point")
    return c.local(a, prec).D
