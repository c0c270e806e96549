"""Truncated formal series.

``HbarSeries`` is a series in hbar^(1/2) with exponents stored doubled.
``LocalSeries`` is a truncated Laurent series in a local coordinate t = z - p
(or t = 1/z at infinity) with an optional log(t) marker.

Truncation is tracked per series: ``prec`` is the first unknown exponent
(doubled for HbarSeries), ``None`` meaning the series is exact.
"""

from __future__ import annotations

import math

from gmpy2 import mpq


class SeriesError(ValueError):
    pass


def _iszero(c) -> bool:
    if isinstance(c, (int, float, complex)) or type(c).__module__ in ("gmpy2", "mpmath.ctx_mp_python"):
        return c == 0
    f = getattr(c, "is_zero", None)
    if f is not None:
        return f()
    return c == 0


def _min_prec(*ps):
    ps = [p for p in ps if p is not None]
    return min(ps) if ps else None


def _half(e2: int) -> str:
    return str(e2 // 2) if e2 % 2 == 0 else f"{e2}/2"


class HbarSeries:
    """sum_m c_m hbar^m with m in (1/2)Z; keys are 2m."""

    __slots__ = ("coeffs", "prec")

    MIN_EXP2 = -2

    def __init__(self, coeffs=None, prec: int | None = None, check=True):
        cs = {}
        for k, v in (coeffs or {}).items():
            if prec is not None and k >= prec:
                continue
            if not _iszero(v):
                cs[int(k)] = v
        if check and cs and min(cs) < self.MIN_EXP2:
            raise SeriesError(f"hbar exponent {_half(min(cs))} below -1")
        self.coeffs = cs
        self.prec = prec

    # construction helpers
    @classmethod
    def const(cls, c, prec=None):
        return cls({0: c}, prec)

    @classmethod
    def hbar_power(cls, m2: int, c=1, prec=None):
        return cls({m2: c}, prec)

    @property
    def order(self):
        """Truncation order N as doubled exponent (last known), or None."""
        return None if self.prec is None else self.prec - 1

    def vmin(self):
        return min(self.coeffs) if self.coeffs else (self.prec if self.prec is not None else None)

    def coefficient(self, m2: int, zero=0):
        if self.prec is not None and m2 >= self.prec:
            raise SeriesError(f"coefficient of hbar^{_half(m2)} is beyond truncation")
        return self.coeffs.get(m2, zero)

    def truncate(self, prec: int | None):
        p = _min_prec(self.prec, prec)
        return HbarSeries({k: v for k, v in self.coeffs.items() if p is None or k < p}, p, check=False)

    def is_zero(self):
        return not self.coeffs

    def items(self):
        return sorted(self.coeffs.items())

    def map(self, f):
        return HbarSeries({k: f(v) for k, v in self.coeffs.items()}, self.prec, check=False)

    def integer_only(self):
        return all(k % 2 == 0 for k in self.coeffs)

    # arithmetic
    def _wrap(self, o):
        if isinstance(o, HbarSeries):
            return o
        return HbarSeries({0: o}, None, check=False)

    def __add__(self, o):
        o = self._wrap(o)
        p = _min_prec(self.prec, o.prec)
        cs = dict(self.coeffs)
        for k, v in o.coeffs.items():
            cs[k] = cs[k] + v if k in cs else v
        return HbarSeries(cs, p, check=False)

    __radd__ = __add__

    def __neg__(self):
        return HbarSeries({k: -v for k, v in self.coeffs.items()}, self.prec, check=False)

    def __sub__(self, o):
        return self + (-self._wrap(o))

    def __rsub__(self, o):
        return self._wrap(o) - self

    def __mul__(self, o):
        if not isinstance(o, HbarSeries):
            return HbarSeries({k: v * o for k, v in self.coeffs.items()}, self.prec, check=False)
        va, vb = self.vmin(), o.vmin()
        p = _min_prec(None if self.prec is None or vb is None else self.prec + vb,
                      None if o.prec is None or va is None else o.prec + va)
        if self.prec is not None and vb is None:
            p = _min_prec(p, self.prec + (o.prec if o.prec is not None else 0))
        cs = {}
        for ka, a in self.coeffs.items():
            for kb, b in o.coeffs.items():
                k = ka + kb
                if p is not None and k >= p:
                    continue
                t = a * b
                cs[k] = cs[k] + t if k in cs else t
        return HbarSeries(cs, p, check=False)

    def __rmul__(self, o):
        return HbarSeries({k: o * v for k, v in self.coeffs.items()}, self.prec, check=False)

    def __pow__(self, n: int):
        if n < 0:
            raise SeriesError("negative powers are not supported")
        out = HbarSeries({0: 1}, None)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def shift(self, m2: int):
        """Multiply by hbar^(m2/2)."""
        return HbarSeries({k + m2: v for k, v in self.coeffs.items()},
                          None if self.prec is None else self.prec + m2, check=False)

    def exp(self, prec: int | None = None, one=1):
        """exp(s) for s = O(hbar^(1/2))."""
        bad = [k for k in self.coeffs if k <= 0]
        if bad:
            raise SeriesError(f"exp needs m_min >= 1/2; found hbar^{_half(min(bad))}")
        p = _min_prec(self.prec, prec)
        if p is None:
            raise SeriesError("exp of an exact series needs an explicit truncation")
        s = self.truncate(p)
        out = HbarSeries({0: one}, p, check=False)
        term = HbarSeries({0: one}, p, check=False)
        k = 1
        vm = s.vmin() or p
        while k * vm < p:
            term = term * s * mpq(1, k)
            out = out + term
            k += 1
        return out

    def log(self, prec: int | None = None):
        """log(s) for s = 1 + O(hbar^(1/2))."""
        c0 = self.coeffs.get(0)
        if any(k < 0 for k in self.coeffs):
            raise SeriesError(f"log needs no negative powers; found hbar^{_half(min(self.coeffs))}")
        if c0 is None or _iszero(c0 - 1):
            pass
        else:
            raise SeriesError("log needs leading coefficient 1 at hbar^0")
        p = _min_prec(self.prec, prec)
        if p is None:
            raise SeriesError("log of an exact series needs an explicit truncation")
        if c0 is None:
            raise SeriesError("log needs a nonzero leading coefficient")
        u = (self - c0).truncate(p)
        out = HbarSeries({}, p, check=False)
        term = HbarSeries({0: c0}, p, check=False)
        vm = u.vmin() or p
        k = 1
        while k * vm < p:
            term = term * u
            out = out + term * mpq((-1) ** (k + 1), k)
            k += 1
        return out

    def inverse(self, prec: int | None = None):
        """1/s for s with invertible leading term at hbar^0 (scalar or ring element with inverse)."""
        c0 = self.coeffs.get(0)
        if c0 is None or any(k < 0 for k in self.coeffs):
            raise SeriesError("inverse needs an invertible hbar^0 term and no negative powers")
        p = _min_prec(self.prec, prec)
        if p is None:
            raise SeriesError("inverse of an exact series needs an explicit truncation")
        inv0 = c0.inverse() if hasattr(c0, "inverse") else 1 / c0
        u = (self * inv0 - 1).truncate(p)
        out = HbarSeries({0: 1}, p, check=False)
        term = HbarSeries({0: 1}, p, check=False)
        vm = u.vmin() or p
        k = 1
        while k * vm < p:
            term = term * (-u)
            out = out + term
            k += 1
        return out * inv0

    def equals(self, o, upto: int | None = None):
        d = self - o
        return all(upto is not None and k >= upto for k in d.coeffs)

    def first_nonzero(self):
        if not self.coeffs:
            return None
        k = min(self.coeffs)
        return k, self.coeffs[k]

    def __repr__(self):
        body = " + ".join(f"({v})*h^{_half(k)}" for k, v in self.items()) or "0"
        return body + ("" if self.prec is None else f" + O(h^{_half(self.prec)})")


class LocalSeries:
    """Truncated Laurent series sum_k c_k t^k, k >= val, known for k < prec.

    ``log`` is an optional LocalSeries multiplying log(t).
    """

    __slots__ = ("val", "c", "prec", "point", "log")

    def __init__(self, val: int, coeffs, prec: int | None = None, point=None, log=None):
        c = list(coeffs)
        if prec is not None:
            c = c[:max(0, prec - val)]
        i = 0
        while i < len(c) and _iszero(c[i]):
            i += 1
        c = c[i:]
        val += i
        while c and _iszero(c[-1]):
            c.pop()
        if not c:
            val = prec if prec is not None else 0
        self.val = val
        self.c = c
        self.prec = prec
        self.point = point
        self.log = log

    @classmethod
    def from_dict(cls, d, prec=None, point=None):
        if not d:
            return cls(prec if prec is not None else 0, [], prec, point)
        lo, hi = min(d), max(d)
        return cls(lo, [d.get(k, 0) for k in range(lo, hi + 1)], prec, point)

    @classmethod
    def monomial(cls, k, c=1, point=None):
        return cls(k, [c], None, point)

    def is_zero(self):
        return not self.c and (self.log is None or self.log.is_zero())

    def top(self):
        """Exponent one past the last stored coefficient."""
        return self.val + len(self.c)

    def coefficient(self, k, zero=0):
        if self.prec is not None and k >= self.prec:
            raise SeriesError(f"coefficient of t^{k} is beyond truncation t^{self.prec}")
        i = k - self.val
        if 0 <= i < len(self.c):
            return self.c[i]
        return zero

    def residue(self):
        if self.log is not None and not self.log.is_zero():
            raise SeriesError("residue of a series with a log marker")
        return self.coefficient(-1)

    def items(self):
        return [(self.val + i, a) for i, a in enumerate(self.c) if not _iszero(a)]

    def truncate(self, prec):
        p = _min_prec(self.prec, prec)
        return LocalSeries(self.val, self.c, p, self.point,
                           None if self.log is None else self.log.truncate(p))

    def principal_part(self):
        return {k: a for k, a in self.items() if k < 0}

    # arithmetic
    def _wrap(self, o):
        if isinstance(o, LocalSeries):
            return o
        return LocalSeries(0, [o], None, self.point)

    def __add__(self, o):
        o = self._wrap(o)
        p = _min_prec(self.prec, o.prec)
        if not self.c:
            lo = o.val
        elif not o.c:
            lo = self.val
        else:
            lo = min(self.val, o.val)
        hi = max(self.top(), o.top())
        if p is not None:
            hi = min(hi, p)
        out = [0] * max(0, hi - lo)
        for s in (self, o):
            for i, a in enumerate(s.c):
                k = s.val + i - lo
                if 0 <= k < len(out):
                    out[k] = out[k] + a
        log = self.log
        if o.log is not None:
            log = o.log if log is None else log + o.log
        return LocalSeries(lo, out, p, self.point, log)

    __radd__ = __add__

    def __neg__(self):
        return LocalSeries(self.val, [-a for a in self.c], self.prec, self.point,
                           None if self.log is None else -self.log)

    def __sub__(self, o):
        return self + (-self._wrap(o))

    def __rsub__(self, o):
        return self._wrap(o) - self

    def scale(self, s):
        return LocalSeries(self.val, [a * s for a in self.c], self.prec, self.point,
                           None if self.log is None else self.log.scale(s))

    def __mul__(self, o):
        return self.mul(o)

    def mul(self, o, prec: int | None = None):
        """Product, optionally computed only below t^prec."""
        if not isinstance(o, LocalSeries):
            return self.scale(o).truncate(prec)
        if self.log is not None or o.log is not None:
            if (self.log is not None and o.log is not None):
                raise SeriesError("product of two log markers")
            lg, pl = (self, o) if self.log is not None else (o, self)
            base = LocalSeries(lg.val, lg.c, lg.prec, lg.point).mul(pl, prec)
            base.log = lg.log.mul(pl, prec)
            return base
        va, vb = self.val, o.val
        p = _min_prec(None if self.prec is None else self.prec + vb,
                      None if o.prec is None else o.prec + va, prec)
        if not self.c or not o.c:
            return LocalSeries(va + vb, [], p, self.point)
        lo = va + vb
        n = len(self.c) + len(o.c) - 1
        if p is not None:
            n = min(n, p - lo)
        out = [0] * max(0, n)
        ac, bc = self.c, o.c
        for i, a in enumerate(ac):
            if i >= n:
                break
            if _iszero(a):
                continue
            lim = min(len(bc), n - i)
            for j in range(lim):
                out[i + j] += a * bc[j]
        return LocalSeries(lo, out, p, self.point)

    __rmul__ = __mul__

    def inverse(self, prec: int | None = None):
        """1/s; for exact input a target ``prec`` is required."""
        if self.log is not None:
            raise SeriesError("inverse of a series with log marker")
        if not self.c:
            raise SeriesError("inverse of a series with unknown leading term")
        v = self.val
        if self.prec is None:
            if prec is None:
                raise SeriesError("inverse of an exact series needs a target precision")
            p = prec
        else:
            p = -v + (self.prec - v)
            if prec is not None:
                p = min(p, prec)
        n = p + v
        if n <= 0:
            return LocalSeries(-v, [], p, self.point)
        c = self.c
        inv0 = 1 / c[0]
        out = [0] * n
        out[0] = inv0
        for k in range(1, n):
            acc = 0
            for j in range(1, min(k, len(c) - 1) + 1):
                acc += c[j] * out[k - j]
            out[k] = -acc * inv0
        return LocalSeries(-v, out, p, self.point)

    def __truediv__(self, o):
        if isinstance(o, LocalSeries):
            return self * o.inverse()
        return self.scale(1 / o)

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = LocalSeries(0, [1], None, self.point)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def pow_trunc(self, n: int, prec):
        """Nonnegative power truncated at ``prec`` (for valuation >= 0)."""
        out = LocalSeries(0, [1], None, self.point)
        for _ in range(n):
            out = (out * self).truncate(prec)
        return out

    def derivative(self):
        out = [(self.val + i) * a for i, a in enumerate(self.c)]
        res = LocalSeries(self.val - 1, out, None if self.prec is None else self.prec - 1, self.point)
        if self.log is not None:
            # d(L log t) = L' log t + L/t
            res = res + LocalSeries(self.log.val - 1, self.log.c,
                                    None if self.log.prec is None else self.log.prec - 1, self.point)
            res.log = self.log.derivative() if not self.log.is_zero() else None
        return res

    def integrate(self):
        """Primitive with zero constant; t^-1 goes to the log marker."""
        out = {}
        logc = None
        for k, a in self.items():
            if k == -1:
                logc = a
            else:
                out[k + 1] = a / (k + 1)
        res = LocalSeries.from_dict(out, None if self.prec is None else self.prec + 1, self.point)
        if self.log is not None:
            raise SeriesError("integration of a log marker is not supported")
        if logc is not None:
            res.log = LocalSeries(0, [logc], None if self.prec is None else self.prec + 1, self.point)
        return res

    def compose(self, g: "LocalSeries", prec: int | None = None):
        """self(g(t)) for g with valuation >= 1 (self without log marker)."""
        if self.log is not None:
            raise SeriesError("compose of a series with log marker")
        if not g.c or g.val < 1:
            raise SeriesError("inner series must vanish to first order at t = 0")
        gv = g.val
        p = prec
        if self.prec is not None:
            p = _min_prec(p, self.prec * gv)
        if g.prec is not None:
            ks = [k for k, _ in self.items() if k != 0]
            if ks:
                p = _min_prec(p, (min(ks) - 1) * gv + g.prec)
        if p is None:
            raise SeriesError("composition of exact series needs a target precision")
        v0 = self.val
        if v0 < 0:
            m = -v0
            gm = g.pow_trunc(m, p + 2 * m * gv)
            H = gm.inverse(prec=p if gm.prec is None else None).truncate(p)
        else:
            H = g.pow_trunc(v0, p)
        acc = LocalSeries(p, [], p, self.point)
        for i, a in enumerate(self.c):
            k = v0 + i
            if k * gv >= p:
                break
            if not _iszero(a):
                acc = acc + H.scale(a)
            H = (H * g).truncate(p)
        return acc.truncate(p)

    def __repr__(self):
        body = " + ".join(f"({a})*t^{k}" for k, a in self.items()) or "0"
        if self.log is not None:
            body += f" + [{self.log!r}]*log(t)"
        return body + ("" if self.prec is None else f" + O(t^{self.prec})")


def series_reversion(s: LocalSeries) -> LocalSeries:
    """Compositional inverse r with s(r(w)) = w, via Lagrange inversion."""
    if s.log is not None or s.val != 1 or not s.c:
        raise SeriesError("reversion needs a simple zero: valuation exactly 1")
    if _iszero(s.c[0]):
        raise SeriesError("reversion needs a nonzero linear coefficient")
    if s.prec is None:
        raise SeriesError("reversion of an exact series needs a truncation; call truncate first")
    P = s.prec
    # h = t / s(t) as a power series, known for exponents < P - 1
    h = LocalSeries(0, s.c, P - 1).inverse()
    out = {}
    hp = LocalSeries(0, [1], None)
    for n in range(1, P):
        hp = (hp * h).truncate(P - 1)
        out[n] = hp.coefficient(n - 1) / n
    return LocalSeries.from_dict(out, P, s.point)


def exp_series_coeffs(n: int):
    return [mpq(1, math.factorial(k)) for k in range(n)]
