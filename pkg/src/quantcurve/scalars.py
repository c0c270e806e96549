"""Scalar fields.

Two modes are supported.  ``ExactField`` works over the rationals (gmpy2
``mpq``), optionally adjoined with a single square root ``sqrt(d)``.
``FloatField`` works with mpmath complex numbers at a configurable precision
and zero tolerance.
"""

from __future__ import annotations

from fractions import Fraction
import re

import gmpy2
import mpmath
from gmpy2 import mpq

MPQ = type(mpq(0))


class FieldError(ValueError):
    """Raised when a value cannot be represented in the active field."""


class FieldExtensionError(FieldError):
    """Raised when roots of a polynomial fall outside the active field."""

    def __init__(self, msg, discriminants=()):
        super().__init__(msg)
        self.discriminants = tuple(discriminants)


def _squarefree_part(n: int) -> int:
    sign = -1 if n < 0 else 1
    n = abs(n)
    out, p = 1, 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
        if n % p == 0:
            out *= p
            n //= p
        p += 1
    return sign * out * n


def squarefree_class(q) -> int:
    """Squarefree integer d with q = r^2 * d for rational r (q != 0)."""
    q = mpq(q)
    return _squarefree_part(int(q.numerator) * int(q.denominator))


def rational_sqrt(q):
    """Exact square root of a nonnegative rational, or None."""
    q = mpq(q)
    if q < 0:
        return None
    n, d = int(q.numerator), int(q.denominator)
    rn, rd = gmpy2.isqrt(n), gmpy2.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return mpq(int(rn), int(rd))
    return None


class QuadraticNumber:
    """a + b*sqrt(d) with rational a, b and squarefree d (b != 0)."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d: int):
        self.a = mpq(a)
        self.b = mpq(b)
        self.d = d

    @staticmethod
    def make(a, b, d):
        if b == 0:
            return mpq(a)
        return QuadraticNumber(a, b, d)

    def _coerce(self, o):
        if isinstance(o, QuadraticNumber):
            if o.d != self.d:
                raise FieldError(f"mixing sqrt({self.d}) and sqrt({o.d})")
            return o.a, o.b
        if isinstance(o, (int, MPQ, Fraction)):
            return mpq(o), mpq(0)
        return None

    def __add__(self, o):
        c = self._coerce(o)
        if c is None:
            return NotImplemented
        return QuadraticNumber.make(self.a + c[0], self.b + c[1], self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, o):
        c = self._coerce(o)
        if c is None:
            return NotImplemented
        return QuadraticNumber.make(self.a - c[0], self.b - c[1], self.d)

    def __rsub__(self, o):
        c = self._coerce(o)
        if c is None:
            return NotImplemented
        return QuadraticNumber.make(c[0] - self.a, c[1] - self.b, self.d)

    def __mul__(self, o):
        c = self._coerce(o)
        if c is None:
            return NotImplemented
        a, b = c
        return QuadraticNumber.make(self.a * a + self.d * self.b * b,
                                    self.a * b + self.b * a, self.d)

    __rmul__ = __mul__

    def conjugate_sqrt(self):
        return QuadraticNumber(self.a, -self.b, self.d)

    def norm(self):
        return self.a * self.a - self.d * self.b * self.b

    def inverse(self):
        n = self.norm()
        return QuadraticNumber.make(self.a / n, -self.b / n, self.d)

    def __truediv__(self, o):
        c = self._coerce(o)
        if c is None:
            return NotImplemented
        if c[1] == 0:
            return QuadraticNumber.make(self.a / c[0], self.b / c[0], self.d)
        return self * QuadraticNumber(c[0], c[1], self.d).inverse()

    def __rtruediv__(self, o):
        c = self._coerce(o)
        if c is None:
            return NotImplemented
        return self.inverse() * QuadraticNumber.make(c[0], c[1], self.d)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out, base = mpq(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, o):
        if isinstance(o, QuadraticNumber):
            return (self.a, self.b, self.d) == (o.a, o.b, o.d)
        if isinstance(o, (int, MPQ, Fraction)):
            return False  # b != 0 by construction
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __repr__(self):
        return f"({self.a} + {self.b}*sqrt({self.d}))"


def sort_key(v):
    """Total order on scalars for deterministic output."""
    if isinstance(v, QuadraticNumber):
        return (v.a, v.b)
    if isinstance(v, (mpmath.mpc, mpmath.mpf)):
        v = mpmath.mpc(v)
        return (float(v.real), float(v.imag))
    return (mpq(v), mpq(0))


_RAT = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_rational(s) -> MPQ:
    if isinstance(s, bool):
        raise FieldError(f"not a rational: {s!r}")
    if isinstance(s, int):
        return mpq(s)
    if isinstance(s, (MPQ, Fraction)):
        return mpq(s)
    if isinstance(s, str):
        m = _RAT.match(s)
        if m:
            if m.group(2) is not None and int(m.group(2)) == 0:
                raise FieldError(f"zero denominator: {s!r}")
            return mpq(int(m.group(1)), int(m.group(2) or 1))
    raise FieldError(f"malformed rational: {s!r}")


def format_rational(q) -> str:
    q = mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class ExactField:
    """Rationals, optionally extended by sqrt(extension)."""

    exact = True

    def __init__(self, extension: int | None = None):
        if extension is not None:
            extension = int(extension)
            if extension in (0, 1) or _squarefree_part(extension) != extension:
                raise FieldError(f"extension must be a squarefree integer != 0, 1: {extension}")
        self.extension = extension
        self.zero = mpq(0)
        self.one = mpq(1)

    def __repr__(self):
        return f"ExactField(extension={self.extension})"

    def __eq__(self, o):
        return isinstance(o, ExactField) and o.extension == self.extension

    def __hash__(self):
        return hash(("exact", self.extension))

    def sqrt_d(self):
        if self.extension is None:
            raise FieldError("no extension in field")
        return QuadraticNumber(0, 1, self.extension)

    def __call__(self, v):
        if isinstance(v, QuadraticNumber):
            if v.d != self.extension:
                raise FieldError(f"{v!r} not in field with extension {self.extension}")
            return v
        if isinstance(v, dict):
            return self.from_json(v)
        return parse_rational(v)

    @staticmethod
    def is_zero(v) -> bool:
        return v == 0

    def sqrt(self, v):
        """Square root inside the field, or None."""
        if isinstance(v, QuadraticNumber):
            # (p + q s)^2 = v: solve via norm
            n = rational_sqrt(v.norm())
            if n is None:
                return None
            for nn in (n, -n):
                p2 = (v.a + nn) / 2
                p = rational_sqrt(p2)
                if p is not None and p != 0:
                    q = v.b / (2 * p)
                    cand = QuadraticNumber.make(p, q, v.d)
                    if cand * cand == v:
                        return cand
                if p2 == 0:
                    q2 = v.a / v.d
                    q = rational_sqrt(q2)
                    if q is not None:
                        cand = QuadraticNumber.make(0, q, v.d)
                        if cand * cand == v:
                            return cand
            return None
        r = rational_sqrt(v)
        if r is not None:
            return r
        if self.extension is not None:
            q = rational_sqrt(mpq(v) / self.extension)
            if q is not None:
                return QuadraticNumber(0, q, self.extension)
        return None

    # serialization
    def to_json(self, v):
        if isinstance(v, QuadraticNumber):
            if v.d == -1:
                return {"re": format_rational(v.a), "im": format_rational(v.b)}
            return {"rat": format_rational(v.a), "sqrt": format_rational(v.b), "d": v.d}
        return format_rational(v)

    def from_json(self, obj):
        if isinstance(obj, dict):
            if set(obj) == {"re", "im"}:
                im = parse_rational(obj["im"])
                if im != 0 and self.extension != -1:
                    raise FieldError("imaginary part requires extension -1")
                return QuadraticNumber.make(parse_rational(obj["re"]), im, -1)
            if set(obj) == {"rat", "sqrt", "d"}:
                if int(obj["d"]) != self.extension:
                    raise FieldError(f"sqrt({obj['d']}) not in field with extension {self.extension}")
                return QuadraticNumber.make(parse_rational(obj["rat"]), parse_rational(obj["sqrt"]),
                                            self.extension)
            raise FieldError(f"malformed scalar object: {obj!r}")
        return parse_rational(obj)

    def to_sympy(self, v):
        import sympy as sp
        if isinstance(v, QuadraticNumber):
            return sp.Rational(int(v.a.numerator), int(v.a.denominator)) + \
                sp.Rational(int(v.b.numerator), int(v.b.denominator)) * sp.sqrt(v.d)
        v = mpq(v)
        return sp.Rational(int(v.numerator), int(v.denominator))

    def to_complex(self, v, dps=30):
        if isinstance(v, QuadraticNumber):
            with mpmath.workdps(dps):
                return mpmath.mpc(mpmath.mpf(v.a.numerator) / v.a.denominator) + \
                    mpmath.mpf(v.b.numerator) / v.b.denominator * mpmath.sqrt(mpmath.mpc(v.d))
        v = mpq(v)
        return mpmath.mpc(mpmath.mpf(v.numerator) / v.denominator)

    def roots(self, coeffs):
        """All roots of an ascending coefficient list, with multiplicities.

        Raises FieldExtensionError if some root lies outside the field.
        """
        from . import poly
        return poly.exact_roots(self, coeffs)


class FloatField:
    """Arbitrary precision complex numbers with zero tolerance ``tol``."""

    exact = False

    def __init__(self, precision: int = 128, tolerance=None):
        self.precision = int(precision)
        if tolerance is None:
            raise FieldError("float mode needs an explicit tolerance")
        with mpmath.workprec(self.precision):
            self.tol = mpmath.mpf(tolerance)
        self.zero = mpmath.mpc(0)
        self.one = mpmath.mpc(1)
        self.extension = None

    def __repr__(self):
        return f"FloatField(precision={self.precision}, tolerance={mpmath.nstr(self.tol, 5)})"

    def __eq__(self, o):
        return isinstance(o, FloatField) and (o.precision, o.tol) == (self.precision, self.tol)

    def __hash__(self):
        return hash(("float", self.precision))

    def __call__(self, v):
        with mpmath.workprec(self.precision):
            if isinstance(v, dict):
                return self.from_json(v)
            if isinstance(v, QuadraticNumber):
                return ExactField(v.d).to_complex(v, dps=int(self.precision * 0.31) + 5)
            if isinstance(v, (MPQ, Fraction)):
                return mpmath.mpc(mpmath.mpf(int(v.numerator)) / int(v.denominator))
            if isinstance(v, str) and "/" in v:
                q = parse_rational(v)
                return mpmath.mpc(mpmath.mpf(int(q.numerator)) / int(q.denominator))
            return mpmath.mpc(v)

    def is_zero(self, v) -> bool:
        return abs(v) <= self.tol

    def sqrt(self, v):
        with mpmath.workprec(self.precision):
            return mpmath.sqrt(v)

    def to_json(self, v):
        with mpmath.workprec(self.precision):
            dps = int(self.precision * 0.30103)
            return {"re": mpmath.nstr(v.real, dps), "im": mpmath.nstr(v.imag, dps)}

    def from_json(self, obj):
        with mpmath.workprec(self.precision):
            if isinstance(obj, dict):
                return mpmath.mpc(self(obj.get("re", 0)).real, self(obj.get("im", 0)).real)
            return self(obj)

    def to_complex(self, v, dps=30):
        return v

    def roots(self, coeffs):
        from . import poly
        return poly.float_roots(self, coeffs)
