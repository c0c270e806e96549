"""Dense univariate polynomials as ascending coefficient tuples."""

from __future__ import annotations

from functools import lru_cache

import mpmath
from gmpy2 import mpq

from .scalars import (FieldExtensionError, QuadraticNumber, sort_key,
                      squarefree_class)

ONE = mpq(1)


def trim(p, is_zero=lambda c: c == 0):
    p = list(p)
    while p and is_zero(p[-1]):
        p.pop()
    return tuple(p)


def add(p, q):
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for i, c in enumerate(q):
        out[i] = out[i] + c
    return trim(out)


def neg(p):
    return tuple(-c for c in p)


def sub(p, q):
    return add(p, neg(q))


def scale(p, c):
    if c == 0:
        return ()
    return trim(c * a for a in p)


def mul(p, q):
    if not p or not q:
        return ()
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return trim(out)


def power(p, n: int):
    out, base = (mpq(1),), p
    while n:
        if n & 1:
            out = mul(out, base)
        base = mul(base, base)
        n >>= 1
    return out


def deriv(p):
    return trim(i * p[i] for i in range(1, len(p)))


def evaluate(p, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def divmod_poly(p, q):
    """Quotient and remainder of p by q (q nonzero)."""
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    p = list(p)
    dq = len(q) - 1
    lead = q[-1]
    if len(p) - 1 < dq:
        return (), trim(p)
    quo = [0] * (len(p) - dq)
    inv = ONE / lead
    for i in range(len(p) - 1 - dq, -1, -1):
        c = p[i + dq] * inv if lead != 1 else p[i + dq]
        quo[i] = c
        if c != 0:
            for j in range(dq + 1):
                p[i + j] -= c * q[j]
    return trim(quo), trim(p[:dq])


def exact_divide(p, q):
    quo, rem = divmod_poly(p, q)
    if rem:
        raise ArithmeticError("inexact polynomial division")
    return quo


def monic(p):
    lead = p[-1]
    if lead == 1:
        return tuple(p)
    inv = ONE / lead
    return tuple(c * inv for c in p)


def gcd(p, q):
    p, q = trim(p), trim(q)
    while q:
        p, q = q, divmod_poly(p, q)[1]
    return monic(p) if p else ()


def taylor_shift(p, a):
    """Coefficients of p(a + t) in t."""
    out = list(p)
    n = len(out)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            out[j] = out[j] + a * out[j + 1]
    return tuple(out)


def linear(root):
    """The monic factor z - root."""
    return (-root, mpq(1))


def compose(p, q):
    """p(q(z))."""
    out = ()
    for c in reversed(p):
        out = add(mul(out, q), (c,) if c != 0 else ())
    return out


# root finding -----------------------------------------------------------

def _is_rational(c):
    return not isinstance(c, QuadraticNumber)


def _rational_norm(p):
    if all(_is_rational(c) for c in p):
        return p
    conj = tuple(c.conjugate_sqrt() if isinstance(c, QuadraticNumber) else c for c in p)
    n = mul(p, conj)
    assert all(_is_rational(c) for c in n)
    return n


def _sympy_factor_rational(p):
    import sympy as sp
    z = sp.Symbol("z")
    expr = sum(sp.Rational(int(mpq(c).numerator), int(mpq(c).denominator)) * z**i
               for i, c in enumerate(p))
    _, facs = sp.factor_list(expr, z, domain="QQ")
    out = []
    for f, m in facs:
        cs = sp.Poly(f, z).all_coeffs()[::-1]
        out.append((tuple(mpq(int(c.p), int(c.q)) for c in cs), m))
    return out


def exact_roots(field, p):
    """Roots of p in the exact field as sorted (root, multiplicity) pairs."""
    p = trim(p)
    if len(p) <= 1:
        return []
    cands, missing = [], []
    for f, _ in _sympy_factor_rational(_rational_norm(p)):
        deg = len(f) - 1
        if deg == 1:
            cands.append(-f[0] / f[1])
        elif deg == 2:
            c, b, a = f
            disc = b * b - 4 * a * c
            d = squarefree_class(disc)
            if field.extension == d:
                s = field.sqrt(disc)
                cands += [(-b + s) / (2 * a), (-b - s) / (2 * a)]
            else:
                missing.append(d)
        else:
            missing.append(None)
    found, rest = [], p
    for r in cands:
        m = 0
        while len(rest) > 1 and evaluate(rest, r) == 0:
            rest = exact_divide(rest, linear(r))
            m += 1
        if m:
            found.append((r, m))
    if len(rest) > 1:
        needs = sorted({d for d in missing if d is not None})
        hint = (f"roots need sqrt({', '.join(map(str, needs))}); set extension accordingly"
                if needs else "roots need a higher-degree extension")
        raise FieldExtensionError(
            f"polynomial of degree {len(p) - 1} has roots outside the field ({hint}) "
            f"or use float mode", needs)
    found.sort(key=lambda rm: sort_key(rm[0]))
    return found


@lru_cache(maxsize=None)
def _sympy_ext_field(d):
    import sympy as sp
    K = sp.QQ.algebraic_field(sp.sqrt(d))
    b, a = (list(K.from_sympy(sp.sqrt(d)).to_list()) + [0, 0])[:2]
    return K, mpq(int(b.numerator), int(b.denominator)), mpq(int(a.numerator), int(a.denominator))


def factor_irreducible(field, p):
    """Factor p into (leading coefficient, [(monic irreducible, multiplicity)])."""
    if not field.exact:
        p = trim(p, field.is_zero)
        if len(p) <= 1:
            return (p[0] if p else 0), []
        return p[-1], [(linear(r), m) for r, m in float_roots(field, p)]
    p = trim(p)
    if len(p) <= 1:
        return (p[0] if p else 0), []
    lead = p[-1]
    rest = monic(p)
    facs = []
    try:
        for r, m in exact_roots(field, rest):
            facs.append((linear(r), m))
            for _ in range(m):
                rest = exact_divide(rest, linear(r))
    except FieldExtensionError:
        for r, m in _partial_roots(field, rest):
            facs.append((linear(r), m))
            for _ in range(m):
                rest = exact_divide(rest, linear(r))
    if len(rest) > 1:
        facs += _factor_no_roots(field, rest)
    facs.sort(key=lambda fm: (len(fm[0]), [sort_key(c) for c in fm[0]]))
    return lead, facs


def _partial_roots(field, p):
    out = []
    for f, _ in _sympy_factor_rational(_rational_norm(p)):
        cands = []
        if len(f) == 2:
            cands = [-f[0] / f[1]]
        elif len(f) == 3 and field.extension is not None:
            c, b, a = f
            s = field.sqrt(b * b - 4 * a * c)
            if s is not None:
                cands = [(-b + s) / (2 * a), (-b - s) / (2 * a)]
        for r in cands:
            m, q = 0, p
            while len(q) > 1 and evaluate(q, r) == 0:
                q = exact_divide(q, linear(r))
                m += 1
            if m:
                out.append((r, m))
    return out


def _factor_no_roots(field, p):
    import sympy as sp
    z = sp.Symbol("z")
    if field.extension is None:
        return [(monic(f), m) for f, m in _sympy_factor_rational(p)]
    K, b, a = _sympy_ext_field(field.extension)
    expr = sum(field.to_sympy(c) * z**i for i, c in enumerate(p))
    _, facs = sp.factor_list(expr, z, extension=sp.sqrt(field.extension))
    out = []
    for f, m in facs:
        P = sp.Poly(f, z, domain=K)
        cs = []
        for c in P.rep.to_list()[::-1]:
            lst = [mpq(int(t.numerator), int(t.denominator)) for t in c.to_list()]
            lst = [mpq(0)] * (2 - len(lst)) + lst
            c1, c0 = lst
            # c1*theta + c0 with theta = (sqrt(d) - a)/b
            cs.append(QuadraticNumber.make(c0 - c1 * a / b, c1 / b, field.extension))
        out.append((monic(tuple(cs)), m))
    return out


def float_roots(field, p):
    p = trim(tuple(field(c) for c in p), field.is_zero)
    if len(p) <= 1:
        return []
    out = []
    with mpmath.workprec(field.precision + 32):
        rs = mpmath.polyroots(list(reversed(p)), maxsteps=400, extraprec=2 * field.precision)
        clusters = []
        radius = field.tol ** 0.5 if field.tol > 0 else mpmath.mpf(10) ** (-10)
        for r in rs:
            for cl in clusters:
                if abs(cl[0] - r) <= radius:
                    cl[1].append(r)
                    break
            else:
                clusters.append([r, [r]])
        for _, members in clusters:
            m = len(members)
            out.append((mpmath.mpc(mpmath.fsum(members) / m), m))
    out.sort(key=lambda rm: sort_key(rm[0]))
    return out
