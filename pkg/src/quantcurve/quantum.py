"""Quantum-curve builders and the annihilation check."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

from gmpy2 import mpq

from . import poly
from .curve import ChartError, CurveError
from .functions import PI2I, Func, RationalFunction
from .operators import QuantumOperator as Op, apply_operator, first_nonzero
from .scalars import ExactField

ONE = mpq(1)
HALF = mpq(1, 2)


class PreconditionError(ValueError):
    pass


@dataclass
class QuantizationRecipe:
    family: str                       # rational | exponential | mixed | gw | hurwitz | custom
    data: dict = field(default_factory=dict)
    C: dict = field(default_factory=dict)   # branch constant: {l: integer n_l}, C = sum 2 pi i w_l n_l


def _trim(p):
    return poly.trim(tuple(mpq(c) if not hasattr(c, "norm") else c for c in p))


def _coprime(P1, P2):
    g = poly.gcd(P1, P2)
    return len(g) <= 1


def _ord0(p):
    return next(i for i, c in enumerate(p) if c != 0)


def _poly_in_y(P):
    """Polynomial coefficients -> bivariate {(j, 0): c}."""
    return {(j, 0): c for j, c in enumerate(P) if c != 0}


def _exp_poly(P, shift2):
    """P(exp(yhat + shift2 * t^2 / 2 ... )): sum_k c_k exp(k yhat + k * shift2 hbar)."""
    out = Op()
    for k, c in enumerate(P):
        if c == 0:
            continue
        Q = {}
        if k:
            Q[(1, 0)] = mpq(k)
        if k * shift2 != 0:
            Q[(0, 2)] = k * shift2
        out = out + Op.exp_y(Q) * c
    return out


def quantize_rational(P1, P2) -> Op:
    """P1(yhat) - P2(yhat) xhat for x = P1(z)/P2(z), y = z, basepoint infinity."""
    P1, P2 = _trim(P1), _trim(P2)
    if not P2:
        raise PreconditionError("P2 must be nonzero")
    if not _coprime(P1, P2):
        raise PreconditionError("P1 and P2 must be coprime")
    if len(P1) <= len(P2):
        raise PreconditionError("deg P1 must exceed deg P2")
    op = Op.y_poly(_poly_in_y(P1)) - Op.y_poly(_poly_in_y(P2)) * Op.xhat()
    op.label = "rational"
    return op


def check_exponential(P1, P2):
    """Conditions for the exponential family; returns a list of failures."""
    P1, P2 = _trim(P1), _trim(P2)
    bad = []
    if len(P1) == len(P2):
        bad.append("condition 1: deg P1 equals deg P2")
    if _ord0(P1) == _ord0(P2):
        bad.append("condition 2: the reversed polynomials have equal degree")
    if not _coprime(P1, P2):
        bad.append("condition 3: P1 and P2 share a root")
    else:
        field = ExactField()
        for P in (P1, P2):
            sq = poly.gcd(P, poly.deriv(P))
            rest = sq
            while len(rest) > 1 and rest[0] == 0:
                rest = rest[1:]
            if len(rest) > 1:
                bad.append("condition 3: P1/P2 has a multiple zero or pole in C*")
                break
    return bad


def quantize_exponential(P1, P2) -> Op:
    """P2(e^(yhat - hbar/2)) e^(xhat + hbar/2) - P1(e^(yhat - hbar/2)) for e^x = P1(e^y)/P2(e^y)."""
    P1, P2 = _trim(P1), _trim(P2)
    bad = check_exponential(P1, P2)
    if bad:
        raise PreconditionError("; ".join(bad))
    ex = Op.exp_x(ONE) * Op.exp_y({(0, 2): HALF})
    op = _exp_poly(P2, -HALF) * ex - _exp_poly(P1, -HALF)
    op.label = "exponential"
    return op


def quantize_mixed(P1, P2) -> Op:
    """P2(e^yhat)(xhat + hbar/2) - P1(e^yhat) for x = P1(e^y)/P2(e^y) with a pole of x at z = 0 or infinity."""
    P1, P2 = _trim(P1), _trim(P2)
    if not _coprime(P1, P2):
        raise PreconditionError("P1 and P2 must be coprime")
    inf_lim = len(P1) > len(P2)
    zero_lim = _ord0(P1) < _ord0(P2)
    if not (inf_lim or zero_lim):
        raise PreconditionError("P1/P2 must be infinite at z = 0 or z = infinity")
    op = _exp_poly(P2, 0) * (Op.xhat() + Op.hbar(HALF)) - _exp_poly(P1, 0)
    op.label = "mixed"
    return op


def quantize_gw(q: dict, w: dict | None = None, C: dict | None = None) -> Op:
    """xhat + hbar/2 - sum_l [q_l e^(l yhat) + w_l (l yhat + log q_l)] - C.

    ``q``, ``w`` map l to rationals; ``C`` maps l to the integer n_l with
    C = sum_l 2 pi i w_l n_l.
    """
    w = {l: mpq(v) for l, v in (w or {}).items() if v != 0}
    C = {l: int(n) for l, n in (C or {}).items() if n != 0}
    q = {l: mpq(v) for l, v in q.items()}
    ls = [l for l, v in q.items() if v != 0]
    if not ls:
        raise PreconditionError("some q_l must be nonzero")
    for l in w:
        if q.get(l, 0) == 0:
            raise PreconditionError(f"w_{l} is nonzero while q_{l} = 0")
    for l in C:
        if l not in w:
            raise PreconditionError(f"branch constant uses l = {l} with w_l = 0")
    op = Op.xhat() + Op.hbar(HALF)
    for l in sorted(ls):
        op = op - Op.exp_y({(1, 0): mpq(l)} if l else {}) * q[l]
        if l in w:
            op = op - Op.yhat() * (w[l] * l) - Op.mul_by(Func.log_const(q[l], w[l]))
    for l, n in sorted(C.items()):
        op = op - Op.mul_by(Func.atom(PI2I, w[l] * n))
    op.label = "gw"
    return op


def hurwitz_exponent(phi):
    """Q(y, t) = sum_{i>=1} hbar^(i-1) Phi^(i)(y)/i! for a polynomial phi, Phi' = phi."""
    phi = _trim(phi)
    Phi = (mpq(0),) + tuple(c / (i + 1) for i, c in enumerate(phi))
    Q = {}
    D = Phi
    i = 0
    while True:
        D = poly.deriv(D)
        i += 1
        if not poly.trim(D):
            break
        for j, c in enumerate(D):
            if c != 0:
                Q[(j, 2 * (i - 1))] = Q.get((j, 2 * (i - 1)), 0) + c / factorial(i)
    return Q


def quantize_hurwitz(phi) -> Op:
    """yhat - hbar/2 - e^(Phi(yhat)/hbar) e^xhat e^(-Phi(yhat)/hbar) for x = log z - phi(z), y = z."""
    if isinstance(phi, RationalFunction):
        if phi.den:
            raise PreconditionError("only polynomial phi is supported by the word algebra")
        phi = phi.num
    op = Op.yhat() - Op.hbar(HALF) - Op.exp_x(ONE) * Op.exp_y(hurwitz_exponent(phi))
    op.label = "hurwitz"
    return op


def dual_operator(A: Op) -> Op:
    """Image under xhat -> -yhat, yhat -> xhat (the swap with yhat_dual = -hbar d/dx_dual).

    The word order is kept, so the result is renormal-ordered by the algebra.
    """
    out = Op()
    for (M, k, beta, _), (Q, P) in A.terms.items():
        if not M.is_const():
            raise ChartError("function multipliers have no dual image")
        left = Op.mul_by(M) * (Op.yhat(k) * ((-1) ** k) if k else Op.const(ONE))
        if beta != 0:
            left = left * Op.shift(-beta)
        right = Op()
        for (j, d), c in P.items():
            right = right + Op.xhat(j) * Op.const(c, d)
        lin = {kk: v for kk, v in Q.items() if kk[0] >= 1}
        if any(kk[0] > 1 for kk in lin):
            raise ChartError("only linear exponents in yhat have a dual image")
        const = {kk: v for kk, v in Q.items() if kk[0] == 0}
        ex = Op.exp_y(const) if const else Op.const(ONE)
        for (j, d), v in lin.items():
            if d != 0:
                raise ChartError("hbar-dependent linear exponents have no dual image")
            ex = ex * Op.exp_x(v)
        out = out + left * right * ex
    out.label = (A.label + "^dual") if A.label else "dual"
    return out


@dataclass
class QCReport:
    kills: bool
    order: int
    first_nonzero_order: object
    residual: object
    ratio: object


def verify_quantum_curve(A: Op, psi, N: int = 4) -> QCReport:
    if psi.order < N - 1:
        raise CurveError(f"wavefunction order {psi.order} is too low for N = {N}")
    r = apply_operator(A, psi, N)
    f = first_nonzero(r)
    if f is None:
        return QCReport(True, N, None, None, r)
    return QCReport(False, N, mpq(f[0], 2), f[1], r)
