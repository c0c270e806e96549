import pytest
import sympy as sp
from gmpy2 import mpq

from quantcurve import catalog as cat
from quantcurve.curve import INF
from quantcurve.functions import Func
from quantcurve.functions import RationalFunction as RF
from quantcurve.recursion import CorrelatorStore
from quantcurve.scalars import ExactField
from quantcurve.wavefunction import (BasepointError, build_wavefunction, finite_part, integrate_rf, log_rf,
                                     primitive_of_correlator, wkb_S0)

z = sp.Symbol("z")
F = ExactField()


def _sym(f):
    return f.to_sympy(F, z)


def _airy_wkb_oracle(N):
    """sigma = hbar dlog(psi)/dx solving sigma^2 + hbar sigma' = x with x = z^2, sigma_{-1} = z.

    Returns dS_m/dx for m = 0..N as sympy expressions in z.
    """
    ddx = lambda e: sp.diff(e, z) / (2 * z)
    sig = {-1: z}
    for k in range(0, N + 1):
        # coefficient of hbar^(k+1): sum_{i+j=k-1} sig_i sig_j + sig'_{k-1} = 0
        rest = sum(sig[i] * sig[k - 1 - i] for i in range(0, k)) + ddx(sig[k - 1])
        sig[k] = sp.simplify(-rest / (2 * z))
    return sig


def test_airy_S_derivatives_match_wkb_oracle():
    N = 4
    psi = build_wavefunction(CorrelatorStore(cat.build_curve("airy")), INF, N)
    sig = _airy_wkb_oracle(N)
    for m in range(0, N + 1):
        assert sp.simplify(_sym(psi.d(m, 1)) - sig[m]) == 0, m


def test_S0_is_minus_half_log_dx():
    c = cat.build_curve("gw-p1")
    s0 = _sym(wkb_S0(c))
    # x' = 1 - 1/z^2
    assert sp.simplify(sp.diff(s0, z) - sp.diff(-sp.log(1 - 1 / z ** 2) / 2, z)) == 0


def test_S_minus_one_closed_form():
    psi = build_wavefunction(CorrelatorStore(cat.build_curve("airy")), INF, 1)
    # int y dx = 2 z^3 / 3
    assert sp.simplify(_sym(psi.S_minus1) - sp.Rational(2, 3) * z ** 3) == 0


def test_basepoint_at_pole_rejected():
    store = CorrelatorStore(cat.build_curve("airy"))
    with pytest.raises(BasepointError):
        primitive_of_correlator(store.get(1, 1), mpq(0), F)
    with pytest.raises(BasepointError):
        build_wavefunction(store, mpq(0), 1)


def test_regular_basepoint_vanishes_at_basepoint():
    store = CorrelatorStore(cat.build_curve("airy"))
    b = mpq(2)
    psi = build_wavefunction(store, b, 2)
    for m in (1, 2):
        assert _sym(psi.S[m]).subs(z, 2) == 0


def test_integrate_rf():
    r = RF.from_num_den(F, (mpq(1), mpq(0), mpq(3)), (mpq(0), mpq(0), mpq(1), mpq(-1)))   # (1+3z^2)/(z^2(1-z))
    P = integrate_rf(F, r)
    expr = (1 + 3 * z ** 2) / (z ** 2 * (1 - z))
    assert sp.simplify(sp.diff(_sym(P), z) - expr) == 0
    assert integrate_rf(F, RF.from_num_den(F, (mpq(1),), (mpq(1), mpq(0), mpq(1)))) is None


def test_log_rf_derivative():
    r = RF.from_num_den(F, (mpq(-2), mpq(0), mpq(2)), (mpq(0), mpq(1)))   # 2(z^2 - 1)/z
    assert sp.simplify(sp.diff(_sym(log_rf(F, r)), z) - sp.diff(sp.log(2 * (z ** 2 - 1) / z), z)) == 0


def test_finite_part():
    f = Func.rf(RF.pole(mpq(0), 1)) + Func.rf(RF.z() * RF.z())     # 1/z + z^2
    assert finite_part(f, mpq(1)) == Func.const(mpq(2))
    assert finite_part(f, INF) == Func()
    g = Func.log_linear(mpq(0)) + Func.rf(RF.z())                     # log z + z
    assert finite_part(g, mpq(0)) == Func()
    assert finite_part(g, mpq(2)) == Func.log_const(mpq(2)) + Func.const(mpq(2))
