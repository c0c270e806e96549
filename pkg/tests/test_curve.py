import pytest
import sympy as sp
from gmpy2 import mpq

from quantcurve import catalog as cat
from quantcurve.curve import (INF, AdmissibilityError, ChartError, CurveError, SpectralCurve, check_admissibility,
                              dualize, laurent_expand, lrf, ramification_data, recursion_kernel)
from quantcurve.functions import Func
from quantcurve.functions import RationalFunction as RF
from quantcurve.scalars import ExactField

Z = RF.z()


def _rf(num, den=(1,)):
    return RF.from_num_den(ExactField(), tuple(mpq(c) for c in num), tuple(mpq(c) for c in den))


def _coeffs(s, lo, hi):
    return [s.coefficient(k) for k in range(lo, hi + 1)]


# -- laurent expansion -------------------------------------------------------

def test_laurent_simple_fraction():
    s = laurent_expand(_rf([1], [0, 1, -1]), mpq(0), 1)   # 1/(z(1 - z))
    assert _coeffs(s, -1, 1) == [1, 1, 1]


def test_laurent_at_regular_point():
    s = laurent_expand(Z + RF.pole(mpq(0), 1), mpq(1), 3)
    assert _coeffs(s, 0, 3) == [2, 0, 1, -1]


def test_laurent_at_infinity():
    s = laurent_expand(Z + RF.pole(mpq(0), 1), INF, 2)
    assert _coeffs(s, -1, 2) == [1, 0, 1, 0]


def test_laurent_log_keeps_constant():
    # log(z - 2) at z = 5: log 3 + t/3 - t^2/18
    s = laurent_expand(lrf(None, {mpq(2): 1}), mpq(5), 2)
    c0 = s.coefficient(0)
    assert isinstance(c0, Func)
    assert c0 == Func.log_const(mpq(3))
    assert _coeffs(s, 1, 2) == [mpq(1, 3), mpq(-1, 18)]


def test_laurent_log_at_its_own_point():
    s = laurent_expand(lrf(None, {mpq(2): 1}), mpq(2), 1)
    assert s.log
    assert s.coefficient(1) == 0


# -- admissibility -----------------------------------------------------------

def test_airy_admissible():
    rep = check_admissibility(cat.build_curve("airy"), dual=True)
    assert rep["admissible"], rep["violations"]


def test_double_zero_of_dx_is_reported():
    c = SpectralCurve(lrf(Z ** 3), lrf(Z))       # dx = 3 z^2 dz
    rep = c.admissibility()
    assert not rep["admissible"]
    assert any("multiplicity 2" in v for v in rep["violations"])
    with pytest.raises(AdmissibilityError):
        c.ramification_points()


def test_dy_vanishing_at_ramification_point():
    c = SpectralCurve(lrf(Z ** 2), lrf(Z ** 2))
    rep = c.admissibility()
    assert not rep["admissible"]
    assert rep["zeros"][0]["dy_nonzero"] is False


def test_infinity_ramified_needs_reparametrization():
    c = SpectralCurve(lrf(RF.pole(mpq(0), 2)), lrf(RF.pole(mpq(0), 1)))   # x = 1/z^2
    with pytest.raises(ChartError):
        c.ramification_points()
    m = c.mobius(mpq(0), mpq(1), mpq(1), mpq(0))      # z = 1/w
    assert m.ramification_points() == [0]
    with pytest.raises(CurveError):
        c.mobius(mpq(1), mpq(1), mpq(1), mpq(1))


def test_mobius_rejects_log_curves():
    with pytest.raises(CurveError):
        cat.build_curve("gw-p1").mobius(mpq(0), mpq(1), mpq(1), mpq(0))


@pytest.mark.parametrize("name", sorted(cat.CATALOG))
def test_catalog_entries_admissible_both_ways(name):
    rep = check_admissibility(cat.build_curve(name), dual=True)
    assert rep["admissible"], rep["violations"]


def test_dualize():
    c = cat.build_curve("airy")
    d = dualize(c)
    assert d.x is c.y
    assert d.y.rational == (-c.x).rational


# -- ramification data -------------------------------------------------------

def test_airy_ramification_data():
    rd = ramification_data(cat.build_curve("airy"), prec=5)
    assert rd.R == [0]
    assert rd.L == {}
    assert _coeffs(rd.sigma[0], 1, 4) == [-1, 0, 0, 0]


def test_gwp1_ramification_data():
    c = cat.build_curve("gw-p1")
    rd = ramification_data(c, prec=5)
    assert sorted(rd.R) == [-1, 1]
    assert set(rd.L) == {0, INF}
    # sigma(z) = 1/z is the deck involution of x = z + 1/z
    z = sp.Symbol("z")
    for a in rd.R:
        exact = sp.series(1 / (a + z) - a, z, 0, 5).removeO()
        assert [sp.Rational(str(v)) for v in _coeffs(rd.sigma[a], 1, 4)] == [exact.coeff(z, k) for k in range(1, 5)]


def test_recursion_kernel_airy():
    # x = z^2, y = z: 1/((y(-z) - y(z)) x'(z)) = -1/(4 z^2)
    k = recursion_kernel(cat.build_curve("airy"), mpq(0), prec=3)
    assert k.coefficient(-2) == mpq(-1, 4)
    assert k.coefficient(-1) == 0
    with pytest.raises(CurveError):
        recursion_kernel(cat.build_curve("airy"), mpq(1))


@pytest.mark.parametrize("name", sorted(cat.CATALOG))
def test_rescaling_keeps_ramification(name):
    c = cat.build_curve(name)
    assert c.rescaled(mpq(2), mpq(3)).ramification_points() == c.ramification_points()
