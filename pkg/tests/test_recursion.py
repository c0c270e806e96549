import pytest
import sympy as sp
from gmpy2 import mpq

import oracle_tr as O
from quantcurve import catalog as cat
from quantcurve.curve import SpectralCurve, lrf
from quantcurve.functions import RationalFunction as RF
from quantcurve.recursion import (Correlator, CorrelatorStore, correlator_expansion, csch_coefficient,
                                  gw_invariants, omega01_expansion)

z0, z1, z2, z3 = O.Z[:4]

# values produced by tests/oracle_tr.py (independent sympy residue evaluation), frozen
AIRY_FROZEN = {
    (0, 3): "1/(2*z0**2*z1**2*z2**2)",
    (0, 4): "3*(z0**2*z1**2*z2**2 + z0**2*z1**2*z3**2 + z0**2*z2**2*z3**2 + z1**2*z2**2*z3**2)"
            "/(4*z0**4*z1**4*z2**4*z3**4)",
    (1, 1): "1/(16*z0**4)",
    (1, 2): "(5*z0**4 + 3*z0**2*z1**2 + 5*z1**4)/(32*z0**6*z1**6)",
    (2, 1): "105/(1024*z0**10)",
    (1, 3): "(35*z0**6*z1**6 + 30*z0**6*z1**4*z2**2 + 30*z0**6*z1**2*z2**4 + 35*z0**6*z2**6"
            " + 30*z0**4*z1**6*z2**2 + 18*z0**4*z1**4*z2**4 + 30*z0**4*z1**2*z2**6 + 30*z0**2*z1**6*z2**4"
            " + 30*z0**2*z1**4*z2**6 + 35*z1**6*z2**6)/(64*z0**8*z1**8*z2**8)",
    (2, 2): "35*(z0**2 + z1**2)*(33*z0**8 - 6*z0**6*z1**2 + 35*z0**4*z1**4 - 6*z0**2*z1**6 + 33*z1**8)"
            "/(2048*z0**12*z1**12)",
    (3, 1): "25025/(32768*z0**16)",
}

GWP1_FROZEN = {
    (0, 3): "(z0**2*z1**2*z2**2 + z0**2*z1**2 + 4*z0**2*z1*z2 + z0**2*z2**2 + z0**2 + 4*z0*z1**2*z2"
            " + 4*z0*z1*z2**2 + 4*z0*z1 + 4*z0*z2 + z1**2*z2**2 + z1**2 + 4*z1*z2 + z2**2 + 1)"
            "/((z0 - 1)**2*(z0 + 1)**2*(z1 - 1)**2*(z1 + 1)**2*(z2 - 1)**2*(z2 + 1)**2)",
    (1, 1): "-(z0**2 + 1)*(z0**2 - 4*z0 + 1)*(z0**2 + 4*z0 + 1)/(24*(z0 - 1)**4*(z0 + 1)**4)",
}

# x = log z, y = -log z - log(1 - z): no ramification, only the log term contributes
LOG_FROZEN = {
    (1, 1): "-1/(24*(z0 - 1)**2)",
    (2, 1): "7*(z0**2 + 4*z0 + 1)/(5760*(z0 - 1)**4)",
    (0, 3): "0",
    (1, 2): "0",
}


def _same(omega, expr_str):
    e = sp.sympify(expr_str, locals={f"z{i}": O.Z[i] for i in range(8)})
    return sp.cancel(sp.together(O.to_expr(omega.terms, omega.n) - e)) == 0


@pytest.fixture(scope="module")
def airy_store():
    return CorrelatorStore(cat.build_curve("airy"))


@pytest.fixture(scope="module")
def gwp1_store():
    return CorrelatorStore(cat.build_curve("gw-p1"))


@pytest.mark.parametrize("gn", sorted(AIRY_FROZEN))
def test_airy_matches_frozen_oracle(airy_store, gn):
    assert _same(airy_store.get(*gn), AIRY_FROZEN[gn])


@pytest.mark.parametrize("gn", sorted(GWP1_FROZEN))
def test_gwp1_matches_frozen_oracle(gwp1_store, gn):
    assert _same(gwp1_store.get(*gn), GWP1_FROZEN[gn])


@pytest.mark.parametrize("gn", sorted(LOG_FROZEN))
def test_log_term_matches_frozen_oracle(gn):
    c = SpectralCurve(lrf(None, {mpq(0): 1}), lrf(None, {mpq(0): -1, mpq(1): -1}))
    assert _same(CorrelatorStore(c).get(*gn), LOG_FROZEN[gn])


def test_frozen_values_still_match_live_oracle():
    A = O.airy()
    for gn in [(0, 3), (1, 1), (1, 2)]:
        e = sp.sympify(AIRY_FROZEN[gn], locals={f"z{i}": O.Z[i] for i in range(4)})
        assert sp.cancel(A.omega(*gn) - e) == 0


def test_airy_one_one_closed_form(airy_store):
    # 1/(16 z^4) dz
    assert airy_store.get(1, 1).terms == {((mpq(0), 4),): mpq(1, 16)}


def test_unstable_requests_rejected(airy_store):
    with pytest.raises(ValueError):
        airy_store.get(0, 2)
    with pytest.raises(ValueError):
        airy_store.get(0, 1)


@pytest.mark.parametrize("name", ["airy", "gw-p1", "twoside-test", "framed-c3", "hurwitz-phi"])
def test_structural_invariants(name):
    store = CorrelatorStore(cat.build_curve(name))
    allowed = set(store.R) | set(store.L)
    for g, n in [(0, 3), (1, 1), (0, 4), (1, 2), (2, 1)]:
        w = store.get(g, n)
        assert w.is_symmetric()
        assert w.residues_vanish()
        assert w.poles() <= allowed


@pytest.mark.parametrize("name", ["airy", "twoside-test", "gw-p1"])
def test_rescaling(name):
    c = cat.build_curve(name)
    s1, s2 = CorrelatorStore(c), CorrelatorStore(c.rescaled(mpq(3), mpq(5)))
    for g, n in [(0, 3), (1, 1), (0, 4), (1, 2)]:
        assert s2.get(g, n) == s1.get(g, n).scaled(mpq(15) ** (2 - 2 * g - n))


def test_evaluate_is_symmetric(airy_store):
    w = airy_store.get(0, 4)
    pts = [mpq(2), mpq(3), mpq(-5), mpq(7, 2)]
    assert w.evaluate(pts) == w.evaluate(pts[::-1])


def test_correlator_equality_and_scaling():
    a = Correlator(0, 3, {((mpq(0), 2),) * 3: mpq(1, 2)})
    assert a.scaled(2) == Correlator(0, 3, {((mpq(0), 2),) * 3: mpq(1)})
    assert a != a.scaled(3)


def test_csch_coefficients():
    v = sp.Symbol("v")
    ser = sp.series(sp.csch(v), v, 0, 9).removeO()
    for j in (1, 3, 5, 7):
        assert sp.Rational(str(csch_coefficient(j))) == ser.coeff(v, j)


def test_gw_dictionary_values(gwp1_store):
    c = gwp1_store.curve
    assert omega01_expansion(c, order=6) == {0: 1, 2: mpq(3, 2), 4: mpq(10, 3), 6: mpq(35, 4)}
    t11 = gw_invariants(correlator_expansion(gwp1_store.get(1, 1), c, order=6), 1)
    assert t11 == {(0,): mpq(-1, 24), (2,): mpq(1, 24), (4,): mpq(1, 32), (6,): mpq(5, 864)}
    t03 = gw_invariants(correlator_expansion(gwp1_store.get(0, 3), c, order=2), 3)
    assert t03[(0, 0, 0)] == 1


def test_point_chart_expansion(airy_store):
    # omega_{1,1} = dz/(16 z^4) expanded at z = 1
    tab = correlator_expansion(airy_store.get(1, 1), airy_store.curve, chart=("point", mpq(1)), order=2, sign=1)
    assert tab[(0,)] == mpq(1, 16)
    assert tab[(1,)] == mpq(-4, 16)
    assert tab[(2,)] == mpq(10, 16)
