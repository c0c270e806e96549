import pytest
import sympy as sp
from gmpy2 import mpq

from quantcurve import catalog as cat
from quantcurve.laplace import absorb_prefactor, laplace_transform
from quantcurve.operators import QuantumOperator as Op, apply_operator
from quantcurve.quantum import (PreconditionError, check_exponential, dual_operator, hurwitz_exponent,
                                quantize_exponential, quantize_gw, quantize_hurwitz, quantize_mixed,
                                quantize_rational, verify_quantum_curve)
from quantcurve.recursion import CorrelatorStore
from quantcurve.wavefunction import build_wavefunction

x, y, z = sp.symbols("x y z")
RECIPES = sorted(n for n, e in cat.CATALOG.items() if e.recipe is not None)


def _psi(name, N):
    c = cat.build_curve(name)
    return build_wavefunction(CorrelatorStore(c), c.basepoint, N)


def test_canonical_commutator():
    assert (Op.yhat() * Op.xhat() - Op.xhat() * Op.yhat()).terms == Op.hbar().terms
    r = apply_operator(Op.yhat() * Op.xhat() - Op.xhat() * Op.yhat(), _psi("airy", 2), 2)
    assert {k: v.plain() for k, v in r.items() if not v.is_zero()} == {2: 1}


def test_exp_x_shifts_yhat():
    # e^xhat yhat e^-xhat = yhat - hbar
    lhs = Op.exp_x(mpq(1)) * Op.yhat() * Op.exp_x(mpq(-1))
    assert lhs.terms == (Op.yhat() - Op.hbar()).terms


@pytest.mark.parametrize("name", RECIPES)
def test_classical_limit_vanishes_on_curve(name):
    c = cat.build_curve(name)
    cl = cat.recipe(name).classical_limit()
    X, Y = (f.to_func().to_sympy(c.field, z) for f in (c.x, c.y))
    assert sp.simplify(sp.expand_log(sp.expand(cl.subs({x: X, y: Y})), force=True)) == 0


@pytest.mark.parametrize("name", RECIPES)
def test_recipe_kills_wavefunction(name):
    N = 3
    rep = verify_quantum_curve(cat.recipe(name), _psi(name, N - 1), N)
    assert rep.kills
    assert rep.first_nonzero_order is None


def test_wrong_hbar_correction_is_detected():
    A = cat.recipe("gw-p1") + Op.hbar(mpq(1, 2))
    rep = verify_quantum_curve(A, _psi("gw-p1", 2), 3)
    assert not rep.kills
    assert rep.first_nonzero_order == 1


def test_too_short_wavefunction_rejected():
    with pytest.raises(ValueError):
        verify_quantum_curve(cat.recipe("airy"), _psi("airy", 1), 4)


def test_rational_preconditions():
    with pytest.raises(PreconditionError):
        quantize_rational([1, 1], [1, 1])          # shared factor
    with pytest.raises(PreconditionError):
        quantize_rational([0, 1], [1, 0, 1])       # degree condition
    with pytest.raises(PreconditionError):
        quantize_rational([0, 1], [])
    assert quantize_rational([0, 0, 1], [1]).label == "rational"


def test_exponential_conditions():
    assert check_exponential([1, 1], [0, 0, 1]) == []
    assert any("condition 1" in m for m in check_exponential([1, 1], [0, 1]))
    assert any("condition 2" in m for m in check_exponential([1, 1], [2, 0, 1]))
    assert any("condition 3" in m for m in check_exponential([1, 2, 1], [0, 0, 0, 1]))
    with pytest.raises(PreconditionError):
        quantize_exponential([1, 1], [0, 1])


def test_mixed_and_gw_preconditions():
    with pytest.raises(PreconditionError):
        quantize_mixed([0, 1], [0, 1])
    with pytest.raises(PreconditionError):
        quantize_gw({1: 0})
    with pytest.raises(PreconditionError):
        quantize_gw({1: 1}, {2: 1})
    with pytest.raises(PreconditionError):
        quantize_gw({1: 1}, {1: 1}, {2: 1})


def test_hurwitz_exponent_terminates():
    # phi = z: Phi = z^2/2, Q = y + hbar/2
    assert hurwitz_exponent([0, 1]) == {(1, 0): 1, (0, 2): mpq(1, 2)}
    assert quantize_hurwitz([0, 1]).label == "hurwitz"


def test_dual_operator_kills_laplace_transform():
    N = 3
    A = cat.recipe("airy")
    L = absorb_prefactor(laplace_transform(_psi("airy", N), N))
    assert verify_quantum_curve(dual_operator(A), L, N).kills


def test_dual_operator_is_an_involution_up_to_sign():
    A = cat.recipe("airy")
    # xhat -> -yhat, yhat -> xhat applied twice sends (xhat, yhat) to (-xhat, -yhat)
    AA = dual_operator(dual_operator(A))
    assert AA.classical_limit().subs({x: -x, y: -y}) == A.classical_limit()
