import pytest
import sympy as sp
from gmpy2 import mpq

from quantcurve import catalog as cat
from quantcurve.laplace import (DegenerateError, DomainError, absorb_prefactor, ba_swap_check,
                                compare_up_to_constant, double_factorial, fg_integrate, fg_moment, fg_pair,
                                inverse_laplace, laplace_transform)
from quantcurve.operators import QuantumOperator as Op, apply_operator
from quantcurve.quantum import dual_operator
from quantcurve.recursion import CorrelatorStore
from quantcurve.series import HbarSeries
from quantcurve.wavefunction import build_wavefunction


def _psi(name, N):
    c = cat.build_curve(name)
    return build_wavefunction(CorrelatorStore(c), c.basepoint, N)


def _plain(r):
    return HbarSeries({k: v.plain() for k, v in r.items()}, r.prec, check=False)


# -- formal Gaussian integrals ---------------------------------------------

@pytest.mark.parametrize("m", range(0, 9))
def test_fg_moment_matches_real_gaussian(m):
    xi = sp.Symbol("xi", real=True)
    a = sp.Symbol("a", positive=True)
    exact = sp.simplify(sp.integrate(sp.exp(-a * xi ** 2 / 2) * xi ** m, (xi, -sp.oo, sp.oo)))
    mom = fg_moment(m)
    ours = sp.Rational(str(mom.coeff)) * (2 * sp.pi) ** sp.Rational(mom.sqrt2pi, 2) * a ** sp.Rational(mom.a_half, 2)
    assert sp.simplify(exact - ours) == 0


def test_double_factorial_and_pair_rule():
    assert [double_factorial(n) for n in range(-1, 8)] == [1, 1, 1, 2, 3, 8, 15, 48, 105]
    assert fg_pair(3, 3) == 6
    assert fg_pair(2, 4) == 0
    with pytest.raises(ValueError):
        fg_moment(-1)


def test_fg_integrate_polynomial():
    # (1 + t xi^2 + t^2 xi^4) against exp(-2 xi^2/2): 1 + t/2 + 3 t^2/4
    r = fg_integrate(mpq(2), {(0, 0): mpq(1), (1, 2): mpq(1), (2, 4): mpq(1), (1, 3): mpq(7)}, 3)
    assert r.value.coeffs == {0: 1, 1: mpq(1, 2), 2: mpq(3, 4)}
    assert (r.sqrt2pi, r.a_half) == (1, -1)
    with pytest.raises(DegenerateError):
        fg_integrate(mpq(0), {(0, 0): mpq(1)}, 2)


# -- transforms -------------------------------------------------------------

@pytest.mark.parametrize("name", ["airy", "gw-p1"])
@pytest.mark.parametrize("kl", [(1, 0), (0, 1), (1, 1), (2, 0), (0, 2), (2, 1)])
def test_parts_identity(name, kl):
    # L[yhat^k xhat^l psi] = xhat_dual^k (-yhat_dual)^l L[psi]
    k, l = kl
    N = 3
    psi = _psi(name, N)
    L = laplace_transform(psi, N)
    A = Op.yhat(k) * Op.xhat(l) if k and l else (Op.yhat(k) if k else Op.xhat(l))
    lhs = laplace_transform(psi.replace(prefactor=_plain(apply_operator(A, psi, N))), N)
    rhs = _plain(apply_operator(dual_operator(A), absorb_prefactor(L), N)) * L.prefactor
    d = lhs.prefactor - rhs
    assert d.prec == 2 * N + 1
    assert all(v.is_zero() for v in d.coeffs.values())


@pytest.mark.parametrize("name", ["airy", "gw-p1"])
def test_laplace_matches_dual_wavefunction(name):
    N = 2
    c = cat.build_curve(name)
    psi = build_wavefunction(CorrelatorStore(c), c.basepoint, N)
    d = c.dual()
    psid = build_wavefunction(CorrelatorStore(d), d.basepoint, N)
    cmp = compare_up_to_constant(laplace_transform(psi, N), psid, N)
    assert cmp.equal, cmp.mismatch
    assert cmp.order == N


def test_round_trip():
    N = 2
    psi = _psi("airy", N)
    back = inverse_laplace(laplace_transform(psi, N), N)
    cmp = compare_up_to_constant(back, psi, N)
    assert cmp.equal, cmp.mismatch
    assert cmp.constant.is_zero()


def test_coordinate_choice_does_not_matter():
    N = 2
    psi = _psi("gw-p1", N)
    a = absorb_prefactor(laplace_transform(psi, N, "additive"))
    m = absorb_prefactor(laplace_transform(psi, N, "multiplicative"))
    assert all((a.S[k] - m.S[k]).is_zero() for k in range(1, N + 1))


def test_laplace_rejects_negative_prefactor():
    psi = _psi("airy", 1)
    bad = psi.replace(prefactor=HbarSeries({-1: psi.S[0]}, 3, check=False))
    with pytest.raises(DomainError):
        laplace_transform(bad, 1)


def test_ba_kernel_swap():
    c = cat.build_curve("twoside-test")
    sw = ba_swap_check(CorrelatorStore(c), CorrelatorStore(c.dual()), mpq(2), mpq(3), 1)
    assert sw.equal
    assert sw.constant_squared == 1


def test_ba_kernel_wrong_sign_fails():
    c = cat.build_curve("twoside-test")
    sw = ba_swap_check(CorrelatorStore(c), CorrelatorStore(c.dual()), mpq(2), mpq(3), 1, sign=1)
    assert not sw.equal
