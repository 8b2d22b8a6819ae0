import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special, stats

from ternary_sense.errors import BracketError, DomainError
from ternary_sense.numerics import (
    Bracket,
    find_root,
    gamma_pdf,
    inv_reg_lower_gamma,
    inv_std_normal_q,
    ln_gamma,
    reg_gamma,
    reg_gamma_p_array,
    std_normal_q,
)

# (a, x, P, Q) from 40-digit mpmath
FROZEN_P = [
    (0.5, 0.1, 0.34527915398142297956, 0.65472084601857702044),
    (1.0, 1.0, 0.6321205588285576784, 0.3678794411714423216),
    (2.5, 7.0, 0.98439058389973308527, 0.015609416100266914735),
    (150.0, 140.0, 0.20954362391860706635, 0.79045637608139293365),
    (150.0, 160.0, 0.79562618823432246184, 0.20437381176567753816),
    (1000.0, 1100.0, 0.99894067674607002265, 0.0010593232539299773489),
    (5000.0, 4900.0, 0.077944956226513913903, 0.9220550437734860861),
    (0.5, 30.0, 0.99999999999999051426, 9.4857375710738483885e-15),
    (25.0, 3.0, 3.0724118736993522412e-15, 0.99999999999999692759),
]


@pytest.mark.parametrize("a,x,p,q", FROZEN_P)
def test_reg_gamma_frozen_values(a, x, p, q):
    got_p, got_q = reg_gamma(a, x)
    # the smaller of the pair is resolved to relative accuracy
    small, got_small = (p, got_p) if p < q else (q, got_q)
    assert got_small == pytest.approx(small, rel=1e-9, abs=1e-300)
    assert got_p == pytest.approx(p, abs=1e-12)
    assert got_q == pytest.approx(q, abs=1e-12)


@given(
    a=st.floats(0.05, 5000.0),
    x=st.floats(0.0, 10_000.0),
)
def test_reg_gamma_matches_scipy(a, x):
    p, q = reg_gamma(a, x)
    assert p == pytest.approx(special.gammainc(a, x), abs=5e-11)
    assert q == pytest.approx(special.gammaincc(a, x), abs=5e-11)
    assert p + q == pytest.approx(1.0, abs=1e-14)
    assert 0.0 <= p <= 1.0 and 0.0 <= q <= 1.0


@given(a=st.floats(0.1, 2000.0), x1=st.floats(0.0, 4000.0), x2=st.floats(0.0, 4000.0))
def test_reg_gamma_monotone_in_x(a, x1, x2):
    lo, hi = sorted((x1, x2))
    assert reg_gamma(a, lo)[0] <= reg_gamma(a, hi)[0] + 1e-15


def test_reg_gamma_edges_and_domain():
    assert reg_gamma(3.0, 0.0) == (0.0, 1.0)
    assert reg_gamma(3.0, math.inf) == (1.0, 0.0)
    with pytest.raises(DomainError):
        reg_gamma(0.0, 1.0)
    with pytest.raises(DomainError):
        reg_gamma(1.0, -1.0)
    with pytest.raises(DomainError):
        reg_gamma(math.nan, 1.0)


@pytest.mark.parametrize("a", [0.5, 1.0, 25.0, 150.0, 5000.0])
def test_vectorized_p_matches_scalar(a):
    x = np.concatenate([[0.0], np.linspace(0.01, 3 * a + 10, 257), [np.inf]])
    got = reg_gamma_p_array(a, x)
    want = np.array([reg_gamma(a, v)[0] for v in x])
    np.testing.assert_allclose(got, want, atol=1e-11, rtol=0)
    np.testing.assert_allclose(got, special.gammainc(a, x), atol=1e-11, rtol=0)


def test_vectorized_rejects_negative():
    with pytest.raises(DomainError):
        reg_gamma_p_array(2.0, np.array([1.0, -1.0]))


@given(a=st.floats(0.2, 3000.0), p=st.floats(1e-9, 1 - 1e-9))
def test_inverse_round_trip(a, p):
    x = inv_reg_lower_gamma(a, p)
    assert reg_gamma(a, x)[0] == pytest.approx(p, abs=1e-11)


def test_inverse_against_mpmath():
    mpmath.mp.dps = 30
    for a, p in [(150.0, 0.8), (1.0, 0.5), (0.5, 0.99), (2500.0, 0.01)]:
        want = mpmath.findroot(lambda x: mpmath.gammainc(a, 0, x, regularized=True) - p, a)
        assert inv_reg_lower_gamma(a, p) == pytest.approx(float(want), rel=1e-12)


def test_inverse_domain():
    for p in (0.0, 1.0, -0.1, math.nan):
        with pytest.raises(DomainError):
            inv_reg_lower_gamma(2.0, p)
    with pytest.raises(DomainError):
        inv_reg_lower_gamma(-1.0, 0.5)


@pytest.mark.parametrize("a", [0.5, 3.0, 40.0, 150.0])
def test_gamma_pdf_matches_scipy(a):
    xs = np.linspace(0.05, 3 * a, 40)
    for x in xs:
        assert gamma_pdf(a, x) == pytest.approx(stats.gamma.pdf(x, a), rel=1e-10)
    assert gamma_pdf(a, -1.0) == 0.0


def test_ln_gamma_against_mpmath():
    for a in (0.1, 0.5, 1.0, 7.5, 150.0, 1e6):
        assert ln_gamma(a) == pytest.approx(float(mpmath.loggamma(a)), rel=1e-14, abs=1e-14)
    with pytest.raises(DomainError):
        ln_gamma(0.0)


@given(z=st.floats(-30.0, 30.0))
def test_std_normal_q_matches_scipy(z):
    assert std_normal_q(z) == pytest.approx(stats.norm.sf(z), rel=1e-12, abs=1e-300)


@given(p=st.floats(1e-12, 1 - 1e-12))
def test_inv_std_normal_q_round_trip(p):
    z = inv_std_normal_q(p)
    assert z == pytest.approx(stats.norm.isf(p), rel=1e-9, abs=1e-9)


def test_bracket_requires_order():
    with pytest.raises(BracketError):
        Bracket(1.0, 1.0)


def test_find_root_without_sign_change_raises():
    with pytest.raises(BracketError):
        find_root(lambda x: x * x + 1.0, Bracket(-1.0, 1.0))


def test_find_root_endpoint_roots():
    assert find_root(lambda x: x, Bracket(0.0, 1.0)) == 0.0
    assert find_root(lambda x: x - 1.0, Bracket(0.0, 1.0)) == 1.0


@given(c=st.floats(-0.999, 0.999))
def test_find_root_bisection_and_newton_agree(c):
    f = lambda x: x**3 - c  # noqa: E731
    want = math.copysign(abs(c) ** (1 / 3), c)
    plain = find_root(f, Bracket(-1.0, 1.0), tol=1e-14)
    newton = find_root(f, Bracket(-1.0, 1.0), tol=1e-14, fprime=lambda x: 3 * x * x)
    assert plain == pytest.approx(want, abs=1e-12)
    assert newton == pytest.approx(want, abs=1e-12)
    assert -1.0 <= newton <= 1.0


def test_find_root_survives_bad_derivative():
    # derivative of the wrong sign would push Newton out of the bracket
    root = find_root(lambda x: math.tanh(x - 0.3), Bracket(-5.0, 5.0), tol=1e-13, fprime=lambda x: -1.0)
    assert root == pytest.approx(0.3, abs=1e-12)
