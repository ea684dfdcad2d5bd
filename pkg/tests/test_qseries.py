from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from qmforms.qseries import (QSeries, ScalarPi, bernoulli, d_operator, delta_series,
                             eisenstein, evaluate)


def sigma(k, n):
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


def tau_by_product(N):
    """q prod (1 - q^n)^24 by plain polynomial multiplication."""
    poly = [0] * (N + 1)
    poly[1] = 1
    for n in range(1, N + 1):
        for _ in range(24):
            for i in range(N, n - 1, -1):
                poly[i] -= poly[i - n]
    return poly


@pytest.mark.parametrize("k,N,expected", [
    (4, 2, [1, 240, 2160]),
    (6, 1, [1, -504]),
    (2, 1, [1, -24]),
])
def test_eisenstein_small(k, N, expected):
    assert list(eisenstein(k, N).coeffs) == expected


@pytest.mark.parametrize("k", [2, 4, 6, 8, 12])
def test_eisenstein_matches_divisor_sums(k):
    s = eisenstein(k, 30)
    c = Fraction(-2 * k) / bernoulli(k)
    assert s[0] == 1
    assert all(s[n] == c * sigma(k - 1, n) for n in range(1, 31))


def test_bernoulli_values():
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(4) == Fraction(-1, 30)
    assert bernoulli(6) == Fraction(1, 42)
    assert bernoulli(12) == Fraction(-691, 2730)


def test_delta_small():
    assert delta_series(2).to_str() == "q - 24*q^2"
    assert delta_series(4).to_str() == "q - 24*q^2 + 252*q^3 - 1472*q^4"
    assert delta_series(10)[0] == 0


def test_delta_matches_product():
    N = 40
    assert list(delta_series(N).coeffs)[: N] == tau_by_product(N)[1:]


def test_delta_from_eisenstein_exact():
    N = 200
    e4, e6 = eisenstein(4, N), eisenstein(6, N)
    assert (e4 ** 3 - e6 ** 2) == delta_series(N).scale(1728)


def test_ramanujan_system_exact():
    N = 200
    e2, e4, e6 = eisenstein(2, N), eisenstein(4, N), eisenstein(6, N)
    assert d_operator(e2) == (e2 * e2 - e4).scale(Fraction(1, 12))
    assert d_operator(e4) == (e2 * e4 - e6).scale(Fraction(1, 3))
    assert d_operator(e6) == (e2 * e6 - e4 * e4).scale(Fraction(1, 2))


def test_inverse_delta():
    assert delta_series(3).invert().to_str() == "q^-1 + 24 + 324*q"
    inv = delta_series(30).invert()
    assert (inv * delta_series(30)).agrees_with(QSeries.one(28))


def test_mul_pow_and_derivative():
    e4 = eisenstein(4, 1)
    assert (e4 * e4).to_str() == "1 + 480*q"
    assert (e4 ** 0).to_str() == "1"
    s = QSeries(-1, [1, 24, 324], 1)
    assert d_operator(s).to_str() == "-q^-1 + 324*q"
    assert d_operator(QSeries.constant(7, 5)).is_zero()


def test_truncation_is_never_exceeded():
    a = eisenstein(4, 10)
    b = eisenstein(6, 5)
    assert (a + b).trunc == 5
    assert (a * b).trunc == 5
    # dividing by a series with valuation 1 loses one order
    assert delta_series(8).invert().trunc == 6


def test_json_round_trip():
    s = delta_series(12).invert()
    assert QSeries.from_json(s.to_json()) == s


sparse = st.lists(st.tuples(st.integers(1, 12), st.fractions(max_denominator=9)), max_size=4)


def _unit_series(terms, N=14):
    c = [Fraction(0)] * (N + 1)
    c[0] = Fraction(1)
    for n, v in terms:
        c[n] += v
    return QSeries(0, c, N)


@settings(max_examples=40, deadline=None)
@given(sparse, sparse)
def test_invert_is_multiplicative(tf, tg):
    f, g = _unit_series(tf), _unit_series(tg)
    assert (f * g).invert() == f.invert() * g.invert()


@settings(max_examples=40, deadline=None)
@given(sparse, sparse)
def test_derivation_rule(tf, tg):
    f, g = _unit_series(tf), _unit_series(tg)
    assert d_operator(f * g) == d_operator(f) * g + f * d_operator(g)


def test_evaluate_two_routes_to_delta():
    N = 80
    direct = delta_series(N)
    via_e = (eisenstein(4, N) ** 3 - eisenstein(6, N) ** 2).scale(Fraction(1, 1728))
    with mpmath.workprec(256):
        a, ea = evaluate(direct, mpmath.mpc(0, 1), prec=256)
        b, eb = evaluate(via_e, mpmath.mpc(0, 1), prec=256)
        assert abs(a - b) < mpmath.mpf(10) ** -30
        assert ea < mpmath.mpf(10) ** -30 and eb < mpmath.mpf(10) ** -30
        assert evaluate(QSeries.one(3), mpmath.mpc(0, 1))[0] == 1


def test_e6_vanishes_at_i():
    with mpmath.workprec(256):
        v, err = evaluate(eisenstein(6, 120), mpmath.mpc(0, 1), prec=256)
        assert abs(v) <= err + mpmath.mpf(10) ** -60
        # sign change on the imaginary axis brackets the zero
        lo = evaluate(eisenstein(6, 120), mpmath.mpc(0, 0.99), prec=128)[0]
        hi = evaluate(eisenstein(6, 120), mpmath.mpc(0, 1.01), prec=128)[0]
        assert mpmath.re(lo) * mpmath.re(hi) < 0


def test_evaluate_refuses_below_floor():
    from qmforms.errors import PrecisionError
    with pytest.raises(PrecisionError):
        evaluate(eisenstein(4, 10), mpmath.mpc(0, 0.3), prec=256)


def test_scalar_pi_algebra():
    six_over_pi_i = ScalarPi(6, -1, -1)
    assert six_over_pi_i * six_over_pi_i.inverse() == ScalarPi(1)
    assert ScalarPi.two_pi_i() ** 4 == ScalarPi(16, 4, 0)
    assert abs(six_over_pi_i.to_complex() - (-6j / mpmath.pi)) < 1e-15
    assert ScalarPi(Fraction(3, 2)).is_real_rational()


def test_inverse_delta_matches_bessel_leading_term():
    # a(n) ~ 2 pi n^(-13/2) I_13(4 pi sqrt n); the c = 1 Kloosterman term dominates
    inv = delta_series(202).invert()
    rates = []
    for n in (50, 100, 200):
        a = mpmath.mpf(inv[n].numerator) / inv[n].denominator
        pred = 2 * mpmath.pi * mpmath.mpf(n) ** -6.5 * mpmath.besseli(13, 4 * mpmath.pi * mpmath.sqrt(n))
        assert abs(a / pred - 1) < 1e-10
        rates.append(mpmath.log(a) / mpmath.sqrt(n))
    # log|a(n)|/sqrt(n) climbs towards 4 pi from below
    assert rates[0] < rates[1] < rates[2] < 4 * mpmath.pi
