import json

import mpmath
import pytest
from mpmath import mp

from qmforms.forms import DELTA, E2, E4, E6, evaluate, qexp
from qmforms.poles import (PoleRecord, cancellation_bits, coefficient_asymptotics,
                           denominator_factors, find_poles, principal_part, refine_records,
                           tilde_expansion)

PREC = 256
I = mpmath.mpc(0, 1)


@pytest.fixture(autouse=True)
def _prec():
    with mp.workprec(PREC):
        yield


def e6_prime_at_i():
    # numeric derivative in tau, independent of the contour integral
    with mp.workprec(PREC + 64):
        return mpmath.diff(lambda t: evaluate(E6, t, PREC + 64), I)


def as_mpf(c):
    return mpmath.mpf(c.numerator) / c.denominator


def test_delta_has_no_poles():
    assert denominator_factors(1 / DELTA) == []
    assert find_poles(1 / DELTA) == []
    assert find_poles(E4 ** 2 / DELTA ** 3) == []


def test_inverse_e6_pole_at_i():
    recs = find_poles(1 / E6, 0.9)
    assert len(recs) == 1
    assert abs(recs[0].alpha - I) < mpmath.mpf(10) ** -60
    assert recs[0].order == 1
    assert abs(recs[0].c(1) - 1 / e6_prime_at_i()) < mpmath.mpf(10) ** -40


def test_inverse_e4_pole_at_rho():
    recs = find_poles(1 / E4, 0.8)
    rho = mpmath.mpc(-0.5, mpmath.sqrt(3) / 2)
    assert len(recs) == 1
    assert abs(recs[0].alpha - rho) < mpmath.mpf(10) ** -60
    # E4 has a simple zero at rho
    assert recs[0].order == 1


def test_double_pole():
    recs = find_poles(1 / E6 ** 2, 0.9)
    assert len(recs) == 1 and recs[0].order == 2
    assert abs(recs[0].c(2) - 1 / e6_prime_at_i() ** 2) < mpmath.mpf(10) ** -40


def test_quasimodular_numerator_keeps_pole():
    recs = find_poles(E2 / E6, 0.9)
    assert len(recs) == 1
    assert abs(recs[0].c(1) - evaluate(E2, I, PREC) / e6_prime_at_i()) < mpmath.mpf(10) ** -40


def test_principal_part_of_holomorphic_form_is_zero():
    rec = principal_part(DELTA, I)
    assert rec.order == 0


def test_floor_excludes_low_poles():
    assert find_poles(1 / E6, 1.1) == []


def test_tilde_of_inverse_delta_is_plain_expansion():
    tx = tilde_expansion(1 / DELTA, [], 1.05, 60)
    series = qexp(1 / DELTA, 60)
    for n in range(-1, 61):
        assert tx[n] == as_mpf(series[n])


@pytest.mark.parametrize("f", [1 / E6, 1 / E6 ** 2, E2 * E4 / E6],
                         ids=["1/E6", "1/E6^2", "E2*E4/E6"])
def test_tilde_expansion_reproduces_subtracted_function(f):
    N = 80
    recs = refine_records(f, find_poles(f, 0.9), N, PREC)
    tx = tilde_expansion(f, recs, 1.05, N, PREC)
    for tau in (mpmath.mpc("0.1", "1.05"), mpmath.mpc("-0.37", "0.98"), mpmath.mpc("0.5", "1.3")):
        a, b = tx.evaluate(tau), tx.direct(f, tau)
        assert abs(a - b) < mpmath.mpf(10) ** -40 * max(1, abs(b))


def test_tilde_coefficients_decay():
    N = 80
    f = 1 / E6
    recs = refine_records(f, find_poles(f, 0.9), N, PREC)
    tx = tilde_expansion(f, recs, 1.05, N, PREC)
    raw = qexp(f, N)
    # a(n) grows like e^(2 pi n); the remainder grows at most like e^(pi n)
    for n in (40, 60, 80):
        assert abs(as_mpf(raw[n])) > mpmath.exp(2 * mp.pi * n * 0.99)
        assert abs(tx[n]) < mpmath.exp(mp.pi * n * 1.01)


@pytest.mark.parametrize("n", [30, 40])
def test_coefficient_asymptotics_inverse_e6(n):
    f = 1 / E6
    recs = find_poles(f, 0.9)
    pred = coefficient_asymptotics(f, recs, n)
    actual = as_mpf(qexp(f, n)[n])
    assert abs(pred / actual - 1) < 1e-3


def test_cancellation_bits_damping():
    rec = PoleRecord(I, 1, {1: mpmath.mpc(1)})
    assert cancellation_bits([rec], 100) > cancellation_bits([rec], 100, damping=1 / 1.05)
    assert cancellation_bits([], 100) == int(mpmath.log(101, 2)) + 32


def test_record_json_round_trip():
    recs = find_poles(1 / E6 ** 2, 0.9)
    data = json.loads(json.dumps([r.to_json() for r in recs]))
    back = [PoleRecord.from_json(d) for d in data]
    for a, b in zip(recs, back):
        assert a.order == b.order
        assert abs(a.alpha - b.alpha) < mpmath.mpf(10) ** -70
        for m in range(1, a.order + 1):
            assert abs(a.c(m) - b.c(m)) < mpmath.mpf(10) ** -70 * max(1, abs(a.c(m)))
