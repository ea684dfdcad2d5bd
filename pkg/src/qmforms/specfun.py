"""Arbitrary-precision special functions with an explicit branch convention.

All multivalued functions use ``log z`` with ``arg z`` in ``(theta - 2 pi, theta]``
for a fixed cut angle ``theta`` in ``(pi, 3 pi / 2)``.  Negative reals get
``arg = pi``, i.e. the continuation from the upper half-plane.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import mpmath
from mpmath import mp

from .errors import QMFormsError

__all__ = [
    "BranchCutError", "ZetaShiftError", "BranchConfig", "DEFAULT_BRANCH",
    "branch_arg", "branch_log", "branch_pow",
    "upper_gamma", "lower_gamma", "hurwitz_zeta", "polylog",
    "polylog_laurent_coeffs",
]


class BranchCutError(QMFormsError, ValueError):
    pass


class ZetaShiftError(QMFormsError, ValueError):
    pass


@dataclass(frozen=True)
class BranchConfig:
    """Cut direction for logarithms; must lie strictly between pi and 3 pi / 2."""

    theta: float = 5 * 3.141592653589793 / 4

    def __post_init__(self):
        t = float(self.theta)
        if not (3.141592653589793 < t < 3 * 3.141592653589793 / 2):
            raise ValueError(f"branch angle {t} outside (pi, 3pi/2)")

    def theta_mp(self):
        # exact multiples of pi for the two standard choices
        for num, den in ((5, 4), (11, 8)):
            if abs(self.theta - num * 3.141592653589793 / den) < 1e-15:
                return num * mp.pi / den
        return mpmath.mpf(self.theta)


DEFAULT_BRANCH = BranchConfig()


def branch_arg(z, branch: BranchConfig = DEFAULT_BRANCH):
    z = mpmath.mpc(z)
    if z == 0:
        raise BranchCutError("argument of zero")
    a = mpmath.arg(z)
    th = branch.theta_mp()
    if a <= th - 2 * mp.pi:
        a += 2 * mp.pi
    if abs(a - th) < mpmath.eps * 8:
        raise BranchCutError("point lies on the branch cut ray")
    return a


def branch_log(z, branch: BranchConfig = DEFAULT_BRANCH):
    z = mpmath.mpc(z)
    return mpmath.mpc(mpmath.log(abs(z)), branch_arg(z, branch))


def branch_pow(z, s, branch: BranchConfig = DEFAULT_BRANCH):
    return mpmath.exp(s * branch_log(z, branch))


def _wraps(z, branch) -> bool:
    """True when the configured branch differs from the principal one at z."""
    z = mpmath.mpc(z)
    return mpmath.arg(z) <= branch.theta_mp() - 2 * mp.pi


def upper_gamma(s, z, prec: int = 256, branch: BranchConfig = DEFAULT_BRANCH):
    """Gamma(s, z) = int_z^inf t^(s-1) e^-t dt on the configured branch."""
    with mp.workprec(prec + 24):
        s = mpmath.mpmathify(s)
        z = mpmath.mpmathify(z)
        if z == 0:
            if mpmath.re(s) <= 0:
                raise ValueError("Gamma(s, 0) diverges for Re s <= 0")
            return +mpmath.gamma(s)
        branch_arg(z, branch)
        val = mpmath.gammainc(s, z)
        if _wraps(z, branch):
            # Gamma(s, z e^{2 pi i}) = Gamma(s, z) - 2 pi i e^{i pi s} z^s gamma*(s,z) / Gamma(1-s)
            zs = mpmath.power(z, s)
            val -= 2j * mp.pi * mpmath.expjpi(s) * mpmath.rgamma(1 - s) * zs * _gstar(s, z, prec)
        return +val


def _gstar(s, z, prec):
    """Entire e^{-z} sum_k z^k / Gamma(s+k+1), so gamma(s,z) = Gamma(s) z^s gamma*(s,z)."""
    extra = int(abs(z) * 1.5) + 16
    with mp.workprec(prec + 24 + extra):
        tol = mpmath.mpf(2) ** (-prec - extra - 16)
        total = mpmath.mpc(0)
        zk = mpmath.mpc(1)
        k = 0
        while True:
            t = zk * mpmath.rgamma(s + k + 1)
            total += t
            if k > abs(z) + abs(s) and abs(t) < tol:
                break
            k += 1
            zk *= z
        return mpmath.exp(-z) * total


def lower_gamma(s, z, prec: int = 256, branch: BranchConfig = DEFAULT_BRANCH):
    """gamma(s, z) = Gamma(s) - Gamma(s, z) on the configured branch."""
    with mp.workprec(prec + 24):
        s = mpmath.mpmathify(s)
        z = mpmath.mpmathify(z)
        branch_arg(z, branch)
        if abs(z) <= 4:
            # z^s sum (-z)^k / (k! (s+k))
            zs = branch_pow(z, s, branch)
            tol = mpmath.mpf(2) ** (-prec - 16)
            total = mpmath.mpc(0)
            term = mpmath.mpc(1)
            k = 0
            while True:
                c = term / (s + k)
                total += c
                if abs(c) < tol * abs(total) and k > abs(z):
                    break
                k += 1
                term *= -z / k
            return zs * total
        return mpmath.gamma(s) - upper_gamma(s, z, prec, branch)


def hurwitz_zeta(s, a, prec: int = 256):
    """zeta(s, a) = sum_{n>=0} (n+a)^(-s) by Euler-Maclaurin summation."""
    with mp.workprec(prec + 32):
        s = mpmath.mpmathify(s)
        a = mpmath.mpmathify(a)
        if mpmath.re(a) <= 0:
            if mpmath.im(a) == 0 and mpmath.re(a) == int(mpmath.re(a)):
                raise ZetaShiftError("Hurwitz zeta shift is a nonpositive integer")
            raise ZetaShiftError("Hurwitz zeta needs Re a > 0")
        if s == 1:
            raise ZeroDivisionError("Hurwitz zeta has a pole at s = 1")
        # shift until Re(a + M) is large compared with |s| and the target precision
        bits = prec + 32
        M = max(0, int(mpmath.ceil(abs(s) + 10 + bits * 0.2 - mpmath.re(a))))
        if mpmath.re(s) < 0:
            # the partial sum grows like M^(1-Re s) while the value does not
            guard = int((1 - mpmath.re(s)) * mpmath.log(M + abs(a) + 1, 2)) + 8
            with mp.workprec(prec + 32 + guard):
                return +_hurwitz_em(s, a, M, bits)
        return _hurwitz_em(s, a, M, bits)


def _hurwitz_em(s, a, M, bits):
    total = mpmath.mpc(0)
    for n in range(M):
        total += mpmath.power(n + a, -s)
    x = a + M
    total += mpmath.power(x, 1 - s) / (s - 1) + mpmath.power(x, -s) / 2
    tol = mpmath.mpf(2) ** (-bits)
    xs = mpmath.power(x, -s - 1)
    x2 = x * x
    poch = s  # (s)_(2j-1)
    fact = mpmath.mpf(2)
    j = 1
    prev = mpmath.inf
    while True:
        t = mpmath.bernoulli(2 * j) / fact * poch * xs
        total += t
        if abs(t) < tol * max(abs(total), 1):
            break
        if abs(t) > prev and j > 4:
            raise ArithmeticError("Euler-Maclaurin terms stopped decreasing")
        prev = abs(t)
        poch *= (s + 2 * j - 1) * (s + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
        xs /= x2
        j += 1
    return total


def polylog(s, z, prec: int = 256):
    """Li_s(z) for complex order s on the principal branch."""
    with mp.workprec(prec + 24):
        s = mpmath.mpmathify(s)
        z = mpmath.mpmathify(z)
        if mpmath.im(s) == 0 and mpmath.re(s) <= 0 and mpmath.re(s) == int(mpmath.re(s)):
            return _polylog_negint(-int(mpmath.re(s)), z)
        if z == 0:
            return mpmath.mpc(0)
        if abs(z) <= 0.5:
            return _polylog_series(s, z, prec)
        if mpmath.im(z) == 0 and mpmath.re(z) >= 1:
            raise BranchCutError("polylog of non-integer order on [1, inf)")
        n = int(mpmath.nint(mpmath.re(s)))
        near = n >= 1 and abs(s - n) < mpmath.mpf(2) ** (-prec // 4)
        if near:
            if s == n:
                return mpmath.polylog(n, z)
            if abs(z) < 1:
                return mpmath.nsum(lambda k: z ** k / mpmath.power(k, s), [1, mpmath.inf])
            with mp.workprec(prec + 24 + prec // 2):
                return _polylog_general(s, z, prec + prec // 2)
        return _polylog_general(s, z, prec)


def _polylog_general(s, z, prec):
    mu = mpmath.log(z)
    if abs(mu) < 3.5:
        return _polylog_log_series(s, mu, prec)
    return _polylog_hurwitz(s, z, prec)


def _polylog_log_series(s, mu, prec):
    # Li_s(e^mu) = Gamma(1-s) (-mu)^(s-1) + sum_k zeta(s-k) mu^k / k!,  |mu| < 2 pi
    total = mpmath.gamma(1 - s) * mpmath.power(-mu, s - 1)
    tol = mpmath.mpf(2) ** (-prec - 16)
    term = mpmath.mpc(1)
    k = 0
    while True:
        t = mpmath.zeta(s - k) * term
        total += t
        if k > 8 and abs(t) < tol * max(abs(total), 1):
            return total
        k += 1
        term *= mu / k


def _polylog_series(s, z, prec):
    tol = mpmath.mpf(2) ** (-prec - 16)
    total = mpmath.mpc(0)
    zk = mpmath.mpc(1)
    k = 0
    while True:
        k += 1
        zk *= z
        t = zk / mpmath.power(k, s)
        total += t
        if abs(t) < tol * max(abs(total), tol) and k > 2:
            return total


def _polylog_hurwitz(s, z, prec):
    # Li_s(z) = Gamma(1-s)/(2 pi)^(1-s) [i^(1-s) zeta(1-s, 1/2 + ln(-z)/(2 pi i))
    #                                    + i^(s-1) zeta(1-s, 1/2 - ln(-z)/(2 pi i))]
    w = mpmath.log(-z) / (2j * mp.pi)
    g = mpmath.gamma(1 - s) / mpmath.power(2 * mp.pi, 1 - s)
    i1 = mpmath.expjpi((1 - s) / 2)
    i2 = mpmath.expjpi((s - 1) / 2)
    return g * (i1 * hurwitz_zeta(1 - s, mpmath.mpf(1) / 2 + w, prec)
                + i2 * hurwitz_zeta(1 - s, mpmath.mpf(1) / 2 - w, prec))


def _polylog_negint(n: int, z):
    """Li_{-n}(z) = (z d/dz)^n z/(1-z) as a rational function (Eulerian numbers)."""
    z = mpmath.mpmathify(z)
    if z == 1:
        raise ZeroDivisionError("Li_{-n}(1) is a pole")
    if n == 0:
        return z / (1 - z)
    # sum_{k=0}^{n-1} A(n,k) z^(k+1) / (1-z)^(n+1)
    total = mpmath.mpc(0)
    for k in range(n):
        total += _eulerian(n, k) * z ** (k + 1)
    return total / (1 - z) ** (n + 1)


def _eulerian(n: int, k: int) -> int:
    return sum((-1) ** j * _comb(n + 1, j) * (k + 1 - j) ** n for j in range(k + 2))


def _comb(n, k):
    if k < 0 or k > n:
        return 0
    return factorial(n) // (factorial(k) * factorial(n - k))


def polylog_laurent_coeffs(m: int, K: int, prec: int = 256):
    """Li_{1-m}(e(z)) = principal / z^m + sum_{k<K} regular[k] z^k near z = 0."""
    if m < 1:
        raise ValueError("m must be >= 1")
    with mp.workprec(prec + 16):
        principal = mpmath.mpf(factorial(m - 1)) / (-2j * mp.pi) ** m
        regular = [mpmath.zeta(1 - m - k) * (2j * mp.pi) ** k / factorial(k) for k in range(K)]
    return principal, regular
