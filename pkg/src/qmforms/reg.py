"""Regularized integrals: exponential regulator at the ends, Hadamard finite part at real poles.

The production finite-part path excises a symmetric window around the pole,
integrates the regular part of the Laurent expansion across it termwise and
adds the closed-form finite parts of the singular monomials.  Four further
constructions of the same number are provided for cross-checking.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable

import mpmath
from mpmath import mp
from mpmath.calculus.quadrature import GaussLegendre

from .errors import QMFormsError
from .specfun import DEFAULT_BRANCH, BranchConfig, branch_pow, upper_gamma

__all__ = [
    "UnsupportedConfigurationError", "PartitionError", "GrowthContractError",
    "Integrand", "gl_integrate", "laurent_coefficients",
    "reg_integral_infinity", "hadamard_fp", "hadamard_method",
    "reg_integral_zero_infinity", "METHODS",
]

METHODS = ("riesz", "contour_mean", "finite_part", "distribution_pairing", "sokhotski")


class UnsupportedConfigurationError(QMFormsError, ValueError):
    pass


class PartitionError(QMFormsError, ValueError):
    pass


class GrowthContractError(QMFormsError, ValueError):
    pass


@dataclass
class Integrand:
    """A function on a real interval with declared poles and end behaviour.

    ``at_infinity = (coeffs, s)`` declares ``f(t) = t^(s-1) sum_n a(n) e^{-2 pi n t}``
    for large t; ``at_zero`` declares the same shape for ``f(1/u)/u^2``.
    """

    func: Callable
    poles: tuple = ()
    growth: str = "polynomial"
    rate: float = 0.0
    at_infinity: tuple | None = None
    at_zero: tuple | None = None

    def __call__(self, t):
        return self.func(t)

    def other_poles(self, c):
        return [p for p, _ in self.poles if p != c]


# ---------------------------------------------------------------------------
# quadrature

_GL_CACHE: dict = {}


def _gl_nodes(degree: int, prec: int):
    key = (degree, prec)
    if key not in _GL_CACHE:
        with mp.workprec(prec):
            gl = GaussLegendre(mp)
            # degree index k gives 3 * 2^(k-1) nodes on [-1, 1]
            _GL_CACHE[key] = gl.calc_nodes(degree, prec)
    return _GL_CACHE[key]


def _panel(fn, a, b, nodes):
    h = (b - a) / 2
    m = (a + b) / 2
    return h * mpmath.fsum(w * fn(m + h * x) for x, w in nodes)


def gl_integrate(fn, a, b, prec: int = 256, tol=None, points=(), depth: int = 0):
    """Adaptive composite Gauss-Legendre integral of fn over [a, b] (a, b may be complex)."""
    with mp.workprec(prec + 20):
        if tol is None:
            tol = mpmath.mpf(2) ** (-prec + 16)
        pts = [a] + [p for p in points] + [b]
        total = mpmath.mpc(0)
        deg = 6 if prec <= 300 else 7
        nodes = _gl_nodes(deg, prec + 20)
        for lo, hi in zip(pts[:-1], pts[1:]):
            total += _adapt(fn, lo, hi, nodes, tol, 0)
        return total


def _adapt(fn, a, b, nodes, tol, depth):
    whole = _panel(fn, a, b, nodes)
    m = (a + b) / 2
    left = _panel(fn, a, m, nodes)
    right = _panel(fn, m, b, nodes)
    if abs(left + right - whole) <= tol * max(1, abs(whole)) or depth > 40:
        return left + right
    return _adapt(fn, a, m, nodes, tol / 2, depth + 1) + _adapt(fn, m, b, nodes, tol / 2, depth + 1)


def laurent_coefficients(fn, c, radius, m_min: int, m_max: int, prec: int = 256, nodes: int | None = None):
    """Coefficients e_m (m_min <= m <= m_max) of sum e_m (z-c)^m by the trapezoid rule on a circle."""
    with mp.workprec(prec + 32):
        K = nodes or max(2 * (m_max - m_min) + 16, prec + 64)
        c = mpmath.mpmathify(c)
        r = mpmath.mpf(radius)
        roots = [mpmath.expjpi(mpmath.mpf(2 * l) / K) for l in range(K)]
        vals = [fn(c + r * w) for w in roots]
        out = {}
        for m in range(m_min, m_max + 1):
            # w_l^(-m) = conj(w_{l m mod K})
            acc = mpmath.fsum(v * mpmath.conj(roots[(l * m) % K]) for l, v in enumerate(vals))
            out[m] = acc / K / r ** m
        return out


# ---------------------------------------------------------------------------
# the end at infinity

def reg_integral_infinity(f, t0, s, prec: int = 256, branch: BranchConfig = DEFAULT_BRANCH):
    """Regularized int_{t0}^inf t^(s-1) sum_n a(n) e^{-2 pi n t} dt.

    ``f`` is an Integrand with ``at_infinity`` set, or a mapping n -> a(n).
    """
    if isinstance(f, Integrand):
        if f.at_infinity is None:
            raise GrowthContractError("integrand has no declared expansion at infinity")
        coeffs, s = f.at_infinity[0], f.at_infinity[1] if s is None else s
    else:
        coeffs = f
    with mp.workprec(prec + 24):
        s = mpmath.mpmathify(s)
        t0 = mpmath.mpmathify(t0)
        total = mpmath.mpc(0)
        for n, a in sorted(coeffs.items()):
            if a == 0:
                continue
            a = mpmath.mpmathify(a)
            if n == 0:
                if s == 0:
                    raise ZeroDivisionError("constant term at s = 0 is a pole")
                total += -a * mpmath.power(t0, s) / s
            else:
                x = 2 * mp.pi * n
                total += a * upper_gamma(s, x * t0, prec, branch) / branch_pow(x, s, branch)
        return total


# ---------------------------------------------------------------------------
# finite parts

def _window(f: Integrand, a, b, c):
    a, b, c = (mpmath.mpf(x) for x in (a, b, c))
    if not (a < c < b):
        raise UnsupportedConfigurationError("pole must lie strictly inside (a, b)")
    r = min((b - a) / 4, c - a, b - c)
    others = [abs(mpmath.mpmathify(p) - c) for p in f.other_poles(c)]
    if others:
        r = min(r, min(others) / 2)
    return a, b, c, r


def _fp_monomial(m: int, lo, hi):
    """Finite part of int_lo^hi u^(-m) du across u = 0 (lo < 0 < hi)."""
    if m == 1:
        return mpmath.log(abs(hi)) - mpmath.log(abs(lo))
    return (mpmath.power(hi, 1 - m) - mpmath.power(lo, 1 - m)) / (1 - m)


def _as_integrand(f, c, n):
    if isinstance(f, Integrand):
        return f
    return Integrand(f, ((c, n),))


def hadamard_fp(f, a, b, c, n: int, prec: int = 256):
    """Hadamard finite part of int_a^b f(t) dt across a pole of order n at c."""
    f = _as_integrand(f, c, n)
    with mp.workprec(prec + 32):
        a, b, c, r = _window(f, a, b, c)
        h = r / 2
        K = prec + 96
        # regular part decays like (h/r)^k = 2^-k
        kmax = prec + 48
        e = laurent_coefficients(f, c, r, -n, kmax, prec + 32, nodes=max(K, 2 * (kmax + n) + 8))
        tol = mpmath.mpf(2) ** (-prec + 16)
        outer = gl_integrate(f, a, c - h, prec, tol) + gl_integrate(f, c + h, b, prec, tol)
        inner = mpmath.mpc(0)
        for m in range(1, n + 1):
            inner += e[-m] * _fp_monomial(m, -h, h)
        for k in range(0, kmax + 1, 2):
            inner += e[k] * 2 * mpmath.power(h, k + 1) / (k + 1)
        return outer + inner


def _riesz(f, a, b, c, n, prec):
    # constant term at lam = 0 of int f |t-c|^lam, continued in lam; the window part is
    # summed from the Laurent data and its lam-dependence averaged over a circle
    a, b, c, r = _window(f, a, b, c)
    h = r / 3
    kmax = int(prec * 0.7) + 40
    e = laurent_coefficients(f, c, r, -n, kmax, prec + 32, nodes=2 * (kmax + n) + 40)
    tol = mpmath.mpf(2) ** (-prec + 16)
    outer = gl_integrate(f, a, c - h, prec, tol) + gl_integrate(f, c + h, b, prec, tol)
    J = 96
    rho = mpmath.mpf(1) / 4
    hp = {m: 2 * mpmath.power(h, m + 1) for m in e if m % 2 == 0}
    acc = mpmath.mpc(0)
    for l in range(J):
        lam = rho * mpmath.expjpi(mpmath.mpf(2 * l) / J)
        hl = mpmath.power(h, lam)
        acc += hl * mpmath.fsum(e[m] * hp[m] / (lam + m + 1) for m in hp)
    return outer + acc / J


def _contour_mean(f, a, b, c, n, prec):
    a, b, c, r = _window(f, a, b, c)
    tol = mpmath.mpf(2) ** (-prec + 16)
    outer = gl_integrate(f, a, c - r, prec, tol) + gl_integrate(f, c + r, b, prec, tol)

    def upper(phi):
        z = r * mpmath.expj(phi)
        return f(c + z) * 1j * z

    def lower(phi):
        z = r * mpmath.expj(-phi)
        return f(c + z) * (-1j) * z

    # from c - r to c + r over the top (phi: pi -> 0) and over the bottom
    up = -gl_integrate(upper, 0, mp.pi, prec, tol)
    down = -gl_integrate(lower, 0, mp.pi, prec, tol)
    return outer + (up + down) / 2


def _distribution_pairing(f, a, b, c, n, prec):
    # FP int F (t-c)^-n = boundary terms + PV int F^(n-1)(t)/(t-c) / (n-1)!
    a, b, c, r = _window(f, a, b, c)
    tol = mpmath.mpf(2) ** (-prec + 16)

    def F(t):
        return f(t) * (t - c) ** n

    def deriv(j, t):
        if j == 0 and t != c:
            return F(t)
        if t != c:
            return mpmath.diff(F, t, j)
        # at the pole itself F is only known through its values on a circle
        K = 2 * j + prec // 2 + 32
        rad = r / 2
        acc = mpmath.mpc(0)
        for l in range(K):
            w = mpmath.expjpi(mpmath.mpf(2 * l) / K)
            acc += F(t + rad * w) * w ** (-j)
        return acc / K / rad ** j * factorial(j)

    total = mpmath.mpc(0)
    coef = mpmath.mpf(1)
    # I_m(G) = -[G (t-c)^(1-m)]/(m-1) + I_{m-1}(G')/(m-1)
    for j in range(n - 1):
        m = n - j
        bt = deriv(j, b) * (b - c) ** (1 - m) - deriv(j, a) * (a - c) ** (1 - m)
        total += coef * (-bt / (m - 1))
        coef /= (m - 1)
    g = lambda t: deriv(n - 1, t)
    gc = g(c)

    def q(t):
        if t == c:
            return mpmath.mpc(0)
        return (g(t) - gc) / (t - c)

    with mp.workprec(prec + 64):
        pv = gl_integrate(q, a, c, prec, tol) + gl_integrate(q, c, b, prec, tol) \
            + gc * (mpmath.log(b - c) - mpmath.log(c - a))
    return total + coef * pv


def _sokhotski(f, a, b, c, n, prec):
    # mean of the boundary values of Phi(z) = int F(t)/(t-z)^n dt from above and below
    a, b, c, r = _window(f, a, b, c)
    wp = max(2 * prec, 512)
    with mp.workprec(wp):
        tol = mpmath.mpf(2) ** (-prec - 24)

        def F(t):
            return f(t) * (t - c) ** n

        def phi(z):
            pts = []
            eta = abs(mpmath.im(z))
            step = eta
            while c + step < b:
                pts.append(c + step)
                step *= 2
            left = []
            step = eta
            while c - step > a:
                left.append(c - step)
                step *= 2
            points = sorted(left) + [c] + pts
            return gl_integrate(lambda t: F(t) / (t - z) ** n, a, b, wp - 40, tol, points)

        etas = [r / 2 ** (j + 1) for j in range(16)]
        vals = [(phi(c + 1j * e) + phi(c - 1j * e)) / 2 for e in etas]
        # Neville extrapolation to eta = 0
        P = list(vals)
        for k in range(1, len(P)):
            for i in range(len(P) - k):
                P[i] = (etas[i] * P[i + 1] - etas[i + k] * P[i]) / (etas[i] - etas[i + k])
        return P[0]


def hadamard_method(f, a, b, c, n: int, method: str, prec: int = 256):
    """Finite part computed by one of five equivalent constructions."""
    f = _as_integrand(f, c, n)
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if method == "finite_part":
        return hadamard_fp(f, a, b, c, n, prec)
    impl = {"riesz": _riesz, "contour_mean": _contour_mean,
            "distribution_pairing": _distribution_pairing, "sokhotski": _sokhotski}[method]
    with mp.workprec(prec + 32):
        return +impl(f, a, b, c, n, prec)


# ---------------------------------------------------------------------------
# (0, infinity)

def reg_integral_zero_infinity(f: Integrand, partition, prec: int = 256,
                               branch: BranchConfig = DEFAULT_BRANCH):
    """Regularized int_0^inf f(t) dt over a partition p_1 < ... < p_r.

    Each interval [p_i, p_{i+1}] may hold at most one declared pole (in its
    interior); the ends use the declared expansions, at zero after t -> 1/t.
    """
    if f.at_infinity is None or f.at_zero is None:
        raise GrowthContractError("both end expansions must be declared")
    pts = sorted(mpmath.mpf(p) for p in partition)
    if not pts or pts[0] <= 0:
        raise PartitionError("partition points must be positive")
    with mp.workprec(prec + 24):
        tol = mpmath.mpf(2) ** (-prec + 16)
        total = mpmath.mpc(0)
        for lo, hi in zip(pts[:-1], pts[1:]):
            inside = [(c, n) for c, n in f.poles if lo < c < hi]
            on_edge = [c for c, _ in f.poles if c == lo or c == hi]
            if on_edge:
                raise PartitionError("a partition point coincides with a pole")
            if len(inside) > 1:
                raise PartitionError("two poles in one partition interval")
            if inside:
                c, n = inside[0]
                total += hadamard_fp(f, lo, hi, c, n, prec)
            else:
                total += gl_integrate(f, lo, hi, prec, tol)
        if any(c > pts[-1] or c < pts[0] for c, _ in f.poles):
            raise PartitionError("poles must lie inside the partitioned range")
        coeffs, s = f.at_infinity
        total += reg_integral_infinity(coeffs, pts[-1], s, prec, branch)
        coeffs, s = f.at_zero
        total += reg_integral_infinity(coeffs, 1 / pts[0], s, prec, branch)
        return total
