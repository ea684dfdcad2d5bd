"""Exact truncated Fourier-Laurent series in q and the Eisenstein generators.

Coefficients are stored as integer numerators over one common denominator so
that Cauchy products stay in pure integer arithmetic.  A series knows the
highest exponent ``trunc`` up to which its coefficients are valid; nothing
beyond it is ever fabricated.
"""
from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable

import mpmath
from mpmath import mp

from .errors import InvalidWeightError, NotInvertibleError, PrecisionError

__all__ = [
    "QSeries",
    "ScalarPi",
    "eisenstein",
    "delta_series",
    "d_operator",
    "evaluate",
    "eisenstein_values",
    "bernoulli",
]


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


class QSeries:
    """Truncated series ``sum_{n_min <= n <= trunc} a(n) q^n``.

    Immutable.  The leading stored coefficient is nonzero unless the series
    is zero to its truncation order, in which case ``coeffs`` is empty and
    ``n_min == trunc + 1``.
    """

    __slots__ = ("_nums", "_den", "n_min", "trunc")

    def __init__(self, n_min: int, coeffs: Iterable, trunc: int | None = None):
        coeffs = [Fraction(c) for c in coeffs]
        den = 1
        for c in coeffs:
            den = _lcm(den, c.denominator)
        nums = [c.numerator * (den // c.denominator) for c in coeffs]
        if trunc is None:
            trunc = n_min + len(nums) - 1
        self._init_raw(n_min, nums, den, trunc)

    @classmethod
    def _raw(cls, n_min: int, nums: list[int], den: int, trunc: int) -> "QSeries":
        obj = cls.__new__(cls)
        obj._init_raw(n_min, nums, den, trunc)
        return obj

    def _init_raw(self, n_min, nums, den, trunc):
        nums = list(nums[: max(0, trunc - n_min + 1)])
        start = 0
        while start < len(nums) and nums[start] == 0:
            start += 1
        nums = nums[start:]
        n_min += start
        if not nums:
            n_min = trunc + 1
            den = 1
        else:
            if den < 0:
                den, nums = -den, [-x for x in nums]
            g = den
            for x in nums:
                g = gcd(g, x)
                if g == 1:
                    break
            if g > 1:
                den //= g
                nums = [x // g for x in nums]
        self._nums = tuple(nums)
        self._den = den
        self.n_min = n_min
        self.trunc = trunc

    # -- accessors -----------------------------------------------------
    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(x, self._den) for x in self._nums)

    @property
    def valuation(self) -> int:
        return self.n_min

    def is_zero(self) -> bool:
        return not self._nums

    def __getitem__(self, n: int) -> Fraction:
        if n > self.trunc:
            raise IndexError(f"coefficient q^{n} is beyond truncation order {self.trunc}")
        i = n - self.n_min
        if i < 0:
            return Fraction(0)
        return Fraction(self._nums[i], self._den)

    def items(self):
        for i, x in enumerate(self._nums):
            if x:
                yield self.n_min + i, Fraction(x, self._den)

    def __len__(self):
        return len(self._nums)

    def __repr__(self):
        return f"QSeries({self.to_str(8)})"

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return (self.n_min, self._nums, self._den, self.trunc) == (
            other.n_min, other._nums, other._den, other.trunc)

    def __hash__(self):
        return hash((self.n_min, self._nums, self._den, self.trunc))

    def agrees_with(self, other: "QSeries") -> bool:
        """True when both series coincide up to the smaller truncation order."""
        return (self - other).is_zero()

    # -- arithmetic ------------------------------------------------------
    def truncate(self, N: int) -> "QSeries":
        if N >= self.trunc:
            return self
        return QSeries._raw(self.n_min, list(self._nums), self._den, N)

    def _aligned(self, lo: int, hi: int) -> list[int]:
        out = [0] * (hi - lo + 1)
        for i, x in enumerate(self._nums):
            n = self.n_min + i
            if lo <= n <= hi:
                out[n - lo] = x
        return out

    def __add__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries.constant(other, self.trunc)
        N = min(self.trunc, other.trunc)
        lo = min(self.n_min, other.n_min)
        if lo > N:
            return QSeries._raw(N + 1, [], 1, N)
        den = _lcm(self._den, other._den)
        a = self._aligned(lo, N)
        b = other._aligned(lo, N)
        fa, fb = den // self._den, den // other._den
        return QSeries._raw(lo, [x * fa + y * fb for x, y in zip(a, b)], den, N)

    __radd__ = __add__

    def __neg__(self):
        return QSeries._raw(self.n_min, [-x for x in self._nums], self._den, self.trunc)

    def __sub__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries.constant(other, self.trunc)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "QSeries":
        c = Fraction(c)
        return QSeries._raw(self.n_min, [x * c.numerator for x in self._nums],
                            self._den * c.denominator, self.trunc)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return self.scale(other)
        # a zero series has n_min == trunc + 1, so this is uniform
        N = min(self.trunc + other.n_min, other.trunc + self.n_min)
        if self.is_zero() or other.is_zero():
            return QSeries._raw(N + 1, [], 1, N)
        lo = self.n_min + other.n_min
        L = N - lo + 1
        if L <= 0:
            return QSeries._raw(N + 1, [], 1, N)
        a = self._nums[:L]
        b = other._nums[:L]
        out = [0] * L
        for i, x in enumerate(a):
            if x:
                lim = min(len(b), L - i)
                for j in range(lim):
                    y = b[j]
                    if y:
                        out[i + j] += x * y
        return QSeries._raw(lo, out, self._den * other._den, N)

    __rmul__ = __mul__

    def invert(self) -> "QSeries":
        if self.is_zero():
            raise NotInvertibleError("series is zero to its truncation order")
        v = self.n_min
        L = self.trunc - v + 1
        a = self._nums
        c0 = a[0]
        # B_n = c0^(n+1) * b_n is integral
        B = [1]
        for n in range(1, L):
            acc = 0
            pw = 1
            for j in range(1, min(n, len(a) - 1) + 1):
                if a[j]:
                    acc += a[j] * pw * B[n - j]
                pw *= c0
            # pw bookkeeping: term uses c0^(j-1)
            B.append(-acc)
        # b_n = B_n / c0^(n+1); common denominator c0^L
        nums = [B[n] * c0 ** (L - 1 - n) for n in range(L)]
        den = c0 ** L
        # multiply by self._den (inverse of a/den is den/a)
        nums = [x * self._den for x in nums]
        return QSeries._raw(-v, nums, den, self.trunc - 2 * v)

    def __truediv__(self, other):
        if isinstance(other, QSeries):
            return self * other.invert()
        return self.scale(1 / Fraction(other))

    def __rtruediv__(self, other):
        return self.invert().scale(other)

    def __pow__(self, e: int) -> "QSeries":
        if not isinstance(e, int):
            raise TypeError("only integer powers are supported")
        if e < 0:
            return self.invert() ** (-e)
        result = QSeries.one(self.trunc)
        base = self
        first = True
        while e:
            if e & 1:
                result = base if first else result * base
                first = False
            e >>= 1
            if e:
                base = base * base
        return result

    # -- constructors ----------------------------------------------------
    @classmethod
    def constant(cls, c, N: int) -> "QSeries":
        return cls(0, [Fraction(c)], N) if N >= 0 else cls._raw(N + 1, [], 1, N)

    @classmethod
    def one(cls, N: int) -> "QSeries":
        return cls.constant(1, N)

    @classmethod
    def monomial(cls, n: int, c, N: int) -> "QSeries":
        return cls(n, [Fraction(c)], N)

    # -- formatting / serialization -------------------------------------
    def to_str(self, max_terms: int | None = None) -> str:
        parts = []
        for n, c in self.items():
            if max_terms is not None and len(parts) >= max_terms:
                break
            parts.append((n, c))
        if not parts:
            return f"O(q^{self.trunc + 1})"
        out = []
        for idx, (n, c) in enumerate(parts):
            neg = c < 0
            mag = -c if neg else c
            if n == 0:
                body = _fmt_frac(mag)
            else:
                qpart = "q" if n == 1 else f"q^{n}"
                body = qpart if mag == 1 else f"{_fmt_frac(mag)}*{qpart}"
            if idx == 0:
                out.append(("-" if neg else "") + body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)

    def to_json(self) -> dict:
        return {
            "n_min": self.n_min,
            "coeffs": [[str(c.numerator), str(c.denominator)] for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, data) -> "QSeries":
        if isinstance(data, str):
            data = json.loads(data)
        coeffs = [Fraction(int(p), int(q)) for p, q in data["coeffs"]]
        return cls(int(data["n_min"]), coeffs)


def _fmt_frac(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class ScalarPi:
    """Exact scalar ``r * pi^a * i^b`` with rational ``r``."""

    __slots__ = ("r", "a", "b")

    def __init__(self, r=1, a: int = 0, b: int = 0):
        self.r = Fraction(r)
        self.a = int(a)
        self.b = int(b) % 4
        if self.r == 0:
            self.a = 0
            self.b = 0

    def __mul__(self, other):
        if isinstance(other, ScalarPi):
            return ScalarPi(self.r * other.r, self.a + other.a, self.b + other.b)
        return ScalarPi(self.r * Fraction(other), self.a, self.b)

    __rmul__ = __mul__

    def inverse(self) -> "ScalarPi":
        if self.r == 0:
            raise ZeroDivisionError("ScalarPi zero")
        # 1/i^b = i^(-b)
        return ScalarPi(1 / self.r, -self.a, -self.b)

    def __truediv__(self, other):
        if not isinstance(other, ScalarPi):
            other = ScalarPi(other)
        return self * other.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return ScalarPi(self.r ** e, self.a * e, self.b * e)

    def __eq__(self, other):
        if not isinstance(other, ScalarPi):
            other = ScalarPi(other)
        return (self.r, self.a, self.b) == (other.r, other.a, other.b)

    def __hash__(self):
        return hash((self.r, self.a, self.b))

    def __repr__(self):
        return f"ScalarPi({self.r}, pi^{self.a}, i^{self.b})"

    def is_real_rational(self) -> bool:
        return self.a == 0 and self.b in (0, 2)

    def to_complex(self):
        """Value as an mpmath number at the current working precision."""
        val = mpmath.mpf(self.r.numerator) / self.r.denominator
        if self.a:
            val *= mp.pi ** self.a
        return val * (1, 1j, -1, -1j)[self.b]

    @classmethod
    def two_pi_i(cls) -> "ScalarPi":
        return cls(2, 1, 1)


# ---------------------------------------------------------------------------
# Eisenstein series

@lru_cache(maxsize=None)
def bernoulli(k: int) -> Fraction:
    """Bernoulli number B_k (B_1 = -1/2 convention)."""
    A = [Fraction(0)] * (k + 1)
    for m in range(k + 1):
        A[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            A[j - 1] = j * (A[j - 1] - A[j])
    b = A[0]
    return -b if k == 1 else b


@lru_cache(maxsize=64)
def _sigma_table(power: int, N: int) -> tuple[int, ...]:
    sig = [0] * (N + 1)
    for d in range(1, N + 1):
        dp = d ** power
        for m in range(d, N + 1, d):
            sig[m] += dp
    return tuple(sig)


@lru_cache(maxsize=256)
def eisenstein(k: int, N: int) -> QSeries:
    """E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n, exact to q^N."""
    if k < 2 or k % 2:
        raise InvalidWeightError(f"Eisenstein series needs even weight >= 2, got {k}")
    if N < 0:
        raise ValueError("truncation order must be >= 0")
    factor = -Fraction(2 * k) / bernoulli(k)
    sig = _sigma_table(k - 1, N)
    return QSeries(0, [Fraction(1)] + [factor * sig[n] for n in range(1, N + 1)], N)


@lru_cache(maxsize=64)
def delta_series(N: int) -> QSeries:
    """Discriminant (E4^3 - E6^2)/1728 to q^N."""
    if N < 1:
        raise ValueError("delta_series needs N >= 1")
    e4 = eisenstein(4, N)
    e6 = eisenstein(6, N)
    return ((e4 * e4 * e4) - (e6 * e6)).scale(Fraction(1, 1728))


def d_operator(f: QSeries) -> QSeries:
    """D = q d/dq acting termwise."""
    nums = [(f.n_min + i) * x for i, x in enumerate(f._nums)]
    return QSeries._raw(f.n_min, nums, f._den, f.trunc)


# ---------------------------------------------------------------------------
# numerics

def evaluate(f: QSeries, tau, prec: int = 256, floor: float = 0.5):
    """Evaluate a truncated expansion at ``tau``.

    Returns ``(value, err)`` where ``err`` bounds the neglected tail assuming
    the coefficient growth seen in the upper half of the stored range
    continues geometrically.
    """
    with mp.workprec(prec + 20):
        tau = mpmath.mpc(tau)
        if tau.imag < floor:
            raise PrecisionError(f"Im(tau)={float(tau.imag):.4g} below evaluation floor {floor}")
        q = mpmath.exp(2j * mp.pi * tau)
        aq = abs(q)
        total = mpmath.mpc(0)
        for n, c in f.items():
            total += (mpmath.mpf(c.numerator) / c.denominator) * q ** n
        # growth rate of |a(n)| from the tail half of the stored coefficients
        rate = mpmath.mpf(0)
        items = [(n, abs(c)) for n, c in f.items() if n > 0]
        for n, c in items[len(items) // 2:]:
            rate = max(rate, mpmath.log(mpmath.mpf(c.numerator) / c.denominator) / n)
        ratio = mpmath.exp(rate) * aq
        N = f.trunc
        if ratio >= 1:
            err = mpmath.inf
        else:
            err = mpmath.exp(rate * (N + 1)) * aq ** (N + 1) / (1 - ratio) * (N + 2) ** 12
        return +total, err


def _lambert_multi(ks, q, eps):
    """The Lambert sums for several k sharing the q^n / (1 - q^n) factors."""
    totals = [mpmath.mpc(0) for _ in ks]
    kmax = max(ks)
    qn = mpmath.mpc(1)
    n = 0
    aq = abs(q)
    while True:
        n += 1
        qn *= q
        x = qn / (1 - qn)
        nn = mpmath.mpf(n)
        big = mpmath.mpf(0)
        for i, k in enumerate(ks):
            term = nn ** (k - 1) * x
            totals[i] += term
            big = max(big, abs(term))
        if big < eps:
            # remaining terms are dominated by a geometric series with ratio r
            r = (mpmath.mpf(n + 2) / (n + 1)) ** (kmax - 1) * aq
            if r < 1:
                bound = mpmath.mpf(n + 1) ** (kmax - 1) * aq ** (n + 1) / (1 - aq) / (1 - r)
                if bound < eps:
                    return totals


def eisenstein_values(tau, prec: int = 256, floor: float = 0.01):
    """Numerical (E2, E4, E6) at tau by their Lambert series."""
    with mp.workprec(prec + 30):
        tau = mpmath.mpc(tau)
        if tau.imag < floor:
            raise PrecisionError(f"Im(tau)={float(tau.imag):.4g} below evaluation floor {floor}")
        q = mpmath.exp(2j * mp.pi * tau)
        eps = mpmath.mpf(2) ** (-(prec + 24))
        l2, l4, l6 = _lambert_multi((2, 4, 6), q, eps)
        e2 = 1 - 24 * l2
        e4 = 1 + 240 * l4
        e6 = 1 - 504 * l6
    return +e2, +e4, +e6
